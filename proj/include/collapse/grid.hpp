#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace collapse {

inline constexpr double pi = 3.14159265358979323846;

/// Periodic square grid on [-L, L)^2 with n nodes per axis (power of two).
/// Nodes x_j = -L + j h, h = 2L/n; wavenumbers are integer multiples of
/// pi/L in standard FFT ordering.
struct Grid2D {
  double half_width = 0.0;  // L
  int n = 0;                // nodes per axis
  double spacing = 0.0;     // h = 2L/n

  double coord(int j) const { return -half_width + j * spacing; }
  int freq(int j) const { return j <= n / 2 ? j : j - n; }
  double wavenumber(int j) const { return pi / half_width * freq(j); }
  long size() const { return static_cast<long>(n) * n; }
  bool operator==(const Grid2D&) const = default;
};

inline Grid2D build_grid(double half_width, int n) {
  if (!(half_width > 0.0))
    throw std::invalid_argument("build_grid: half width must be positive");
  if (n < 64 || (n & (n - 1)) != 0)
    throw std::invalid_argument("build_grid: n must be a power of two >= 64");
  return Grid2D{half_width, n, 2.0 * half_width / n};
}

/// Real scalar field sampled at all grid nodes, row-major values[ix*n + iy].
struct Field2D {
  Grid2D grid;
  std::vector<double> values;

  Field2D() = default;
  explicit Field2D(const Grid2D& g) : grid(g), values(g.size(), 0.0) {}

  double& at(int ix, int iy) { return values[static_cast<size_t>(ix) * grid.n + iy]; }
  double at(int ix, int iy) const { return values[static_cast<size_t>(ix) * grid.n + iy]; }
};

/// Interaction kernel profile: normalized Gaussian of width s, optionally in
/// mean-field scaled mode where the effective width shrinks to N^{-beta} s.
struct Kernel {
  enum class Mode { Base, Scaled };
  double width = 1.0;  // s
  Mode mode = Mode::Base;
  double beta = 0.0;
  double particle_count = 0.0;  // N, scaled mode only

  double effective_width() const {
    if (mode == Mode::Base) return width;
    return width * std::pow(particle_count, -beta);
  }
};

inline double mass(const Field2D& u) {
  double s = 0.0;
  for (double v : u.values) s += v * v;
  return s * u.grid.spacing * u.grid.spacing;
}

inline double inner(const Field2D& u, const Field2D& v) {
  double s = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i) s += u.values[i] * v.values[i];
  return s * u.grid.spacing * u.grid.spacing;
}

inline Field2D normalize(Field2D u) {
  const double m = mass(u);
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::runtime_error("normalize: cannot normalize zero field");
  const double scale = 1.0 / std::sqrt(m);
  for (double& v : u.values) v *= scale;
  return u;
}

inline double l2_distance(const Field2D& u, const Field2D& v) {
  if (!(u.grid == v.grid))
    throw std::invalid_argument("l2_distance: grids differ");
  double s = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i) {
    const double d = u.values[i] - v.values[i];
    s += d * d;
  }
  return std::sqrt(s) * u.grid.spacing;
}

/// FFTW plan pair plus aligned buffers for one grid size. Plan creation is
/// serialized globally; execution through distinct workspaces is reentrant,
/// so concurrent flows each hold their own workspace.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const Grid2D& g) : grid_(g), n_(g.n) {
    nc_ = static_cast<long>(n_) * (n_ / 2 + 1);
    {
      std::lock_guard<std::mutex> lock(plan_mutex());
      real_ = fftw_alloc_real(static_cast<size_t>(n_) * n_);
      cplx_ = fftw_alloc_complex(static_cast<size_t>(nc_));
      fwd_ = fftw_plan_dft_r2c_2d(n_, n_, real_, cplx_, FFTW_ESTIMATE);
      inv_ = fftw_plan_dft_c2r_2d(n_, n_, cplx_, real_, FFTW_ESTIMATE);
    }
    if (fwd_ == nullptr || inv_ == nullptr)
      throw std::runtime_error("SpectralWorkspace: fftw plan creation failed");
    ksq_.resize(nc_);
    colw_.resize(nc_);
    const int ncol = n_ / 2 + 1;
    for (int ix = 0; ix < n_; ++ix)
      for (int c = 0; c < ncol; ++c) {
        ksq_[static_cast<size_t>(ix) * ncol + c] = k_squared(ix, c);
        colw_[static_cast<size_t>(ix) * ncol + c] = column_weight(c);
      }
  }

  ~SpectralWorkspace() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(real_);
    fftw_free(cplx_);
  }

  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const Grid2D& grid() const { return grid_; }
  long spectral_size() const { return nc_; }

  void forward(std::span<const double> in, std::complex<double>* out) {
    std::memcpy(real_, in.data(), sizeof(double) * in.size());
    fftw_execute(fwd_);
    std::memcpy(out, cplx_, sizeof(fftw_complex) * nc_);
  }

  /// Inverse transform including the 1/n^2 normalization. Clobbers `in`'s copy
  /// in the internal buffer only.
  void inverse(const std::complex<double>* in, std::span<double> out) {
    std::memcpy(cplx_, in, sizeof(fftw_complex) * nc_);
    fftw_execute(inv_);
    const double scale = 1.0 / (static_cast<double>(n_) * n_);
    for (long i = 0; i < static_cast<long>(out.size()); ++i) out[i] = real_[i] * scale;
  }

  /// Wavenumber magnitude squared for half-spectrum entry (ix, c).
  double k_squared(int ix, int c) const {
    const double kx = grid_.wavenumber(ix);
    const double ky = pi / grid_.half_width * c;
    return kx * kx + ky * ky;
  }

  /// Hermitian multiplicity of half-spectrum column c.
  double column_weight(int c) const { return (c == 0 || c == n_ / 2) ? 1.0 : 2.0; }

  /// Flat tables over the half-spectrum, hot-loop friendly.
  const std::vector<double>& ksq() const { return ksq_; }
  const std::vector<double>& colw() const { return colw_; }

  static std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
  }

 private:
  Grid2D grid_;
  int n_;
  long nc_;
  double* real_ = nullptr;
  fftw_complex* cplx_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
  std::vector<double> ksq_, colw_;
};

/// Spectral evaluation of the Dirichlet energy; exact for band-limited fields.
inline double kinetic_energy(const Field2D& u, SpectralWorkspace& ws) {
  const int n = u.grid.n;
  std::vector<std::complex<double>> hat(ws.spectral_size());
  ws.forward(u.values, hat.data());
  double acc = 0.0;
  for (long i = 0; i < ws.spectral_size(); ++i)
    acc += ws.colw()[i] * ws.ksq()[i] * std::norm(hat[i]);
  const double h = u.grid.spacing;
  return acc * h * h / (static_cast<double>(n) * n);
}

inline double kinetic_energy(const Field2D& u) {
  SpectralWorkspace ws(u.grid);
  return kinetic_energy(u, ws);
}

/// Kernel sampled at signed node offsets (index 0 holds the origin) and
/// renormalized to unit discrete mass, so convolution preserves total mass.
inline Field2D sample_kernel(const Grid2D& g, double width) {
  Field2D w(g);
  const double inv2s2 = 1.0 / (2.0 * width * width);
  double sum = 0.0;
  for (int ix = 0; ix < g.n; ++ix) {
    const double dx = g.freq(ix) * g.spacing;
    for (int iy = 0; iy < g.n; ++iy) {
      const double dy = g.freq(iy) * g.spacing;
      const double v = std::exp(-(dx * dx + dy * dy) * inv2s2);
      w.at(ix, iy) = v;
      sum += v;
    }
  }
  const double scale = 1.0 / (sum * g.spacing * g.spacing);
  for (double& v : w.values) v *= scale;
  return w;
}

/// Half-spectrum transform of a sampled unit-mass kernel, premultiplied by h^2
/// so that a pointwise product with rho-hat followed by `inverse` yields the
/// periodic convolution (w * rho).
inline std::vector<std::complex<double>> kernel_spectrum(const Grid2D& g, double width,
                                                         SpectralWorkspace& ws) {
  const Field2D w = sample_kernel(g, width);
  std::vector<std::complex<double>> hat(ws.spectral_size());
  ws.forward(w.values, hat.data());
  const double h2 = g.spacing * g.spacing;
  for (auto& v : hat) v *= h2;
  return hat;
}

inline Field2D convolve_density(const Field2D& rho, const Kernel& kernel,
                                SpectralWorkspace& ws) {
  const Grid2D& g = rho.grid;
  const double s = kernel.effective_width();
  if (kernel.mode == Kernel::Mode::Scaled && s < 2.0 * g.spacing)
    throw std::runtime_error("convolve_density: kernel narrower than grid");
  auto what = kernel_spectrum(g, s, ws);
  std::vector<std::complex<double>> rhat(ws.spectral_size());
  ws.forward(rho.values, rhat.data());
  for (long i = 0; i < ws.spectral_size(); ++i) rhat[i] *= what[i];
  Field2D out(g);
  ws.inverse(rhat.data(), out.values);
  return out;
}

inline Field2D convolve_density(const Field2D& rho, const Kernel& kernel) {
  SpectralWorkspace ws(rho.grid);
  return convolve_density(rho, kernel, ws);
}

/// Pointwise |x - z|^p on the box, no periodization; fields are expected to
/// vanish near the boundary so the wrap inconsistency stays below truncation.
inline Field2D trap_potential(const Grid2D& g, double p, std::array<double, 2> z) {
  if (!(p > 0.0)) throw std::invalid_argument("trap_potential: exponent must be positive");
  if (std::abs(z[0]) > g.half_width || std::abs(z[1]) > g.half_width)
    throw std::invalid_argument("trap_potential: center outside the domain");
  Field2D v(g);
  for (int ix = 0; ix < g.n; ++ix) {
    const double dx = g.coord(ix) - z[0];
    for (int iy = 0; iy < g.n; ++iy) {
      const double dy = g.coord(iy) - z[1];
      const double r2 = dx * dx + dy * dy;
      v.at(ix, iy) = (p == 2.0) ? r2 : std::pow(r2, 0.5 * p);
    }
  }
  return v;
}

/// Bilinear sample of a field at an arbitrary point; zero outside the box.
/// Used for cross-frame resampling and for radial ray probes.
inline double sample_bilinear(const Field2D& f, double x, double y) {
  const Grid2D& g = f.grid;
  const double fx = (x + g.half_width) / g.spacing;
  const double fy = (y + g.half_width) / g.spacing;
  if (fx < 0.0 || fy < 0.0 || fx > g.n - 1 || fy > g.n - 1) return 0.0;
  const int ix = std::min(static_cast<int>(fx), g.n - 2);
  const int iy = std::min(static_cast<int>(fy), g.n - 2);
  const double tx = fx - ix;
  const double ty = fy - iy;
  return (1 - tx) * (1 - ty) * f.at(ix, iy) + tx * (1 - ty) * f.at(ix + 1, iy) +
         (1 - tx) * ty * f.at(ix, iy + 1) + tx * ty * f.at(ix + 1, iy + 1);
}

}  // namespace collapse
