#pragma once

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "collapse/flow.hpp"
#include "collapse/functionals.hpp"
#include "collapse/grid.hpp"

namespace collapse {

/// Sampled positions of the two particle groups used by the Onsager-variant
/// check; the second group plays the role of the classical background points.
struct ParticleConfig {
  std::vector<std::array<double, 2>> x_points;
  std::vector<std::array<double, 2>> y_points;
};

/// Smooth positive test field: 3-6 random Gaussian bumps (signed amplitudes,
/// clamped at zero), localized well inside the box.
inline Field2D random_smooth_field(const Grid2D& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nb(3, 6);
  std::uniform_real_distribution<double> width(0.3, 1.5);
  std::uniform_real_distribution<double> center(-g.half_width / 3.0, g.half_width / 3.0);
  std::uniform_real_distribution<double> amp(-0.3, 1.0);
  for (int attempt = 0; attempt < 16; ++attempt) {
    struct Bump {
      double x, y, w, a;
    };
    std::vector<Bump> bumps;
    const int k = nb(rng);
    for (int b = 0; b < k; ++b) bumps.push_back({center(rng), center(rng), width(rng), amp(rng)});
    Field2D f(g);
    for (int ix = 0; ix < g.n; ++ix)
      for (int iy = 0; iy < g.n; ++iy) {
        double v = 0.0;
        for (const Bump& b : bumps) {
          const double dx = g.coord(ix) - b.x, dy = g.coord(iy) - b.y;
          v += b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * b.w * b.w));
        }
        f.at(ix, iy) = std::max(v, 0.0);
      }
    if (mass(f) > 1e-8) return f;
  }
  throw std::runtime_error("random_smooth_field: degenerate draw");
}

/// Slack of the sharp interpolation inequality
///   ||grad u||^2 ||u||^2 - (a*/2) ||u||_4^4  >=  -1e-6 * ||grad u||^2 ||u||^2.
inline double check_gn(const Field2D& u, double a_star, SpectralWorkspace& ws) {
  const double kin = kinetic_energy(u, ws);
  const double m = mass(u);
  if (!(m > 0.0)) throw std::invalid_argument("check_gn: field must be nonzero");
  double p4 = 0.0;
  for (double v : u.values) p4 += v * v * v * v;
  p4 *= u.grid.spacing * u.grid.spacing;
  return kin * m - 0.5 * a_star * p4;
}

inline double check_gn(const Field2D& u, double a_star) {
  SpectralWorkspace ws(u.grid);
  return check_gn(u, a_star, ws);
}

/// Slack of the Cauchy-Schwarz interaction bound
///   (kappa/2) int u_i^4 + (1/2 kappa) int u_j^4 - int u_i^2 (w * u_j^2),
/// exact at the discrete level for any nonnegative unit-mass kernel.
inline double check_interaction_bound(const Field2D& ui, const Field2D& uj,
                                      const Kernel& kernel, double kappa,
                                      SpectralWorkspace& ws) {
  if (!(kappa > 0.0)) throw std::invalid_argument("check_interaction_bound: kappa > 0");
  const double h2 = ui.grid.spacing * ui.grid.spacing;
  auto rho_i = detail::density(ui);
  Field2D rho_j(uj.grid);
  rho_j.values = detail::density(uj);
  const Field2D conv = convolve_density(rho_j, kernel, ws);
  double qi = 0.0, qj = 0.0, cross = 0.0;
  for (size_t k = 0; k < rho_i.size(); ++k) {
    qi += rho_i[k] * rho_i[k];
    qj += rho_j.values[k] * rho_j.values[k];
    cross += rho_i[k] * conv.values[k];
  }
  return h2 * (0.5 * kappa * qi + 0.5 / kappa * qj - cross);
}

inline double check_interaction_bound(const Field2D& ui, const Field2D& uj,
                                      const Kernel& kernel, double kappa) {
  SpectralWorkspace ws(ui.grid);
  return check_interaction_bound(ui, uj, kernel, kappa, ws);
}

struct OnsagerResult {
  double slack1 = 0, slack2 = 0, slack3 = 0;
  double scale1 = 0, scale2 = 0, scale3 = 0;
};

namespace detail {

// Quadratic form  h^4 sum_jk f_j g_k V(z_j - z_k)  for a separable Gaussian V,
// via two per-axis matrix products (the double grid sum is not periodized).
class GaussianQuadForm {
 public:
  GaussianQuadForm(const Grid2D& g, double sigma, double amplitude)
      : g_(g), n_(g.n), amp_(amplitude) {
    axis_.resize(static_cast<size_t>(n_) * n_);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        const double d = g.coord(j) - g.coord(k);
        axis_[static_cast<size_t>(j) * n_ + k] = std::exp(-d * d * inv);
      }
  }

  double operator()(const std::vector<double>& f, const std::vector<double>& gg) const {
    // B = G f G^T, then sum g . B
    std::vector<double> tmp(static_cast<size_t>(n_) * n_, 0.0);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        const double w = axis_[static_cast<size_t>(j) * n_ + k];
        const double* frow = &f[static_cast<size_t>(k) * n_];
        double* trow = &tmp[static_cast<size_t>(j) * n_];
        for (int c = 0; c < n_; ++c) trow[c] += w * frow[c];
      }
    // acc = sum_{j,k} gg[j][k] * (tmp G^T)[j][k]
    double acc = 0.0;
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        const double* trow = &tmp[static_cast<size_t>(j) * n_];
        const double* grow = &axis_[static_cast<size_t>(k) * n_];
        double s = 0.0;
        for (int c = 0; c < n_; ++c) s += trow[c] * grow[c];
        acc += gg[static_cast<size_t>(j) * n_ + k] * s;
      }
    const double h2 = g_.spacing * g_.spacing;
    return acc * amp_ * h2 * h2;
  }

  /// (f * V)(p) = h^2 sum_j f_j V(p - z_j), separable per evaluation point.
  double convolve_at(const std::vector<double>& f, std::array<double, 2> p,
                     double sigma) const {
    const double inv = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> gx(n_), gy(n_);
    for (int j = 0; j < n_; ++j) {
      const double dx = p[0] - g_.coord(j);
      const double dy = p[1] - g_.coord(j);
      gx[j] = std::exp(-dx * dx * inv);
      gy[j] = std::exp(-dy * dy * inv);
    }
    double acc = 0.0;
    for (int j = 0; j < n_; ++j) {
      const double* frow = &f[static_cast<size_t>(j) * n_];
      double row = 0.0;
      for (int k = 0; k < n_; ++k) row += frow[k] * gy[k];
      acc += gx[j] * row;
    }
    return acc * amp_ * g_.spacing * g_.spacing;
  }

 private:
  Grid2D g_;
  int n_;
  double amp_;
  std::vector<double> axis_;
};

}  // namespace detail

/// Evaluates both sides of the three pointwise lower bounds that replace
/// pairwise interactions by one-body background terms, for a Gaussian kernel
/// (positive Fourier transform) and atomic discretizations of chi and zeta.
/// All three slacks must be nonnegative up to round-off.
inline OnsagerResult check_onsager(const ParticleConfig& cfg, double kernel_width,
                                   double kernel_amplitude, const Field2D& chi,
                                   const Field2D& zeta) {
  const size_t n1 = cfg.x_points.size(), n2 = cfg.y_points.size();
  if (n1 < 2 || n2 < 2)
    throw std::invalid_argument("check_onsager: need at least two particles per group");
  const Grid2D& g = chi.grid;
  for (const auto& pts : {cfg.x_points, cfg.y_points})
    for (const auto& p : pts)
      if (std::abs(p[0]) > g.half_width || std::abs(p[1]) > g.half_width)
        throw std::invalid_argument("check_onsager: position outside the grid domain");

  const double A = kernel_amplitude;
  const double inv = 1.0 / (2.0 * kernel_width * kernel_width);
  auto V = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1];
    return A * std::exp(-(dx * dx + dy * dy) * inv);
  };
  const double v0 = A;

  detail::GaussianQuadForm form(g, kernel_width, A);
  const double qf_cc = form(chi.values, chi.values);
  const double qf_zz = form(zeta.values, zeta.values);
  const double qf_cz = form(chi.values, zeta.values);

  auto pair_sum = [&](const std::vector<std::array<double, 2>>& pts) {
    double s = 0.0;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) s += V(pts[i], pts[j]);
    return s;
  };
  auto cross_sum = [&]() {
    double s = 0.0;
    for (const auto& x : cfg.x_points)
      for (const auto& y : cfg.y_points) s += V(x, y);
    return s;
  };
  auto conv_sum = [&](const std::vector<double>& f,
                      const std::vector<std::array<double, 2>>& pts) {
    double s = 0.0;
    for (const auto& p : pts) s += form.convolve_at(f, p, kernel_width);
    return s;
  };

  OnsagerResult r;
  {
    const double lhs = pair_sum(cfg.x_points);
    const double t1 = -0.5 * qf_cc, t2 = conv_sum(chi.values, cfg.x_points),
                 t3 = -0.5 * n1 * v0;
    r.slack1 = lhs - (t1 + t2 + t3);
    r.scale1 = std::abs(lhs) + std::abs(t1) + std::abs(t2) + std::abs(t3);
  }
  {
    const double lhs = pair_sum(cfg.y_points);
    const double t1 = -0.5 * qf_zz, t2 = conv_sum(zeta.values, cfg.y_points),
                 t3 = -0.5 * n2 * v0;
    r.slack2 = lhs - (t1 + t2 + t3);
    r.scale2 = std::abs(lhs) + std::abs(t1) + std::abs(t2) + std::abs(t3);
  }
  {
    std::vector<double> cz(chi.values.size());
    for (size_t i = 0; i < cz.size(); ++i) cz[i] = chi.values[i] + zeta.values[i];
    const double lhs = cross_sum();
    const double t1 = -pair_sum(cfg.x_points), t2 = -pair_sum(cfg.y_points);
    const double t3 = conv_sum(cz, cfg.x_points), t4 = conv_sum(cz, cfg.y_points);
    const double t5 = -0.5 * (qf_cc + qf_zz), t6 = -qf_cz;
    const double t7 = -0.5 * static_cast<double>(n1 + n2) * v0;
    r.slack3 = lhs - (t1 + t2 + t3 + t4 + t5 + t6 + t7);
    r.scale3 = std::abs(lhs) + std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4) +
               std::abs(t5) + std::abs(t6) + std::abs(t7);
  }
  return r;
}

/// Minimizes the interpolation quotient 2 ||grad u||^2 ||u||^2 / ||u||_4^4 by
/// preconditioned projected descent with traps off; an estimate of the sharp
/// constant that is independent of the radial shooting route.
inline double direct_gn_constant(const Grid2D& grid, const FlowSettings& fs,
                                 const Field2D& initial, SpectralWorkspace& ws) {
  Field2D u = normalize(initial);
  const int n = grid.n, ncol = n / 2 + 1;
  std::vector<std::complex<double>> hat(ws.spectral_size()), fhat(ws.spectral_size());
  Field2D fterm(grid);
  double dt = fs.dt;
  const double dt_cap = 10.0 * fs.dt;
  double j_prev = 0.0;
  std::vector<double> window;
  long step = 0;
  double j_now = 0.0;
  Field2D prev = u;
  for (; step < fs.max_steps; ++step) {
    const double kin = kinetic_energy(u, ws);
    double p4 = 0.0;
    for (double v : u.values) p4 += std::pow(v, 4);
    p4 *= grid.spacing * grid.spacing;
    j_now = 2.0 * kin / p4;  // mass is 1 by construction
    if (step > 0 && (j_now > j_prev + 1e-13 * j_prev)) {
      u = prev;
      j_now = j_prev;
      dt = std::max(0.5 * dt, 1e-5);
    } else {
      window.push_back(j_now);
      if (window.size() > 50) {
        const double drop = (window[window.size() - 51] - j_now) / j_now;
        if (drop < 1e-12) break;
      }
      prev = u;
      j_prev = j_now;
      dt = std::min(dt * 1.05, dt_cap);
    }
    // flow  u_t = lap u - K u + (2K/P) u^3, kinetic part implicit
    const double k_over_p = 2.0 * kin / p4;
    for (long i = 0; i < grid.size(); ++i) {
      const double v = u.values[i];
      fterm.values[i] = kin * v - k_over_p * v * v * v;
    }
    ws.forward(u.values, hat.data());
    ws.forward(fterm.values, fhat.data());
    for (int ix = 0; ix < n; ++ix)
      for (int c = 0; c < ncol; ++c) {
        const size_t idx = static_cast<size_t>(ix) * ncol + c;
        hat[idx] = (hat[idx] - dt * fhat[idx]) / (1.0 + dt * ws.k_squared(ix, c));
      }
    ws.inverse(hat.data(), u.values);
    for (double& v : u.values) v = std::max(v, 0.0);
    u = normalize(std::move(u));
  }
  return j_now;
}

inline double direct_gn_constant(const Grid2D& grid, const FlowSettings& fs,
                                 const Field2D& initial) {
  SpectralWorkspace ws(grid);
  return direct_gn_constant(grid, fs, initial, ws);
}

inline double direct_gn_constant(const Grid2D& grid, const FlowSettings& fs) {
  Field2D init(grid);
  for (int ix = 0; ix < grid.n; ++ix)
    for (int iy = 0; iy < grid.n; ++iy) {
      const double x = grid.coord(ix), y = grid.coord(iy);
      init.at(ix, iy) = std::exp(-(x * x + y * y) / 2.0);
    }
  return direct_gn_constant(grid, fs, init);
}

}  // namespace collapse
