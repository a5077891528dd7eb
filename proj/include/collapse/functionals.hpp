#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "collapse/grid.hpp"

namespace collapse {

enum class InteractionMode { NLS, Hartree, ModifiedHartree };

struct Trap {
  double p = 2.0;
  std::array<double, 2> z{0.0, 0.0};
};

/// Physical constants of the two-component model. In Hartree modes the
/// kernels are N^{2 beta} w(N^beta x) with base Gaussian widths s1, s2, s12.
struct ModelParams {
  double c1 = 0.5, c2 = 0.5;
  double a1 = 0.0, a2 = 0.0, a12 = 0.0;
  std::optional<Trap> trap1 = Trap{};
  std::optional<Trap> trap2 = Trap{};
  InteractionMode mode = InteractionMode::NLS;
  double beta = 0.2;
  double particle_count = 0.0;
  double s1 = 1.0, s2 = 1.0, s12 = 1.0;

  double a_n() const { return c1 * a1 + c2 * a2 + 2.0 * c1 * c2 * a12; }
};

struct TwoComponentState {
  Field2D u1, u2;
};

/// Per-component pieces without the mass-ratio weights; the total applies
/// them:  total = c1 (kin1 + trap1 - intra1) + c2 (kin2 + trap2 - intra2) - inter.
struct EnergyBreakdown {
  double kin1 = 0, trap1 = 0, intra1 = 0;
  double kin2 = 0, trap2 = 0, intra2 = 0;
  double inter = 0, total = 0;
};

namespace detail {

struct ComponentModel {
  double kin_weight = 0.5;  // multiplies the Dirichlet integral in the scalar energy
  bool has_trap = false;
  Field2D trap;             // weighted potential, coefficient folded in
  double quartic_coef = 0;  // weighted: c_i a_i / 2 in the plain model
  bool intra_convolved = false;
  std::vector<std::complex<double>> intra_kernel_hat;
};

struct CrossModel {
  enum class Kind { None, Local, Convolved, Mapped };
  Kind kind = Kind::None;
  double coef = 0.0;  // weighted: energy contains  -coef * int rho1 * X(rho2)
  std::vector<std::complex<double>> kernel_hat;
  // Mapped: rho2 is resampled at  y -> map_scale * y + map_offset  (frame of
  // component 1 into the frame of component 2), zero outside the box.
  double map_scale = 1.0;
  std::array<double, 2> map_offset{0.0, 0.0};
};

struct DiscreteModel {
  Grid2D grid;
  std::array<ComponentModel, 2> comp;
  CrossModel cross;
};

struct EnergyPieces {
  std::array<double, 2> kin{0, 0}, trap{0, 0}, intra{0, 0};
  double inter = 0.0;
  double total() const {
    return kin[0] + trap[0] - intra[0] + kin[1] + trap[1] - intra[1] - inter;
  }
};

inline std::vector<double> density(const Field2D& u) {
  std::vector<double> rho(u.values.size());
  for (size_t i = 0; i < rho.size(); ++i) rho[i] = u.values[i] * u.values[i];
  return rho;
}

inline Field2D convolve_with(const std::vector<std::complex<double>>& kernel_hat,
                             std::span<const double> rho, const Grid2D& g,
                             SpectralWorkspace& ws) {
  std::vector<std::complex<double>> hat(ws.spectral_size());
  ws.forward(rho, hat.data());
  for (long i = 0; i < ws.spectral_size(); ++i) hat[i] *= kernel_hat[i];
  Field2D out(g);
  ws.inverse(hat.data(), out.values);
  return out;
}

inline double spectral_dirichlet(const std::vector<std::complex<double>>& hat,
                                 const Grid2D& g, const SpectralWorkspace& ws) {
  const int n = g.n, ncol = n / 2 + 1;
  double acc = 0.0;
  for (int ix = 0; ix < n; ++ix)
    for (int c = 0; c < ncol; ++c)
      acc += ws.column_weight(c) * ws.k_squared(ix, c) *
             std::norm(hat[static_cast<size_t>(ix) * ncol + c]);
  return acc * g.spacing * g.spacing / (static_cast<double>(n) * n);
}

/// Map-resample rho (values of the other component's density) onto this
/// frame, and the adjoint scatter used by the gradient.
inline std::vector<double> map_sample(const CrossModel& cm, const Field2D& rho_other,
                                      const Grid2D& g) {
  std::vector<double> out(g.size());
  for (int ix = 0; ix < g.n; ++ix) {
    const double x = cm.map_scale * g.coord(ix) + cm.map_offset[0];
    for (int iy = 0; iy < g.n; ++iy) {
      const double y = cm.map_scale * g.coord(iy) + cm.map_offset[1];
      out[static_cast<size_t>(ix) * g.n + iy] = sample_bilinear(rho_other, x, y);
    }
  }
  return out;
}

inline std::vector<double> map_scatter(const CrossModel& cm,
                                       std::span<const double> rho_self,
                                       const Grid2D& g) {
  std::vector<double> out(g.size(), 0.0);
  for (int ix = 0; ix < g.n; ++ix) {
    const double x = cm.map_scale * g.coord(ix) + cm.map_offset[0];
    const double fx = (x + g.half_width) / g.spacing;
    if (fx < 0.0 || fx > g.n - 1) continue;
    const int jx = std::min(static_cast<int>(fx), g.n - 2);
    const double tx = fx - jx;
    for (int iy = 0; iy < g.n; ++iy) {
      const double y = cm.map_scale * g.coord(iy) + cm.map_offset[1];
      const double fy = (y + g.half_width) / g.spacing;
      if (fy < 0.0 || fy > g.n - 1) continue;
      const int jy = std::min(static_cast<int>(fy), g.n - 2);
      const double ty = fy - jy;
      const double r = rho_self[static_cast<size_t>(ix) * g.n + iy];
      out[static_cast<size_t>(jx) * g.n + jy] += (1 - tx) * (1 - ty) * r;
      out[static_cast<size_t>(jx + 1) * g.n + jy] += tx * (1 - ty) * r;
      out[static_cast<size_t>(jx) * g.n + jy + 1] += (1 - tx) * ty * r;
      out[static_cast<size_t>(jx + 1) * g.n + jy + 1] += tx * ty * r;
    }
  }
  return out;
}

// The effective one-body field X_i multiplying u_i in the cross term:
// for component 0 this is X(rho2), for component 1 it is X*(rho1).
inline std::vector<double> cross_field(const DiscreteModel& m, int i,
                                       const Field2D& u_other, SpectralWorkspace& ws) {
  const auto& cm = m.cross;
  switch (cm.kind) {
    case CrossModel::Kind::None:
      return {};
    case CrossModel::Kind::Local:
      return density(u_other);
    case CrossModel::Kind::Convolved: {
      auto rho = density(u_other);
      return convolve_with(cm.kernel_hat, rho, m.grid, ws).values;
    }
    case CrossModel::Kind::Mapped: {
      Field2D rho_other(m.grid);
      rho_other.values = density(u_other);
      if (i == 0) return map_sample(cm, rho_other, m.grid);
      return map_scatter(cm, rho_other.values, m.grid);
    }
  }
  return {};
}

inline EnergyPieces energy_pieces(const DiscreteModel& m, const TwoComponentState& s,
                                  SpectralWorkspace& ws) {
  const Grid2D& g = m.grid;
  const double h2 = g.spacing * g.spacing;
  EnergyPieces out;
  const Field2D* u[2] = {&s.u1, &s.u2};
  std::vector<std::complex<double>> hat(ws.spectral_size());
  std::array<std::vector<double>, 2> rho;
  for (int i = 0; i < 2; ++i) {
    rho[i] = density(*u[i]);
    ws.forward(u[i]->values, hat.data());
    out.kin[i] = m.comp[i].kin_weight * spectral_dirichlet(hat, g, ws);
    if (m.comp[i].has_trap) {
      double acc = 0.0;
      for (size_t j = 0; j < rho[i].size(); ++j)
        acc += m.comp[i].trap.values[j] * rho[i][j];
      out.trap[i] = acc * h2;
    }
    double quart = 0.0;
    if (m.comp[i].intra_convolved) {
      const Field2D conv = convolve_with(m.comp[i].intra_kernel_hat, rho[i], g, ws);
      for (size_t j = 0; j < rho[i].size(); ++j) quart += rho[i][j] * conv.values[j];
    } else {
      for (double r : rho[i]) quart += r * r;
    }
    out.intra[i] = m.comp[i].quartic_coef * quart * h2;
  }
  if (m.cross.kind != CrossModel::Kind::None) {
    const auto x1 = cross_field(m, 0, *u[1], ws);
    double acc = 0.0;
    for (size_t j = 0; j < rho[0].size(); ++j) acc += rho[0][j] * x1[j];
    out.inter = m.cross.coef * acc * h2;
  }
  return out;
}

/// Exact field-metric gradient of the scalar model energy:
/// dE = h^2 sum g_i . du_i.
inline std::pair<Field2D, Field2D> model_gradient(const DiscreteModel& m,
                                                  const TwoComponentState& s,
                                                  SpectralWorkspace& ws) {
  const Grid2D& g = m.grid;
  const int n = g.n, ncol = n / 2 + 1;
  std::pair<Field2D, Field2D> grad{Field2D(g), Field2D(g)};
  const Field2D* u[2] = {&s.u1, &s.u2};
  Field2D* gv[2] = {&grad.first, &grad.second};
  std::vector<std::complex<double>> hat(ws.spectral_size());
  for (int i = 0; i < 2; ++i) {
    ws.forward(u[i]->values, hat.data());
    for (int ix = 0; ix < n; ++ix)
      for (int c = 0; c < ncol; ++c)
        hat[static_cast<size_t>(ix) * ncol + c] *= ws.k_squared(ix, c);
    ws.inverse(hat.data(), gv[i]->values);  // now holds -lap u_i
    const auto rho = density(*u[i]);
    std::vector<double> kconv;
    if (m.comp[i].intra_convolved)
      kconv = convolve_with(m.comp[i].intra_kernel_hat, rho, g, ws).values;
    std::vector<double> xf;
    if (m.cross.kind != CrossModel::Kind::None) xf = cross_field(m, i, *u[1 - i], ws);
    for (long j = 0; j < g.size(); ++j) {
      const double uj = u[i]->values[j];
      double v = 2.0 * m.comp[i].kin_weight * gv[i]->values[j];
      if (m.comp[i].has_trap) v += 2.0 * m.comp[i].trap.values[j] * uj;
      v -= 4.0 * m.comp[i].quartic_coef * (m.comp[i].intra_convolved ? kconv[j] * uj : uj * uj * uj);
      if (!xf.empty()) v -= 2.0 * m.cross.coef * xf[j] * uj;
      gv[i]->values[j] = v;
    }
  }
  return grad;
}

/// Norm of the gradient projected off the two mass constraints, in the
/// flow-velocity normalization (gradient / 2 kin_weight); this is the
/// stationarity measure the flow's stopping test uses.
inline double projected_residual(const DiscreteModel& m, const TwoComponentState& s,
                                 SpectralWorkspace& ws) {
  const auto [g1, g2] = model_gradient(m, s, ws);
  const Field2D* u[2] = {&s.u1, &s.u2};
  const Field2D* gr[2] = {&g1, &g2};
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double w = 2.0 * m.comp[i].kin_weight;
    const double mu = inner(*u[i], *gr[i]) / (w * mass(*u[i]));
    double acc = 0.0;
    for (size_t j = 0; j < u[i]->values.size(); ++j) {
      const double d = gr[i]->values[j] / w - mu * u[i]->values[j];
      acc += d * d;
    }
    worst = std::max(worst, std::sqrt(acc) * m.grid.spacing);
  }
  return worst;
}

inline void check_params(const ModelParams& mp) {
  if (!(mp.c1 > 0.0) || !(mp.c1 < 1.0) || std::abs(mp.c1 + mp.c2 - 1.0) > 1e-12)
    throw std::invalid_argument("ModelParams: need c1 in (0,1) and c1 + c2 = 1");
  if (mp.mode != InteractionMode::NLS && !(mp.particle_count > 0.0))
    throw std::invalid_argument("ModelParams: Hartree modes need a particle count");
}

inline DiscreteModel build_model(const ModelParams& mp, const Grid2D& g,
                                 SpectralWorkspace& ws) {
  check_params(mp);
  DiscreteModel m;
  m.grid = g;
  const double c[2] = {mp.c1, mp.c2};
  const double a[2] = {mp.a1, mp.a2};
  const double s[2] = {mp.s1, mp.s2};
  const std::optional<Trap> traps[2] = {mp.trap1, mp.trap2};
  const double nscale = mp.mode == InteractionMode::NLS
                            ? 1.0
                            : std::pow(mp.particle_count, -mp.beta);
  auto resolved = [&](double base_width) {
    const double w = base_width * nscale;
    if (w < 2.0 * g.spacing)
      throw std::runtime_error("build_model: kernel narrower than grid");
    return w;
  };
  for (int i = 0; i < 2; ++i) {
    auto& cm = m.comp[i];
    cm.kin_weight = c[i];
    cm.quartic_coef = 0.5 * c[i] * a[i];
    if (traps[i]) {
      cm.has_trap = true;
      cm.trap = trap_potential(g, traps[i]->p, traps[i]->z);
      for (double& v : cm.trap.values) v *= c[i];
    }
    if (mp.mode == InteractionMode::Hartree) {
      cm.intra_convolved = true;
      cm.intra_kernel_hat = kernel_spectrum(g, resolved(s[i]), ws);
    }
  }
  m.cross.coef = mp.c1 * mp.c2 * mp.a12;
  if (mp.mode == InteractionMode::NLS) {
    m.cross.kind = CrossModel::Kind::Local;
  } else {
    m.cross.kind = CrossModel::Kind::Convolved;
    m.cross.kernel_hat = kernel_spectrum(g, resolved(mp.s12), ws);
  }
  return m;
}

}  // namespace detail

inline EnergyBreakdown unfold_breakdown(const detail::EnergyPieces& p, double c1,
                                        double c2) {
  EnergyBreakdown b;
  b.kin1 = p.kin[0] / c1;
  b.trap1 = p.trap[0] / c1;
  b.intra1 = p.intra[0] / c1;
  b.kin2 = p.kin[1] / c2;
  b.trap2 = p.trap[1] / c2;
  b.intra2 = p.intra[1] / c2;
  b.inter = p.inter;
  b.total = p.total();
  return b;
}

inline EnergyBreakdown energy(const TwoComponentState& s, const ModelParams& mp,
                              SpectralWorkspace& ws) {
  const auto model = detail::build_model(mp, s.u1.grid, ws);
  return unfold_breakdown(detail::energy_pieces(model, s, ws), mp.c1, mp.c2);
}

inline EnergyBreakdown energy(const TwoComponentState& s, const ModelParams& mp) {
  SpectralWorkspace ws(s.u1.grid);
  return energy(s, mp, ws);
}

/// L2 gradient of the implemented scalar energy:
/// g1 = 2 c1 (-lap u1 + V1 u1 - a1 u1^3 - c2 a12 X(rho2) u1), and symmetrically.
inline std::pair<Field2D, Field2D> gradient(const TwoComponentState& s,
                                            const ModelParams& mp,
                                            SpectralWorkspace& ws) {
  const auto model = detail::build_model(mp, s.u1.grid, ws);
  return detail::model_gradient(model, s, ws);
}

inline std::pair<Field2D, Field2D> gradient(const TwoComponentState& s,
                                            const ModelParams& mp) {
  SpectralWorkspace ws(s.u1.grid);
  return gradient(s, mp, ws);
}

/// Norm of the gradient minus its component along the constraint normals,
/// with per-component multipliers mu_i = <u_i, g_i> / (2 c_i mass(u_i)).
inline double el_residual(const TwoComponentState& s, const ModelParams& mp,
                          SpectralWorkspace& ws) {
  const auto [g1, g2] = gradient(s, mp, ws);
  const Field2D* u[2] = {&s.u1, &s.u2};
  const Field2D* gr[2] = {&g1, &g2};
  const double c[2] = {mp.c1, mp.c2};
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double mu = inner(*u[i], *gr[i]) / (2.0 * c[i] * mass(*u[i]));
    double acc = 0.0;
    for (size_t j = 0; j < u[i]->values.size(); ++j) {
      const double d = gr[i]->values[j] - 2.0 * c[i] * mu * u[i]->values[j];
      acc += d * d;
    }
    worst = std::max(worst, std::sqrt(acc) * s.u1.grid.spacing);
  }
  return worst;
}

inline double el_residual(const TwoComponentState& s, const ModelParams& mp) {
  SpectralWorkspace ws(s.u1.grid);
  return el_residual(s, mp, ws);
}

}  // namespace collapse
