#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "collapse/functionals.hpp"
#include "collapse/radial.hpp"

namespace collapse {

struct FlowSettings {
  double dt = 1e-2;
  long max_steps = 200000;
  double energy_tol = 1e-10;    // relative energy decrease per step
  double residual_tol = 1e-6;   // projected-gradient stop
  unsigned long long seed = 0;  // initialization jitter
};

struct FlowReport {
  long steps = 0;
  EnergyBreakdown final_energy{};
  double final_residual = 0.0;
  bool converged = false;
  // decimated (step, energy, residual) rows
  std::vector<std::array<double, 3>> trace;
};

/// Two normalized Gaussians, plus a small seeded smooth perturbation so that
/// distinct seeds probe initialization independence. Deterministic per seed.
inline TwoComponentState init_gaussian(const Grid2D& g, std::array<double, 2> center1,
                                       std::array<double, 2> center2, double width,
                                       unsigned long long seed = 0) {
  if (!(width > 2.0 * g.spacing))
    throw std::invalid_argument("init_gaussian: width unresolved by grid");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto make = [&](std::array<double, 2> c) {
    Field2D f(g);
    struct Bump {
      double x, y, w, amp;
    };
    std::vector<Bump> bumps;
    for (int b = 0; b < 3; ++b)
      bumps.push_back({c[0] + 0.5 * width * unif(rng), c[1] + 0.5 * width * unif(rng),
                       width * (0.6 + 0.2 * unif(rng)), 0.01 * unif(rng)});
    for (int ix = 0; ix < g.n; ++ix) {
      const double dx = g.coord(ix) - c[0];
      for (int iy = 0; iy < g.n; ++iy) {
        const double dy = g.coord(iy) - c[1];
        double v = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
        for (const Bump& b : bumps) {
          const double bx = g.coord(ix) - b.x, by = g.coord(iy) - b.y;
          v += b.amp * std::exp(-(bx * bx + by * by) / (2.0 * b.w * b.w));
        }
        f.at(ix, iy) = std::max(v, 0.0);
      }
    }
    return normalize(std::move(f));
  };
  return TwoComponentState{make(center1), make(center2)};
}

namespace detail {

struct FlowResult {
  TwoComponentState state;
  FlowReport report;
  EnergyPieces pieces;
};

// One evaluation of the state: spectra, weighted energy pieces, the local
// force fields F_i = (T u - 2 qc (u^3 | conv u) - coef X u) / kin_weight, and
// per-component Rayleigh quotients mu_i = <u_i, K u_i + F_i> / mass.
struct FlowEval {
  std::array<std::vector<std::complex<double>>, 2> hat;
  std::array<std::vector<double>, 2> force;
  std::array<double, 2> mu{0.0, 0.0};
  EnergyPieces pieces;
  double energy = 0.0;
  double piece_scale = 0.0;  // sum of |pieces|; the total may cancel heavily
};

inline void evaluate_state(const DiscreteModel& m, const TwoComponentState& s,
                           SpectralWorkspace& ws, FlowEval& ev) {
  const Grid2D& g = m.grid;
  const double h2 = g.spacing * g.spacing;
  const double spec_norm = h2 / (static_cast<double>(g.n) * g.n);
  const Field2D* u[2] = {&s.u1, &s.u2};
  ev.pieces = EnergyPieces{};
  for (int i = 0; i < 2; ++i) {
    const auto& cm = m.comp[i];
    ev.hat[i].resize(ws.spectral_size());
    ev.force[i].resize(g.size());
    ws.forward(u[i]->values, ev.hat[i].data());
    double dirichlet = 0.0;
    for (long k = 0; k < ws.spectral_size(); ++k)
      dirichlet += ws.colw()[k] * ws.ksq()[k] * std::norm(ev.hat[i][k]);
    dirichlet *= spec_norm;
    ev.pieces.kin[i] = cm.kin_weight * dirichlet;

    const auto rho = density(*u[i]);
    std::vector<double> kconv;
    if (cm.intra_convolved) kconv = convolve_with(cm.intra_kernel_hat, rho, g, ws).values;
    std::vector<double> xf;
    if (m.cross.kind != CrossModel::Kind::None) xf = cross_field(m, i, *u[1 - i], ws);

    double trap_acc = 0.0, quart_acc = 0.0, cross_acc = 0.0, force_ip = 0.0;
    const double inv_w = 1.0 / cm.kin_weight;
    for (long j = 0; j < g.size(); ++j) {
      const double uj = u[i]->values[j];
      const double rj = rho[j];
      double f = 0.0;
      if (cm.has_trap) {
        f += cm.trap.values[j] * uj;
        trap_acc += cm.trap.values[j] * rj;
      }
      if (cm.intra_convolved) {
        f -= 2.0 * cm.quartic_coef * kconv[j] * uj;
        quart_acc += rj * kconv[j];
      } else {
        f -= 2.0 * cm.quartic_coef * rj * uj;
        quart_acc += rj * rj;
      }
      if (!xf.empty()) {
        f -= m.cross.coef * xf[j] * uj;
        cross_acc += rj * xf[j];
      }
      f *= inv_w;
      ev.force[i][j] = f;
      force_ip += uj * f;
    }
    ev.pieces.trap[i] = trap_acc * h2;
    ev.pieces.intra[i] = cm.quartic_coef * quart_acc * h2;
    if (i == 0) ev.pieces.inter = m.cross.coef * cross_acc * h2;
    ev.mu[i] = dirichlet + force_ip * h2;  // masses are 1 along the flow
  }
  ev.energy = ev.pieces.total();
  ev.piece_scale = std::abs(ev.pieces.inter);
  for (int i = 0; i < 2; ++i)
    ev.piece_scale += std::abs(ev.pieces.kin[i]) + std::abs(ev.pieces.trap[i]) +
                      std::abs(ev.pieces.intra[i]);
}

// Residual of the projected flow velocity, || K u + F - mu u ||_L2, reusing
// the evaluation's spectra and force fields.
inline double eval_residual(const DiscreteModel& m, const TwoComponentState& s,
                            const FlowEval& ev, SpectralWorkspace& ws) {
  const Grid2D& g = m.grid;
  std::vector<std::complex<double>> tmp(ws.spectral_size());
  Field2D lap(g);
  const Field2D* u[2] = {&s.u1, &s.u2};
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (long k = 0; k < ws.spectral_size(); ++k) tmp[k] = ws.ksq()[k] * ev.hat[i][k];
    ws.inverse(tmp.data(), lap.values);  // -lap u
    double acc = 0.0;
    for (long j = 0; j < g.size(); ++j) {
      const double d = lap.values[j] + ev.force[i][j] - ev.mu[i] * u[i]->values[j];
      acc += d * d;
    }
    worst = std::max(worst, std::sqrt(acc) * g.spacing);
  }
  return worst;
}

/// Semi-implicit normalized gradient flow on a discrete model: the kinetic
/// term is inverted in spectral space, local and convolution terms stay
/// explicit, negative overshoots are clamped, and both masses are
/// renormalized to 1 every step. The explicit part carries the current
/// Rayleigh-quotient shift, which makes the constrained stationary state an
/// exact fixed point of the update at any dt. Steps that raise the energy
/// are rejected and retried with dt halved; sustained decrease grows dt
/// geometrically up to ten times the initial value.
inline FlowResult run_flow(const DiscreteModel& model, TwoComponentState state,
                           const FlowSettings& fs, SpectralWorkspace& ws) {
  if (!(fs.dt > 0.0) || !(fs.energy_tol > 0.0) || !(fs.residual_tol > 0.0))
    throw std::invalid_argument("run_flow: settings must be positive");
  const Grid2D& g = model.grid;
  const long nc = ws.spectral_size();

  state.u1 = normalize(std::move(state.u1));
  state.u2 = normalize(std::move(state.u2));

  double dt = fs.dt;
  const double dt_cap = 10.0 * fs.dt, dt_floor = 1e-5;
  double energy_prev = 0.0;
  bool have_prev = false;
  TwoComponentState prev = state;
  int reject_streak = 0;
  long accepted = 0;
  double last_residual = std::numeric_limits<double>::quiet_NaN();

  FlowReport report;
  std::vector<std::complex<double>> fhat(nc);
  FlowEval ev;
  evaluate_state(model, state, ws, ev);
  if (!std::isfinite(ev.energy))
    throw std::runtime_error("run_flow: initial state has non-finite energy");

  while (accepted < fs.max_steps) {
    // the accept slack follows the piece magnitudes: near-critical totals
    // cancel by orders of magnitude, so round-off noise lives on that scale
    const double slack = 1e-13 * std::max(ev.piece_scale, std::abs(energy_prev));
    if (!std::isfinite(ev.energy) ||
        (have_prev && ev.energy > energy_prev + slack)) {
      state = prev;
      evaluate_state(model, state, ws, ev);
      ++reject_streak;
      if (dt <= dt_floor * 1.0000001 && reject_streak > 100)
        throw std::runtime_error("flow diverged: reduce dt");
      dt = std::max(0.5 * dt, dt_floor);
    } else {
      if (have_prev) {
        ++accepted;
        reject_streak = 0;
        const double drop =
            (energy_prev - ev.energy) / std::max(std::abs(ev.energy), 1e-300);
        const bool record = accepted % 100 == 0 || accepted == 1;
        if (record || drop < fs.energy_tol) {
          last_residual = eval_residual(model, state, ev, ws);
          if (record)
            report.trace.push_back({static_cast<double>(accepted), ev.energy, last_residual});
          if (drop < fs.energy_tol && last_residual < fs.residual_tol) {
            report.converged = true;
            break;
          }
        }
        dt = std::min(dt * 1.02, dt_cap);
      } else {
        report.trace.push_back({0.0, ev.energy, 0.0});
      }
      prev = state;
      energy_prev = ev.energy;
      have_prev = true;
    }

    // one step from `state` using the current evaluation
    Field2D* u[2] = {&state.u1, &state.u2};
    for (int i = 0; i < 2; ++i) {
      ws.forward(ev.force[i], fhat.data());
      const double shift = 1.0 + dt * ev.mu[i];
      auto& hat = ev.hat[i];
      for (long k = 0; k < nc; ++k)
        hat[k] = (shift * hat[k] - dt * fhat[k]) / (1.0 + dt * ws.ksq()[k]);
      ws.inverse(hat.data(), u[i]->values);
      for (double& v : u[i]->values) v = std::max(v, 0.0);
      *u[i] = normalize(std::move(*u[i]));
    }
    evaluate_state(model, state, ws, ev);
  }

  if (!report.converged) {
    state = prev;  // last accepted state
    evaluate_state(model, state, ws, ev);
  }
  if (!std::isfinite(last_residual)) last_residual = eval_residual(model, state, ev, ws);
  report.steps = accepted;
  report.final_residual = last_residual;
  report.trace.push_back({static_cast<double>(accepted), ev.energy, last_residual});
  return FlowResult{std::move(state), std::move(report), ev.pieces};
}

}  // namespace detail

/// Ground state of the configured functional by normalized gradient flow.
inline std::pair<TwoComponentState, FlowReport> ground_state(
    const TwoComponentState& initial, const ModelParams& mp, const FlowSettings& fs,
    SpectralWorkspace& ws) {
  const auto model = detail::build_model(mp, initial.u1.grid, ws);
  auto res = detail::run_flow(model, initial, fs, ws);
  res.report.final_energy = unfold_breakdown(res.pieces, mp.c1, mp.c2);
  return {std::move(res.state), std::move(res.report)};
}

inline std::pair<TwoComponentState, FlowReport> ground_state(
    const TwoComponentState& initial, const ModelParams& mp, const FlowSettings& fs) {
  SpectralWorkspace ws(initial.u1.grid);
  return ground_state(initial, mp, fs, ws);
}

enum class Regime { TotalStrength, CrossStrength, PerComponent };

struct RescaleScales {
  double ell1 = 0.0, ell2 = 0.0;
  double epsilon1 = 0.0, epsilon2 = 0.0;
};

struct RescaledSolution {
  TwoComponentState state;  // in blow-up coordinates
  RescaleScales scales;
  FlowReport report;
  EnergyBreakdown original_energy;  // mapped back to original variables, exactly
};

namespace detail {

inline double min_trap_p(const ModelParams& mp) {
  if (!mp.trap1 || !mp.trap2)
    throw std::invalid_argument("rescaled solve: both traps must be present");
  return std::min(mp.trap1->p, mp.trap2->p);
}

inline double trap_limit_nu(const ModelParams& mp, double p0) {
  double nu = 0.0;
  if (mp.trap1->p == p0) nu += mp.c1;
  if (mp.trap2->p == p0) nu += mp.c2;
  return nu;
}

inline Field2D weighted_power_trap(const Grid2D& g, double p, double coef) {
  Field2D t = trap_potential(g, p, {0.0, 0.0});
  for (double& v : t.values) v *= coef;
  return t;
}

}  // namespace detail

/// Minimization in blow-up variables x -> x / ell about the trap center(s);
/// the kinetic and interaction terms keep O(1) coefficients while the trap
/// carries the small epsilon-factor, so a fixed grid resolves the minimizer
/// at every point of a sweep.
inline RescaledSolution ground_state_rescaled(const ModelParams& mp, Regime regime,
                                              const GNConstants& gn, const Grid2D& grid,
                                              const FlowSettings& fs,
                                              SpectralWorkspace& ws) {
  detail::check_params(mp);
  const double p0 = detail::min_trap_p(mp);
  detail::DiscreteModel model;
  model.grid = grid;
  RescaleScales sc;
  const double c[2] = {mp.c1, mp.c2};
  const double a[2] = {mp.a1, mp.a2};
  const double pexp[2] = {mp.trap1->p, mp.trap2->p};

  if (regime == Regime::TotalStrength || regime == Regime::CrossStrength) {
    if (mp.trap1->z != std::array<double, 2>{0.0, 0.0} ||
        mp.trap2->z != std::array<double, 2>{0.0, 0.0})
      throw std::invalid_argument("rescaled solve: regimes A/B need z1 = z2 = 0");
    const double nu = detail::trap_limit_nu(mp, p0);
    double eps = 0.0, coef = 0.0;
    if (regime == Regime::TotalStrength) {
      eps = gn.a_star - mp.a_n();
      coef = lambda_coefficient(p0, nu, gn);
    } else {
      const double lhs = mp.c1 * (gn.a_star - mp.a1), rhs = mp.c2 * (gn.a_star - mp.a2);
      if (std::abs(lhs - rhs) > 1e-9 * gn.a_star)
        throw std::invalid_argument(
            "rescaled solve: regime B needs c1 (a* - a1) = c2 (a* - a2)");
      eps = lhs / (mp.c1 * mp.c2) - mp.a12;
      coef = theta_coefficient(p0, nu, mp.c1, mp.c2, gn);
    }
    if (!(eps > 0.0))
      throw std::invalid_argument("rescaled solve: epsilon must be positive");
    const double ell = coef * std::pow(eps, -1.0 / (p0 + 2.0));
    sc = {ell, ell, eps, eps};

    const double nscale = mp.mode == InteractionMode::NLS
                              ? 1.0
                              : std::pow(mp.particle_count, -mp.beta);
    auto resolved = [&](double base) {
      const double w = base * nscale * ell;  // kernel width in blow-up coordinates
      if (w < 2.0 * grid.spacing)
        throw std::runtime_error("rescaled solve: kernel narrower than grid");
      return w;
    };
    for (int i = 0; i < 2; ++i) {
      auto& cmp = model.comp[i];
      cmp.kin_weight = c[i];
      cmp.quartic_coef = 0.5 * c[i] * a[i];
      cmp.has_trap = true;
      cmp.trap = detail::weighted_power_trap(grid, pexp[i],
                                             c[i] * std::pow(ell, -(pexp[i] + 2.0)));
      if (mp.mode == InteractionMode::Hartree) {
        cmp.intra_convolved = true;
        cmp.intra_kernel_hat = kernel_spectrum(grid, resolved(i == 0 ? mp.s1 : mp.s2), ws);
      }
    }
    model.cross.coef = mp.c1 * mp.c2 * mp.a12;
    if (mp.mode == InteractionMode::NLS) {
      model.cross.kind = detail::CrossModel::Kind::Local;
    } else {
      model.cross.kind = detail::CrossModel::Kind::Convolved;
      model.cross.kernel_hat = kernel_spectrum(grid, resolved(mp.s12), ws);
    }
  } else {
    if (mp.trap1->z == mp.trap2->z)
      throw std::invalid_argument("rescaled solve: regime C needs z1 != z2");
    if (mp.mode != InteractionMode::NLS)
      throw std::invalid_argument("rescaled solve: regime C supports the NLS mode only");
    const double eps1 = gn.a_star - mp.a1, eps2 = gn.a_star - mp.a2;
    if (!(eps1 > 0.0) || !(eps2 > 0.0))
      throw std::invalid_argument("rescaled solve: epsilon must be positive");
    const double l1 = lambda_i(pexp[0], gn) * std::pow(eps1, -1.0 / (pexp[0] + 2.0));
    const double l2 = lambda_i(pexp[1], gn) * std::pow(eps2, -1.0 / (pexp[1] + 2.0));
    sc = {l1, l2, eps1, eps2};
    const double ell[2] = {l1, l2};
    for (int i = 0; i < 2; ++i) {
      auto& cmp = model.comp[i];
      cmp.kin_weight = c[i] * ell[i] * ell[i];
      cmp.quartic_coef = 0.5 * c[i] * a[i] * ell[i] * ell[i];
      cmp.has_trap = true;
      cmp.trap = detail::weighted_power_trap(grid, pexp[i], c[i] * std::pow(ell[i], -pexp[i]));
    }
    model.cross.kind = detail::CrossModel::Kind::Mapped;
    model.cross.coef = mp.c1 * mp.c2 * mp.a12 * l2 * l2;
    model.cross.map_scale = l2 / l1;
    model.cross.map_offset = {l2 * (mp.trap1->z[0] - mp.trap2->z[0]),
                              l2 * (mp.trap1->z[1] - mp.trap2->z[1])};
  }

  TwoComponentState init = init_gaussian(grid, {0.0, 0.0}, {0.0, 0.0}, 1.2, fs.seed);
  auto res = detail::run_flow(model, std::move(init), fs, ws);

  RescaledSolution out;
  out.scales = sc;
  detail::EnergyPieces orig = res.pieces;
  if (regime == Regime::PerComponent) {
    // model energy is already the original-variable energy
  } else {
    const double l2sq = sc.ell1 * sc.ell1;
    for (int i = 0; i < 2; ++i) {
      orig.kin[i] *= l2sq;
      orig.trap[i] *= l2sq;
      orig.intra[i] *= l2sq;
    }
    orig.inter *= l2sq;
  }
  out.original_energy = unfold_breakdown(orig, mp.c1, mp.c2);
  res.report.final_energy = out.original_energy;
  out.report = std::move(res.report);
  out.state = std::move(res.state);
  return out;
}

inline RescaledSolution ground_state_rescaled(const ModelParams& mp, Regime regime,
                                              const GNConstants& gn, const Grid2D& grid,
                                              const FlowSettings& fs) {
  SpectralWorkspace ws(grid);
  return ground_state_rescaled(mp, regime, gn, grid, fs, ws);
}

}  // namespace collapse
