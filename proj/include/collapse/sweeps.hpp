#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "collapse/flow.hpp"
#include "collapse/functionals.hpp"
#include "collapse/radial.hpp"

namespace collapse {

/// One sweep sample. epsilon2/ell2 mirror epsilon/ell1 in the single-scale
/// regimes; ref_energy and gap are only meaningful for separated traps.
struct ScanPoint {
  double epsilon = 0.0, epsilon2 = 0.0;
  double energy = std::numeric_limits<double>::quiet_NaN();
  double ref_energy = std::numeric_limits<double>::quiet_NaN();
  double e1_ref = std::numeric_limits<double>::quiet_NaN();
  double e2_ref = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double ell1 = 0.0, ell2 = 0.0;
  double dist1 = std::numeric_limits<double>::quiet_NaN();
  double dist2 = std::numeric_limits<double>::quiet_NaN();
  double sym_gap = std::numeric_limits<double>::quiet_NaN();
  long steps = 0;
  double residual = 0.0;
  bool converged = false;
  bool flagged = false;
};

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
  int excluded = 0;
};

/// Least squares on (log eps, log value); the prefactor is exp(intercept).
/// Non-positive values are excluded and counted.
inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 4)
    throw std::invalid_argument("fit_power_law: need at least 4 points");
  std::vector<std::pair<double, double>> logs;
  int excluded = 0;
  for (const auto& [x, y] : pts) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(y)) {
      ++excluded;
      continue;
    }
    logs.push_back({std::log(x), std::log(y)});
  }
  if (logs.size() < 2)
    throw std::runtime_error("fit_power_law: too few positive points");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : logs) {
    sx += x;
    sy += y;
  }
  const double mx = sx / logs.size(), my = sy / logs.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  double ss_res = 0.0;
  for (const auto& [x, y] : logs) {
    const double e = y - (my + fit.exponent * (x - mx));
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.points_used = static_cast<int>(logs.size());
  fit.excluded = excluded;
  return fit;
}

inline std::vector<double> geometric_epsilons(double first, double ratio, int count) {
  if (!(first > 0.0) || !(ratio > 0.0) || ratio >= 1.0 || count < 1)
    throw std::invalid_argument("geometric_epsilons: need first > 0, ratio in (0,1)");
  std::vector<double> out(count);
  double e = first;
  for (int i = 0; i < count; ++i, e *= ratio) out[i] = e;
  return out;
}

inline std::pair<double, double> profile_distance(const TwoComponentState& s,
                                                  const Field2D& q0_1,
                                                  const Field2D& q0_2) {
  return {l2_distance(s.u1, q0_1), l2_distance(s.u2, q0_2)};
}

inline std::pair<double, double> profile_distance(const TwoComponentState& s,
                                                  const RadialProfile& prof,
                                                  const GNConstants& gn,
                                                  std::array<double, 2> center1,
                                                  std::array<double, 2> center2) {
  const Field2D q1 = q0_on_grid(prof, gn, s.u1.grid, 1.0, center1);
  const Field2D q2 = center1 == center2 ? q1 : q0_on_grid(prof, gn, s.u2.grid, 1.0, center2);
  return profile_distance(s, q1, q2);
}

inline double density_gap(const TwoComponentState& s) {
  double acc = 0.0;
  for (size_t j = 0; j < s.u1.values.size(); ++j) {
    const double d = s.u1.values[j] * s.u1.values[j] - s.u2.values[j] * s.u2.values[j];
    acc += d * d;
  }
  return std::sqrt(acc) * s.u1.grid.spacing;
}

struct DecayFit {
  double mu = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};

/// Least-squares slope of log(field) versus radius, sampled along rays and
/// averaged over angles. Radii whose angular average falls under the 1e-12
/// noise floor shrink the window from the outside.
inline DecayFit decay_fit(const Field2D& f, std::array<double, 2> center, double r_in,
                          double r_out) {
  const Grid2D& g = f.grid;
  if (!(r_in > 0.0) || !(r_out > r_in))
    throw std::invalid_argument("decay_fit: need 0 < r_in < r_out");
  if (std::abs(center[0]) + r_out > g.half_width ||
      std::abs(center[1]) + r_out > g.half_width)
    throw std::invalid_argument("decay_fit: window leaves the domain");
  constexpr int n_angles = 32;
  std::vector<std::pair<double, double>> samples;  // (r, mean value)
  for (double r = r_in; r <= r_out + 1e-12; r += g.spacing) {
    double acc = 0.0;
    for (int k = 0; k < n_angles; ++k) {
      const double th = 2.0 * pi * k / n_angles;
      acc += sample_bilinear(f, center[0] + r * std::cos(th), center[1] + r * std::sin(th));
    }
    const double mean = acc / n_angles;
    if (mean < 1e-12) break;  // window shrinks at the noise floor
    samples.push_back({r, std::log(mean)});
  }
  if (samples.size() < 5) throw std::runtime_error("decay_fit: tail under floor");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : samples) {
    sx += x;
    sy += y;
  }
  const double mx = sx / samples.size(), my = sy / samples.size();
  double sxx = 0, sxy = 0, syy = 0, ss_res = 0;
  for (const auto& [x, y] : samples) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  const double slope = sxy / sxx;
  for (const auto& [x, y] : samples) {
    const double e = y - (my + slope * (x - mx));
    ss_res += e * e;
  }
  DecayFit out;
  out.mu = -slope;
  out.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  out.samples = static_cast<int>(samples.size());
  return out;
}

namespace detail {

inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t]() {
      try {
        for (int i = t; i < count; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

struct SweepContext {
  const RadialProfile* profile = nullptr;
  const GNConstants* gn = nullptr;
  Grid2D grid;
  FlowSettings settings;
  int threads = 1;
  // when set, receives the state of the last point (the smallest epsilon,
  // lists are ordered largest to smallest); used for tail diagnostics
  TwoComponentState* capture_last = nullptr;
};

/// Regime A: fixed attractive cross strength, total strength a_N driven to
/// the critical value with the symmetric split between the two components.
inline std::vector<ScanPoint> scan_regime_a(const ModelParams& base,
                                            const std::vector<double>& epsilons,
                                            const SweepContext& ctx) {
  const GNConstants& gn = *ctx.gn;
  if (!(base.a12 > 0.0) ||
      base.a12 >= gn.a_star * std::min(1.0 / base.c1, 1.0 / base.c2))
    throw std::invalid_argument("scan_regime_a: need 0 < a12 < a* min(1/c1, 1/c2)");
  const Field2D q0 = q0_on_grid(*ctx.profile, gn, ctx.grid, 1.0, {0.0, 0.0});
  std::vector<ScanPoint> points(epsilons.size());
  detail::parallel_for(
      static_cast<int>(epsilons.size()), ctx.threads, [&](int i) {
        ScanPoint& pt = points[i];
        const double eps = epsilons[i];
        pt.epsilon = pt.epsilon2 = eps;
        try {
          ModelParams mp = base;
          const double s = gn.a_star - eps - 2.0 * mp.c1 * mp.c2 * mp.a12;
          mp.a1 = (s + (mp.c1 - mp.c2) * gn.a_star) / (2.0 * mp.c1);
          mp.a2 = (s - (mp.c1 - mp.c2) * gn.a_star) / (2.0 * mp.c2);
          if (!(mp.a1 > 0.0) || !(mp.a2 > 0.0))
            throw std::runtime_error("scan_regime_a: epsilon too large for the split");
          SpectralWorkspace ws(ctx.grid);
          const auto sol =
              ground_state_rescaled(mp, Regime::TotalStrength, gn, ctx.grid, ctx.settings, ws);
          pt.ell1 = pt.ell2 = sol.scales.ell1;
          pt.energy = sol.original_energy.total;
          std::tie(pt.dist1, pt.dist2) = profile_distance(sol.state, q0, q0);
          pt.sym_gap = density_gap(sol.state);
          pt.steps = sol.report.steps;
          pt.residual = sol.report.final_residual;
          pt.converged = sol.report.converged;
          if (ctx.capture_last && i + 1 == static_cast<int>(epsilons.size()))
            *ctx.capture_last = sol.state;
        } catch (const std::exception&) {
          pt.flagged = true;
        }
      });
  return points;
}

/// Regime B: intra strengths fixed on the balanced line, the cross strength
/// driven to its critical value.
inline std::vector<ScanPoint> scan_regime_b(const ModelParams& base,
                                            const std::vector<double>& epsilons,
                                            const SweepContext& ctx) {
  const GNConstants& gn = *ctx.gn;
  const double lhs = base.c1 * (gn.a_star - base.a1);
  const double rhs = base.c2 * (gn.a_star - base.a2);
  if (std::abs(lhs - rhs) > 1e-9 * gn.a_star)
    throw std::invalid_argument("scan_regime_b: need c1 (a* - a1) = c2 (a* - a2)");
  const double alpha_star = lhs / (base.c1 * base.c2);
  const Field2D q0 = q0_on_grid(*ctx.profile, gn, ctx.grid, 1.0, {0.0, 0.0});
  std::vector<ScanPoint> points(epsilons.size());
  detail::parallel_for(
      static_cast<int>(epsilons.size()), ctx.threads, [&](int i) {
        ScanPoint& pt = points[i];
        const double eps = epsilons[i];
        pt.epsilon = pt.epsilon2 = eps;
        try {
          ModelParams mp = base;
          mp.a12 = alpha_star - eps;
          if (!(mp.a12 > 0.0))
            throw std::runtime_error("scan_regime_b: epsilon exceeds the threshold");
          SpectralWorkspace ws(ctx.grid);
          const auto sol =
              ground_state_rescaled(mp, Regime::CrossStrength, gn, ctx.grid, ctx.settings, ws);
          pt.ell1 = pt.ell2 = sol.scales.ell1;
          pt.energy = sol.original_energy.total;
          std::tie(pt.dist1, pt.dist2) = profile_distance(sol.state, q0, q0);
          pt.sym_gap = density_gap(sol.state);
          pt.steps = sol.report.steps;
          pt.residual = sol.report.final_residual;
          pt.converged = sol.report.converged;
          if (ctx.capture_last && i + 1 == static_cast<int>(epsilons.size()))
            *ctx.capture_last = sol.state;
        } catch (const std::exception&) {
          pt.flagged = true;
        }
      });
  return points;
}

/// Regime C: repulsive cross term with separated traps; each point solves the
/// coupled problem and the two decoupled references on the same grid, so the
/// sandwich gap carries like-for-like discretization error.
inline std::vector<ScanPoint> scan_regime_c(
    const ModelParams& base, const std::vector<std::pair<double, double>>& eps_pairs,
    const SweepContext& ctx) {
  const GNConstants& gn = *ctx.gn;
  if (!(base.a12 < 0.0)) throw std::invalid_argument("scan_regime_c: need a12 < 0");
  if (!base.trap1 || !base.trap2 || base.trap1->z == base.trap2->z)
    throw std::invalid_argument("scan_regime_c: need z1 != z2");
  const Field2D q0 = q0_on_grid(*ctx.profile, gn, ctx.grid, 1.0, {0.0, 0.0});
  std::vector<ScanPoint> points(eps_pairs.size());
  detail::parallel_for(
      static_cast<int>(eps_pairs.size()), ctx.threads, [&](int i) {
        ScanPoint& pt = points[i];
        const auto [e1, e2] = eps_pairs[i];
        pt.epsilon = e1;
        pt.epsilon2 = e2;
        try {
          ModelParams mp = base;
          mp.a1 = gn.a_star - e1;
          mp.a2 = gn.a_star - e2;
          SpectralWorkspace ws(ctx.grid);
          const auto sol =
              ground_state_rescaled(mp, Regime::PerComponent, gn, ctx.grid, ctx.settings, ws);
          pt.ell1 = sol.scales.ell1;
          pt.ell2 = sol.scales.ell2;
          pt.energy = sol.original_energy.total;
          std::tie(pt.dist1, pt.dist2) = profile_distance(sol.state, q0, q0);
          pt.steps = sol.report.steps;
          pt.residual = sol.report.final_residual;
          pt.converged = sol.report.converged;
          if (ctx.capture_last && i + 1 == static_cast<int>(eps_pairs.size()))
            *ctx.capture_last = sol.state;

          ModelParams ref = mp;
          ref.a12 = 0.0;
          const auto dec =
              ground_state_rescaled(ref, Regime::PerComponent, gn, ctx.grid, ctx.settings, ws);
          const auto& b = dec.original_energy;
          pt.e1_ref = b.kin1 + b.trap1 - b.intra1;
          pt.e2_ref = b.kin2 + b.trap2 - b.intra2;
          pt.ref_energy = mp.c1 * pt.e1_ref + mp.c2 * pt.e2_ref;
          pt.gap = pt.energy - pt.ref_energy;
          pt.converged = pt.converged && dec.report.converged;
        } catch (const std::exception&) {
          pt.flagged = true;
        }
      });
  return points;
}

struct HartreeGapScan {
  std::vector<std::pair<double, double>> samples;  // (N, |E_H - E_NLS|)
  PowerLawFit fit;
  int truncated = 0;  // N values dropped because the kernel fell under 2h
};

/// Evaluates the Hartree and local functionals on one fixed smooth state for
/// a ladder of particle counts and fits the gap's decay rate.
inline HartreeGapScan hartree_vs_nls_gap(const ModelParams& base,
                                         const TwoComponentState& state,
                                         const std::vector<double>& n_list,
                                         SpectralWorkspace& ws) {
  ModelParams nls = base;
  nls.mode = InteractionMode::NLS;
  const double e_nls = energy(state, nls, ws).total;
  const double h = state.u1.grid.spacing;
  const double s_min = std::min({base.s1, base.s2, base.s12});
  HartreeGapScan out;
  for (double big_n : n_list) {
    if (s_min * std::pow(big_n, -base.beta) < 2.0 * h) {
      ++out.truncated;
      continue;
    }
    ModelParams mp = base;
    mp.mode = InteractionMode::Hartree;
    mp.particle_count = big_n;
    out.samples.push_back({big_n, std::abs(energy(state, mp, ws).total - e_nls)});
  }
  if (out.samples.size() >= 4) out.fit = fit_power_law(out.samples);
  return out;
}

/// Energy-law fit of a sweep; the `skip_largest` pre-asymptotic points are
/// excluded (the epsilon list is ordered largest to smallest) as long as at
/// least four points remain.
inline PowerLawFit fit_scan_energy(const std::vector<ScanPoint>& points,
                                   int skip_largest = 2) {
  const int skip = std::min<int>(skip_largest,
                                 std::max<int>(0, static_cast<int>(points.size()) - 4));
  std::vector<std::pair<double, double>> pts;
  for (size_t i = skip; i < points.size(); ++i)
    if (!points[i].flagged) pts.push_back({points[i].epsilon, points[i].energy});
  return fit_power_law(pts);
}

}  // namespace collapse
