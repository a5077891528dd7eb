#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "collapse/grid.hpp"

namespace collapse {

/// Radial profile Q(r) of the positive decreasing solution of
/// -Q'' - Q'/r + Q - Q^3 = 0 with Q'(0) = 0 and Q -> 0, on a uniform grid.
struct RadialProfile {
  std::vector<double> r_nodes;
  std::vector<double> values;
  double q_peak = 0.0;
  double r_max = 0.0;
  int shoot_iterations = 0;
};

struct GNConstants {
  double a_star = 0.0;   // ||Q||_L2^2
  double grad_sq = 0.0;  // ||grad Q||_L2^2
  double quartic = 0.0;  // ||Q||_L4^4
  std::map<double, double> moments;  // p -> integral |x|^p Q^2 dx
};

namespace detail {

// Right-hand side of the first-order system (Q, P); the 1/r singularity is
// removed at the origin by P'(0) = (Q - Q^3)/2.
inline void gn_rhs(double r, double q, double p, double& dq, double& dp) {
  dq = p;
  dp = (r < 1e-12) ? 0.5 * (q - q * q * q) : -p / r + q - q * q * q;
}

inline void gn_rk4_step(double r, double h, double& q, double& p) {
  double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
  gn_rhs(r, q, p, k1q, k1p);
  gn_rhs(r + 0.5 * h, q + 0.5 * h * k1q, p + 0.5 * h * k1p, k2q, k2p);
  gn_rhs(r + 0.5 * h, q + 0.5 * h * k2q, p + 0.5 * h * k2p, k3q, k3p);
  gn_rhs(r + h, q + h * k3q, p + h * k3p, k4q, k4p);
  q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
}

enum class ShotOutcome { Crossed, Diverged, Decayed };

// Integrates one shot; when `record` is non-null stores Q at every node.
inline ShotOutcome gn_shoot(double q0, double r_max, long steps,
                            std::vector<double>* record) {
  const double h = r_max / steps;
  double q = q0, p = 0.0;
  if (record) {
    record->assign(steps + 1, 0.0);
    (*record)[0] = q0;
  }
  for (long i = 0; i < steps; ++i) {
    gn_rk4_step(i * h, h, q, p);
    if (record) (*record)[i + 1] = q;
    if (q < 0.0) return ShotOutcome::Crossed;
    if (q > q0 * (1.0 + 1e-9) || (p > 0.0 && q > 1e-6)) return ShotOutcome::Diverged;
  }
  return ShotOutcome::Decayed;
}

}  // namespace detail

/// Bisection shooting for the radial ground state. The bracket is refined to
/// machine precision regardless of `tol` (tol sets the residual acceptance
/// bound); past the point where Q drops below 1e-5 the unstable mode would
/// contaminate the shot, so the tail is continued with the Bessel K0 solution
/// of the linearized equation, matched by value.
inline RadialProfile solve_gn_radial(double r_max, double tol) {
  if (!(r_max >= 15.0)) throw std::invalid_argument("solve_gn_radial: r_max must be >= 15");
  if (!(tol > 0.0) || tol > 1e-6)
    throw std::invalid_argument("solve_gn_radial: tol must be in (0, 1e-6]");
  const long steps = 40000;
  const double h = r_max / steps;

  double lo = 0.1, hi = 10.0;
  using detail::ShotOutcome;
  if (detail::gn_shoot(lo, r_max, steps, nullptr) != ShotOutcome::Diverged ||
      detail::gn_shoot(hi, r_max, steps, nullptr) != ShotOutcome::Crossed)
    throw std::runtime_error("solve_gn_radial: no bracket");

  int iters = 0;
  while (iters < 200) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;  // bracket at machine precision
    ++iters;
    if (detail::gn_shoot(mid, r_max, steps, nullptr) == ShotOutcome::Crossed)
      hi = mid;
    else
      lo = mid;
  }
  const double q_peak = 0.5 * (lo + hi);

  RadialProfile prof;
  prof.q_peak = q_peak;
  prof.r_max = r_max;
  prof.shoot_iterations = iters;
  prof.r_nodes.resize(steps + 1);
  for (long i = 0; i <= steps; ++i) prof.r_nodes[i] = i * h;
  detail::gn_shoot(q_peak, r_max, steps, &prof.values);

  // Hand the tail over to the Bessel K0 solution of the linearized equation
  // before shooting contamination sets in; blending over a window instead of
  // matching at one node keeps the derivative mismatch (amplified integrator
  // noise, ~1e-9) spread out and the discrete residual flat.
  long i_a = -1, i_b = -1;
  for (long i = 1; i <= steps; ++i) {
    const double q = prof.values[i];
    if (q <= 0.0) break;
    if (i_a < 0 && q <= 1e-4) i_a = i;
    if (q <= 1e-6) {
      i_b = i;
      break;
    }
  }
  if (i_a < 0 || i_b < 0) throw std::runtime_error("solve_gn_radial: non-converged");
  const double c_tail = prof.values[i_a] / std::cyl_bessel_k(0, prof.r_nodes[i_a]);
  const double r_a = prof.r_nodes[i_a], r_b = prof.r_nodes[i_b];
  for (long i = i_a + 1; i <= steps; ++i) {
    const double bessel = c_tail * std::cyl_bessel_k(0, prof.r_nodes[i]);
    if (i >= i_b) {
      prof.values[i] = bessel;
    } else {
      const double t = (prof.r_nodes[i] - r_a) / (r_b - r_a);
      const double w = t * t * (3.0 - 2.0 * t);
      prof.values[i] = (1.0 - w) * prof.values[i] + w * bessel;
    }
  }

  // extend the tail until it falls below the decay floor; small requested
  // domains would otherwise end above it
  while (prof.values.back() >= 1e-9 && prof.r_nodes.back() < r_max + 25.0) {
    const double r = prof.r_nodes.back() + h;
    prof.r_nodes.push_back(r);
    prof.values.push_back(c_tail * std::cyl_bessel_k(0, r));
  }
  prof.r_max = prof.r_nodes.back();
  const long last = static_cast<long>(prof.r_nodes.size()) - 1;

  // Discrete residual of -Q'' - Q'/r + Q - Q^3 over interior nodes, with
  // 4th-order stencils to match the integrator's order. Q is even in r, so
  // ghost nodes below the origin mirror the profile.
  double max_res = 0.0;
  const auto& v = prof.values;
  auto vv = [&](long i) { return v[i < 0 ? -i : i]; };
  for (long i = 1; i <= last - 2; ++i) {
    const double q = v[i];
    const double d2 =
        (-vv(i + 2) + 16.0 * vv(i + 1) - 30.0 * q + 16.0 * vv(i - 1) - vv(i - 2)) /
        (12.0 * h * h);
    const double d1 =
        (-vv(i + 2) + 8.0 * vv(i + 1) - 8.0 * vv(i - 1) + vv(i - 2)) / (12.0 * h);
    max_res = std::max(max_res, std::abs(-d2 - d1 / prof.r_nodes[i] + q - q * q * q));
  }
  if (max_res >= 100.0 * tol) throw std::runtime_error("solve_gn_radial: non-converged");
  if (!(prof.values.back() < 1e-8))
    throw std::runtime_error("solve_gn_radial: non-converged");
  return prof;
}

namespace detail {

inline double radial_trapezoid(const std::vector<double>& r, const std::vector<double>& f) {
  double acc = 0.0;
  for (size_t i = 1; i < r.size(); ++i)
    acc += 0.5 * (f[i] + f[i - 1]) * (r[i] - r[i - 1]);
  return acc;
}

}  // namespace detail

/// Quadrature of the profile's invariants on the radial grid. grad_sq uses
/// central differences of the stored values, an independent route from the
/// identity ||grad Q||^2 = ||Q||^2 it is later checked against.
inline GNConstants compute_gn_constants(const RadialProfile& prof,
                                        const std::vector<double>& p_list) {
  const auto& r = prof.r_nodes;
  const auto& q = prof.values;
  const size_t m = r.size();
  std::vector<double> f(m);

  GNConstants gn;
  for (size_t i = 0; i < m; ++i) f[i] = q[i] * q[i] * r[i];
  gn.a_star = 2.0 * pi * detail::radial_trapezoid(r, f);

  std::vector<double> dq(m);
  for (size_t i = 1; i + 1 < m; ++i) dq[i] = (q[i + 1] - q[i - 1]) / (r[i + 1] - r[i - 1]);
  dq[0] = 0.0;  // Q'(0) = 0
  dq[m - 1] = (q[m - 1] - q[m - 2]) / (r[m - 1] - r[m - 2]);
  for (size_t i = 0; i < m; ++i) f[i] = dq[i] * dq[i] * r[i];
  gn.grad_sq = 2.0 * pi * detail::radial_trapezoid(r, f);

  for (size_t i = 0; i < m; ++i) f[i] = q[i] * q[i] * q[i] * q[i] * r[i];
  gn.quartic = 2.0 * pi * detail::radial_trapezoid(r, f);

  for (double p : p_list) {
    if (!(p > 0.0)) throw std::invalid_argument("compute_gn_constants: p must be positive");
    for (size_t i = 0; i < m; ++i) f[i] = std::pow(r[i], p) * q[i] * q[i] * r[i];
    const double val = 2.0 * pi * detail::radial_trapezoid(r, f);
    if (!(val > 0.0) || !std::isfinite(val))
      throw std::runtime_error("compute_gn_constants: moment not finite");
    gn.moments[p] = val;
  }
  return gn;
}

inline double moment_or_throw(const GNConstants& gn, double p) {
  auto it = gn.moments.find(p);
  if (it == gn.moments.end())
    throw std::runtime_error("moment not computed");
  return it->second;
}

/// Blow-up prefactor for total-strength collapse with a common trap center.
inline double lambda_coefficient(double p0, double nu, const GNConstants& gn) {
  if (!(p0 > 0.0) || !(nu > 0.0))
    throw std::invalid_argument("lambda_coefficient: p0 and nu must be positive");
  return std::pow(0.5 * p0 * nu * moment_or_throw(gn, p0), 1.0 / (p0 + 2.0));
}

/// Blow-up prefactor for cross-strength collapse at fixed intra strengths.
inline double theta_coefficient(double p0, double nu, double c1, double c2,
                                const GNConstants& gn) {
  if (!(c1 > 0.0) || c1 >= 1.0 || !(c2 > 0.0) || c2 >= 1.0 ||
      std::abs(c1 + c2 - 1.0) > 1e-12)
    throw std::invalid_argument("theta_coefficient: need c1, c2 in (0,1) with c1+c2=1");
  return std::pow(p0 * nu / (4.0 * c1 * c2) * moment_or_throw(gn, p0), 1.0 / (p0 + 2.0));
}

/// Per-component blow-up prefactor for the decoupled one-component law.
inline double lambda_i(double p, const GNConstants& gn) {
  if (!(p > 0.0)) throw std::invalid_argument("lambda_i: p must be positive");
  return std::pow(0.5 * p * moment_or_throw(gn, p), 1.0 / (p + 2.0));
}

/// Monotone cubic (Fritsch-Carlson) interpolant of the radial profile;
/// evaluates to 0 beyond r_max. Preserves positivity and monotonicity.
class RadialInterpolant {
 public:
  explicit RadialInterpolant(const RadialProfile& prof)
      : r_(prof.r_nodes), y_(prof.values), d_(prof.r_nodes.size(), 0.0) {
    const size_t m = r_.size();
    std::vector<double> slope(m - 1);
    for (size_t i = 0; i + 1 < m; ++i) slope[i] = (y_[i + 1] - y_[i]) / (r_[i + 1] - r_[i]);
    d_[0] = slope[0];
    d_[m - 1] = slope[m - 2];
    for (size_t i = 1; i + 1 < m; ++i) {
      if (slope[i - 1] * slope[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        const double h0 = r_[i] - r_[i - 1], h1 = r_[i + 1] - r_[i];
        const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
        d_[i] = (w0 + w1) / (w0 / slope[i - 1] + w1 / slope[i]);
      }
    }
  }

  double operator()(double r) const {
    if (r >= r_.back()) return 0.0;
    if (r <= 0.0) return y_.front();
    const size_t i = std::min(
        static_cast<size_t>((r - r_.front()) / (r_[1] - r_[0])), r_.size() - 2);
    const double h = r_[i + 1] - r_[i];
    const double t = (r - r_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return y_[i] * (2 * t3 - 3 * t2 + 1) + h * d_[i] * (t3 - 2 * t2 + t) +
           y_[i + 1] * (-2 * t3 + 3 * t2) + h * d_[i + 1] * (t3 - t2);
  }

 private:
  std::vector<double> r_, y_, d_;
};

/// Unit-mass profile a*^{-1/2} ell Q(ell |x - center|) sampled on the grid and
/// renormalized so the discrete L2 norm is exactly 1.
inline Field2D q0_on_grid(const RadialInterpolant& q, const RadialProfile& prof,
                          const GNConstants& gn, const Grid2D& grid, double ell,
                          std::array<double, 2> center) {
  if (!(ell > 0.0)) throw std::invalid_argument("q0_on_grid: scale must be positive");
  const double corner = std::hypot(grid.half_width + std::abs(center[0]),
                                   grid.half_width + std::abs(center[1]));
  if (ell * corner > prof.r_max && !(prof.values.back() < 1e-8))
    throw std::runtime_error("q0_on_grid: profile does not cover grid");
  Field2D f(grid);
  const double amp = ell / std::sqrt(gn.a_star);
  for (int ix = 0; ix < grid.n; ++ix) {
    const double dx = grid.coord(ix) - center[0];
    for (int iy = 0; iy < grid.n; ++iy) {
      const double dy = grid.coord(iy) - center[1];
      f.at(ix, iy) = amp * q(ell * std::hypot(dx, dy));
    }
  }
  return normalize(std::move(f));
}

inline Field2D q0_on_grid(const RadialProfile& prof, const GNConstants& gn,
                          const Grid2D& grid, double ell, std::array<double, 2> center) {
  RadialInterpolant q(prof);
  return q0_on_grid(q, prof, gn, grid, ell, center);
}

}  // namespace collapse
