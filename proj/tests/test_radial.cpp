#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "collapse/radial.hpp"

using namespace collapse;

// Frozen oracle values: independent adaptive-RK shooting plus adaptive
// quadrature, run separately from this build.
namespace oracle {
constexpr double q_peak = 2.20620086465;
constexpr double a_star = 11.70089652;
constexpr double m2 = 13.89486163;
constexpr double m4 = 50.77898188;
}  // namespace oracle

namespace {
const RadialProfile& profile() {
  static RadialProfile p = solve_gn_radial(20.0, 1e-8);
  return p;
}
const GNConstants& constants() {
  static GNConstants gn = compute_gn_constants(profile(), {2.0, 4.0});
  return gn;
}
}  // namespace

TEST_CASE("gn shooting") {
  const RadialProfile& p = profile();
  CHECK(p.q_peak == Catch::Approx(oracle::q_peak).epsilon(1e-7));
  CHECK(p.values.back() < 1e-8);
  CHECK(p.values.front() == p.q_peak);
  CHECK(p.shoot_iterations > 20);

  // radial decreasing and strictly positive
  bool monotone = true, positive = true;
  for (size_t i = 1; i < p.values.size(); ++i) {
    if (p.values[i] > p.values[i - 1] + 1e-14) monotone = false;
    if (!(p.values[i] > 0.0)) positive = false;
  }
  CHECK(monotone);
  CHECK(positive);

  SECTION("euler-lagrange residual against the profile itself") {
    // integral of (-lap Q + Q - Q^3) Q over the plane, radial quadrature
    const auto& r = p.r_nodes;
    const auto& q = p.values;
    const double h = r[1] - r[0];
    double acc = 0.0;
    for (size_t i = 1; i + 1 < q.size(); ++i) {
      const double d2 = (q[i + 1] - 2.0 * q[i] + q[i - 1]) / (h * h);
      const double d1 = (q[i + 1] - q[i - 1]) / (2.0 * h);
      acc += (-d2 - d1 / r[i] + q[i] - q[i] * q[i] * q[i]) * q[i] * r[i] * h;
    }
    acc *= 2.0 * pi;
    CHECK(std::abs(acc) < 1e-5 * oracle::a_star);
  }

  SECTION("precondition violations") {
    CHECK_THROWS_AS(solve_gn_radial(10.0, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(solve_gn_radial(20.0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(solve_gn_radial(20.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("gn constants") {
  const GNConstants& gn = constants();
  CHECK(gn.a_star == Catch::Approx(oracle::a_star).epsilon(1e-5));
  CHECK(gn.moments.at(2.0) == Catch::Approx(oracle::m2).epsilon(1e-4));
  CHECK(gn.moments.at(4.0) == Catch::Approx(oracle::m4).epsilon(1e-4));

  // identities ||grad Q||^2 = 1/2 ||Q||_4^4 = ||Q||^2
  CHECK(std::abs(gn.grad_sq - gn.a_star) / gn.a_star < 1e-3);
  CHECK(std::abs(0.5 * gn.quartic - gn.a_star) / gn.a_star < 1e-3);
  CHECK(gn.grad_sq / gn.a_star > 0.999);
  CHECK(gn.grad_sq / gn.a_star < 1.001);
}

TEST_CASE("blow-up coefficients") {
  const GNConstants& gn = constants();
  const double m2 = gn.moments.at(2.0);
  const double m4 = gn.moments.at(4.0);

  CHECK(lambda_coefficient(2.0, 1.0, gn) == Catch::Approx(std::pow(m2, 0.25)));
  CHECK(lambda_coefficient(2.0, 2.0, gn) == Catch::Approx(std::pow(2.0 * m2, 0.25)));

  CHECK(theta_coefficient(2.0, 1.0, 0.5, 0.5, gn) == Catch::Approx(std::pow(2.0 * m2, 0.25)));
  CHECK(theta_coefficient(2.0, 1.0, 0.5, 0.5, gn) /
            lambda_coefficient(2.0, 1.0, gn) ==
        Catch::Approx(std::pow(2.0, 0.25)));
  CHECK(theta_coefficient(2.0, 1.0, 0.3, 0.7, gn) ==
        Catch::Approx(std::pow(2.0 * m2 / (4.0 * 0.21), 0.25)));

  CHECK(lambda_i(2.0, gn) == Catch::Approx(lambda_coefficient(2.0, 1.0, gn)));
  CHECK(lambda_i(4.0, gn) == Catch::Approx(std::pow(2.0 * m4, 1.0 / 6.0)));

  // monotone in nu and in the moment
  CHECK(lambda_coefficient(2.0, 2.0, gn) > lambda_coefficient(2.0, 1.0, gn));
  GNConstants bigger = gn;
  bigger.moments[2.0] *= 1.5;
  CHECK(lambda_coefficient(2.0, 1.0, bigger) > lambda_coefficient(2.0, 1.0, gn));

  CHECK_THROWS_WITH(lambda_coefficient(3.0, 1.0, gn),
                    Catch::Matchers::ContainsSubstring("moment not computed"));
}

TEST_CASE("q0 on grid") {
  const Grid2D g = build_grid(8.0, 128);
  const Field2D q0 = q0_on_grid(profile(), constants(), g, 1.0, {0.0, 0.0});

  CHECK(mass(q0) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(l2_distance(q0, q0) == 0.0);

  // peak value matches q_peak / sqrt(a_star)
  CHECK(q0.at(g.n / 2, g.n / 2) ==
        Catch::Approx(oracle::q_peak / std::sqrt(oracle::a_star)).epsilon(1e-3));

  // kinetic energy scales like ell^2
  const Field2D q0w = q0_on_grid(profile(), constants(), g, 2.0, {0.0, 0.0});
  CHECK(kinetic_energy(q0w) / kinetic_energy(q0) == Catch::Approx(4.0).epsilon(5e-3));

  // interpolant preserves monotonicity along a ray
  const RadialInterpolant interp(profile());
  double prev = interp(0.0);
  bool mono = true;
  for (double r = 0.05; r < 19.0; r += 0.05) {
    const double v = interp(r);
    if (v > prev + 1e-14) mono = false;
    prev = v;
  }
  CHECK(mono);
}
