#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "collapse/sweeps.hpp"

using namespace collapse;

namespace {
const RadialProfile& profile() {
  static RadialProfile p = solve_gn_radial(20.0, 1e-8);
  return p;
}
const GNConstants& constants() {
  static GNConstants gn = compute_gn_constants(profile(), {2.0});
  return gn;
}
}  // namespace

TEST_CASE("fit_power_law") {
  SECTION("exact power law") {
    std::vector<std::pair<double, double>> pts;
    for (double e : {0.1, 0.05, 0.02, 0.01, 0.005})
      pts.push_back({e, 3.0 * std::sqrt(e)});
    const PowerLawFit f = fit_power_law(pts);
    CHECK(f.exponent == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(f.prefactor == Catch::Approx(3.0).epsilon(1e-12));
    CHECK(f.r_squared == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(f.points_used == 5);
  }

  SECTION("perturbed power law biases the exponent upward") {
    std::vector<std::pair<double, double>> pts;
    for (double e : {0.1, 0.05, 0.02, 0.01})
      pts.push_back({e, 3.0 * std::sqrt(e) * (1.0 + e)});
    const PowerLawFit f = fit_power_law(pts);
    CHECK(f.exponent > 0.5);
    CHECK(f.exponent < 0.6);
  }

  SECTION("non-positive values are excluded with a count") {
    std::vector<std::pair<double, double>> pts = {
        {0.1, 1.0}, {0.05, 0.7}, {0.02, -0.1}, {0.01, 0.3}, {0.005, 0.2}};
    const PowerLawFit f = fit_power_law(pts);
    CHECK(f.excluded == 1);
    CHECK(f.points_used == 4);
  }

  SECTION("too few points is an error") {
    CHECK_THROWS_AS(fit_power_law({{0.1, 1.0}}), std::invalid_argument);
  }
}

TEST_CASE("geometric epsilons") {
  const auto eps = geometric_epsilons(0.1, 0.5, 6);
  REQUIRE(eps.size() == 6);
  CHECK(eps.front() == Catch::Approx(0.1));
  CHECK(eps.back() == Catch::Approx(0.003125));
  CHECK_THROWS_AS(geometric_epsilons(0.1, 1.5, 4), std::invalid_argument);
}

TEST_CASE("decay fit") {
  const Grid2D g = build_grid(10.0, 256);

  SECTION("exact exponential tail") {
    Field2D f(g);
    for (int ix = 0; ix < g.n; ++ix)
      for (int iy = 0; iy < g.n; ++iy) {
        const double r = std::hypot(g.coord(ix), g.coord(iy));
        f.at(ix, iy) = std::exp(-3.0 * r);
      }
    const DecayFit df = decay_fit(f, {0.0, 0.0}, 1.0, 6.0);
    CHECK(df.mu == Catch::Approx(3.0).epsilon(0.01));
    CHECK(df.r_squared > 0.999);
  }

  SECTION("gaussian is flagged by a poor linear fit") {
    const double w = 1.5;
    Field2D f(g);
    for (int ix = 0; ix < g.n; ++ix)
      for (int iy = 0; iy < g.n; ++iy) {
        const double r2 = g.coord(ix) * g.coord(ix) + g.coord(iy) * g.coord(iy);
        f.at(ix, iy) = std::exp(-r2 / (2.0 * w * w));
      }
    const DecayFit dg = decay_fit(f, {0.0, 0.0}, 0.7 * w, 5.2 * w);
    CHECK(dg.mu > 0.0);
    CHECK(dg.r_squared < 0.99);  // super-exponential decay bends the line
  }

  SECTION("window under the noise floor fails") {
    Field2D f(g);
    for (double& v : f.values) v = 1e-14;
    CHECK_THROWS_WITH(decay_fit(f, {0.0, 0.0}, 1.0, 5.0),
                      Catch::Matchers::ContainsSubstring("tail under floor"));
  }

  SECTION("window leaving the domain is rejected") {
    Field2D f(g);
    for (double& v : f.values) v = 1.0;
    CHECK_THROWS_AS(decay_fit(f, {8.0, 0.0}, 1.0, 5.0), std::invalid_argument);
  }
}

TEST_CASE("hartree gap ladder") {
  const Grid2D g = build_grid(6.0, 512);
  SpectralWorkspace ws(g);
  auto gauss = [&](double w, double cx, double cy) {
    Field2D f(g);
    for (int ix = 0; ix < g.n; ++ix)
      for (int iy = 0; iy < g.n; ++iy) {
        const double dx = g.coord(ix) - cx, dy = g.coord(iy) - cy;
        f.at(ix, iy) = std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
      }
    return normalize(std::move(f));
  };
  const TwoComponentState state{gauss(1.0, 0.3, -0.2), gauss(1.4, -0.4, 0.1)};
  ModelParams base;
  base.a1 = base.a2 = 4.0;
  base.a12 = 2.0;
  base.beta = 0.2;
  base.s1 = base.s2 = base.s12 = 1.0;
  const std::vector<double> n_list{64, 128, 256, 512, 1024};

  const HartreeGapScan scan = hartree_vs_nls_gap(base, state, n_list, ws);
  REQUIRE(scan.samples.size() == 5);

  // gap decreases along the ladder and extrapolates to zero
  for (size_t i = 1; i < scan.samples.size(); ++i)
    CHECK(scan.samples[i].second < scan.samples[i - 1].second);
  CHECK(scan.samples.back().second < 0.02);
  CHECK(scan.fit.exponent < 0.0);

  // steeper concentration steepens the decay
  ModelParams steep = base;
  steep.beta = 0.3;
  const HartreeGapScan scan3 = hartree_vs_nls_gap(steep, state, n_list, ws);
  CHECK(scan3.fit.exponent < scan.fit.exponent);

  // under-resolved tail of the ladder is truncated, not evaluated
  ModelParams narrow = base;
  narrow.s1 = narrow.s2 = narrow.s12 = 0.5;
  const HartreeGapScan trunc = hartree_vs_nls_gap(narrow, state, {64, 1e8}, ws);
  CHECK(trunc.truncated == 1);
  CHECK(trunc.samples.size() == 1);
}

TEST_CASE("regime a smoke sweep") {
  const GNConstants& gn = constants();
  ModelParams base;
  base.a12 = 0.1 * gn.a_star;
  FlowSettings fs;
  fs.seed = 3;
  SweepContext ctx{&profile(), &gn, build_grid(8.0, 128), fs, 2, nullptr};
  const auto points = scan_regime_a(base, {0.2, 0.1, 0.05}, ctx);
  REQUIRE(points.size() == 3);
  for (const auto& p : points) {
    CHECK_FALSE(p.flagged);
    CHECK(p.converged);
    CHECK(p.energy > 0.0);
    CHECK(p.dist1 < 0.2);
    CHECK(p.sym_gap < 1e-10);  // symmetric split keeps the components equal
  }
  CHECK(points[1].energy < points[0].energy);
  CHECK(points[2].energy < points[1].energy);
  CHECK(points[2].ell1 == Catch::Approx(lambda_coefficient(2.0, 1.0, gn) *
                                        std::pow(0.05, -0.25)));
}
