#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "collapse/run.hpp"

using namespace collapse;
namespace fsys = std::filesystem;

namespace {

fsys::path temp_dir(const std::string& tag) {
  const fsys::path p = fsys::temp_directory_path() / ("collapse_test_" + tag);
  fsys::remove_all(p);
  fsys::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing") {
  SECTION("key = value file with comments") {
    const fsys::path dir = temp_dir("cfg");
    const fsys::path file = dir / "run.config";
    std::ofstream(file) << "# comment line\n"
                           "L = 8\n"
                           "n = 128\n"
                           "a1 = 3.5  # trailing comment\n"
                           "mode = nls\n";
    RunConfig cfg;
    load_config_file(cfg, file);
    CHECK(cfg.box_half_width == 8.0);
    CHECK(cfg.grid_n == 128);
    CHECK(cfg.params.a1 == 3.5);
  }

  SECTION("expressions are rejected") {
    RunConfig cfg;
    CHECK_THROWS_AS(detail::apply_key(cfg, "a1", "0.8*"), ConfigError);
    CHECK_THROWS_AS(detail::apply_key(cfg, "a1", "2*11.7"), ConfigError);
    CHECK_THROWS_AS(detail::apply_key(cfg, "n", "1e2"), ConfigError);
  }

  SECTION("unknown keys are rejected by name") {
    RunConfig cfg;
    CHECK_THROWS_WITH(detail::apply_key(cfg, "alpha9", "1.0"),
                      Catch::Matchers::ContainsSubstring("unknown key: alpha9"));
  }

  SECTION("constraint violations name the condition") {
    RunConfig cfg;
    cfg.command = "minimize";
    detail::apply_key(cfg, "a1", "15.0");
    CHECK_THROWS_WITH(validate_config(cfg, 11.7),
                      Catch::Matchers::ContainsSubstring("a1 < a*"));
    RunConfig bad;
    bad.command = "minimize";
    detail::apply_key(bad, "c1", "1.5");
    CHECK_THROWS_WITH(validate_config(bad), Catch::Matchers::ContainsSubstring("c1"));
  }
}

TEST_CASE("run_command error contract") {
  SECTION("unknown command exits 2") {
    RunConfig cfg;
    cfg.command = "frobnicate";
    cfg.out_dir = temp_dir("badcmd");
    std::ostringstream err;
    CHECK(run_command(cfg, err) == 2);
    CHECK(err.str().find("unknown command") != std::string::npos);
  }

  SECTION("numerical failures exit 3") {
    RunConfig cfg;
    cfg.command = "minimize";
    cfg.out_dir = temp_dir("numfail");
    cfg.grid_n = 64;
    cfg.box_half_width = 8.0;
    // Hartree kernel far narrower than the coarse grid
    cfg.params.mode = InteractionMode::Hartree;
    cfg.params.particle_count = 1e6;
    cfg.params.beta = 0.5;
    cfg.params.s1 = cfg.params.s2 = cfg.params.s12 = 0.5;
    std::ostringstream err;
    CHECK(run_command(cfg, err) == 3);
    CHECK(err.str().find("kernel narrower than grid") != std::string::npos);
  }
}

TEST_CASE("gn command artifacts and determinism") {
  RunConfig cfg;
  cfg.command = "gn";
  cfg.box_half_width = 10.0;
  cfg.grid_n = 128;
  cfg.raw["L"] = "10";
  cfg.raw["n"] = "128";
  const fsys::path d1 = temp_dir("gn1"), d2 = temp_dir("gn2");

  cfg.out_dir = d1;
  std::ostringstream err;
  const int code1 = run_command(cfg, err);
  cfg.out_dir = d2;
  const int code2 = run_command(cfg, err);
  INFO(err.str());
  CHECK(code1 == 0);
  CHECK(code2 == 0);

  for (const char* name : {"gn_profile.csv", "gn_constants.json", "resolved.config",
                           "summary.json"}) {
    CAPTURE(name);
    REQUIRE(fsys::exists(d1 / name));
    CHECK(read_text(d1 / name) == read_text(d2 / name));
  }
  CHECK(read_text(d1 / "resolved.config").find("L = 10") != std::string::npos);
}

TEST_CASE("minimize command writes fields that re-import") {
  RunConfig cfg;
  cfg.command = "minimize";
  cfg.out_dir = temp_dir("minrun");
  cfg.box_half_width = 8.0;
  cfg.grid_n = 64;
  cfg.r_max = 16.0;  // short domain: the solver extends the tail to the floor
  cfg.params.a1 = 2.0;
  cfg.params.a2 = 1.0;
  cfg.flow.seed = 7;
  std::ostringstream err;
  REQUIRE(run_command(cfg, err) == 0);

  const Field2D u1 = read_field_csv(cfg.out_dir / "u1.csv", cfg.out_dir / "u1.json");
  CHECK(u1.grid.n == 64);
  CHECK(mass(u1) == Catch::Approx(1.0).epsilon(1e-10));

  const auto summary = nlohmann::json::parse(read_text(cfg.out_dir / "summary.json"));
  CHECK(summary.at("pass").get<bool>());
  CHECK(fsys::exists(cfg.out_dir / "flow_trace.csv"));
  CHECK(fsys::exists(cfg.out_dir / "energy.json"));
}
