// Acceptance gate: runs every lab-level criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "collapse/run.hpp"

using namespace collapse;
namespace fsys = std::filesystem;

namespace {

struct Gate {
  int failures = 0;

  void check(const std::string& id, bool pass, const std::string& detail) {
    std::printf("[%s] %s%s%s\n", pass ? "PASS" : "FAIL", id.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }

  // lifts every criterion of a command summary into gate lines
  void from_summary(const std::string& prefix, const nlohmann::json& summary) {
    for (const auto& [name, entry] : summary.at("criteria").items()) {
      std::string detail;
      for (const auto& [k, v] : entry.items())
        if (k != "pass") detail += k + "=" + v.dump() + " ";
      check(prefix + "." + name, entry.at("pass").get<bool>(), detail);
    }
  }
};

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

nlohmann::json run_and_load(RunConfig cfg, Gate& gate, const std::string& id,
                            int expected_worst = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_command(cfg);
  const double dt = elapsed_since(t0);
  std::printf("       %s finished in %.1f s (exit %d)\n", id.c_str(), dt, code);
  std::fflush(stdout);
  if (code > expected_worst)
    gate.check(id + ".run", false, "command failed with exit " + std::to_string(code));
  return nlohmann::json::parse(read_text(cfg.out_dir / "summary.json"));
}

RunConfig scan_a_config(const fsys::path& out) {
  RunConfig cfg;
  cfg.command = "scan-a";
  cfg.out_dir = out;
  cfg.box_half_width = 8.0;
  cfg.grid_n = 256;
  cfg.eps_first = 0.1;
  cfg.eps_ratio = 0.5;
  cfg.eps_count = 6;
  cfg.flow.seed = 1234;
  cfg.threads = env_default_threads();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  const fsys::path out = argc > 1 ? argv[1] : "acceptance_out";
  fsys::create_directories(out);
  Gate gate;

  // ---- A1: radial ground-state constants -------------------------------
  {
    RunConfig cfg;
    cfg.command = "gn";
    cfg.out_dir = out / "a1";
    cfg.box_half_width = 10.0;
    cfg.grid_n = 256;
    const auto summary = run_and_load(cfg, gate, "A1");
    gate.from_summary("A1", summary);
  }

  // ---- A2: regime A scaling law -----------------------------------------
  {
    const auto summary = run_and_load(scan_a_config(out / "a2_run1"), gate, "A2");
    gate.from_summary("A2", summary);
  }

  // ---- A3: regime B scaling law -----------------------------------------
  {
    RunConfig cfg = scan_a_config(out / "a3");
    cfg.command = "scan-b";
    const auto summary = run_and_load(cfg, gate, "A3");
    gate.from_summary("A3", summary);
  }

  // ---- A4: regime C sandwich, per-component laws, tails ------------------
  {
    RunConfig cfg = scan_a_config(out / "a4");
    cfg.command = "scan-c";
    const auto summary = run_and_load(cfg, gate, "A4");
    gate.from_summary("A4", summary);
  }

  // ---- A5: convolution-to-local rate ------------------------------------
  {
    RunConfig cfg;
    cfg.command = "hartree-gap";
    cfg.out_dir = out / "a5";
    cfg.params.beta = 0.2;
    cfg.threads = env_default_threads();
    const auto summary = run_and_load(cfg, gate, "A5");
    gate.from_summary("A5", summary);
  }

  // ---- A6: inequality property suites ------------------------------------
  {
    RunConfig cfg;
    cfg.command = "check";
    cfg.out_dir = out / "a6";
    cfg.flow.seed = 99;
    const auto summary = run_and_load(cfg, gate, "A6");
    gate.from_summary("A6", summary);
  }

  // ---- A7: gradient correctness across all functional modes --------------
  {
    const Grid2D g = build_grid(6.0, 128);
    SpectralWorkspace ws(g);
    std::mt19937_64 rng(4242);
    double worst = 0.0;
    bool ok = true;
    for (int mode = 0; mode < 3; ++mode) {
      ModelParams mp;
      mp.c1 = 0.4;
      mp.c2 = 0.6;
      mp.a1 = 3.0;
      mp.a2 = 2.0;
      mp.a12 = -1.5;
      mp.trap2 = Trap{4.0, {0.5, -0.25}};
      mp.mode = mode == 0 ? InteractionMode::NLS
                          : mode == 1 ? InteractionMode::Hartree
                                      : InteractionMode::ModifiedHartree;
      mp.particle_count = 64;
      mp.s1 = 0.8;
      mp.s2 = 1.0;
      mp.s12 = 0.9;
      TwoComponentState s{normalize(random_smooth_field(g, rng)),
                          normalize(random_smooth_field(g, rng))};
      const auto [g1, g2] = gradient(s, mp, ws);
      const double eps = 1e-5;
      for (int d = 0; d < 20; ++d) {
        const Field2D phi1 = random_smooth_field(g, rng);
        const Field2D phi2 = random_smooth_field(g, rng);
        TwoComponentState sp = s, sm = s;
        for (long j = 0; j < g.size(); ++j) {
          sp.u1.values[j] += eps * phi1.values[j];
          sp.u2.values[j] += eps * phi2.values[j];
          sm.u1.values[j] -= eps * phi1.values[j];
          sm.u2.values[j] -= eps * phi2.values[j];
        }
        const double fd =
            (energy(sp, mp, ws).total - energy(sm, mp, ws).total) / (2.0 * eps);
        const double ip = inner(g1, phi1) + inner(g2, phi2);
        const double rel = std::abs(fd - ip) / std::max(std::abs(ip), 1e-300);
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-6;
      }
    }
    gate.check("A7.gradient_matches_finite_differences", ok,
               "worst relative gap " + fmt17(worst) + " over 20 directions x 3 modes");
  }

  // ---- A8: bit-stable reruns of the regime A sweep ------------------------
  {
    const auto t0 = std::chrono::steady_clock::now();
    run_command(scan_a_config(out / "a2_run2"));
    std::printf("       A8 rerun finished in %.1f s\n", elapsed_since(t0));
    bool identical = true;
    std::string diff;
    for (const char* name : {"scan.csv", "fit.json", "resolved.config"}) {
      const auto p1 = out / "a2_run1" / name, p2 = out / "a2_run2" / name;
      if (!fsys::exists(p1) || !fsys::exists(p2) || read_text(p1) != read_text(p2)) {
        identical = false;
        diff = name;
      }
    }
    gate.check("A8.identical_runs_byte_identical", identical,
               identical ? "scan.csv, fit.json, resolved.config" : "differs: " + diff);
  }

  std::printf("%d criterion failure(s)\n", gate.failures);
  return gate.failures;
}
