#include <cstring>
#include <iostream>
#include <string>

#include "collapse/run.hpp"

namespace {

void usage(std::ostream& out) {
  out << "usage: collapse-lab <command> [--config FILE] [--out DIR] [key=value ...]\n"
         "\n"
         "commands:\n"
         "  gn           solve the radial ground-state profile and its constants\n"
         "  minimize     compute a two-component ground state by gradient flow\n"
         "  scan-a       total-strength collapse sweep (attractive cross term)\n"
         "  scan-b       cross-strength collapse sweep at fixed intra strengths\n"
         "  scan-c       per-component collapse sweep with separated traps\n"
         "  check        inequality property suites\n"
         "  hartree-gap  convolution-vs-local energy gap across particle counts\n"
         "\n"
         "config files hold one `key = value` pair per line; `#` starts a comment.\n"
         "command-line key=value pairs override file values. numbers must be plain\n"
         "decimal literals. COLLAPSE_LAB_THREADS mirrors the threads key.\n"
         "\n"
         "exit codes: 0 criteria pass, 1 criteria fail, 2 config error, 3 numerical\n"
         "failure.\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace collapse;
  if (argc < 2 || std::strcmp(argv[1], "--help") == 0 || std::strcmp(argv[1], "-h") == 0) {
    usage(argc < 2 ? std::cerr : std::cout);
    return argc < 2 ? 2 : 0;
  }

  RunConfig cfg;
  cfg.command = argv[1];
  cfg.threads = env_default_threads();

  try {
    // the config file loads first so command-line pairs override it
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    for (int i = 2; i < argc; ++i) {
      const std::string arg = argv[i];
      auto next = [&](const char* flag) {
        if (i + 1 >= argc) throw ConfigError(std::string(flag) + " needs a value");
        return std::string(argv[++i]);
      };
      if (arg == "--config") {
        config_path = next("--config");
      } else if (arg == "--out") {
        cfg.out_dir = next("--out");
      } else if (arg == "--help" || arg == "-h") {
        usage(std::cout);
        return 0;
      } else if (arg.find('=') != std::string::npos && arg.rfind("--", 0) != 0) {
        const auto eq = arg.find('=');
        overrides.push_back({arg.substr(0, eq), arg.substr(eq + 1)});
      } else {
        throw ConfigError("unrecognized argument: " + arg);
      }
    }
    if (!config_path.empty()) load_config_file(cfg, config_path);
    for (const auto& [k, v] : overrides) detail::apply_key(cfg, k, v);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    usage(std::cerr);
    return 2;
  }

  return run_command(std::move(cfg));
}
