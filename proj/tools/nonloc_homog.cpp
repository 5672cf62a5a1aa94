#include "nonloc/commands.hpp"
#include "nonloc/parallel.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal periodic homogenization toolkit"};
  std::string command, config_path, out_dir = ".";
  int threads = 1;
  app.add_option("command", command, "effective | constants | dispersion | verify")
      ->required()
      ->check(CLI::IsMember({"effective", "constants", "dispersion", "verify"}));
  app.add_option("--config", config_path, "run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return nonloc::kExitConfigError;
  }

  nonloc::set_thread_count(threads);
  try {
    const nonloc::RunConfig cfg = nonloc::load_config(config_path);
    const nonloc::CommandResult res = nonloc::run_command(command, cfg, out_dir);
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
    for (const auto& f : res.failures) std::cout << "FAILED " << f << "\n";
    std::cout << command << ": " << (res.exit_code == nonloc::kExitPass ? "pass" : "fail") << "\n";
    return res.exit_code;
  } catch (const nonloc::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nonloc::kExitConfigError;
  } catch (const nonloc::NonPositiveLowerBound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nonloc::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return nonloc::kExitCheckFailed;
  }
}
