#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spdc/cli/config.hpp"
#include "spdc/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fiber-coupling figures of merit for pulsed SPDC sources"};
  std::string command, config_path, out_path, format;
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "FOM, SWEEP, OPTIMIZE, XI_CURVE, SPECTRAL or SELFTEST")->required();
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_path, "output file (default: [run] output_path, else stdout)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}, CLI::ignore_case));
  app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Monte Carlo seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cmd = spdc::cli::parse_command(command);
    if (!cmd) throw spdc::Error(spdc::ErrorCode::kInvalidArgument, "unknown command '" + command + "'");
    spdc::cli::RunConfig config = spdc::cli::parse_config(spdc::cli::read_file(config_path), cmd);
    if (!out_path.empty()) config.output_path = out_path;
    if (!format.empty()) config.output_format = *spdc::cli::parse_format(format);
    if (seed) config.seed = *seed;

    const spdc::cli::RunResult result = spdc::cli::run(config, threads);
    spdc::cli::write_output(config.output_path, spdc::cli::serialize(config, result.table));
    if (result.checks_failed) std::cerr << "selftest: one or more checks failed\n";
    if (result.nonconverged) std::cerr << "warning: some results did not reach the requested tolerance\n";
    return result.exit_code();
  } catch (const spdc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
