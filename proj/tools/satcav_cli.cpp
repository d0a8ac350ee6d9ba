// satcav: steady-state spectra, bistability and stabilization linewidths
// of a standing-wave cavity with Doppler-broadened two-level atoms.

#include "satcav/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

bool write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state cavity saturated-absorption solver"};
  std::string mode, config_path, out_path;
  int workers = satcav::default_workers();
  std::optional<int> l_max, vel_nodes;

  app.add_option("mode", mode, "Run mode")
      ->required()
      ->check(CLI::IsMember(satcav::known_modes()));
  app.add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "CSV output path (summary goes next to it as .json)");
  app.add_option("--workers", workers, "Worker threads (default from SATCAV_WORKERS)")
      ->check(CLI::PositiveNumber);
  app.add_option("--l-max", l_max, "Floquet truncation order (even)");
  app.add_option("--vel-nodes", vel_nodes, "Velocity quadrature bulk nodes")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : satcav::exit_usage;
  }

  std::ifstream in(config_path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();

  satcav::RunConfig cfg;
  try {
    cfg = satcav::parse_config(buffer.str(), mode, {l_max, vel_nodes});
  } catch (const satcav::Error& e) {
    std::cerr << "satcav: " << config_path << ": " << e.what() << '\n';
    return satcav::exit_usage;
  }

  satcav::RunOptions opt;
  opt.workers = workers;
  const auto t0 = std::chrono::steady_clock::now();
  satcav::RunOutcome result = satcav::run(cfg, opt);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.summary["workers"] = workers;
  result.summary["elapsed_s"] = seconds;

  std::filesystem::path csv_path = !out_path.empty()          ? out_path
                                   : !cfg.output.path.empty() ? cfg.output.path
                                                              : mode + ".csv";
  std::filesystem::path json_path = csv_path;
  json_path.replace_extension(".json");
  if (cfg.output.format == "json") {
    // data rows travel inside the summary
    result.summary["csv"] = result.csv;
    if (!write_file(json_path, result.summary.dump(2) + "\n")) {
      std::cerr << "satcav: cannot write " << json_path << '\n';
      return satcav::exit_io;
    }
  } else {
    result.summary["csv_path"] = csv_path.string();
    if ((result.exit_code == satcav::exit_ok || result.exit_code == satcav::exit_point_failures) &&
        !write_file(csv_path, result.csv)) {
      std::cerr << "satcav: cannot write " << csv_path << '\n';
      return satcav::exit_io;
    }
    if (!write_file(json_path, result.summary.dump(2) + "\n")) {
      std::cerr << "satcav: cannot write " << json_path << '\n';
      return satcav::exit_io;
    }
  }

  if (result.summary.contains("error"))
    std::cerr << "satcav: " << result.summary["error"].get<std::string>() << '\n';
  else if (result.failures)
    std::cerr << "satcav: " << result.failures << " point(s) failed, see " << json_path << '\n';
  return result.exit_code;
}
