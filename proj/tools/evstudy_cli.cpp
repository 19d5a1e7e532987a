// evstudy: run an event study from a configuration file, run a size/power
// simulation, or check a configuration.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "evstudy/config.hpp"
#include "evstudy/error.hpp"
#include "evstudy/report.hpp"
#include "evstudy/synthlab.hpp"

namespace fs = std::filesystem;
using namespace evstudy;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;

std::vector<OutputFormat> pick_formats(const std::vector<OutputFormat>& configured,
                                       const std::string& flag) {
  if (flag.empty()) return configured;
  const auto f = parse_output_format(flag);
  if (!f) throw ConfigError("unknown format '" + flag + "'");
  return {*f};
}

int cmd_run(const std::string& config_path, const std::string& out_dir, const std::string& format,
            std::optional<std::uint64_t> seed, bool verbose) {
  StudyConfig config = load_config(config_path);
  if (seed) {
    if (!config.synthetic) throw ConfigError("--seed applies only to synthetic configurations");
    config.synthetic->seed = *seed;
  }
  const auto formats = pick_formats(config.formats, format);
  const fs::path dir = out_dir.empty() ? config.output_path() : fs::path(out_dir);
  if (verbose) {
    std::cerr << "config " << config_path << " hash " << config_hash(config) << '\n';
  }
  const auto report = run_study(config);
  if (verbose) {
    for (const auto& s : report.sectors) {
      std::cerr << "  " << s.sector_id << ": " << (s.ok ? "ok" : "FAILED " + s.error) << '\n';
    }
  }
  for (const auto f : formats) {
    for (const auto& p : render_tables(report, dir, f)) {
      if (verbose) std::cerr << "wrote " << p.string() << '\n';
    }
  }
  if (!report.half_widths.empty() && report.half_widths.back() >= 5) {
    for (const auto& p : emit_car_curves(report, dir)) {
      if (verbose) std::cerr << "wrote " << p.string() << '\n';
    }
  }
  std::cout << report.sectors.size() - report.failed_sectors() << "/" << report.sectors.size()
            << " sectors ok; output in " << dir.string() << '\n';
  for (const auto& s : report.sectors) {
    if (!s.ok) std::cout << "error: " << s.sector_id << ": " << s.error << '\n';
  }
  return exit_code(report);
}

int cmd_simulate(const std::string& plan_path, const std::string& out_dir, const std::string& format,
                 std::optional<std::size_t> threads, bool verbose) {
  auto plan = load_simulation_plan(plan_path);
  if (threads) plan.options.threads = *threads;
  const auto formats = pick_formats(plan.formats, format);
  fs::path dir = out_dir;
  if (dir.empty()) {
    if (!plan.output_directory.empty()) {
      dir = plan.output_directory;
    } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
      dir = env;
    } else {
      dir = kDefaultOutputDir;
    }
  }
  if (verbose) {
    std::cerr << plan.cells.size() << " cells x " << plan.options.replications
              << " replications on " << plan.options.threads << " threads\n";
  }
  const auto table = size_power_study(plan.cells, plan.options);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("output directory '" + dir.string() + "' is not writable");
  for (const auto f : formats) {
    const auto path = dir / ("rejection_rates." + std::string(file_extension(f)));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    if (f == OutputFormat::Json) {
      write_rejection_json(out, table);
    } else {
      write_rejection_csv(out, table);
    }
    if (verbose) std::cerr << "wrote " << path.string() << '\n';
  }
  std::printf("%-20s %-12s %8s %8s\n", "cell", "statistic", "rate", "mc_se");
  for (const auto& r : table.rows) {
    std::printf("%-20s %-12s %8.4f %8.4f\n", r.cell.c_str(), r.statistic.c_str(), r.rate,
                r.mc_standard_error);
  }
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  const auto config = load_config(config_path);
  validate_config(config);
  auto check = [&](const std::string& file) {
    if (!fs::is_regular_file(config.resolve(file))) {
      throw ConfigError("data file not found: " + config.resolve(file).string());
    }
  };
  for (const auto& s : config.sectors) check(s.path);
  for (const auto& s : config.foreign) check(s.path);
  if (config.market) check(config.market->path);
  if (config.risk_free) check(config.risk_free->path);
  std::cout << "ok " << config_hash(config) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-study toolkit: abnormal returns, risk shifts and test calibration"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  std::string path, out_dir, format;
  bool verbose = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;

  auto* run = app.add_subcommand("run", "Run the study described by a configuration file");
  run->add_option("config", path, "Configuration file (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (default: $EVSTUDY_OUTPUT_DIR or config)");
  run->add_option("--format", format, "text, csv, json or markdown")
      ->check(CLI::IsMember({"text", "csv", "json", "markdown"}));
  run->add_option("--seed", seed, "Override the seed of a synthetic configuration");
  run->add_flag("--verbose,-v", verbose, "Progress on stderr");

  auto* sim = app.add_subcommand("simulate", "Size/power study over simulated panels");
  sim->add_option("plan", path, "Simulation plan (JSON)")->required();
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--threads", threads, "Worker threads");
  sim->add_flag("--verbose,-v", verbose, "Progress on stderr");

  auto* val = app.add_subcommand("validate", "Check a configuration without running it");
  val->add_option("config", path, "Configuration file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(path, out_dir, format, seed, verbose);
    if (*sim) return cmd_simulate(path, out_dir, format, threads, verbose);
    return cmd_validate(path);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
