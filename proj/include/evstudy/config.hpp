#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "evstudy/ingest.hpp"
#include "evstudy/models.hpp"
#include "evstudy/synthlab.hpp"
#include "evstudy/windows.hpp"

namespace evstudy {

inline constexpr const char* kOutputDirEnv = "EVSTUDY_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "evstudy-out";

struct InstrumentSource {
  std::string id;
  std::string path;  // relative paths resolve against the config file directory
};

enum class RateQuote { AnnualPercent, DailyDecimal };

struct RiskFreeSource {
  std::string id;
  std::string path;
  RateQuote quote = RateQuote::AnnualPercent;
  double day_count = 252.0;
};

enum class OutputFormat { Text, Csv, Json, Markdown };

struct TestOptions {
  int corrado_offset = 0;
  double cp_reference_rate = 0.05;
  std::size_t cp_half_width = 5;
  std::size_t arch_lags = 5;
  std::size_t ljung_box_lags = 10;
  std::size_t integration_half_width = 0;
};

struct StudyConfig {
  std::vector<InstrumentSource> sectors;
  std::optional<InstrumentSource> market;
  std::optional<RiskFreeSource> risk_free;
  std::vector<InstrumentSource> foreign;
  CsvSchema schema;

  // event.event_date is required for file data; synthetic runs default to
  // the simulated event day.
  EventSpec event;
  bool event_date_set = false;
  DummyDuration dummy_duration = DummyDuration::ThroughPostWindow;
  EventSample event_sample = EventSample::Local;
  CovarianceKind covariance = CovarianceKind::Classical;
  AlignmentPolicy alignment = AlignmentPolicy::forward_fill(3);
  TestOptions tests;

  std::string output_directory;  // empty: $EVSTUDY_OUTPUT_DIR, else kDefaultOutputDir
  std::vector<OutputFormat> formats{OutputFormat::Text, OutputFormat::Csv};

  std::optional<PanelSpec> synthetic;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
  std::filesystem::path output_path() const;
};

// Throws ConfigError on unknown keys, wrong types or invalid values.
StudyConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
StudyConfig load_config(const std::filesystem::path& path);
void validate_config(const StudyConfig& config);

// Fully resolved configuration (every default filled in), stable key order.
nlohmann::ordered_json resolved_config(const StudyConfig& config);
// FNV-1a 64 of the resolved configuration, as 16 hex digits.
std::string config_hash(const StudyConfig& config);

PanelSpec parse_panel_spec(const nlohmann::json& j);
nlohmann::ordered_json panel_spec_json(const PanelSpec& spec);

std::optional<OutputFormat> parse_output_format(std::string_view name);
std::string_view to_string(OutputFormat format);
std::string_view file_extension(OutputFormat format);

// Input of the `simulate` command.
struct SimulationPlan {
  std::vector<StudyCell> cells;
  SizePowerOptions options;
  std::string output_directory;
  std::vector<OutputFormat> formats{OutputFormat::Csv, OutputFormat::Json};
};

SimulationPlan parse_simulation_plan(const nlohmann::json& j);
SimulationPlan load_simulation_plan(const std::filesystem::path& path);

}  // namespace evstudy
