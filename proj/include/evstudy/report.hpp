#pragma once

#include <cstddef>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "evstudy/config.hpp"
#include "evstudy/inference.hpp"
#include "evstudy/models.hpp"
#include "evstudy/regression.hpp"
#include "evstudy/windows.hpp"

namespace evstudy {

inline constexpr int kReportSchemaVersion = 1;
std::string_view tool_version();

struct Diagnostics {
  std::optional<TestStat> chow;         // CAPM design, break at the event day
  std::optional<TestStat> wald;         // b2 = b3 = 0 in the dummy-interaction fit
  std::optional<TestStat> arch_lm;      // CAPM estimation residuals
  std::optional<TestStat> jarque_bera;  // CAPM estimation residuals
  std::optional<TestStat> ljung_box;    // CAPM estimation residuals
  std::vector<std::string> notes;       // diagnostics that could not be computed
};

struct SectorReport {
  std::string sector_id;
  bool ok = false;
  std::string error;
  std::vector<std::string> warnings;

  double capm_alpha = 0.0;
  double capm_beta = 0.0;
  double sigma2 = 0.0;
  double dof = 0.0;
  AbnormalReturns ar;
  TestStat ar_test;
  std::vector<CarResult> cars;
  std::optional<RankTestResult> corrado;
  std::optional<ConditionalProbResult> cp;
  std::optional<EventRiskFit> risk;
  std::optional<IntegrationFit> integration;
  Diagnostics diagnostics;
  std::vector<std::string> model_notes;
};

struct StudyReport {
  std::string config_hash;
  nlohmann::ordered_json config;  // resolved, defaults included
  std::optional<WindowLayout> layout;
  Date requested_event_date;
  std::vector<std::size_t> half_widths;
  std::string alignment;
  std::string dummy_duration;
  std::vector<std::string> foreign_ids;
  std::vector<SectorReport> sectors;  // config order
  std::vector<std::string> warnings;

  std::size_t failed_sectors() const;
};

// Per-sector analysis on an aligned panel holding the sector's excess return
// column, the market premium and any foreign premium columns.
SectorReport analyze_sector(const AlignedPanel& panel, const WindowLayout& layout,
                            const std::string& sector_id, const StudyConfig& config,
                            const std::vector<std::string>& foreign_ids);

// Throws ConfigError for configuration problems (including an event date
// outside the data span or windows that do not fit the data). Data problems
// are recorded per sector.
StudyReport run_study(const StudyConfig& config, std::size_t threads = 0);

// 0 success, 2 every sector failed, 3 some sectors failed.
int exit_code(const StudyReport& report);

// Writes sectoral_reactions, robustness, risk_change and diagnostics tables
// (plus study_config.json) into `directory`. Returns the files written.
std::vector<std::filesystem::path> render_tables(const StudyReport& report,
                                                 const std::filesystem::path& directory,
                                                 OutputFormat format);

// One car_curve_<sector>.csv per successful sector: relative day and the
// running AR sum from -w for every configured w. Requires a widest window >= 5.
std::vector<std::filesystem::path> emit_car_curves(const StudyReport& report,
                                                   const std::filesystem::path& directory);

}  // namespace evstudy
