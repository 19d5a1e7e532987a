#include "evstudy/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <ranges>
#include <sstream>

#include "evstudy/error.hpp"
#include "evstudy/ingest.hpp"
#include "evstudy/synthlab.hpp"

namespace evstudy {

namespace {

using nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- analysis

Diagnostics run_diagnostics(const AlignedPanel& panel, const WindowLayout& layout,
                            const std::string& sector_id, const StudyConfig& config,
                            const NormalReturnModel& capm, const std::optional<EventRiskFit>& risk) {
  Diagnostics d;
  auto attempt = [&](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      d.notes.push_back(std::string(name) + ": " + e.what());
    }
  };
  attempt("chow", [&] {
    const auto rows = event_sample_rows(layout, config.event_sample);
    std::vector<double> premium, y;
    std::size_t split = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      premium.push_back(panel.column(kMarketPremium)[rows[i]]);
      y.push_back(panel.column(sector_id)[rows[i]]);
      if (split == rows.size() && rows[i] >= layout.event_index()) split = i;
    }
    d.chow = chow_test(DesignMatrix::with_intercept({{kMarketPremium, premium}}), y, split);
  });
  if (risk) {
    attempt("wald", [&] {
      const auto& fit = risk->fit;
      std::vector<std::size_t> restricted;
      if (!risk->saturated) restricted.push_back(fit.index_of(kPremiumTimesDummy));
      restricted.push_back(fit.index_of(kEventDummy));
      Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(restricted.size()),
                                                fit.coefficients.size());
      for (std::size_t i = 0; i < restricted.size(); ++i) {
        R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(restricted[i])) = 1.0;
      }
      d.wald = wald_test(fit, R, Eigen::VectorXd::Zero(R.rows()));
    });
  }
  const std::vector<double> residuals(capm.fit.residuals.data(),
                                      capm.fit.residuals.data() + capm.fit.residuals.size());
  attempt("arch_lm", [&] { d.arch_lm = arch_lm_test(residuals, config.tests.arch_lags); });
  attempt("jarque_bera", [&] { d.jarque_bera = jarque_bera(residuals); });
  attempt("ljung_box", [&] { d.ljung_box = ljung_box(residuals, config.tests.ljung_box_lags); });
  return d;
}

void require_finite(const AlignedPanel& panel, const WindowLayout& layout,
                    const std::string& sector_id, const StudyConfig& config) {
  const auto col = panel.column(sector_id);
  for (std::size_t r : event_sample_rows(layout, config.event_sample)) {
    if (!std::isfinite(col[r])) {
      throw DataError("sector '" + sector_id + "' has no return for " + panel.dates()[r].iso());
    }
  }
}

// -------------------------------------------------------------- ingestion

struct CommonData {
  AlignedPanel panel;  // market_premium, risk-free column, foreign premia
  std::string risk_free_id;
};

std::string issue_text(const std::string& id, const RowIssue& issue) {
  return id + ": line " + std::to_string(issue.line) + " skipped (" + issue.message + ")";
}

ReturnSeries load_returns(const StudyConfig& config, const InstrumentSource& src,
                          std::vector<std::string>& warnings) {
  auto loaded = load_price_series(config.resolve(src.path).string(), config.schema, src.id);
  for (const auto& i : loaded.issues) warnings.push_back(issue_text(src.id, i));
  return log_returns(loaded.series);
}

CommonData load_common(const StudyConfig& config, std::vector<std::string>& warnings) {
  const auto market = load_returns(config, *config.market, warnings);
  auto rf_loaded = load_rate_series(config.resolve(config.risk_free->path).string(), config.schema,
                                    config.risk_free->id);
  for (const auto& i : rf_loaded.issues) warnings.push_back(issue_text(config.risk_free->id, i));
  const ReturnSeries rf = config.risk_free->quote == RateQuote::AnnualPercent
                              ? annualized_percent_to_daily(rf_loaded.series, config.risk_free->day_count)
                              : rf_loaded.series;
  std::vector<ReturnSeries> series;
  series.push_back(market);
  series.push_back(rf);
  for (const auto& f : config.foreign) series.push_back(load_returns(config, f, warnings));

  if (config.alignment.kind == AlignmentKind::ForwardFill) {
    // Anchor days before every series has started cannot be filled.
    Date start = series.front().observations().front().date;
    for (const auto& s : series) start = std::max(start, s.observations().front().date);
    std::vector<ReturnObservation> trimmed;
    for (const auto& o : market.observations()) {
      if (o.date >= start) trimmed.push_back(o);
    }
    if (trimmed.empty()) throw DataError("market series ends before the other series begin");
    series.front() = ReturnSeries(market.id(), std::move(trimmed));
  }
  const auto aligned = align(series, config.alignment);

  const auto m = aligned.column(market.id());
  const auto r = aligned.column(rf.id());
  std::vector<AlignedPanel::Column> cols;
  std::vector<double> premium(aligned.rows());
  for (std::size_t i = 0; i < premium.size(); ++i) premium[i] = m[i] - r[i];
  cols.emplace_back(kMarketPremium, std::move(premium));
  cols.emplace_back(rf.id(), std::vector<double>(r.begin(), r.end()));
  for (const auto& f : config.foreign) {
    const auto fc = aligned.column(f.id);
    std::vector<double> fp(aligned.rows());
    for (std::size_t i = 0; i < fp.size(); ++i) fp[i] = fc[i] - r[i];
    cols.emplace_back(f.id, std::move(fp));
  }
  return {AlignedPanel(std::vector<Date>(aligned.dates().begin(), aligned.dates().end()),
                       std::move(cols), config.alignment),
          rf.id()};
}

// Sector returns on the common axis. Days before the sector's first
// observation are NaN; interior gaps follow the alignment policy.
std::vector<double> project_onto_axis(const ReturnSeries& s, std::span<const Date> axis,
                                      const AlignmentPolicy& policy) {
  const auto obs = s.observations();
  std::vector<double> out(axis.size(), kNaN);
  std::size_t j = 0;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    while (j < obs.size() && obs[j].date <= axis[i]) ++j;
    if (j == 0) continue;
    const auto& last = obs[j - 1];
    if (last.date == axis[i]) {
      out[i] = last.value;
    } else if (policy.kind == AlignmentKind::ForwardFill) {
      if (j == obs.size() && axis[i] - last.date > policy.max_gap_days) continue;  // series ended
      if (axis[i] - last.date > policy.max_gap_days) {
        throw DataError("align: '" + s.id() + "' has no value within " +
                        std::to_string(policy.max_gap_days) + " days of " + axis[i].iso());
      }
      out[i] = last.value;
    }
  }
  return out;
}

SectorReport run_file_sector(const StudyConfig& config, const InstrumentSource& src,
                             const CommonData& common, const WindowLayout& layout,
                             const std::vector<std::string>& foreign_ids) {
  std::vector<std::string> warnings;
  try {
    const auto returns = load_returns(config, src, warnings);
    auto values = project_onto_axis(returns, common.panel.dates(), config.alignment);
    const auto rf = common.panel.column(common.risk_free_id);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= rf[i];
    auto report = analyze_sector(common.panel.with_column(src.id, std::move(values)), layout, src.id,
                                 config, foreign_ids);
    report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
    return report;
  } catch (const std::exception& e) {
    SectorReport failed;
    failed.sector_id = src.id;
    failed.error = e.what();
    failed.warnings = std::move(warnings);
    return failed;
  }
}

WindowLayout layout_or_config_error(std::span<const Date> axis, const EventSpec& event) {
  if (axis.empty()) throw ConfigError("no common trading days in the data");
  if (event.event_date < axis.front() || event.event_date > axis.back()) {
    throw ConfigError("event date " + event.event_date.iso() + " is outside the data span " +
                      axis.front().iso() + " .. " + axis.back().iso());
  }
  try {
    return build_layout(axis, event);
  } catch (const InsufficientDataError& e) {
    throw ConfigError(e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

template <typename Fn>
std::vector<SectorReport> map_sectors(std::size_t count, std::size_t threads, Fn fn) {
  std::vector<SectorReport> out(count);
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<SectorReport>> futures;
  for (std::size_t i = 0; i < count; ++i) futures.push_back(std::async(std::launch::async, fn, i));
  for (std::size_t i = 0; i < count; ++i) out[i] = futures[i].get();
  return out;
}

// --------------------------------------------------------------- tables

enum class Kind { Percent, Number, PValue };

struct ColumnDef {
  std::string header;
  std::string key;
  Kind kind = Kind::Number;
  std::string star_key;  // p-value key driving significance stars
};

struct Row {
  std::string label;
  std::map<std::string, double> values;
  std::string error;
};

struct Table {
  std::string stem;
  std::string title;
  std::vector<ColumnDef> columns;
  std::vector<ColumnDef> p_columns;
  std::vector<Row> rows;
  std::vector<std::string> notes;
};

double value_of(const Row& row, const std::string& key) {
  const auto it = row.values.find(key);
  return it == row.values.end() ? kNaN : it->second;
}

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "n/a";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string full(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string display(const Row& row, const ColumnDef& c) {
  const double v = value_of(row, c.key);
  std::string s;
  switch (c.kind) {
    case Kind::Percent: s = fixed(v * 100.0, 2); break;
    case Kind::Number: s = fixed(v, 2); break;
    case Kind::PValue: s = fixed(v, 4); break;
  }
  if (!c.star_key.empty() && !std::isnan(v)) s += significance_stars(value_of(row, c.star_key));
  return s;
}

std::vector<std::string> metadata_lines(const StudyReport& report) {
  std::vector<std::string> lines;
  lines.push_back("tool version: " + std::string(tool_version()));
  lines.push_back("config hash: " + report.config_hash);
  lines.push_back("event date: " + report.requested_event_date.iso());
  if (report.layout) {
    const auto& l = *report.layout;
    const auto axis = l.axis();
    lines.push_back("event trading day (t=0): " + l.event_date().iso());
    lines.push_back("sample: " + axis.front().iso() + " .. " + axis.back().iso() + " (" +
                    std::to_string(axis.size()) + " trading days)");
    const auto& e = l.estimation_range();
    lines.push_back("estimation window: " + axis[e.first].iso() + " .. " + axis[e.last].iso() + " (" +
                    std::to_string(e.size()) + " days)");
    const auto& p = l.post_range();
    lines.push_back("post-event window: " + axis[p.first].iso() + " .. " + axis[p.last].iso() + " (" +
                    std::to_string(p.size()) + " days)");
  }
  lines.push_back("alignment: " + report.alignment);
  lines.push_back("event dummy: " + report.dummy_duration);
  return lines;
}

ordered_json metadata_json(const StudyReport& report) {
  ordered_json m;
  m["tool_version"] = std::string(tool_version());
  m["config_hash"] = report.config_hash;
  m["event_date"] = report.requested_event_date.iso();
  if (report.layout) {
    const auto& l = *report.layout;
    const auto axis = l.axis();
    m["event_trading_day"] = l.event_date().iso();
    m["sample_first"] = axis.front().iso();
    m["sample_last"] = axis.back().iso();
    m["estimation_first"] = axis[l.estimation_range().first].iso();
    m["estimation_last"] = axis[l.estimation_range().last].iso();
    m["post_first"] = axis[l.post_range().first].iso();
    m["post_last"] = axis[l.post_range().last].iso();
  }
  m["alignment"] = report.alignment;
  m["event_dummy"] = report.dummy_duration;
  m["units"] = "returns in natural log units (text and markdown tables show percent)";
  return m;
}

std::vector<std::string> error_lines(const StudyReport& report) {
  std::vector<std::string> lines;
  for (const auto& s : report.sectors) {
    if (!s.ok) lines.push_back(s.sector_id + ": " + s.error);
  }
  return lines;
}

Row base_row(const SectorReport& s) {
  Row r;
  r.label = s.sector_id;
  if (!s.ok) r.error = s.error;
  return r;
}

Table sectoral_table(const StudyReport& report) {
  Table t;
  t.stem = "sectoral_reactions";
  t.title = "Sectoral reactions around the event";
  t.columns.push_back({"AR", "ar", Kind::Percent, "ar_p"});
  t.columns.push_back({"t-Stat", "ar_t", Kind::Number, ""});
  t.p_columns.push_back({"AR", "ar_p", Kind::PValue, ""});
  for (std::size_t w : report.half_widths) {
    const auto ws = std::to_string(w);
    t.columns.push_back({"CAR" + ws, "car" + ws, Kind::Percent, "car" + ws + "_p"});
    t.columns.push_back({"t-Stat", "car" + ws + "_t", Kind::Number, ""});
    t.p_columns.push_back({"CAR" + ws, "car" + ws + "_p", Kind::PValue, ""});
  }
  for (const auto& s : report.sectors) {
    Row r = base_row(s);
    if (s.ok) {
      r.values["ar"] = s.ar.at(0);
      r.values["ar_t"] = s.ar_test.statistic;
      r.values["ar_p"] = s.ar_test.p_value;
      for (const auto& c : s.cars) {
        const auto ws = std::to_string(c.half_width);
        r.values["car" + ws] = c.car;
        r.values["car" + ws + "_t"] = c.t_stat;
        r.values["car" + ws + "_p"] = c.p_value;
      }
    }
    t.rows.push_back(std::move(r));
  }
  t.notes = {
      "AR: abnormal return on the event day; CARw: cumulative abnormal return over [-w, +w].",
      "AR and CAR are shown in percent (natural log returns x 100); csv and json carry natural units.",
      "*, **, *** denote significance at the 10%, 5% and 1% levels (two-sided p-values below).",
      "t-statistics use the CAPM estimation-window residual variance; for CARw it is multiplied by "
      "the window length 2w+1 (independent daily abnormal returns).",
  };
  return t;
}

Table robustness_table(const StudyReport& report) {
  Table t;
  t.stem = "robustness";
  t.title = "Robustness: rank test, conditional probability and market integration";
  t.columns = {{"t_Corrado", "corrado", Kind::Number, ""},
               {"CP", "cp", Kind::Number, ""},
               {"t-stat", "cp_t", Kind::Number, ""},
               {"AR", "integration_ar", Kind::Percent, "integration_ar_p"},
               {"t-Stat", "integration_ar_t", Kind::Number, ""}};
  t.p_columns = {{"t_Corrado", "corrado_p", Kind::PValue, ""},
                 {"AR", "integration_ar_p", Kind::PValue, ""}};
  std::size_t cp_w = 0;
  double cp_ref = 0.05;
  for (const auto& s : report.sectors) {
    Row r = base_row(s);
    if (s.ok) {
      if (s.corrado) {
        r.values["corrado"] = s.corrado->statistic;
        r.values["corrado_p"] = s.corrado->p_value;
      }
      if (s.cp) {
        r.values["cp"] = s.cp->cp;
        r.values["cp_t"] = s.cp->t_stat;
        cp_w = s.cp->half_width;
        cp_ref = s.cp->reference_rate;
      }
      if (s.integration) {
        r.values["integration_ar"] = s.integration->ar;
        r.values["integration_ar_t"] = s.integration->ar_test.statistic;
        r.values["integration_ar_p"] = s.integration->ar_test.p_value;
      }
    }
    t.rows.push_back(std::move(r));
  }
  char cp_note[256];
  std::snprintf(cp_note, sizeof cp_note,
                "CP: share of rolling %zu-day abnormal-return sums in the estimation window at least "
                "as extreme (same sign) as the event CAR over [-%zu, +%zu]; t-stat against a "
                "reference rate of %g. This empirical construction is a reconstruction.",
                2 * cp_w + 1, cp_w, cp_w, cp_ref);
  t.notes = {
      "t_Corrado: single-day rank statistic on the event day, ranks over the estimation and widest "
      "event windows; p-value from the exact uniform rank distribution.",
      cp_note,
      report.foreign_ids.empty()
          ? "Market integration: no foreign premia configured (n/a)."
          : "Market integration: event-day AR from a CAPM augmented with the foreign market premia, "
            "in percent.",
      "*, **, *** denote significance at the 10%, 5% and 1% levels.",
  };
  return t;
}

Table risk_table(const StudyReport& report) {
  Table t;
  t.stem = "risk_change";
  t.title = "Changes in short-term systematic risk";
  t.columns = {{"Beta prior", "beta_pre", Kind::Number, "beta_pre_p"},
               {"s.e.", "beta_pre_se", Kind::Number, ""},
               {"Shift (b2)", "shift", Kind::Number, "shift_p"},
               {"s.e.", "shift_se", Kind::Number, ""},
               {"Beta post", "beta_post", Kind::Number, ""},
               {"Intercept shift (b3)", "b3", Kind::Percent, "b3_p"}};
  t.p_columns = {{"Beta prior", "beta_pre_p", Kind::PValue, ""},
                 {"Shift (b2)", "shift_p", Kind::PValue, ""},
                 {"Intercept shift (b3)", "b3_p", Kind::PValue, ""}};
  bool saturated = false;
  for (const auto& s : report.sectors) {
    Row r = base_row(s);
    if (s.ok && s.risk) {
      const auto& k = *s.risk;
      const double dof = static_cast<double>(k.fit.dof);
      r.values["beta_pre"] = k.beta_pre();
      r.values["beta_pre_se"] = k.beta1.standard_error;
      r.values["beta_pre_p"] = t_test("b1", k.beta1.value, k.beta1.standard_error, dof).p_value;
      r.values["shift"] = k.immediate_shift();
      r.values["shift_se"] = k.beta2.standard_error;
      r.values["shift_p"] = t_test("b2", k.beta2.value, k.beta2.standard_error, dof).p_value;
      r.values["beta_post"] = k.beta_post();
      r.values["b3"] = k.beta3.value;
      r.values["b3_p"] = t_test("b3", k.beta3.value, k.beta3.standard_error, dof).p_value;
      saturated = saturated || k.saturated;
    }
    t.rows.push_back(std::move(r));
  }
  t.notes = {
      "Fitted model: r_i - r_f = b0 + b1 (r_m - r_f) + b2 (r_m - r_f) DV + b3 DV + e.",
      "Beta prior = b1; Shift = b2 (estimated change in beta while DV = 1); Beta post = b1 + b2.",
      "The shift column is the interaction coefficient b2. Published 'immediate risk' columns built "
      "some other way are not comparable.",
      "Event dummy: " + report.dummy_duration +
          ". A one-day dummy leaves the slope shift unidentified (saturated fit).",
      "Intercept shift b3 in percent.",
  };
  if (saturated) t.notes.push_back("saturated: event-day standard errors undefined.");
  return t;
}

Table diagnostics_table(const StudyReport& report) {
  Table t;
  t.stem = "diagnostics";
  t.title = "Regression diagnostics";
  t.columns = {{"Chow F", "chow", Kind::Number, ""},       {"p", "chow_p", Kind::PValue, ""},
               {"Wald", "wald", Kind::Number, ""},         {"p", "wald_p", Kind::PValue, ""},
               {"ARCH-LM", "arch_lm", Kind::Number, ""},   {"p", "arch_lm_p", Kind::PValue, ""},
               {"Jarque-Bera", "jb", Kind::Number, ""},    {"p", "jb_p", Kind::PValue, ""},
               {"Ljung-Box", "ljung_box", Kind::Number, ""}, {"p", "ljung_box_p", Kind::PValue, ""}};
  for (const auto& s : report.sectors) {
    Row r = base_row(s);
    auto put = [&](const std::string& key, const std::optional<TestStat>& stat) {
      if (!stat) return;
      r.values[key] = stat->statistic;
      r.values[key + "_p"] = stat->p_value;
    };
    if (s.ok) {
      put("chow", s.diagnostics.chow);
      put("wald", s.diagnostics.wald);
      put("arch_lm", s.diagnostics.arch_lm);
      put("jb", s.diagnostics.jarque_bera);
      put("ljung_box", s.diagnostics.ljung_box);
    }
    t.rows.push_back(std::move(r));
  }
  t.notes = {
      "Chow: CAPM on the event-model sample, break at the event day. Wald: joint b2 = b3 = 0.",
      "ARCH-LM, Jarque-Bera and Ljung-Box on CAPM estimation-window residuals.",
  };
  for (const auto& s : report.sectors) {
    for (const auto& n : s.diagnostics.notes) t.notes.push_back(s.sector_id + " " + n);
  }
  return t;
}

std::vector<Table> build_tables(const StudyReport& report) {
  return {sectoral_table(report), robustness_table(report), risk_table(report),
          diagnostics_table(report)};
}

std::vector<std::string> sector_notes(const StudyReport& report) {
  std::vector<std::string> out;
  for (const auto& s : report.sectors) {
    for (const auto& w : s.warnings) out.push_back(s.sector_id + " warning: " + w);
    for (const auto& n : s.model_notes) out.push_back(s.sector_id + ": " + n);
  }
  for (const auto& w : report.warnings) out.push_back("warning: " + w);
  return out;
}

void text_grid(std::ostream& out, const std::vector<std::vector<std::string>>& grid) {
  std::vector<std::size_t> widths;
  for (const auto& row : grid) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) line += std::string(widths[i] - row[i].size() + 2, ' ');
    }
    out << line << '\n';
  }
}

std::vector<std::vector<std::string>> grid_of(const Table& t, const std::vector<ColumnDef>& cols) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"Sectors"};
  for (const auto& c : cols) header.push_back(c.header);
  grid.push_back(header);
  for (const auto& r : t.rows) {
    std::vector<std::string> line{r.label};
    for (const auto& c : cols) line.push_back(r.error.empty() ? display(r, c) : "n/a");
    grid.push_back(std::move(line));
  }
  return grid;
}

void render_text(std::ostream& out, const StudyReport& report, const Table& t) {
  out << t.title << '\n';
  for (const auto& m : metadata_lines(report)) out << "  " << m << '\n';
  out << '\n';
  text_grid(out, grid_of(t, t.columns));
  if (!t.p_columns.empty()) {
    out << "\nTwo-sided p-values\n";
    text_grid(out, grid_of(t, t.p_columns));
  }
  out << "\nNotes:\n";
  for (const auto& n : t.notes) out << "  " << n << '\n';
  for (const auto& n : sector_notes(report)) out << "  " << n << '\n';
  const auto errors = error_lines(report);
  if (!errors.empty()) {
    out << "\nErrors:\n";
    for (const auto& e : errors) out << "  " << e << '\n';
  }
}

void markdown_grid(std::ostream& out, const std::vector<std::vector<std::string>>& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << '|';
    for (const auto& cell : grid[i]) out << ' ' << cell << " |";
    out << '\n';
    if (i == 0) {
      out << '|';
      for (std::size_t j = 0; j < grid[i].size(); ++j) out << (j == 0 ? " --- |" : " ---: |");
      out << '\n';
    }
  }
}

void render_markdown(std::ostream& out, const StudyReport& report, const Table& t) {
  out << "## " << t.title << "\n\n";
  for (const auto& m : metadata_lines(report)) out << "- " << m << '\n';
  out << '\n';
  markdown_grid(out, grid_of(t, t.columns));
  if (!t.p_columns.empty()) {
    out << "\nTwo-sided p-values\n\n";
    markdown_grid(out, grid_of(t, t.p_columns));
  }
  out << "\n**Notes**\n\n";
  for (const auto& n : t.notes) out << "- " << n << '\n';
  for (const auto& n : sector_notes(report)) out << "- " << n << '\n';
  const auto errors = error_lines(report);
  if (!errors.empty()) {
    out << "\n**Errors**\n\n";
    for (const auto& e : errors) out << "- " << e << '\n';
  }
}

std::vector<std::string> csv_keys(const Table& t) {
  std::vector<std::string> keys;
  auto add = [&](const std::string& k) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  };
  for (const auto& c : t.columns) {
    add(c.key);
    if (!c.star_key.empty()) add(c.star_key);
  }
  for (const auto& c : t.p_columns) add(c.key);
  return keys;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

void render_csv(std::ostream& out, const Table& t) {
  const auto keys = csv_keys(t);
  std::vector<std::string> starred;
  for (const auto& c : t.columns) {
    if (!c.star_key.empty()) starred.push_back(c.key);
  }
  out << "sector";
  for (const auto& k : keys) out << ',' << k;
  for (const auto& k : starred) out << ',' << k << "_stars";
  out << ",error\n";
  for (const auto& r : t.rows) {
    out << csv_field(r.label);
    for (const auto& k : keys) out << ',' << full(value_of(r, k));
    for (const auto& c : t.columns) {
      if (c.star_key.empty()) continue;
      out << ',' << (std::isnan(value_of(r, c.key)) ? "" : significance_stars(value_of(r, c.star_key)));
    }
    out << ',' << csv_field(r.error) << '\n';
  }
}

ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

void render_json(std::ostream& out, const StudyReport& report, const Table& t) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["table"] = t.stem;
  j["title"] = t.title;
  j["metadata"] = metadata_json(report);
  j["rows"] = ordered_json::array();
  for (const auto& r : t.rows) {
    ordered_json row;
    row["sector"] = r.label;
    ordered_json values;
    for (const auto& k : csv_keys(t)) values[k] = number_or_null(value_of(r, k));
    row["values"] = values;
    ordered_json stars;
    for (const auto& c : t.columns) {
      if (!c.star_key.empty() && !std::isnan(value_of(r, c.key))) {
        stars[c.key] = std::string(significance_stars(value_of(r, c.star_key)));
      }
    }
    row["stars"] = stars;
    row["error"] = r.error.empty() ? ordered_json(nullptr) : ordered_json(r.error);
    j["rows"].push_back(row);
  }
  j["notes"] = t.notes;
  j["sector_notes"] = sector_notes(report);
  j["errors"] = error_lines(report);
  out << j.dump(2) << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error("output directory '" + dir.string() + "' is not writable");
  }
}

std::string file_safe(const std::string& id) {
  std::string out;
  for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
  return out;
}

}  // namespace

std::string_view tool_version() { return EVSTUDY_VERSION; }

std::size_t StudyReport::failed_sectors() const {
  return static_cast<std::size_t>(
      std::count_if(sectors.begin(), sectors.end(), [](const SectorReport& s) { return !s.ok; }));
}

SectorReport analyze_sector(const AlignedPanel& panel, const WindowLayout& layout,
                            const std::string& sector_id, const StudyConfig& config,
                            const std::vector<std::string>& foreign_ids) {
  SectorReport rep;
  rep.sector_id = sector_id;
  try {
    require_finite(panel, layout, sector_id, config);
    const auto capm = fit_capm(panel, layout, sector_id, config.covariance);
    rep.capm_alpha = capm.alpha();
    rep.capm_beta = capm.beta();
    rep.sigma2 = capm.sigma2();
    rep.dof = capm.dof();
    rep.ar = abnormal_returns(capm, panel, layout);
    rep.ar_test = ar_t_test(rep.ar.at(0), rep.sigma2, rep.dof);
    for (std::size_t w : layout.event_ranges() | std::views::keys) {
      rep.cars.push_back(car(rep.ar, w, rep.sigma2, rep.dof));
    }
    auto attempt = [&](const char* name, auto&& fn) {
      try {
        fn();
      } catch (const std::exception& e) {
        rep.model_notes.push_back(std::string(name) + " not computed: " + e.what());
      }
    };
    attempt("rank test", [&] {
      rep.corrado = corrado_test(capm, panel, layout, config.tests.corrado_offset);
    });
    attempt("conditional probability", [&] {
      rep.cp = conditional_prob_test(capm, panel, layout, config.tests.cp_half_width,
                                     config.tests.cp_reference_rate);
    });
    const auto dummy = build_dummy(layout, config.dummy_duration);
    attempt("event-risk model", [&] {
      rep.risk = fit_event_risk(panel, layout, dummy, sector_id, config.event_sample,
                                config.covariance);
      if (rep.risk->saturated) rep.model_notes.push_back(rep.risk->note);
    });
    if (!foreign_ids.empty()) {
      attempt("market-integration model", [&] {
        rep.integration = fit_integration_model(panel, layout, dummy, sector_id, foreign_ids,
                                                config.tests.integration_half_width,
                                                config.event_sample, config.covariance);
        for (const auto& f : rep.integration->foreign) {
          if (f.dropped) {
            rep.model_notes.push_back("foreign premium '" + f.id +
                                      "' is identically zero over the sample and was dropped");
          }
        }
      });
    }
    rep.diagnostics = run_diagnostics(panel, layout, sector_id, config, capm, rep.risk);
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
  }
  return rep;
}

StudyReport run_study(const StudyConfig& config, std::size_t threads) {
  validate_config(config);
  StudyReport report;
  report.config_hash = config_hash(config);
  report.config = resolved_config(config);
  report.half_widths = config.event.half_widths;
  report.alignment = config.alignment.describe();
  report.dummy_duration = config.dummy_duration == DummyDuration::SingleDay
                              ? "single-day (1 on the event day only)"
                              : "through-post-window (1 from the event day to the end of the "
                                "post-event window)";
  for (const auto& f : config.foreign) report.foreign_ids.push_back(f.id);

  if (config.synthetic) {
    const auto sim = simulate_panel(*config.synthetic);
    EventSpec event = config.event;
    if (!config.event_date_set) event.event_date = sim.event_date;
    report.requested_event_date = event.event_date;
    report.layout = layout_or_config_error(sim.panel.dates(), event);
    const auto& layout = *report.layout;
    report.sectors = map_sectors(sim.sector_ids.size(), threads, [&](std::size_t i) {
      return analyze_sector(sim.panel, layout, sim.sector_ids[i], config, report.foreign_ids);
    });
    return report;
  }

  report.requested_event_date = config.event.event_date;
  auto check_file = [&](const std::string& path) {
    if (!std::filesystem::is_regular_file(config.resolve(path))) {
      throw ConfigError("data file not found: " + config.resolve(path).string());
    }
  };
  for (const auto& s : config.sectors) check_file(s.path);
  check_file(config.market->path);
  check_file(config.risk_free->path);
  for (const auto& f : config.foreign) check_file(f.path);

  std::optional<CommonData> common;
  try {
    common = load_common(config, report.warnings);
  } catch (const DataError& e) {
    for (const auto& s : config.sectors) {
      SectorReport failed;
      failed.sector_id = s.id;
      failed.error = std::string("market, risk-free or foreign data unusable: ") + e.what();
      report.sectors.push_back(std::move(failed));
    }
    return report;
  }
  report.layout = layout_or_config_error(common->panel.dates(), config.event);
  const auto& layout = *report.layout;
  report.sectors = map_sectors(config.sectors.size(), threads, [&](std::size_t i) {
    return run_file_sector(config, config.sectors[i], *common, layout, report.foreign_ids);
  });
  return report;
}

int exit_code(const StudyReport& report) {
  const auto failed = report.failed_sectors();
  if (failed == 0) return 0;
  return failed == report.sectors.size() ? 2 : 3;
}

std::vector<std::filesystem::path> render_tables(const StudyReport& report,
                                                 const std::filesystem::path& directory,
                                                 OutputFormat format) {
  ensure_directory(directory);
  std::vector<std::filesystem::path> written;
  for (const auto& t : build_tables(report)) {
    const auto path = directory / (t.stem + "." + std::string(file_extension(format)));
    auto out = open_output(path);
    switch (format) {
      case OutputFormat::Text: render_text(out, report, t); break;
      case OutputFormat::Markdown: render_markdown(out, report, t); break;
      case OutputFormat::Csv: render_csv(out, t); break;
      case OutputFormat::Json: render_json(out, report, t); break;
    }
    if (!out) throw Error("failed writing '" + path.string() + "'");
    written.push_back(path);
  }
  const auto config_path = directory / "study_config.json";
  auto out = open_output(config_path);
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config_hash"] = report.config_hash;
  j["config"] = report.config;
  out << j.dump(2) << '\n';
  written.push_back(config_path);
  return written;
}

std::vector<std::filesystem::path> emit_car_curves(const StudyReport& report,
                                                   const std::filesystem::path& directory) {
  if (report.half_widths.empty() || report.half_widths.back() < 5) {
    throw std::invalid_argument("CAR curves need a widest event window of at least 5 days");
  }
  ensure_directory(directory);
  std::vector<std::filesystem::path> written;
  for (const auto& s : report.sectors) {
    if (!s.ok) continue;
    const auto path = directory / ("car_curve_" + file_safe(s.sector_id) + ".csv");
    auto out = open_output(path);
    out << "tau";
    for (std::size_t w : report.half_widths) out << ",car_w" << w;
    out << '\n';
    std::vector<double> running(report.half_widths.size(), 0.0);
    const long widest = static_cast<long>(s.ar.half_width);
    for (long tau = -widest; tau <= widest; ++tau) {
      out << tau;
      for (std::size_t k = 0; k < report.half_widths.size(); ++k) {
        const long w = static_cast<long>(report.half_widths[k]);
        out << ',';
        if (tau < -w || tau > w) continue;
        running[k] += s.ar.at(static_cast<int>(tau));
        out << full(running[k]);
      }
      out << '\n';
    }
    if (!out) throw Error("failed writing '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace evstudy
