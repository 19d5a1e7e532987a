#include "evstudy/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "evstudy/error.hpp"

namespace evstudy {

namespace {

template <typename Obs>
void require_strictly_increasing(const std::string& id, const std::vector<Obs>& obs) {
  for (std::size_t i = 1; i < obs.size(); ++i) {
    if (!(obs[i - 1].date < obs[i].date)) {
      throw DataError("series '" + id + "': dates not strictly increasing at " +
                      obs[i].date.iso());
    }
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

struct RawRow {
  std::size_t line;
  Date date;
  double value;
};

struct RawTable {
  std::vector<RawRow> rows;
  std::vector<RowIssue> issues;
};

RawTable read_table(std::istream& in, const CsvSchema& schema, const std::string& id) {
  std::string header;
  if (!std::getline(in, header)) {
    throw DataError("series '" + id + "': empty input");
  }
  if (header.rfind("\xEF\xBB\xBF", 0) == 0) header.erase(0, 3);
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const auto names = split(header, delim);

  auto find_column = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      throw DataError("series '" + id + "': header has no column '" + name + "'");
    }
    return static_cast<std::size_t>(it - names.begin());
  };
  const std::size_t date_col = find_column(schema.date_column);
  const std::size_t value_col = find_column(schema.value_column);

  RawTable table;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, delim);
    if (fields.size() <= std::max(date_col, value_col)) {
      table.issues.push_back({line_no, "too few fields"});
      continue;
    }
    const auto date = Date::try_parse(fields[date_col], schema.date_format);
    if (!date) {
      table.issues.push_back(
          {line_no, "unparseable date '" + std::string(fields[date_col]) + "'"});
      continue;
    }
    double value = 0.0;
    if (!parse_double(fields[value_col], value)) {
      table.issues.push_back({line_no, "unparseable value '" +
                                           std::string(fields[value_col]) + "' on " +
                                           date->iso()});
      continue;
    }
    table.rows.push_back({line_no, *date, value});
  }
  if (table.rows.empty()) {
    throw DataError("series '" + id + "': no parseable observations");
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const RawRow& a, const RawRow& b) { return a.date < b.date; });

  std::vector<std::string> rejections;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (table.rows[i].date == table.rows[i - 1].date) {
      rejections.push_back("duplicate date " + table.rows[i].date.iso() + " (line " +
                           std::to_string(table.rows[i].line) + ")");
    }
  }
  if (!rejections.empty()) {
    std::string msg = "series '" + id + "' rejected:";
    for (const auto& r : rejections) msg += "\n  " + r;
    throw DataError(msg);
  }
  return table;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

}  // namespace

PriceSeries::PriceSeries(std::string instrument_id, std::vector<PriceObservation> observations)
    : id_(std::move(instrument_id)), obs_(std::move(observations)) {
  require_strictly_increasing(id_, obs_);
  for (const auto& o : obs_) {
    if (!(o.price > 0.0) || !std::isfinite(o.price)) {
      throw DataError("series '" + id_ + "': non-positive price on " + o.date.iso());
    }
  }
}

std::vector<Date> PriceSeries::dates() const {
  std::vector<Date> out;
  out.reserve(obs_.size());
  for (const auto& o : obs_) out.push_back(o.date);
  return out;
}

std::vector<double> PriceSeries::prices() const {
  std::vector<double> out;
  out.reserve(obs_.size());
  for (const auto& o : obs_) out.push_back(o.price);
  return out;
}

ReturnSeries::ReturnSeries(std::string instrument_id, std::vector<ReturnObservation> observations)
    : id_(std::move(instrument_id)), obs_(std::move(observations)) {
  require_strictly_increasing(id_, obs_);
  for (const auto& o : obs_) {
    if (!std::isfinite(o.value)) {
      throw DataError("series '" + id_ + "': non-finite value on " + o.date.iso());
    }
  }
}

std::vector<Date> ReturnSeries::dates() const {
  std::vector<Date> out;
  out.reserve(obs_.size());
  for (const auto& o : obs_) out.push_back(o.date);
  return out;
}

std::vector<double> ReturnSeries::values() const {
  std::vector<double> out;
  out.reserve(obs_.size());
  for (const auto& o : obs_) out.push_back(o.value);
  return out;
}

TradingCalendar::TradingCalendar(std::string name, std::vector<Date> trading_dates)
    : name_(std::move(name)), dates_(std::move(trading_dates)) {
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (!(dates_[i - 1] < dates_[i])) {
      throw DataError("calendar '" + name_ + "': dates not strictly increasing");
    }
  }
}

TradingCalendar TradingCalendar::weekly(std::string name, Date first, Date last,
                                        std::initializer_list<std::chrono::weekday> open_days) {
  std::vector<Date> dates;
  for (Date d = first; d <= last; d = d + 1) {
    if (std::find(open_days.begin(), open_days.end(), d.weekday()) != open_days.end()) {
      dates.push_back(d);
    }
  }
  return TradingCalendar(std::move(name), std::move(dates));
}

bool TradingCalendar::contains(Date d) const {
  return std::binary_search(dates_.begin(), dates_.end(), d);
}

std::string AlignmentPolicy::describe() const {
  if (kind == AlignmentKind::Intersection) return "intersection";
  return "forward-fill-limited(" + std::to_string(max_gap_days) + ")";
}

AlignedPanel::AlignedPanel(std::vector<Date> dates, std::vector<Column> columns,
                           AlignmentPolicy policy)
    : dates_(std::move(dates)), columns_(std::move(columns)), policy_(policy) {
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (!(dates_[i - 1] < dates_[i])) {
      throw DataError("panel axis not strictly increasing at " + dates_[i].iso());
    }
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].second.size() != dates_.size()) {
      throw DataError("panel column '" + columns_[i].first + "' has " +
                      std::to_string(columns_[i].second.size()) + " values for " +
                      std::to_string(dates_.size()) + " dates");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (columns_[j].first == columns_[i].first) {
        throw DataError("duplicate panel column '" + columns_[i].first + "'");
      }
    }
  }
}

bool AlignedPanel::has_column(const std::string& name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.first == name; });
}

std::span<const double> AlignedPanel::column(const std::string& name) const {
  for (const auto& c : columns_) {
    if (c.first == name) return c.second;
  }
  throw DataError("panel has no column '" + name + "'");
}

AlignedPanel AlignedPanel::with_column(std::string name, std::vector<double> values) const {
  auto cols = columns_;
  cols.emplace_back(std::move(name), std::move(values));
  return AlignedPanel(dates_, std::move(cols), policy_);
}

Loaded<PriceSeries> load_price_series(std::istream& in, const CsvSchema& schema,
                                      std::string instrument_id) {
  auto table = read_table(in, schema, instrument_id);
  std::vector<std::string> rejections;
  std::vector<PriceObservation> obs;
  obs.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (!(row.value > 0.0)) {
      rejections.push_back("non-positive price " + std::to_string(row.value) + " on " +
                           row.date.iso() + " (line " + std::to_string(row.line) + ")");
    }
    obs.push_back({row.date, row.value});
  }
  if (!rejections.empty()) {
    std::string msg = "series '" + instrument_id + "' rejected:";
    for (const auto& r : rejections) msg += "\n  " + r;
    throw DataError(msg);
  }
  return {PriceSeries(std::move(instrument_id), std::move(obs)), std::move(table.issues)};
}

Loaded<PriceSeries> load_price_series(const std::string& path, const CsvSchema& schema,
                                      std::string instrument_id) {
  auto in = open_or_throw(path);
  return load_price_series(in, schema, std::move(instrument_id));
}

Loaded<ReturnSeries> load_rate_series(std::istream& in, const CsvSchema& schema,
                                      std::string instrument_id) {
  auto table = read_table(in, schema, instrument_id);
  std::vector<ReturnObservation> obs;
  obs.reserve(table.rows.size());
  for (const auto& row : table.rows) obs.push_back({row.date, row.value});
  return {ReturnSeries(std::move(instrument_id), std::move(obs)), std::move(table.issues)};
}

Loaded<ReturnSeries> load_rate_series(const std::string& path, const CsvSchema& schema,
                                      std::string instrument_id) {
  auto in = open_or_throw(path);
  return load_rate_series(in, schema, std::move(instrument_id));
}

ReturnSeries annualized_percent_to_daily(const ReturnSeries& rates, double day_count) {
  if (!(day_count > 0.0)) throw std::invalid_argument("day count must be positive");
  std::vector<ReturnObservation> obs(rates.observations().begin(), rates.observations().end());
  for (auto& o : obs) o.value = o.value / 100.0 / day_count;
  return ReturnSeries(rates.id(), std::move(obs));
}

ReturnSeries log_returns(const PriceSeries& prices) {
  const auto obs = prices.observations();
  if (obs.size() < 2) {
    throw DataError("series '" + prices.id() + "': log returns need at least 2 prices");
  }
  std::vector<ReturnObservation> out;
  out.reserve(obs.size() - 1);
  for (std::size_t i = 1; i < obs.size(); ++i) {
    out.push_back({obs[i].date, std::log(obs[i].price / obs[i - 1].price)});
  }
  return ReturnSeries(prices.id(), std::move(out));
}

ReturnSeries excess_returns(const ReturnSeries& r, const ReturnSeries& rf) {
  const auto a = r.observations();
  const auto b = rf.observations();
  const std::size_t common = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (a[i].date != b[i].date) {
      throw DataError("excess returns: axes of '" + r.id() + "' and '" + rf.id() +
                      "' differ first at " + std::min(a[i].date, b[i].date).iso());
    }
  }
  if (a.size() != b.size()) {
    const auto& longer = a.size() > b.size() ? a : b;
    throw DataError("excess returns: axes of '" + r.id() + "' and '" + rf.id() +
                    "' differ first at " + longer[common].date.iso());
  }
  std::vector<ReturnObservation> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back({a[i].date, a[i].value - b[i].value});
  return ReturnSeries(r.id(), std::move(out));
}

AlignedPanel align(std::span<const ReturnSeries> series, AlignmentPolicy policy,
                   std::span<const TradingCalendar> calendars) {
  if (series.empty()) throw std::invalid_argument("align: need at least one series");
  if (policy.kind == AlignmentKind::ForwardFill && policy.max_gap_days < 1) {
    throw std::invalid_argument("align: forward-fill limit must be >= 1");
  }

  std::vector<Date> axis;
  std::vector<AlignedPanel::Column> columns;

  if (policy.kind == AlignmentKind::Intersection) {
    for (Date d : series.front().dates()) {
      bool keep = true;
      for (std::size_t s = 1; s < series.size() && keep; ++s) {
        const auto obs = series[s].observations();
        keep = std::binary_search(obs.begin(), obs.end(), ReturnObservation{d, 0.0},
                                  [](const auto& x, const auto& y) { return x.date < y.date; });
      }
      for (const auto& cal : calendars) keep = keep && cal.contains(d);
      if (keep) axis.push_back(d);
    }
    if (axis.empty()) throw DataError("align: the date axes have an empty intersection");
    for (const auto& s : series) {
      std::vector<double> values;
      values.reserve(axis.size());
      const auto obs = s.observations();
      std::size_t j = 0;
      for (Date d : axis) {
        while (obs[j].date < d) ++j;
        values.push_back(obs[j].value);
      }
      columns.emplace_back(s.id(), std::move(values));
    }
    return AlignedPanel(std::move(axis), std::move(columns), policy);
  }

  // Forward fill: union of all axes restricted to the anchor calendar.
  std::vector<Date> all;
  for (const auto& s : series) {
    for (const auto& o : s.observations()) all.push_back(o.date);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  if (calendars.empty()) {
    const auto anchor = series.front().dates();
    std::set_intersection(all.begin(), all.end(), anchor.begin(), anchor.end(),
                          std::back_inserter(axis));
  } else {
    for (Date d : all) {
      if (calendars.front().contains(d)) axis.push_back(d);
    }
  }
  if (axis.empty()) throw DataError("align: anchor calendar has no dates in common with the data");

  for (const auto& s : series) {
    const auto obs = s.observations();
    std::vector<double> values;
    values.reserve(axis.size());
    std::size_t j = 0;  // first observation with date > d
    for (Date d : axis) {
      while (j < obs.size() && obs[j].date <= d) ++j;
      if (j == 0 || (d - obs[j - 1].date) > policy.max_gap_days) {
        throw DataError("align: '" + s.id() + "' has no value within " +
                        std::to_string(policy.max_gap_days) + " days of " + d.iso());
      }
      values.push_back(obs[j - 1].value);
    }
    columns.emplace_back(s.id(), std::move(values));
  }
  return AlignedPanel(std::move(axis), std::move(columns), policy);
}

void write_panel(std::ostream& out, const AlignedPanel& panel, char delimiter) {
  out << "Date";
  for (const auto& c : panel.columns()) out << delimiter << c.first;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    out << panel.dates()[i].iso();
    for (const auto& c : panel.columns()) {
      std::snprintf(buf, sizeof buf, "%.10g", c.second[i]);
      out << delimiter << buf;
    }
    out << '\n';
  }
}

}  // namespace evstudy
