#pragma once

#include <chrono>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evstudy/date.hpp"

namespace evstudy {

struct PriceObservation {
  Date date;
  double price;
};

// Raw end-of-day prices of one instrument. Dates strictly increasing, prices > 0.
class PriceSeries {
 public:
  PriceSeries(std::string instrument_id, std::vector<PriceObservation> observations);

  const std::string& id() const { return id_; }
  std::span<const PriceObservation> observations() const { return obs_; }
  std::size_t size() const { return obs_.size(); }
  std::vector<Date> dates() const;
  std::vector<double> prices() const;

 private:
  std::string id_;
  std::vector<PriceObservation> obs_;
};

struct ReturnObservation {
  Date date;
  double value;
};

// Date-indexed daily returns (or daily rates). Dates strictly increasing,
// values finite.
class ReturnSeries {
 public:
  ReturnSeries(std::string instrument_id, std::vector<ReturnObservation> observations);

  const std::string& id() const { return id_; }
  std::span<const ReturnObservation> observations() const { return obs_; }
  std::size_t size() const { return obs_.size(); }
  std::vector<Date> dates() const;
  std::vector<double> values() const;

 private:
  std::string id_;
  std::vector<ReturnObservation> obs_;
};

class TradingCalendar {
 public:
  TradingCalendar(std::string name, std::vector<Date> trading_dates);

  // Every date in [first, last] whose weekday is in `open_days`.
  static TradingCalendar weekly(std::string name, Date first, Date last,
                                std::initializer_list<std::chrono::weekday> open_days);

  const std::string& name() const { return name_; }
  std::span<const Date> dates() const { return dates_; }
  bool contains(Date d) const;

 private:
  std::string name_;
  std::vector<Date> dates_;
};

enum class AlignmentKind { Intersection, ForwardFill };

struct AlignmentPolicy {
  AlignmentKind kind = AlignmentKind::ForwardFill;
  int max_gap_days = 3;  // calendar days; forward-fill only

  static AlignmentPolicy intersection() { return {AlignmentKind::Intersection, 0}; }
  static AlignmentPolicy forward_fill(int max_gap_days) {
    return {AlignmentKind::ForwardFill, max_gap_days};
  }
  std::string describe() const;
};

// Columns of reals on a shared date axis. Column order is insertion order.
class AlignedPanel {
 public:
  using Column = std::pair<std::string, std::vector<double>>;

  AlignedPanel() = default;
  AlignedPanel(std::vector<Date> dates, std::vector<Column> columns,
               AlignmentPolicy policy = AlignmentPolicy::intersection());

  std::span<const Date> dates() const { return dates_; }
  std::size_t rows() const { return dates_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  const AlignmentPolicy& policy() const { return policy_; }

  bool has_column(const std::string& name) const;
  // Throws DataError naming the column when absent.
  std::span<const double> column(const std::string& name) const;

  AlignedPanel with_column(std::string name, std::vector<double> values) const;

 private:
  std::vector<Date> dates_;
  std::vector<Column> columns_;
  AlignmentPolicy policy_;
};

struct CsvSchema {
  std::string date_column = "Date";
  std::string value_column = "Close";
  DateFormat date_format = DateFormat::Iso;
};

struct RowIssue {
  std::size_t line;  // 1-based, header is line 1
  std::string message;
};

template <typename Series>
struct Loaded {
  Series series;
  std::vector<RowIssue> issues;  // rows that failed to parse and were skipped
};

// Delimiter (comma or tab) is detected from the header line. Rows are sorted
// by date. Unparseable rows are skipped and listed in `issues`; duplicate
// dates, non-positive prices and empty input throw DataError.
Loaded<PriceSeries> load_price_series(std::istream& in, const CsvSchema& schema,
                                      std::string instrument_id);
Loaded<PriceSeries> load_price_series(const std::string& path, const CsvSchema& schema,
                                      std::string instrument_id);

// Same format, values taken as rates (any finite value allowed).
Loaded<ReturnSeries> load_rate_series(std::istream& in, const CsvSchema& schema,
                                      std::string instrument_id);
Loaded<ReturnSeries> load_rate_series(const std::string& path, const CsvSchema& schema,
                                      std::string instrument_id);

// Annualized percent quote -> daily rate: value / 100 / day_count.
ReturnSeries annualized_percent_to_daily(const ReturnSeries& rates, double day_count = 252.0);

// ln(p_t / p_{t-1}) attached to the later date.
ReturnSeries log_returns(const PriceSeries& prices);

// Pointwise r - rf. Both series must share the same date axis.
ReturnSeries excess_returns(const ReturnSeries& r, const ReturnSeries& rf);

// Column ids are the series ids. With forward-fill, the first series (or the
// first calendar, when given) is the anchor; with intersection, calendars act
// as additional filters.
AlignedPanel align(std::span<const ReturnSeries> series, AlignmentPolicy policy,
                   std::span<const TradingCalendar> calendars = {});

// Delimited export: ISO dates, values with 10 significant digits.
void write_panel(std::ostream& out, const AlignedPanel& panel, char delimiter = ',');

}  // namespace evstudy
