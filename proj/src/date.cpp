#include "evstudy/date.hpp"

#include <charconv>
#include <cstdio>

#include "evstudy/error.hpp"

namespace evstudy {

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<DateFormat> parse_date_format(std::string_view name) {
  if (name == "YYYY-MM-DD" || name == "iso") return DateFormat::Iso;
  if (name == "DD/MM/YYYY" || name == "dmy") return DateFormat::DayMonthYear;
  return std::nullopt;
}

std::string_view to_string(DateFormat format) {
  return format == DateFormat::Iso ? "YYYY-MM-DD" : "DD/MM/YYYY";
}

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    throw DataError("invalid calendar date " + std::to_string(year) + "-" +
                    std::to_string(month) + "-" + std::to_string(day));
  }
  return Date{std::chrono::sys_days{ymd}};
}

std::optional<Date> Date::try_parse(std::string_view text, DateFormat format) {
  int y = 0, m = 0, d = 0;
  if (format == DateFormat::Iso) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d)) {
      return std::nullopt;
    }
  } else {
    if (text.size() != 10 || text[2] != '/' || text[5] != '/') return std::nullopt;
    if (!parse_int(text.substr(0, 2), d) || !parse_int(text.substr(3, 2), m) ||
        !parse_int(text.substr(6, 4), y)) {
      return std::nullopt;
    }
  }
  const std::chrono::year_month_day ymd{
      std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
      std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{std::chrono::sys_days{ymd}};
}

Date Date::parse(std::string_view text, DateFormat format) {
  if (auto parsed = try_parse(text, format)) return *parsed;
  throw DataError("cannot parse date '" + std::string(text) + "' as " +
                  std::string(to_string(format)));
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace evstudy
