#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace evstudy {

enum class DateFormat {
  Iso,           // YYYY-MM-DD
  DayMonthYear,  // DD/MM/YYYY
};

std::optional<DateFormat> parse_date_format(std::string_view name);
std::string_view to_string(DateFormat format);

// End-of-day calendar date. No time-of-day component.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}

  static Date from_ymd(int year, unsigned month, unsigned day);
  // Throws DataError when the text is not a valid date in the given format.
  static Date parse(std::string_view text, DateFormat format = DateFormat::Iso);
  static std::optional<Date> try_parse(std::string_view text,
                                       DateFormat format = DateFormat::Iso);

  constexpr std::chrono::sys_days sys_days() const { return days_; }
  std::chrono::weekday weekday() const { return std::chrono::weekday{days_}; }
  std::string iso() const;

  constexpr Date operator+(int n) const {
    return Date{days_ + std::chrono::days{n}};
  }
  constexpr Date operator-(int n) const {
    return Date{days_ - std::chrono::days{n}};
  }
  // Calendar days from rhs to *this.
  constexpr long operator-(Date rhs) const {
    return static_cast<long>((days_ - rhs.days_).count());
  }

  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace evstudy
