#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "evstudy/date.hpp"

namespace evstudy {

// Closed index interval [first, last].
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last - first + 1; }
  bool contains(std::size_t i) const { return first <= i && i <= last; }
  bool operator==(const IndexRange&) const = default;
};

inline constexpr std::size_t kMaxDefaultEstimationLength = 250;

struct EventSpec {
  Date event_date;
  // Unset: all available pre-event days, capped at kMaxDefaultEstimationLength.
  std::optional<std::size_t> estimation_length;
  std::size_t pre_event_gap = 0;
  std::vector<std::size_t> half_widths{2, 5, 10};
  std::size_t post_event_length = 30;

  // Throws std::invalid_argument on empty/unsorted/zero widths or zero lengths.
  void validate() const;
  std::size_t max_half_width() const { return half_widths.back(); }
};

// Partition of a trading-day axis around the event day (index t = 0):
// estimation window, nested symmetric event windows, post-event window.
class WindowLayout {
 public:
  WindowLayout(std::vector<Date> axis, std::size_t event_index, IndexRange estimation,
               std::map<std::size_t, IndexRange> event_ranges, IndexRange post);

  std::span<const Date> axis() const { return axis_; }
  std::size_t event_index() const { return event_index_; }
  Date event_date() const { return axis_[event_index_]; }
  const IndexRange& estimation_range() const { return estimation_; }
  const std::map<std::size_t, IndexRange>& event_ranges() const { return event_ranges_; }
  // Throws std::out_of_range for an unconfigured half-width.
  const IndexRange& event_range(std::size_t half_width) const;
  const IndexRange& widest_event_range() const { return event_ranges_.rbegin()->second; }
  std::size_t max_half_width() const { return event_ranges_.rbegin()->first; }
  const IndexRange& post_range() const { return post_; }

  // Estimation window followed by the widest event window, ascending.
  std::vector<std::size_t> combined_indices() const;

 private:
  std::vector<Date> axis_;
  std::size_t event_index_;
  IndexRange estimation_;
  std::map<std::size_t, IndexRange> event_ranges_;
  IndexRange post_;
};

// Index of event_date on the axis, or of the first trading day after it.
// Throws DataError when event_date is after the last axis date.
std::size_t locate_event(std::span<const Date> axis, Date event_date);

// Throws InsufficientDataError stating how many trading days are missing.
WindowLayout build_layout(std::span<const Date> axis, const EventSpec& spec);

}  // namespace evstudy
