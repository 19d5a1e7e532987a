#include "evstudy/windows.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "evstudy/error.hpp"

namespace evstudy {

void EventSpec::validate() const {
  if (half_widths.empty()) throw std::invalid_argument("event spec: no event half-widths");
  for (std::size_t i = 0; i < half_widths.size(); ++i) {
    if (half_widths[i] == 0) throw std::invalid_argument("event spec: half-width must be positive");
    if (i > 0 && half_widths[i] <= half_widths[i - 1]) {
      throw std::invalid_argument("event spec: half-widths must be strictly ascending");
    }
  }
  if (estimation_length && *estimation_length == 0) {
    throw std::invalid_argument("event spec: estimation length must be positive");
  }
  if (post_event_length == 0) {
    throw std::invalid_argument("event spec: post-event length must be positive");
  }
}

WindowLayout::WindowLayout(std::vector<Date> axis, std::size_t event_index, IndexRange estimation,
                           std::map<std::size_t, IndexRange> event_ranges, IndexRange post)
    : axis_(std::move(axis)),
      event_index_(event_index),
      estimation_(estimation),
      event_ranges_(std::move(event_ranges)),
      post_(post) {
  if (event_ranges_.empty()) throw std::invalid_argument("layout: no event windows");
  if (post_.last >= axis_.size() || widest_event_range().last >= axis_.size()) {
    throw std::invalid_argument("layout: window beyond axis");
  }
  if (estimation_.last >= widest_event_range().first) {
    throw std::invalid_argument("layout: estimation window overlaps event window");
  }
}

const IndexRange& WindowLayout::event_range(std::size_t half_width) const {
  const auto it = event_ranges_.find(half_width);
  if (it == event_ranges_.end()) {
    throw std::out_of_range("layout: no event window of half-width " + std::to_string(half_width));
  }
  return it->second;
}

std::vector<std::size_t> WindowLayout::combined_indices() const {
  std::vector<std::size_t> out;
  const auto& wide = widest_event_range();
  out.reserve(estimation_.size() + wide.size());
  for (std::size_t i = estimation_.first; i <= estimation_.last; ++i) out.push_back(i);
  for (std::size_t i = wide.first; i <= wide.last; ++i) out.push_back(i);
  return out;
}

std::size_t locate_event(std::span<const Date> axis, Date event_date) {
  if (axis.empty()) throw std::invalid_argument("locate_event: empty axis");
  const auto it = std::lower_bound(axis.begin(), axis.end(), event_date);
  if (it == axis.end()) {
    throw DataError("event date " + event_date.iso() + " is after the last trading day " +
                    axis.back().iso());
  }
  return static_cast<std::size_t>(it - axis.begin());
}

WindowLayout build_layout(std::span<const Date> axis, const EventSpec& spec) {
  spec.validate();
  const std::size_t event = locate_event(axis, spec.event_date);
  const std::size_t max_w = spec.max_half_width();

  const std::size_t reserved = spec.pre_event_gap + max_w;
  std::size_t estimation_length = 0;
  if (spec.estimation_length) {
    estimation_length = *spec.estimation_length;
  } else {
    estimation_length = event > reserved ? std::min(event - reserved, kMaxDefaultEstimationLength) : 0;
    if (estimation_length == 0) {
      throw InsufficientDataError("layout: no pre-event history left for an estimation window; "
                                  "missing 1 trading day(s) before " + axis[event].iso(), 1);
    }
  }
  const std::size_t needed_before = estimation_length + reserved;
  if (event < needed_before) {
    const std::size_t missing = needed_before - event;
    throw InsufficientDataError("layout: missing " + std::to_string(missing) +
                                    " pre-event trading day(s) before " + axis[event].iso(),
                                missing);
  }
  const std::size_t needed_after = std::max(max_w, spec.post_event_length);
  const std::size_t available_after = axis.size() - 1 - event;
  if (available_after < needed_after) {
    const std::size_t missing = needed_after - available_after;
    throw InsufficientDataError("layout: missing " + std::to_string(missing) +
                                    " post-event trading day(s) after " + axis[event].iso(),
                                missing);
  }

  const IndexRange estimation{event - reserved - estimation_length, event - reserved - 1};
  std::map<std::size_t, IndexRange> ranges;
  for (std::size_t w : spec.half_widths) ranges.emplace(w, IndexRange{event - w, event + w});
  const IndexRange post{event + 1, event + spec.post_event_length};
  return WindowLayout(std::vector<Date>(axis.begin(), axis.end()), event, estimation,
                      std::move(ranges), post);
}

}  // namespace evstudy
