#include "evstudy/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "evstudy/distributions.hpp"
#include "evstudy/error.hpp"

namespace evstudy {

CarResult car(const AbnormalReturns& ar, std::size_t half_width, double sigma2, double dof) {
  CarResult out;
  out.sector_id = ar.sector_id;
  out.half_width = half_width;
  for (double a : ar.window(half_width)) out.car += a;
  const double se = std::sqrt(static_cast<double>(2 * half_width + 1) * sigma2);
  const auto t = t_test("car", out.car, se, dof);
  out.t_stat = t.statistic;
  out.p_value = t.p_value;
  out.degenerate = t.degenerate;
  return out;
}

TestStat ar_t_test(double ar, double sigma2, double dof) {
  if (sigma2 < 0.0) throw std::invalid_argument("ar_t_test: negative variance");
  return t_test("ar", ar, std::sqrt(sigma2), dof);
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share rank mean((i+1)..(j+1))
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

RankTestResult corrado_statistic(std::span<const double> abnormal, std::size_t event_position) {
  const std::size_t T = abnormal.size();
  if (T < kMinRankSample) {
    throw std::invalid_argument("corrado: ranking sample has " + std::to_string(T) +
                                " observations, need at least " + std::to_string(kMinRankSample));
  }
  if (event_position >= T) throw std::out_of_range("corrado: event position outside sample");
  RankTestResult out;
  out.ranks = midranks(abnormal);
  out.event_position = event_position;
  const double Td = static_cast<double>(T);
  const double centre = 0.5 * (Td + 1.0);
  double ss = 0.0;
  for (double k : out.ranks) ss += (k - centre) * (k - centre);
  const double s_k = std::sqrt(ss / Td);
  if (s_k == 0.0) {
    out.degenerate = true;
    out.statistic = std::numeric_limits<double>::quiet_NaN();
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    out.p_value_normal = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double k_e = out.ranks[event_position];
  out.statistic = (k_e - centre) / s_k;
  out.p_value = std::min(1.0, 2.0 * std::min(k_e - 0.5, Td - k_e + 0.5) / Td);
  out.p_value_normal = dist::normal_two_sided_p(out.statistic);
  return out;
}

RankTestResult corrado_test(const NormalReturnModel& model, const AlignedPanel& panel,
                            const WindowLayout& layout, int event_day_offset) {
  const auto rows = layout.combined_indices();
  const long target = static_cast<long>(layout.event_index()) + event_day_offset;
  const auto& wide = layout.widest_event_range();
  if (target < static_cast<long>(wide.first) || target > static_cast<long>(wide.last)) {
    throw std::invalid_argument("corrado: event-day offset " + std::to_string(event_day_offset) +
                                " lies outside the widest event window");
  }
  const auto pos = static_cast<std::size_t>(
      std::find(rows.begin(), rows.end(), static_cast<std::size_t>(target)) - rows.begin());
  auto out = corrado_statistic(abnormal_returns_at(model, panel, rows), pos);
  out.sector_id = model.sector_id;
  return out;
}

ConditionalProbResult conditional_probability(std::span<const double> estimation_ar,
                                              double event_car, std::size_t half_width,
                                              double reference_rate) {
  const std::size_t L = estimation_ar.size();
  if (L < kMinConditionalEstimation) {
    throw std::invalid_argument("conditional probability: estimation window of " +
                                std::to_string(L) + " days, need at least " +
                                std::to_string(kMinConditionalEstimation));
  }
  if (L < 2 * half_width + kMinConditionalWindows) {
    throw std::invalid_argument("conditional probability: only " +
                                std::to_string(L > 2 * half_width ? L - 2 * half_width : 0) +
                                " rolling windows, need at least " +
                                std::to_string(kMinConditionalWindows));
  }
  if (!(reference_rate > 0.0 && reference_rate < 1.0)) {
    throw std::invalid_argument("conditional probability: reference rate must be in (0, 1)");
  }
  const std::size_t width = 2 * half_width + 1;
  const std::size_t windows = L - 2 * half_width;
  std::size_t count = 0;
  for (std::size_t s = 0; s < windows; ++s) {
    double sum = 0.0;
    for (std::size_t i = s; i < s + width; ++i) sum += estimation_ar[i];
    if (event_car < 0.0 ? sum <= event_car : sum >= event_car) ++count;
  }
  ConditionalProbResult out;
  out.half_width = half_width;
  out.windows = windows;
  out.event_car = event_car;
  out.reference_rate = reference_rate;
  out.cp = static_cast<double>(count) / static_cast<double>(windows);
  out.t_stat = (out.cp - reference_rate) /
               std::sqrt(reference_rate * (1.0 - reference_rate) / static_cast<double>(windows));
  return out;
}

ConditionalProbResult conditional_prob_test(const NormalReturnModel& model,
                                            const AlignedPanel& panel, const WindowLayout& layout,
                                            std::size_t half_width, double reference_rate) {
  if (half_width > layout.max_half_width()) {
    throw std::invalid_argument("conditional probability: half-width exceeds the widest event window");
  }
  const auto& est = layout.estimation_range();
  std::vector<std::size_t> est_rows;
  for (std::size_t i = est.first; i <= est.last; ++i) est_rows.push_back(i);
  std::vector<std::size_t> event_rows;
  for (std::size_t i = layout.event_index() - half_width; i <= layout.event_index() + half_width; ++i) {
    event_rows.push_back(i);
  }
  double event_car = 0.0;
  for (double a : abnormal_returns_at(model, panel, event_rows)) event_car += a;
  auto out = conditional_probability(abnormal_returns_at(model, panel, est_rows), event_car,
                                     half_width, reference_rate);
  out.sector_id = model.sector_id;
  return out;
}

std::string_view significance_stars(double p_value) {
  if (std::isnan(p_value)) return "";
  if (p_value < 0.01) return "***";
  if (p_value < 0.05) return "**";
  if (p_value < 0.10) return "*";
  return "";
}

}  // namespace evstudy
