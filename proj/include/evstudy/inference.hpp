#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evstudy/models.hpp"
#include "evstudy/regression.hpp"

namespace evstudy {

struct CarResult {
  std::string sector_id;
  std::size_t half_width = 0;
  double car = 0.0;  // sum of AR over [-w, +w], accumulated left to right
  double t_stat = 0.0;
  double p_value = 1.0;
  bool degenerate = false;
};

// t = CAR / sqrt((2w + 1) sigma2), sigma2 the estimation-window residual
// variance; two-sided Student-t(dof) p-value.
CarResult car(const AbnormalReturns& ar, std::size_t half_width, double sigma2, double dof);

TestStat ar_t_test(double ar, double sigma2, double dof);

// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

struct RankTestResult {
  std::string sector_id;
  double statistic = 0.0;
  // Two-sided mid-p value from the exact null distribution of a single rank
  // (uniform on 1..T): 2 min(K - 1/2, T - K + 1/2) / T.
  double p_value = 1.0;
  // Standard-normal reference, reported for comparison only: a single-day
  // statistic is bounded by sqrt(3) so this never rejects at 5%.
  double p_value_normal = 1.0;
  std::vector<double> ranks;
  std::size_t event_position = 0;
  bool degenerate = false;  // all ranks tied
};

inline constexpr std::size_t kMinRankSample = 30;

// Single-day rank statistic (K_e - (T+1)/2) / S_K with
// S_K = sqrt(mean((K_t - (T+1)/2)^2)).
RankTestResult corrado_statistic(std::span<const double> abnormal, std::size_t event_position);

// Ranks ARs over the estimation window plus the widest event window.
RankTestResult corrado_test(const NormalReturnModel& model, const AlignedPanel& panel,
                            const WindowLayout& layout, int event_day_offset = 0);

struct ConditionalProbResult {
  std::string sector_id;
  double cp = 0.0;
  double t_stat = 0.0;
  double event_car = 0.0;
  std::size_t half_width = 0;
  std::size_t windows = 0;  // L - 2w rolling windows in the estimation sample
  double reference_rate = 0.05;
};

inline constexpr std::size_t kMinConditionalEstimation = 50;
inline constexpr std::size_t kMinConditionalWindows = 30;

// Empirical probability that a rolling (2w+1)-day AR sum in the estimation
// sample is at least as extreme (same direction) as the event CAR.
ConditionalProbResult conditional_probability(std::span<const double> estimation_ar,
                                              double event_car, std::size_t half_width,
                                              double reference_rate = 0.05);

ConditionalProbResult conditional_prob_test(const NormalReturnModel& model,
                                            const AlignedPanel& panel, const WindowLayout& layout,
                                            std::size_t half_width, double reference_rate = 0.05);

// "***" p < 0.01, "**" p < 0.05, "*" p < 0.10, otherwise empty.
std::string_view significance_stars(double p_value);

}  // namespace evstudy
