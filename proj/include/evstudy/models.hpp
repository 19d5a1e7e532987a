#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evstudy/ingest.hpp"
#include "evstudy/regression.hpp"
#include "evstudy/windows.hpp"

namespace evstudy {

// Panel column holding the market risk premium (market return - risk-free).
inline const std::string kMarketPremium = "market_premium";
inline const std::string kPremiumTimesDummy = "premium_x_dummy";
inline const std::string kEventDummy = "event_dummy";

// CAPM benchmark: sector excess return on {intercept, market premium[, extra
// factors]} over the estimation window only.
struct NormalReturnModel {
  std::string sector_id;
  RegressionFit fit;
  IndexRange estimation;
  std::vector<std::string> factors;  // regressors after the intercept

  double alpha() const { return fit.coefficients(0); }
  double beta() const { return fit.coefficient(kMarketPremium); }
  double sigma2() const { return fit.sigma2; }
  double dof() const { return static_cast<double>(fit.dof); }
  double expected(const AlignedPanel& panel, std::size_t row) const;
};

NormalReturnModel fit_capm(const AlignedPanel& panel, const WindowLayout& layout,
                           const std::string& sector_id,
                           CovarianceKind covariance = CovarianceKind::Classical);

// Abnormal returns over the widest event window, relative days -w..+w.
struct AbnormalReturns {
  std::string sector_id;
  std::size_t half_width = 0;
  std::vector<Date> dates;
  std::vector<double> values;

  double at(int tau) const;
  // Values for relative days -w..+w (w <= half_width).
  std::span<const double> window(std::size_t w) const;
};

AbnormalReturns abnormal_returns(const NormalReturnModel& model, const AlignedPanel& panel,
                                 const WindowLayout& layout);

// Actual minus expected excess return for arbitrary panel rows.
std::vector<double> abnormal_returns_at(const NormalReturnModel& model, const AlignedPanel& panel,
                                        std::span<const std::size_t> rows);

enum class DummyDuration { SingleDay, ThroughPostWindow };

struct DummySeries {
  std::vector<double> values;  // one per axis date
  IndexRange active;
  std::size_t active_count() const { return active.size(); }
};

DummySeries build_dummy(const WindowLayout& layout, DummyDuration duration);

enum class EventSample {
  Local,  // estimation, widest event and post-event windows
  Full,   // the whole axis
};

std::vector<std::size_t> event_sample_rows(const WindowLayout& layout, EventSample sample);

struct CoefficientEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

// Dummy-interaction CAPM:
//   r_i - r_f = b0 + b1 (r_m - r_f) + b2 (r_m - r_f) DV + b3 DV + e
struct EventRiskFit {
  std::string sector_id;
  CoefficientEstimate beta0, beta1, beta2, beta3;
  RegressionFit fit;
  std::vector<std::size_t> sample_rows;
  // One active dummy day: the slope shift is not identified; b2 is reported
  // as 0 with undefined standard error and b3 absorbs the day.
  bool saturated = false;
  std::string note;

  double beta_pre() const { return beta1.value; }
  double immediate_shift() const { return beta2.value; }
  double beta_post() const { return beta1.value + beta2.value; }
};

EventRiskFit fit_event_risk(const AlignedPanel& panel, const WindowLayout& layout,
                            const DummySeries& dummy, const std::string& sector_id,
                            EventSample sample = EventSample::Local,
                            CovarianceKind covariance = CovarianceKind::Classical);

struct ForeignLoading {
  std::string id;
  CoefficientEstimate estimate;
  bool dropped = false;  // identically zero over the sample; excluded from the design
};

struct IntegrationFit {
  EventRiskFit event_risk;                 // dummy-interaction design plus foreign premia
  std::vector<ForeignLoading> foreign;
  NormalReturnModel normal_model;          // CAPM plus foreign premia, estimation window
  std::size_t ar_half_width = 0;
  double ar = 0.0;                         // summed over [-h, +h]
  TestStat ar_test;
};

IntegrationFit fit_integration_model(const AlignedPanel& panel, const WindowLayout& layout,
                                     const DummySeries& dummy, const std::string& sector_id,
                                     std::span<const std::string> foreign_premia,
                                     std::size_t ar_half_width = 0,
                                     EventSample sample = EventSample::Local,
                                     CovarianceKind covariance = CovarianceKind::Classical);

}  // namespace evstudy
