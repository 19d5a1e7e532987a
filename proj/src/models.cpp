#include "evstudy/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "evstudy/error.hpp"

namespace evstudy {

namespace {

std::vector<double> gather(std::span<const double> column, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(column[r]);
  return out;
}

std::vector<std::size_t> range_rows(const IndexRange& r) {
  std::vector<std::size_t> out;
  out.reserve(r.size());
  for (std::size_t i = r.first; i <= r.last; ++i) out.push_back(i);
  return out;
}

NormalReturnModel fit_normal_model(const AlignedPanel& panel, const WindowLayout& layout,
                                   const std::string& sector_id, std::vector<std::string> factors,
                                   CovarianceKind covariance) {
  const auto rows = range_rows(layout.estimation_range());
  std::vector<NamedColumn> regressors;
  for (const auto& f : factors) regressors.push_back({f, gather(panel.column(f), rows)});
  const auto y = gather(panel.column(sector_id), rows);
  NormalReturnModel model;
  model.sector_id = sector_id;
  model.fit = ols(DesignMatrix::with_intercept(std::move(regressors)), y, covariance);
  model.estimation = layout.estimation_range();
  model.factors = std::move(factors);
  return model;
}

CoefficientEstimate estimate_of(const RegressionFit& fit, const std::string& name) {
  const auto j = static_cast<Eigen::Index>(fit.index_of(name));
  return {fit.coefficients(j), fit.standard_errors(j)};
}

EventRiskFit fit_event_design(const AlignedPanel& panel, const WindowLayout& layout,
                              const DummySeries& dummy, const std::string& sector_id,
                              std::span<const std::string> extra, EventSample sample,
                              CovarianceKind covariance) {
  if (dummy.values.size() != panel.rows()) {
    throw std::invalid_argument("event dummy length does not match the panel axis");
  }
  const auto rows = event_sample_rows(layout, sample);
  const auto premium = gather(panel.column(kMarketPremium), rows);
  const auto dv = gather(dummy.values, rows);
  const auto active = static_cast<std::size_t>(std::count(dv.begin(), dv.end(), 1.0));

  EventRiskFit out;
  out.sector_id = sector_id;
  out.sample_rows = rows;
  out.saturated = active == 1;

  std::vector<NamedColumn> regressors;
  regressors.push_back({kMarketPremium, premium});
  if (!out.saturated) {
    std::vector<double> interaction(premium.size());
    for (std::size_t i = 0; i < premium.size(); ++i) interaction[i] = premium[i] * dv[i];
    regressors.push_back({kPremiumTimesDummy, std::move(interaction)});
  }
  regressors.push_back({kEventDummy, dv});
  for (const auto& f : extra) regressors.push_back({f, gather(panel.column(f), rows)});

  out.fit = ols(DesignMatrix::with_intercept(std::move(regressors)),
                gather(panel.column(sector_id), rows), covariance);
  out.beta0 = estimate_of(out.fit, "intercept");
  out.beta1 = estimate_of(out.fit, kMarketPremium);
  out.beta3 = estimate_of(out.fit, kEventDummy);
  if (out.saturated) {
    out.beta2 = {0.0, std::numeric_limits<double>::quiet_NaN()};
    out.note = "saturated: event-day standard errors undefined (single active dummy day; "
               "slope shift not identified, intercept shift absorbs the day)";
  } else {
    out.beta2 = estimate_of(out.fit, kPremiumTimesDummy);
  }
  return out;
}

}  // namespace

double NormalReturnModel::expected(const AlignedPanel& panel, std::size_t row) const {
  double value = fit.coefficients(0);
  for (std::size_t j = 0; j < factors.size(); ++j) {
    value += fit.coefficients(static_cast<Eigen::Index>(j + 1)) * panel.column(factors[j])[row];
  }
  return value;
}

NormalReturnModel fit_capm(const AlignedPanel& panel, const WindowLayout& layout,
                           const std::string& sector_id, CovarianceKind covariance) {
  return fit_normal_model(panel, layout, sector_id, {kMarketPremium}, covariance);
}

double AbnormalReturns::at(int tau) const {
  const long w = static_cast<long>(half_width);
  if (tau < -w || tau > w) {
    throw std::out_of_range("abnormal return requested outside the event window");
  }
  return values[static_cast<std::size_t>(tau + w)];
}

std::span<const double> AbnormalReturns::window(std::size_t w) const {
  if (w > half_width) {
    throw std::out_of_range("event window [-" + std::to_string(w) + ", +" + std::to_string(w) +
                            "] is not covered by the abnormal-return series");
  }
  return std::span<const double>(values).subspan(half_width - w, 2 * w + 1);
}

std::vector<double> abnormal_returns_at(const NormalReturnModel& model, const AlignedPanel& panel,
                                        std::span<const std::size_t> rows) {
  const auto actual = panel.column(model.sector_id);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= panel.rows()) throw DataError("abnormal return requested beyond the panel axis");
    out.push_back(actual[r] - model.expected(panel, r));
  }
  return out;
}

AbnormalReturns abnormal_returns(const NormalReturnModel& model, const AlignedPanel& panel,
                                 const WindowLayout& layout) {
  const auto& wide = layout.widest_event_range();
  if (wide.last >= panel.rows()) {
    throw DataError("event window extends beyond the panel (" +
                    layout.axis()[std::min(wide.last, layout.axis().size() - 1)].iso() + ")");
  }
  const auto rows = range_rows(wide);
  AbnormalReturns ar;
  ar.sector_id = model.sector_id;
  ar.half_width = layout.max_half_width();
  for (std::size_t r : rows) ar.dates.push_back(panel.dates()[r]);
  ar.values = abnormal_returns_at(model, panel, rows);
  return ar;
}

DummySeries build_dummy(const WindowLayout& layout, DummyDuration duration) {
  DummySeries d;
  d.values.assign(layout.axis().size(), 0.0);
  const std::size_t e = layout.event_index();
  d.active = duration == DummyDuration::SingleDay ? IndexRange{e, e}
                                                  : IndexRange{e, layout.post_range().last};
  for (std::size_t i = d.active.first; i <= d.active.last; ++i) d.values[i] = 1.0;
  return d;
}

std::vector<std::size_t> event_sample_rows(const WindowLayout& layout, EventSample sample) {
  std::vector<std::size_t> rows;
  if (sample == EventSample::Full) {
    rows.resize(layout.axis().size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return rows;
  }
  rows = layout.combined_indices();
  for (std::size_t i = layout.post_range().first; i <= layout.post_range().last; ++i) {
    rows.push_back(i);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

EventRiskFit fit_event_risk(const AlignedPanel& panel, const WindowLayout& layout,
                            const DummySeries& dummy, const std::string& sector_id,
                            EventSample sample, CovarianceKind covariance) {
  return fit_event_design(panel, layout, dummy, sector_id, {}, sample, covariance);
}

IntegrationFit fit_integration_model(const AlignedPanel& panel, const WindowLayout& layout,
                                     const DummySeries& dummy, const std::string& sector_id,
                                     std::span<const std::string> foreign_premia,
                                     std::size_t ar_half_width, EventSample sample,
                                     CovarianceKind covariance) {
  if (ar_half_width > layout.max_half_width()) {
    throw std::invalid_argument("integration AR window exceeds the widest event window");
  }
  const auto rows = event_sample_rows(layout, sample);
  IntegrationFit out;
  std::vector<std::string> kept;
  for (const auto& id : foreign_premia) {
    const auto col = panel.column(id);
    const bool zero = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return col[r] == 0.0; });
    out.foreign.push_back({id, {0.0, std::numeric_limits<double>::quiet_NaN()}, zero});
    if (!zero) kept.push_back(id);
  }

  out.event_risk = fit_event_design(panel, layout, dummy, sector_id, kept, sample, covariance);
  for (auto& f : out.foreign) {
    if (!f.dropped) f.estimate = estimate_of(out.event_risk.fit, f.id);
  }

  std::vector<std::string> factors{kMarketPremium};
  factors.insert(factors.end(), kept.begin(), kept.end());
  out.normal_model = fit_normal_model(panel, layout, sector_id, std::move(factors), covariance);

  const std::size_t e = layout.event_index();
  std::vector<std::size_t> window;
  for (std::size_t i = e - ar_half_width; i <= e + ar_half_width; ++i) window.push_back(i);
  const auto ars = abnormal_returns_at(out.normal_model, panel, window);
  out.ar_half_width = ar_half_width;
  out.ar = 0.0;
  for (double a : ars) out.ar += a;
  const double se = std::sqrt(static_cast<double>(window.size()) * out.normal_model.sigma2());
  out.ar_test = t_test("integration_ar", out.ar, se, out.normal_model.dof());
  return out;
}

}  // namespace evstudy
