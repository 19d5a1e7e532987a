#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "evstudy/error.hpp"
#include "evstudy/models.hpp"
#include "evstudy/synthlab.hpp"

using namespace evstudy;

namespace {

struct Fixture {
  AlignedPanel panel;
  WindowLayout layout;
};

// 320-day axis, event at 280, post length 30, premium a deterministic wiggle.
Fixture fixture(const std::function<double(std::size_t, double)>& sector) {
  std::vector<Date> dates;
  std::vector<double> premium, y;
  for (std::size_t i = 0; i < 320; ++i) {
    dates.push_back(Date::from_ymd(2017, 6, 21) + static_cast<int>(i));
    const double m = 0.01 * std::sin(0.37 * static_cast<double>(i)) + 0.002 * std::cos(1.3 * i);
    premium.push_back(m);
    y.push_back(sector(i, m));
  }
  AlignedPanel panel(dates, {{kMarketPremium, premium}, {"s", y}});
  EventSpec spec;
  spec.event_date = dates[280];
  auto layout = build_layout(panel.dates(), spec);
  return {panel, layout};
}

SimulatedPanel simulated(std::uint64_t seed, double beta, double shift, double shock = 0.0) {
  PanelSpec spec;
  spec.n_days = 320;
  spec.event_index = 280;
  spec.betas = {beta};
  spec.beta_shifts = {shift};
  spec.shocks = {shock};
  spec.seed = seed;
  return simulate_panel(spec);
}

WindowLayout layout_of(const SimulatedPanel& sim) {
  EventSpec spec;
  spec.event_date = sim.event_date;
  return build_layout(sim.panel.dates(), spec);
}

}  // namespace

TEST_CASE("capm on constructed data") {
  SUBCASE("identity portfolio") {
    const auto f = fixture([](std::size_t, double m) { return m; });
    const auto model = fit_capm(f.panel, f.layout, "s");
    CHECK(std::abs(model.alpha()) < 1e-12);
    CHECK(model.beta() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model.fit.n == f.layout.estimation_range().size());
  }
  SUBCASE("2 premium + 0.001") {
    const auto f = fixture([](std::size_t, double m) { return 2.0 * m + 0.001; });
    const auto model = fit_capm(f.panel, f.layout, "s");
    CHECK(model.alpha() == doctest::Approx(0.001).epsilon(1e-10));
    CHECK(model.beta() == doctest::Approx(2.0).epsilon(1e-12));
    const auto ar = abnormal_returns(model, f.panel, f.layout);
    for (double v : ar.values) CHECK(std::abs(v) < 1e-14);
  }
  SUBCASE("zero excess") {
    const auto f = fixture([](std::size_t, double) { return 0.0; });
    const auto model = fit_capm(f.panel, f.layout, "s");
    CHECK(model.alpha() == 0.0);
    CHECK(model.beta() == 0.0);
  }
  SUBCASE("fit uses the estimation window only") {
    // garbage outside the estimation window must not move the fit
    const auto f = fixture([](std::size_t i, double m) { return i >= 270 ? 5.0 : 1.5 * m; });
    CHECK(fit_capm(f.panel, f.layout, "s").beta() == doctest::Approx(1.5).epsilon(1e-12));
  }
}

TEST_CASE("abnormal returns") {
  const auto f = fixture([](std::size_t i, double m) {
    return 0.8 * m + 0.0005 * std::sin(2.1 * i) + (i == 280 ? -0.05 : 0.0);
  });
  const auto model = fit_capm(f.panel, f.layout, "s");
  const auto ar = abnormal_returns(model, f.panel, f.layout);
  REQUIRE(ar.values.size() == 21);
  CHECK(ar.dates[10] == f.layout.event_date());
  CHECK(ar.at(0) == doctest::Approx(-0.05).epsilon(0.05));
  CHECK(ar.window(2).size() == 5);
  CHECK_THROWS(ar.at(11));

  // translation: +c on event-window returns adds c to every AR
  std::vector<double> shifted(f.panel.column("s").begin(), f.panel.column("s").end());
  for (std::size_t i = 270; i <= 290; ++i) shifted[i] += 0.003;
  AlignedPanel p2(std::vector<Date>(f.panel.dates().begin(), f.panel.dates().end()),
                  {{kMarketPremium, std::vector<double>(f.panel.column(kMarketPremium).begin(),
                                                        f.panel.column(kMarketPremium).end())},
                   {"s", shifted}});
  const auto ar2 = abnormal_returns(model, p2, f.layout);
  for (std::size_t k = 0; k < ar.values.size(); ++k) {
    CHECK(ar2.values[k] - ar.values[k] == doctest::Approx(0.003).epsilon(1e-12));
  }
}

TEST_CASE("dummy series") {
  const auto f = fixture([](std::size_t, double m) { return m; });
  const auto one = build_dummy(f.layout, DummyDuration::SingleDay);
  CHECK(one.active == IndexRange{280, 280});
  double sum = 0;
  for (double v : one.values) sum += v;
  CHECK(sum == 1.0);
  CHECK(one.values[280] == 1.0);
  const auto through = build_dummy(f.layout, DummyDuration::ThroughPostWindow);
  sum = 0;
  for (double v : through.values) sum += v;
  CHECK(sum == 31.0);
  CHECK(sum == static_cast<double>(through.active_count()));
  for (std::size_t i = 0; i < through.values.size(); ++i) {
    CHECK(through.values[i] == (through.active.contains(i) ? 1.0 : 0.0));
  }
}

TEST_CASE("event-risk model") {
  SUBCASE("definitional identities") {
    const auto sim = simulated(1, 0.46, 0.46);
    const auto layout = layout_of(sim);
    const auto fit = fit_event_risk(sim.panel, layout, build_dummy(layout, DummyDuration::ThroughPostWindow),
                                    sim.sector_ids[0]);
    CHECK(fit.beta_post() == fit.beta_pre() + fit.immediate_shift());
    CHECK(fit.beta_post() - fit.beta_pre() == fit.beta2.value);
    CHECK(fit.fit.names ==
          std::vector<std::string>{"intercept", kMarketPremium, kPremiumTimesDummy, kEventDummy});
  }
  SUBCASE("null: |b2| below 2 se in at least 90% of 500 draws") {
    int inside = 0;
    for (std::uint64_t s = 0; s < 500; ++s) {
      const auto sim = simulated(1000 + s, 0.8, 0.0);
      const auto layout = layout_of(sim);
      const auto fit = fit_event_risk(sim.panel, layout,
                                      build_dummy(layout, DummyDuration::ThroughPostWindow), sim.sector_ids[0]);
      inside += std::abs(fit.beta2.value) < 2.0 * fit.beta2.standard_error;
    }
    CHECK(inside >= 450);
  }
  SUBCASE("zero premium is rank deficient") {
    const auto f = fixture([](std::size_t i, double) { return 0.001 * std::sin(1.0 * i); });
    std::vector<double> zero(320, 0.0);
    AlignedPanel p(std::vector<Date>(f.panel.dates().begin(), f.panel.dates().end()),
                   {{kMarketPremium, zero},
                    {"s", std::vector<double>(f.panel.column("s").begin(), f.panel.column("s").end())}});
    try {
      fit_event_risk(p, f.layout, build_dummy(f.layout, DummyDuration::ThroughPostWindow), "s");
      FAIL("expected RankDeficientError");
    } catch (const RankDeficientError& e) {
      CHECK(e.column() == kMarketPremium);
    }
  }
  SUBCASE("dummy identically zero is refused") {
    const auto sim = simulated(2, 1.0, 0.0);
    const auto layout = layout_of(sim);
    DummySeries none;
    none.values.assign(sim.panel.rows(), 0.0);
    CHECK_THROWS_AS(fit_event_risk(sim.panel, layout, none, sim.sector_ids[0]), RankDeficientError);
  }
  SUBCASE("single-day dummy is saturated") {
    const auto sim = simulated(3, 1.0, 0.0, -0.05);
    const auto layout = layout_of(sim);
    const auto fit = fit_event_risk(sim.panel, layout, build_dummy(layout, DummyDuration::SingleDay),
                                    sim.sector_ids[0]);
    CHECK(fit.saturated);
    CHECK(fit.beta2.value == 0.0);
    CHECK(std::isnan(fit.beta2.standard_error));
    CHECK(fit.note.find("saturated") != std::string::npos);
    // b3 absorbs the event day: the fitted residual there is zero
    const auto it = std::find(fit.sample_rows.begin(), fit.sample_rows.end(), layout.event_index());
    const auto pos = static_cast<Eigen::Index>(it - fit.sample_rows.begin());
    CHECK(std::abs(fit.fit.residuals(pos)) < 1e-14);
  }
  SUBCASE("full sample option") {
    const auto sim = simulated(4, 1.0, 0.0);
    const auto layout = layout_of(sim);
    const auto fit = fit_event_risk(sim.panel, layout, build_dummy(layout, DummyDuration::ThroughPostWindow),
                                    sim.sector_ids[0], EventSample::Full);
    CHECK(fit.fit.n == sim.panel.rows());
    CHECK(event_sample_rows(layout, EventSample::Local).size() ==
          layout.estimation_range().size() + layout.widest_event_range().size() + 20);
  }
}

TEST_CASE("integration model") {
  SUBCASE("zero foreign premium reproduces the event-risk fit") {
    const auto sim = simulated(5, 0.7, 0.2);
    const auto layout = layout_of(sim);
    const auto dummy = build_dummy(layout, DummyDuration::ThroughPostWindow);
    const auto panel = sim.panel.with_column("asia", std::vector<double>(sim.panel.rows(), 0.0));
    const std::vector<std::string> foreign{"asia"};
    const auto integ = fit_integration_model(panel, layout, dummy, sim.sector_ids[0], foreign);
    const auto base = fit_event_risk(panel, layout, dummy, sim.sector_ids[0]);
    CHECK(integ.foreign[0].dropped);
    for (Eigen::Index i = 0; i < base.fit.coefficients.size(); ++i) {
      CHECK(std::abs(integ.event_risk.fit.coefficients(i) - base.fit.coefficients(i)) < 1e-10);
    }
  }
  SUBCASE("loading 0.5 recovered within 3 se") {
    Rng rng(17);
    const auto sim = simulated(6, 0.7, 0.0);
    const auto layout = layout_of(sim);
    std::vector<double> f(sim.panel.rows());
    for (auto& v : f) v = 0.01 * rng.normal();
    std::vector<double> y(sim.panel.column(sim.sector_ids[0]).begin(), sim.panel.column(sim.sector_ids[0]).end());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.5 * f[i];
    const auto panel = sim.panel.with_column("europe", f).with_column("sector_x", y);
    const std::vector<std::string> foreign{"europe"};
    const auto integ = fit_integration_model(panel, layout, build_dummy(layout, DummyDuration::ThroughPostWindow),
                                             "sector_x", foreign, 2);
    const auto& est = integ.foreign[0].estimate;
    CHECK(std::abs(est.value - 0.5) < 3.0 * est.standard_error);
    CHECK(integ.ar_half_width == 2);
    CHECK(integ.normal_model.factors == std::vector<std::string>{kMarketPremium, "europe"});
  }
  SUBCASE("collinear foreign factor names the column") {
    const auto sim = simulated(7, 0.7, 0.0);
    const auto layout = layout_of(sim);
    std::vector<double> copy(sim.panel.column(kMarketPremium).begin(), sim.panel.column(kMarketPremium).end());
    for (auto& v : copy) v *= 2.0;
    const auto panel = sim.panel.with_column("us", copy);
    const std::vector<std::string> foreign{"us"};
    try {
      fit_integration_model(panel, layout, build_dummy(layout, DummyDuration::ThroughPostWindow),
                            sim.sector_ids[0], foreign);
      FAIL("expected RankDeficientError");
    } catch (const RankDeficientError& e) {
      CHECK(e.column() == "us");
    }
  }
}

TEST_CASE("wald b2 = b3 = 0 under the null: size within [3%, 7%]") {
  int rejections = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto sim = simulated(50000 + s, 0.9, 0.0);
    const auto layout = layout_of(sim);
    const auto fit = fit_event_risk(sim.panel, layout, build_dummy(layout, DummyDuration::ThroughPostWindow),
                                    sim.sector_ids[0]);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2, 4);
    R(0, 2) = 1.0;
    R(1, 3) = 1.0;
    rejections += wald_test(fit.fit, R, Eigen::VectorXd::Zero(2)).p_value < 0.05;
  }
  CHECK(rejections >= 30);
  CHECK(rejections <= 70);
}
