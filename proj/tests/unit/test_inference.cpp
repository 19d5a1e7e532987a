#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evstudy/inference.hpp"
#include "evstudy/random.hpp"
#include "evstudy/synthlab.hpp"

using namespace evstudy;

namespace {

AbnormalReturns ar_of(std::vector<double> values) {
  AbnormalReturns ar;
  ar.sector_id = "s";
  ar.half_width = (values.size() - 1) / 2;
  ar.values = std::move(values);
  ar.dates.resize(ar.values.size());
  return ar;
}

// two-sided one-sample KS p-value against U(0, 1) via the asymptotic series
double ks_uniform_p(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d = std::max({d, (i + 1) / n - x[i], x[i] - i / n});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k < 100; ++k) p += 2.0 * (k % 2 ? 1 : -1) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("car") {
  const auto zero = car(ar_of(std::vector<double>(21, 0.0)), 10, 1e-4, 200);
  CHECK(zero.car == 0.0);
  CHECK(zero.t_stat == 0.0);
  CHECK(zero.p_value == 1.0);

  const auto five = car(ar_of({9, 9, 1, 1, 1, 1, 1, 9, 9}), 2, 1.0, 100);
  CHECK(five.car == 5.0);
  CHECK(five.t_stat == doctest::Approx(5.0 / std::sqrt(5.0)));

  Rng rng(1);
  std::vector<double> v(21);
  for (auto& x : v) x = 0.01 * rng.normal();
  const auto ar = ar_of(v);
  for (std::size_t w : {2u, 5u, 10u}) {
    double direct = 0.0;
    for (std::size_t i = 10 - w; i <= 10 + w; ++i) direct += v[i];
    CHECK(car(ar, w, 1e-4, 240).car == direct);
  }
  CHECK_THROWS(car(ar, 11, 1e-4, 240));
}

TEST_CASE("event-day t test") {
  CHECK(ar_t_test(0.0, 1e-4, 248).statistic == 0.0);
  CHECK(ar_t_test(2.0 * std::sqrt(2.5e-4), 2.5e-4, 248).statistic == 2.0);
  CHECK(ar_t_test(0.01, 0.0, 248).degenerate);
}

TEST_CASE("midranks") {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0, 3.0};
  const auto r = midranks(v);
  CHECK(r == std::vector<double>{4.0, 1.0, 4.0, 2.0, 4.0});
  CHECK(std::accumulate(r.begin(), r.end(), 0.0) == 15.0);
}

TEST_CASE("corrado statistic") {
  SUBCASE("rank 1 of 100") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    std::reverse(v.begin(), v.end());
    const auto res = corrado_statistic(v, 99);  // smallest value
    CHECK(res.ranks[99] == 1.0);
    CHECK(res.statistic == doctest::Approx(-49.5 / std::sqrt((1e6 - 100.0) / 1200.0)).epsilon(1e-12));
    CHECK(res.statistic == doctest::Approx(-1.7147).epsilon(1e-4));
    CHECK(res.p_value == doctest::Approx(0.01));
  }
  SUBCASE("median of an odd sample") {
    std::vector<double> v(41);
    for (int i = 0; i < 41; ++i) v[i] = std::sin(1.0 + i);
    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    const auto pos = static_cast<std::size_t>(std::find(v.begin(), v.end(), sorted[20]) - v.begin());
    CHECK(corrado_statistic(v, pos).statistic == 0.0);
  }
  SUBCASE("all ties") {
    const auto res = corrado_statistic(std::vector<double>(50, 0.3), 10);
    CHECK(res.degenerate);
    CHECK(std::isnan(res.statistic));
    for (double r : res.ranks) CHECK(r == 25.5);
  }
  SUBCASE("monotone invariance") {
    Rng rng(2);
    std::vector<double> v(60), w(60);
    for (auto& x : v) x = rng.normal();
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::exp(3.0 * v[i]) - 7.0;
    CHECK(corrado_statistic(v, 17).statistic == corrado_statistic(w, 17).statistic);
  }
  SUBCASE("sum of midranks with ties") {
    std::vector<double> v(64);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 9);
    const auto res = corrado_statistic(v, 0);
    CHECK(std::accumulate(res.ranks.begin(), res.ranks.end(), 0.0) == 64.0 * 65.0 / 2.0);
  }
  SUBCASE("undersized sample") {
    CHECK_THROWS(corrado_statistic(std::vector<double>(29, 1.0), 0));
  }
}

TEST_CASE("conditional probability") {
  std::vector<double> est(250);
  for (std::size_t i = 0; i < est.size(); ++i) est[i] = 0.01 * std::sin(0.7 * i);
  SUBCASE("unprecedented move") {
    CHECK(conditional_probability(est, -1.0, 5).cp == 0.0);
  }
  SUBCASE("median rolling sum") {
    std::vector<double> sums;
    for (std::size_t s = 0; s + 11 <= est.size(); ++s) {
      sums.push_back(std::accumulate(est.begin() + s, est.begin() + s + 11, 0.0));
    }
    std::sort(sums.begin(), sums.end());
    const double median = sums[sums.size() / 2];
    const auto res = conditional_probability(est, median, 5);
    CHECK(std::abs(res.cp - 0.5) <= 1.0 / static_cast<double>(res.windows) + 1e-12);
    CHECK(res.windows == 240);
  }
  SUBCASE("antitone in extremity") {
    double prev = 1.0;
    for (double c = -0.0001; c > -0.2; c *= 1.5) {
      const double cp = conditional_probability(est, c, 5).cp;
      CHECK(cp <= prev);
      CHECK(cp >= 0.0);
      prev = cp;
    }
  }
  SUBCASE("t statistic") {
    const auto res = conditional_probability(est, -1.0, 5, 0.05);
    CHECK(res.t_stat == doctest::Approx(-0.05 / std::sqrt(0.05 * 0.95 / 240.0)));
  }
  SUBCASE("preconditions") {
    CHECK_THROWS(conditional_probability(std::vector<double>(49, 0.0), 0.1, 2));
    CHECK_THROWS(conditional_probability(std::vector<double>(60, 0.0), 0.1, 16));
  }
}

TEST_CASE("conditional probability under the null") {
  // cp counts the tail on the side of the event CAR, so it cannot exceed
  // about 1/2. The probability-integral transform is the lower-tail share
  // #(rolling sum <= CAR) / windows, i.e. cp for a negative CAR and 1 - cp
  // for a positive one (continuous data, no ties).
  std::vector<double> pit;
  double largest = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    PanelSpec spec;
    spec.n_days = 320;
    spec.event_index = 280;
    spec.seed = 777000 + s;
    const auto sim = simulate_panel(spec);
    EventSpec ev;
    ev.event_date = sim.event_date;
    const auto layout = build_layout(sim.panel.dates(), ev);
    const auto model = fit_capm(sim.panel, layout, sim.sector_ids[0]);
    const auto res = conditional_prob_test(model, sim.panel, layout, 5);
    largest = std::max(largest, res.cp);
    pit.push_back(res.event_car < 0.0 ? res.cp : 1.0 - res.cp);
  }
  CHECK(largest < 0.6);
  CHECK(ks_uniform_p(pit) > 0.01);
}

TEST_CASE("significance stars") {
  CHECK(significance_stars(0.0099) == "***");
  CHECK(significance_stars(0.01) == "**");
  CHECK(significance_stars(0.0499) == "**");
  CHECK(significance_stars(0.05) == "*");
  CHECK(significance_stars(0.0999) == "*");
  CHECK(significance_stars(0.10) == "");
  CHECK(significance_stars(0.5) == "");
  CHECK(significance_stars(std::nan("")) == "");
}
