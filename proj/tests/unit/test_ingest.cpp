#include <doctest.h>

#include <cmath>
#include <sstream>

#include "evstudy/error.hpp"
#include "evstudy/ingest.hpp"

using namespace evstudy;
using std::chrono::Friday;
using std::chrono::Monday;
using std::chrono::Sunday;
using std::chrono::Thursday;
using std::chrono::Tuesday;
using std::chrono::Wednesday;

namespace {

Date d(int y, unsigned m, unsigned day) { return Date::from_ymd(y, m, day); }

PriceSeries load(const std::string& text, CsvSchema schema = {}) {
  std::istringstream in(text);
  return load_price_series(in, schema, "X").series;
}

ReturnSeries returns_on(const std::string& id, const std::vector<Date>& dates, double base) {
  std::vector<ReturnObservation> obs;
  for (std::size_t i = 0; i < dates.size(); ++i) obs.push_back({dates[i], base + static_cast<double>(i)});
  return ReturnSeries(id, obs);
}

}  // namespace

TEST_CASE("load three rows") {
  const auto p = load("Date,Close\n2018-10-01,100\n2018-10-02,98\n2018-10-03,99\n");
  REQUIRE(p.size() == 3);
  CHECK(p.observations()[0].date == d(2018, 10, 1));
  CHECK(p.observations()[2].price == 99.0);
}

TEST_CASE("shuffled rows load identically") {
  const auto a = load("Date,Close\n2018-10-01,100\n2018-10-02,98\n2018-10-03,99\n");
  const auto b = load("Date,Close\n2018-10-03,99\n2018-10-01,100\n2018-10-02,98\n");
  CHECK(a.dates() == b.dates());
  CHECK(a.prices() == b.prices());
}

TEST_CASE("zero price is rejected naming the date") {
  try {
    load("Date,Close\n2018-10-01,100\n2018-10-02,0\n");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2018-10-02") != std::string::npos);
  }
}

TEST_CASE("duplicate dates and empty input") {
  CHECK_THROWS_AS(load("Date,Close\n2018-10-01,100\n2018-10-01,101\n"), DataError);
  CHECK_THROWS_AS(load(""), DataError);
  CHECK_THROWS_AS(load("Date,Close\n"), DataError);
}

TEST_CASE("bad rows are reported, not dropped silently") {
  std::istringstream in("Date,Close\n2018-10-01,100\nnot-a-date,5\n2018-10-03,abc\n2018-10-04,101\n");
  const auto loaded = load_price_series(in, {}, "X");
  CHECK(loaded.series.size() == 2);
  REQUIRE(loaded.issues.size() == 2);
  CHECK(loaded.issues[0].line == 3);
  CHECK(loaded.issues[1].line == 4);
}

TEST_CASE("tab delimiter, BOM, extra columns and day-month-year dates") {
  CsvSchema schema;
  schema.value_column = "Price";
  schema.date_format = DateFormat::DayMonthYear;
  const auto p = load("\xEF\xBB\xBFOpen\tDate\tPrice\n1\t02/10/2018\t50.5\n1\t01/10/2018\t50\n", schema);
  REQUIRE(p.size() == 2);
  CHECK(p.observations()[0].date == d(2018, 10, 1));
  CHECK(p.observations()[1].price == 50.5);
}

TEST_CASE("missing schema column") {
  CHECK_THROWS_AS(load("Day,Close\n2018-10-01,1\n"), DataError);
}

TEST_CASE("log returns") {
  SUBCASE("constant") {
    const auto r = log_returns(load("Date,Close\n2018-10-01,100\n2018-10-02,100\n2018-10-03,100\n"));
    CHECK(r.values() == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("e-fold") {
    const PriceSeries p("X", {{d(2018, 1, 1), 100.0}, {d(2018, 1, 2), 100.0 * std::exp(1.0)}});
    CHECK(log_returns(p).values()[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("100, 98, 99") {
    const auto r = log_returns(load("Date,Close\n2018-10-01,100\n2018-10-02,98\n2018-10-03,99\n"));
    REQUIRE(r.size() == 2);
    CHECK(r.observations()[0].date == d(2018, 10, 2));
    // ln(0.98) and ln(99/98) evaluated independently
    CHECK(r.values()[0] == doctest::Approx(-0.020202707317519466).epsilon(1e-14));
    CHECK(r.values()[1] == doctest::Approx(0.010152371464017962).epsilon(1e-14));
  }
  SUBCASE("fewer than two prices") {
    CHECK_THROWS(log_returns(PriceSeries("X", {{d(2018, 1, 1), 1.0}})));
  }
  SUBCASE("round trip") {
    std::vector<PriceObservation> obs;
    double price = 37.0;
    for (int i = 0; i < 200; ++i) {
      obs.push_back({d(2018, 1, 1) + i, price});
      price *= 1.0 + 0.03 * std::sin(i * 1.7);
    }
    const auto r = log_returns(PriceSeries("X", obs));
    double cum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      cum += r.values()[i];
      CHECK(std::exp(cum) == doctest::Approx(obs[i + 1].price / obs[0].price).epsilon(1e-12));
    }
  }
}

TEST_CASE("excess returns") {
  const std::vector<Date> dates{d(2018, 1, 1), d(2018, 1, 2)};
  const ReturnSeries r("r", {{dates[0], 0.010}, {dates[1], -0.005}});
  const ReturnSeries rf("rf", {{dates[0], 0.0001}, {dates[1], 0.0001}});
  const auto x = excess_returns(r, rf);
  CHECK(x.values()[0] == doctest::Approx(0.0099).epsilon(1e-14));
  CHECK(x.values()[1] == doctest::Approx(-0.0051).epsilon(1e-14));
  CHECK(excess_returns(r, r).values() == std::vector<double>{0.0, 0.0});

  const ReturnSeries shifted("rf", {{dates[0], 0.0}, {d(2018, 1, 3), 0.0}});
  try {
    excess_returns(r, shifted);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2018-01-02") != std::string::npos);
  }
}

TEST_CASE("annualized percent to daily") {
  const ReturnSeries q("rf", {{d(2018, 1, 1), 2.52}});
  CHECK(annualized_percent_to_daily(q).values()[0] == doctest::Approx(0.0001).epsilon(1e-14));
  CHECK(annualized_percent_to_daily(q, 360).values()[0] == doctest::Approx(0.00007).epsilon(1e-14));
}

TEST_CASE("calendar alignment, Sun-Thu against Mon-Fri") {
  // week of 2018-10-07 (Sunday) .. 2018-10-12 (Friday)
  const auto saudi = TradingCalendar::weekly("tadawul", d(2018, 10, 7), d(2018, 10, 13),
                                             {Sunday, Monday, Tuesday, Wednesday, Thursday});
  const auto us = TradingCalendar::weekly("nyse", d(2018, 10, 5), d(2018, 10, 13),
                                          {Monday, Tuesday, Wednesday, Thursday, Friday});
  const std::vector<Date> sa(saudi.dates().begin(), saudi.dates().end());
  const std::vector<Date> ua(us.dates().begin(), us.dates().end());
  const auto home = returns_on("home", sa, 0.0);
  const auto foreign = returns_on("us", ua, 100.0);  // Fri 5 Oct = 100, Mon 8 = 101, ..., Fri 12 = 105

  SUBCASE("intersection keeps Mon-Thu") {
    const std::vector<ReturnSeries> s{home, foreign};
    const auto p = align(s, AlignmentPolicy::intersection());
    const std::vector<Date> expected{d(2018, 10, 8), d(2018, 10, 9), d(2018, 10, 10), d(2018, 10, 11)};
    CHECK(std::vector<Date>(p.dates().begin(), p.dates().end()) == expected);
    CHECK(p.column("us")[0] == 101.0);
    CHECK(p.column("home")[0] == 1.0);
  }
  SUBCASE("forward fill carries Friday into Sunday") {
    const std::vector<ReturnSeries> s{home, foreign};
    const auto p = align(s, AlignmentPolicy::forward_fill(3));
    CHECK(std::vector<Date>(p.dates().begin(), p.dates().end()) == sa);
    CHECK(p.column("us")[0] == 100.0);  // Sunday 7 Oct <- Friday 5 Oct
    CHECK(p.column("us")[1] == 101.0);
    CHECK(std::vector<double>(p.column("home").begin(), p.column("home").end()) == home.values());
  }
  SUBCASE("gap longer than k names instrument and date") {
    const ReturnSeries sparse("us", {{d(2018, 10, 1), 1.0}, {d(2018, 10, 10), 2.0}});
    const std::vector<ReturnSeries> s{home, sparse};
    try {
      align(s, AlignmentPolicy::forward_fill(3));
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("us") != std::string::npos);
      CHECK(msg.find("2018-10-07") != std::string::npos);
    }
  }
  SUBCASE("empty intersection") {
    const auto later = returns_on("late", {d(2019, 1, 1)}, 0.0);
    const std::vector<ReturnSeries> s{home, later};
    CHECK_THROWS_AS(align(s, AlignmentPolicy::intersection()), DataError);
  }
  SUBCASE("calendars filter the intersection") {
    const std::vector<ReturnSeries> s{returns_on("a", ua, 0.0)};
    const std::vector<TradingCalendar> cal{saudi};
    const auto p = align(s, AlignmentPolicy::intersection(), cal);
    CHECK(p.rows() == 4);
  }
}

TEST_CASE("align properties") {
  const std::vector<Date> a{d(2018, 1, 1), d(2018, 1, 2), d(2018, 1, 4), d(2018, 1, 5)};
  const std::vector<Date> b{d(2018, 1, 2), d(2018, 1, 3), d(2018, 1, 4)};
  const auto sa = returns_on("a", a, 0.0);
  const auto sb = returns_on("b", b, 10.0);
  SUBCASE("single series is unchanged under either policy") {
    for (const auto policy : {AlignmentPolicy::intersection(), AlignmentPolicy::forward_fill(3)}) {
      const std::vector<ReturnSeries> s{sa};
      const auto p = align(s, policy);
      CHECK(std::vector<Date>(p.dates().begin(), p.dates().end()) == a);
      CHECK(std::vector<double>(p.column("a").begin(), p.column("a").end()) == sa.values());
    }
  }
  SUBCASE("intersection commutes") {
    const std::vector<ReturnSeries> ab{sa, sb}, ba{sb, sa};
    const auto p = align(ab, AlignmentPolicy::intersection());
    const auto q = align(ba, AlignmentPolicy::intersection());
    CHECK(std::vector<Date>(p.dates().begin(), p.dates().end()) ==
          std::vector<Date>(q.dates().begin(), q.dates().end()));
    for (const char* id : {"a", "b"}) {
      CHECK(std::vector<double>(p.column(id).begin(), p.column(id).end()) ==
            std::vector<double>(q.column(id).begin(), q.column(id).end()));
    }
  }
}

TEST_CASE("panel export") {
  const AlignedPanel p({d(2018, 1, 1), d(2018, 1, 2)}, {{"x", {0.1234567890123, -2.0}}});
  std::ostringstream out;
  write_panel(out, p);
  CHECK(out.str() == "Date,x\n2018-01-01,0.123456789\n2018-01-02,-2\n");
}
