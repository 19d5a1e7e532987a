#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "evstudy/distributions.hpp"
#include "evstudy/error.hpp"
#include "evstudy/random.hpp"
#include "evstudy/regression.hpp"

using namespace evstudy;
namespace bm = boost::math;

namespace {

std::vector<double> normals(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("p-values against boost") {
  for (double dof : {1.0, 2.5, 5.0, 30.0, 248.0, 5000.0}) {
    for (double t : {0.0, 0.1, 1.0, 1.96, 3.91, 8.0}) {
      const double expect = 2.0 * bm::cdf(bm::complement(bm::students_t(dof), t));
      CHECK(dist::student_t_two_sided_p(t, dof) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(dist::student_t_two_sided_p(-t, dof) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  for (double k : {1.0, 2.0, 5.0, 10.0}) {
    for (double x : {0.01, 0.5, 3.0, 11.0, 40.0}) {
      CHECK(dist::chi_squared_upper_p(x, k) ==
            doctest::Approx(bm::cdf(bm::complement(bm::chi_squared(k), x))).epsilon(1e-12));
    }
  }
  for (auto [d1, d2] : {std::pair{1.0, 10.0}, {2.0, 246.0}, {4.0, 30.0}}) {
    for (double f : {0.05, 1.0, 3.0, 9.0}) {
      CHECK(dist::f_upper_p(f, d1, d2) ==
            doctest::Approx(bm::cdf(bm::complement(bm::fisher_f(d1, d2), f))).epsilon(1e-12));
    }
  }
  for (double z : {-6.0, -1.96, 0.0, 0.7, 3.0}) {
    CHECK(dist::normal_cdf(z) == doctest::Approx(bm::cdf(bm::normal(), z)).epsilon(1e-13));
  }
}

TEST_CASE("ols: exact fit and intercept-only") {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(1.0 + 2.0 * v);
  const auto fit = ols(DesignMatrix::with_intercept({{"x", x}}), y);
  CHECK(fit.coefficients(0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(fit.coefficient("x") == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(fit.sigma2 <= 1e-20);

  const std::vector<double> z{3, 1, 4, 1, 5, 9, 2};
  const auto mean_fit = ols(DesignMatrix({{"intercept", std::vector<double>(7, 1.0)}}, true), z);
  double mean = 0;
  for (double v : z) mean += v / 7.0;
  double var = 0;
  for (double v : z) var += (v - mean) * (v - mean) / 6.0;
  CHECK(mean_fit.coefficients(0) == doctest::Approx(mean).epsilon(1e-14));
  CHECK(mean_fit.sigma2 == doctest::Approx(var).epsilon(1e-13));
}

TEST_CASE("ols: five-point closed form") {
  const std::vector<double> x{0.5, 1.7, 2.2, 3.9, 5.1}, y{1.1, 2.0, 2.9, 3.7, 6.2};
  double mx = 0, my = 0;
  for (int i = 0; i < 5; ++i) mx += x[i] / 5, my += y[i] / 5;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 5; ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  const auto fit = ols(DesignMatrix::with_intercept({{"x", x}}), y);
  CHECK(fit.coefficient("x") == doctest::Approx(sxy / sxx).epsilon(1e-12));
  CHECK(fit.coefficients(0) == doctest::Approx(my - sxy / sxx * mx).epsilon(1e-12));
  CHECK(fit.dof == 3);
  CHECK(fit.r_squared >= 0.0);
  CHECK(fit.r_squared <= 1.0);
}

TEST_CASE("ols: invariants on random designs") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 20 + rep;
    const auto a = normals(rng, n), b = normals(rng, n), e = normals(rng, n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 0.3 + 1.5 * a[i] - 0.7 * b[i] + e[i];
    const auto X = DesignMatrix::with_intercept({{"a", a}, {"b", b}});
    const auto fit = ols(X, y);

    // residuals orthogonal to every column
    const Eigen::VectorXd xe = X.matrix().transpose() * fit.residuals;
    const double scale = static_cast<double>(n) * X.matrix().cwiseAbs().maxCoeff() *
                         fit.residuals.cwiseAbs().maxCoeff();
    CHECK(xe.cwiseAbs().maxCoeff() <= 1e-8 * scale);
    // covariance symmetric PSD, se = sqrt(diag)
    CHECK((fit.covariance - fit.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-18);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.covariance);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-18);
    for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
      CHECK(fit.standard_errors(i) == doctest::Approx(std::sqrt(fit.covariance(i, i))));
    }
    // column reordering
    const auto swapped = ols(DesignMatrix::with_intercept({{"b", b}, {"a", a}}), y);
    CHECK(swapped.coefficient("a") == doctest::Approx(fit.coefficient("a")).epsilon(1e-10));
    CHECK(swapped.coefficient("b") == doctest::Approx(fit.coefficient("b")).epsilon(1e-10));
    // scaling y scales coefficients and se; t unchanged
    std::vector<double> y3(y);
    for (auto& v : y3) v *= 3.0;
    const auto scaled = ols(X, y3);
    const auto t1 = t_stats(fit), t3 = t_stats(scaled);
    for (std::size_t i = 0; i < t1.size(); ++i) {
      CHECK(scaled.coefficients(static_cast<Eigen::Index>(i)) ==
            doctest::Approx(3.0 * fit.coefficients(static_cast<Eigen::Index>(i))).epsilon(1e-10));
      CHECK(std::abs(t3[i].statistic - t1[i].statistic) < 1e-10 * std::max(1.0, std::abs(t1[i].statistic)));
    }
  }
}

TEST_CASE("ols: rank deficiency names the dependent column") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, b{2, 4, 6, 8, 10, 12}, y{1, 3, 2, 5, 4, 6};
  try {
    ols(DesignMatrix::with_intercept({{"a", a}, {"twice_a", b}}), y);
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    CHECK(e.column() == "twice_a");
  }
  try {
    ols(DesignMatrix::with_intercept({{"zero", std::vector<double>(6, 0.0)}}), y);
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    CHECK(e.column() == "zero");
  }
}

TEST_CASE("design matrix invariants") {
  CHECK_THROWS(DesignMatrix::with_intercept({{"a", {1, 2}}}));  // n must exceed k
  CHECK_THROWS(DesignMatrix({{"a", {1, 2, 3}}, {"a", {1, 2, 4}}}, false));
  CHECK_THROWS(DesignMatrix({{"a", {1, 2, 3}}, {"b", {1, 2}}}, false));
}

TEST_CASE("t statistics") {
  CHECK(t_test("b", 0.0, 0.5, 100).statistic == 0.0);
  CHECK(t_test("b", 0.0, 0.5, 100).p_value == 1.0);
  CHECK(t_test("b", 1.96, 1.0, 5000).p_value == doctest::Approx(0.05).epsilon(0.04));
  CHECK(std::abs(t_test("b", 1.96, 1.0, 5000).p_value - 0.05) < 0.002);
  CHECK(t_test("b", -3.91, 1.0, 5000).p_value < 0.01);
  const auto degenerate = t_test("b", 0.2, 0.0, 10);
  CHECK(degenerate.degenerate);
  CHECK(degenerate.p_value == 0.0);
}

TEST_CASE("chow test") {
  std::vector<double> x(60), y(60), flip(60);
  for (int i = 0; i < 60; ++i) {
    x[i] = std::sin(i * 0.9) + 0.1 * i;
    y[i] = 0.5 + 2.0 * x[i];
    flip[i] = i < 30 ? x[i] : -x[i];
  }
  const auto X = DesignMatrix::with_intercept({{"x", x}});
  const auto none = chow_test(X, y, 30);
  CHECK(none.statistic <= 1e-10);
  CHECK(none.p_value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(chow_test(X, flip, 30).p_value < 1e-6);
  CHECK_THROWS(chow_test(X, y, 2));

  Rng rng(11);
  int rejections = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto a = normals(rng, 80), e = normals(rng, 80);
    std::vector<double> yy(80);
    for (int i = 0; i < 80; ++i) yy[i] = 1.0 + a[i] + e[i];
    const auto stat = chow_test(DesignMatrix::with_intercept({{"a", a}}), yy, 40);
    CHECK(stat.statistic >= 0.0);
    rejections += stat.p_value < 0.05;
  }
  CHECK(rejections >= 30);
  CHECK(rejections <= 70);
}

TEST_CASE("wald test") {
  Rng rng(3);
  const auto a = normals(rng, 100), e = normals(rng, 100);
  std::vector<double> y(100);
  for (int i = 0; i < 100; ++i) y[i] = 0.2 + 0.8 * a[i] + e[i];
  const auto fit = ols(DesignMatrix::with_intercept({{"a", a}}), y);
  Eigen::MatrixXd R(1, 2);
  R << 0, 1;
  Eigen::VectorXd q(1);
  q << fit.coefficient("a");
  const auto self = wald_test(fit, R, q);
  CHECK(self.statistic == doctest::Approx(0.0));
  CHECK(self.p_value == doctest::Approx(1.0));
  q << 0.0;
  const double t = fit.coefficient("a") / fit.standard_error("a");
  CHECK(std::abs(wald_test(fit, R, q).statistic - t * t) < 1e-10 * t * t);
  Eigen::MatrixXd singular(2, 2);
  singular << 0, 1, 0, 2;
  CHECK_THROWS(wald_test(fit, singular, Eigen::VectorXd::Zero(2)));
}

TEST_CASE("arch-lm") {
  CHECK(arch_lm_test(std::vector<double>(50, 0.0), 3).statistic == 0.0);
  Rng rng(5);
  int rejections = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    rejections += arch_lm_test(normals(rng, 250), 5).p_value < 0.05;
  }
  CHECK(rejections >= 30);
  CHECK(rejections <= 70);

  // variance alternating 1, 4, 1, 4, ...: lag-1 correlation of squares is
  // only about -0.12, so n = 200 detects it at 1% in a minority of draws
  int detected_200 = 0, detected_1000 = 0;
  for (int rep = 0; rep < 200; ++rep) {
    auto z = normals(rng, 1000);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= i % 2 ? 2.0 : 1.0;
    detected_1000 += arch_lm_test(z, 2).p_value < 0.01;
    detected_200 += arch_lm_test(std::span<const double>(z).first(200), 2).p_value < 0.01;
  }
  CHECK(detected_1000 >= 190);
  CHECK(detected_200 < 190);
  MESSAGE("alternating-variance detection at 1%: n=200 " << detected_200 << "/200, n=1000 "
                                                       << detected_1000 << "/200");
}

TEST_CASE("jarque-bera") {
  std::vector<double> two_point;
  for (int i = 0; i < 40; ++i) two_point.push_back(i % 2 ? 1.0 : -1.0);
  CHECK(jarque_bera(two_point).statistic == doctest::Approx(40.0 / 6.0).epsilon(1e-14));
  CHECK_THROWS(jarque_bera(std::vector<double>(5, 1.0)));

  Rng rng(9);
  int ok = 0;
  for (int rep = 0; rep < 100; ++rep) ok += jarque_bera(normals(rng, 10000)).p_value > 0.01;
  CHECK(ok >= 95);

  std::vector<double> expo(500);
  for (auto& v : expo) v = -std::log(rng.uniform_open());
  CHECK(jarque_bera(expo).p_value < 0.01);
}

TEST_CASE("ljung-box") {
  Rng rng(13);
  int rejections = 0;
  for (int rep = 0; rep < 500; ++rep) rejections += ljung_box(normals(rng, 250), 10).p_value < 0.05;
  CHECK(rejections >= 10);
  CHECK(rejections <= 40);
  std::vector<double> ar1(300);
  double prev = 0;
  for (auto& v : ar1) v = prev = 0.6 * prev + rng.normal();
  CHECK(ljung_box(ar1, 5).p_value < 1e-6);
}
