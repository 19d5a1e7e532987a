#include "evstudy/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "evstudy/distributions.hpp"
#include "evstudy/error.hpp"

namespace evstudy {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool well_conditioned(const Eigen::MatrixXd& X) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return true;
  const double largest = s(0);
  return largest > 0.0 && s(s.size() - 1) >= kRankTolerance * largest;
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double ssr_of(const DesignMatrix& X, std::span<const double> y) {
  return ols(X, y).ssr;
}

}  // namespace

DesignMatrix::DesignMatrix(std::vector<std::string> names, Eigen::MatrixXd values, bool intercept)
    : names_(std::move(names)), values_(std::move(values)), includes_intercept_(intercept) {}

DesignMatrix::DesignMatrix(std::vector<NamedColumn> columns, bool includes_intercept)
    : includes_intercept_(includes_intercept) {
  if (columns.empty()) throw std::invalid_argument("design matrix: no columns");
  const std::size_t n = columns.front().values.size();
  values_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].values.size() != n) {
      throw std::invalid_argument("design matrix: column '" + columns[j].name +
                                  "' has a different length");
    }
    if (std::find(names_.begin(), names_.end(), columns[j].name) != names_.end()) {
      throw std::invalid_argument("design matrix: duplicate column '" + columns[j].name + "'");
    }
    values_.col(static_cast<Eigen::Index>(j)) = as_vector(columns[j].values);
    names_.push_back(std::move(columns[j].name));
  }
  if (n <= columns.size()) {
    throw std::invalid_argument("design matrix: need more rows (" + std::to_string(n) +
                                ") than columns (" + std::to_string(columns.size()) + ")");
  }
}

DesignMatrix DesignMatrix::with_intercept(std::vector<NamedColumn> regressors) {
  if (regressors.empty()) throw std::invalid_argument("design matrix: no regressors");
  std::vector<NamedColumn> cols;
  cols.push_back({"intercept", std::vector<double>(regressors.front().values.size(), 1.0)});
  for (auto& r : regressors) cols.push_back(std::move(r));
  return DesignMatrix(std::move(cols), true);
}

DesignMatrix DesignMatrix::slice(std::size_t first, std::size_t last) const {
  if (first > last || last > rows()) throw std::out_of_range("design matrix: bad slice");
  const auto count = static_cast<Eigen::Index>(last - first);
  if (count <= static_cast<Eigen::Index>(cols())) {
    throw std::invalid_argument("design matrix: sub-sample of " + std::to_string(count) +
                                " rows is too small for " + std::to_string(cols()) + " columns");
  }
  return DesignMatrix(names_, values_.middleRows(static_cast<Eigen::Index>(first), count),
                      includes_intercept_);
}

std::size_t RegressionFit::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("regression fit has no coefficient '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

RegressionFit ols(const DesignMatrix& X, std::span<const double> y_span, CovarianceKind covariance) {
  const auto& A = X.matrix();
  const auto n = A.rows();
  const auto k = A.cols();
  if (static_cast<Eigen::Index>(y_span.size()) != n) {
    throw std::invalid_argument("ols: response length " + std::to_string(y_span.size()) +
                                " does not match " + std::to_string(n) + " design rows");
  }
  if (!well_conditioned(A)) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!well_conditioned(A.leftCols(j + 1))) {
        throw RankDeficientError(X.names()[static_cast<std::size_t>(j)]);
      }
    }
    throw RankDeficientError(X.names().back());
  }

  const Eigen::VectorXd y = as_vector(y_span);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  RegressionFit fit;
  fit.names = X.names();
  fit.coefficients = qr.solve(y);
  fit.residuals = y - A * fit.coefficients;
  fit.n = static_cast<std::size_t>(n);
  fit.dof = static_cast<std::size_t>(n - k);
  fit.ssr = fit.residuals.squaredNorm();
  fit.sigma2 = fit.ssr / static_cast<double>(fit.dof);
  fit.covariance_kind = covariance;

  const Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd R_inv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd xtx_inv = R_inv * R_inv.transpose();
  if (covariance == CovarianceKind::Classical) {
    fit.covariance = fit.sigma2 * xtx_inv;
  } else {
    const Eigen::MatrixXd meat =
        A.transpose() * fit.residuals.array().square().matrix().asDiagonal() * A;
    fit.covariance = (static_cast<double>(n) / static_cast<double>(n - k)) * xtx_inv * meat * xtx_inv;
  }
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
  fit.standard_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();

  double tss = 0.0;
  if (X.includes_intercept()) {
    tss = (y.array() - y.mean()).square().sum();
  } else {
    tss = y.squaredNorm();
  }
  fit.r_squared = tss > 0.0 ? std::clamp(1.0 - fit.ssr / tss, 0.0, 1.0) : 0.0;
  return fit;
}

TestStat t_test(std::string name, double estimate, double standard_error, double dof) {
  TestStat t;
  t.name = std::move(name);
  t.dof = dof;
  if (std::isnan(standard_error) || std::isnan(estimate)) {
    t.statistic = kNaN;
    t.p_value = kNaN;
    t.degenerate = true;
  } else if (standard_error <= 0.0) {
    t.degenerate = true;
    if (estimate == 0.0) {
      t.statistic = 0.0;
      t.p_value = 1.0;
    } else {
      t.statistic = std::copysign(std::numeric_limits<double>::infinity(), estimate);
      t.p_value = 0.0;
    }
  } else {
    t.statistic = estimate / standard_error;
    t.p_value = dist::student_t_two_sided_p(t.statistic, dof);
  }
  return t;
}

std::vector<TestStat> t_stats(const RegressionFit& fit) {
  if (fit.dof < 1) throw std::invalid_argument("t_stats: fit has no residual degrees of freedom");
  std::vector<TestStat> out;
  out.reserve(fit.names.size());
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    const auto idx = static_cast<Eigen::Index>(j);
    out.push_back(t_test(fit.names[j], fit.coefficients(idx), fit.standard_errors(idx),
                         static_cast<double>(fit.dof)));
  }
  return out;
}

TestStat chow_test(const DesignMatrix& X, std::span<const double> y, std::size_t break_index) {
  const std::size_t n = X.rows();
  const std::size_t k = X.cols();
  if (break_index <= k || n - break_index <= k || break_index >= n) {
    throw std::invalid_argument("chow_test: both sub-samples need more than " + std::to_string(k) +
                                " rows (break at " + std::to_string(break_index) + " of " +
                                std::to_string(n) + ")");
  }
  const double pooled = ssr_of(X, y);
  const double first = ssr_of(X.slice(0, break_index), y.subspan(0, break_index));
  const double second = ssr_of(X.slice(break_index, n), y.subspan(break_index));

  TestStat t;
  t.name = "chow";
  t.dof = static_cast<double>(k);
  t.dof2 = static_cast<double>(n - 2 * k);
  const double scale = as_vector(y).squaredNorm();
  const double eps = 1e-24 * std::max(scale, std::numeric_limits<double>::min());
  const double within = first + second;
  const double gain = std::max(pooled - within, 0.0);
  if (gain <= eps) {
    t.statistic = 0.0;
    t.p_value = 1.0;
    t.degenerate = within <= eps;
  } else if (within <= eps) {
    t.statistic = std::numeric_limits<double>::infinity();
    t.p_value = 0.0;
    t.degenerate = true;
  } else {
    t.statistic = (gain / t.dof) / (within / t.dof2);
    t.p_value = dist::f_upper_p(t.statistic, t.dof, t.dof2);
  }
  return t;
}

TestStat wald_test(const RegressionFit& fit, const Eigen::MatrixXd& R, const Eigen::VectorXd& q) {
  const auto k = fit.coefficients.size();
  if (R.cols() != k) throw std::invalid_argument("wald_test: restriction has wrong column count");
  if (R.rows() != q.size()) throw std::invalid_argument("wald_test: R and q sizes differ");
  if (R.rows() == 0) throw std::invalid_argument("wald_test: no restrictions");
  if (Eigen::FullPivLU<Eigen::MatrixXd>(R).rank() != R.rows()) {
    throw std::invalid_argument("wald_test: restriction matrix lacks full row rank");
  }
  const Eigen::MatrixXd middle = R * fit.covariance * R.transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(middle);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(s.size() - 1) < kRankTolerance * s(0)) {
    throw Error("wald_test: R Cov R' is singular");
  }
  const Eigen::VectorXd d = R * fit.coefficients - q;
  TestStat t;
  t.name = "wald";
  t.statistic = std::max(0.0, d.dot(middle.ldlt().solve(d)));
  t.dof = static_cast<double>(R.rows());
  t.p_value = dist::chi_squared_upper_p(t.statistic, t.dof);
  return t;
}

TestStat arch_lm_test(std::span<const double> residuals, std::size_t lags) {
  if (lags == 0) throw std::invalid_argument("arch_lm_test: lags must be positive");
  if (residuals.size() <= lags + 1) {
    throw std::invalid_argument("arch_lm_test: need more than lags + 1 residuals");
  }
  TestStat t;
  t.name = "arch_lm";
  t.dof = static_cast<double>(lags);

  std::vector<double> sq(residuals.size());
  std::transform(residuals.begin(), residuals.end(), sq.begin(), [](double e) { return e * e; });
  const auto [lo, hi] = std::minmax_element(sq.begin(), sq.end());
  if (*lo == *hi) {
    t.statistic = 0.0;
    t.p_value = 1.0;
    t.degenerate = true;
    return t;
  }
  const std::size_t m = sq.size() - lags;
  std::vector<NamedColumn> regressors;
  for (std::size_t l = 1; l <= lags; ++l) {
    NamedColumn c{"lag" + std::to_string(l), {}};
    c.values.assign(sq.begin() + static_cast<std::ptrdiff_t>(lags - l),
                    sq.begin() + static_cast<std::ptrdiff_t>(lags - l + m));
    regressors.push_back(std::move(c));
  }
  const auto X = DesignMatrix::with_intercept(std::move(regressors));
  const auto fit = ols(X, std::span<const double>(sq).subspan(lags));
  t.statistic = static_cast<double>(m) * fit.r_squared;
  t.p_value = dist::chi_squared_upper_p(t.statistic, t.dof);
  return t;
}

TestStat jarque_bera(std::span<const double> residuals) {
  const std::size_t n = residuals.size();
  if (n < 8) throw std::invalid_argument("jarque_bera: need at least 8 observations");
  const double nd = static_cast<double>(n);
  const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / nd;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : residuals) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  TestStat t;
  t.name = "jarque_bera";
  t.dof = 2.0;
  if (m2 <= 0.0) {
    t.statistic = 0.0;
    t.p_value = 1.0;
    t.degenerate = true;
    return t;
  }
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  t.statistic = nd / 6.0 * (skew * skew + (kurt - 3.0) * (kurt - 3.0) / 4.0);
  t.p_value = dist::chi_squared_upper_p(t.statistic, t.dof);
  return t;
}

TestStat ljung_box(std::span<const double> residuals, std::size_t lags) {
  const std::size_t n = residuals.size();
  if (lags == 0) throw std::invalid_argument("ljung_box: lags must be positive");
  if (n <= lags + 1) throw std::invalid_argument("ljung_box: need more than lags + 1 residuals");
  const double nd = static_cast<double>(n);
  const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / nd;
  double denom = 0.0;
  for (double x : residuals) denom += (x - mean) * (x - mean);
  TestStat t;
  t.name = "ljung_box";
  t.dof = static_cast<double>(lags);
  if (denom <= 0.0) {
    t.statistic = 0.0;
    t.p_value = 1.0;
    t.degenerate = true;
    return t;
  }
  double q = 0.0;
  for (std::size_t k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (std::size_t i = k; i < n; ++i) num += (residuals[i] - mean) * (residuals[i - k] - mean);
    const double rho = num / denom;
    q += rho * rho / (nd - static_cast<double>(k));
  }
  t.statistic = nd * (nd + 2.0) * q;
  t.p_value = dist::chi_squared_upper_p(t.statistic, t.dof);
  return t;
}

}  // namespace evstudy
