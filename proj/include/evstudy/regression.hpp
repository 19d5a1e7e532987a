#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace evstudy {

inline constexpr double kRankTolerance = 1e-10;

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

// Regressors with unique names, all of equal length n > number of columns.
class DesignMatrix {
 public:
  DesignMatrix(std::vector<NamedColumn> columns, bool includes_intercept);

  // Prepends a column of ones named "intercept".
  static DesignMatrix with_intercept(std::vector<NamedColumn> regressors);

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  const std::vector<std::string>& names() const { return names_; }
  bool includes_intercept() const { return includes_intercept_; }
  const Eigen::MatrixXd& matrix() const { return values_; }

  // Rows [first, last) as a new design (used for sub-sample fits).
  DesignMatrix slice(std::size_t first, std::size_t last) const;

 private:
  DesignMatrix(std::vector<std::string> names, Eigen::MatrixXd values, bool intercept);

  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
  bool includes_intercept_;
};

enum class CovarianceKind {
  Classical,  // sigma^2 (X'X)^-1
  HC1,        // White heteroskedasticity-consistent, n/(n-k) scaled
};

struct RegressionFit {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd covariance;
  double ssr = 0.0;
  double sigma2 = 0.0;  // ssr / (n - k)
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t dof = 0;
  CovarianceKind covariance_kind = CovarianceKind::Classical;

  std::size_t index_of(const std::string& name) const;
  double coefficient(const std::string& name) const { return coefficients[index_of(name)]; }
  double standard_error(const std::string& name) const {
    return standard_errors[index_of(name)];
  }
};

struct TestStat {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
  double dof2 = 0.0;  // denominator dof for F statistics, else 0
  bool degenerate = false;
};

// Householder-QR least squares. Throws RankDeficientError naming the first
// column that makes the design rank deficient (relative singular value
// below kRankTolerance).
RegressionFit ols(const DesignMatrix& X, std::span<const double> y,
                  CovarianceKind covariance = CovarianceKind::Classical);

// Per coefficient: b / se with two-sided Student-t(dof) p-value.
std::vector<TestStat> t_stats(const RegressionFit& fit);

// Two-sided t test of `estimate` against zero. A zero standard error yields
// p = 0 (or 1 when the estimate is also zero) and sets `degenerate`.
TestStat t_test(std::string name, double estimate, double standard_error, double dof);

// Chow structural-break F test: rows [0, break_index) vs [break_index, n).
TestStat chow_test(const DesignMatrix& X, std::span<const double> y, std::size_t break_index);

// W = (Rb - q)' (R Cov R')^-1 (Rb - q), chi-squared(rank R).
TestStat wald_test(const RegressionFit& fit, const Eigen::MatrixXd& R, const Eigen::VectorXd& q);

// Engle ARCH-LM: (n - q) R^2 of e_t^2 on its lags 1..q, chi-squared(q).
TestStat arch_lm_test(std::span<const double> residuals, std::size_t lags);

// JB = n/6 (S^2 + (K - 3)^2 / 4) with moment-based skewness and kurtosis.
TestStat jarque_bera(std::span<const double> residuals);

// Ljung-Box Q over autocorrelation lags 1..h, chi-squared(h).
TestStat ljung_box(std::span<const double> residuals, std::size_t lags);

}  // namespace evstudy
