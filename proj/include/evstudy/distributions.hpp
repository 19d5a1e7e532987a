#pragma once

// Reference distributions for test statistics. Continued-fraction evaluations
// of the regularized incomplete beta and gamma functions; no lookup tables.

namespace evstudy::dist {

// I_x(a, b). `y` must equal 1 - x; passing it separately keeps precision
// when x is close to 1.
double regularized_beta(double a, double b, double x, double y);
double regularized_beta(double a, double b, double x);

// P(a, x) and Q(a, x) = 1 - P(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

double normal_cdf(double z);
double normal_two_sided_p(double z);

double student_t_cdf(double t, double dof);
double student_t_two_sided_p(double t, double dof);

// Upper tail P(F > f) for F(d1, d2).
double f_upper_p(double f, double d1, double d2);

// Upper tail P(X > x) for chi-squared with k degrees of freedom.
double chi_squared_upper_p(double x, double k);

}  // namespace evstudy::dist
