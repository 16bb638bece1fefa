#pragma once

namespace causalkit::prob {

/// Regularized lower incomplete gamma P(a, x).
double reg_gamma_lower(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double reg_gamma_upper(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double reg_beta(double a, double b, double x);

/// Upper tail of the chi-square distribution with k degrees of freedom.
double chi2_sf(double x, double k);
/// Two-sided p for a Student-t statistic on nu degrees of freedom.
double t_two_sided_p(double t, double nu);
/// Upper tail of the F distribution.
double f_sf(double f, double d1, double d2);

double norm_cdf(double x);
double norm_sf(double x);
/// Standard normal quantile.
double norm_ppf(double p);

}  // namespace causalkit::prob
