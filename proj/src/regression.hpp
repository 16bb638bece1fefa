#pragma once

#include <span>
#include <vector>

#include "matrix.hpp"

namespace causalkit {

/// Ordinary least squares without intercept (center inputs first).
/// x is n x k column-wise: x[j] is predictor j. Throws NumericError when the
/// normal equations are singular.
std::vector<double> ols(const std::vector<std::vector<double>>& x, std::span<const double> y);

/// Lasso solved by coordinate descent in covariance (Gram) form for the
/// objective (1/2n)||y - Xb||^2 + lambda * ||b||_1. Produces exact zeros.
std::vector<double> lasso_cd(const Mat& gram, std::span<const double> xty, std::size_t n, double lambda,
                             std::vector<double> warm = {});

struct AdaptiveLassoResult {
    std::vector<double> coef;
    double lambda = 0.0;
    double bic = 0.0;
};

/// Adaptive lasso: OLS first, per-coefficient weights 1/|b_ols|, then a lasso
/// path over a fixed 50-point logarithmic lambda grid scored by BIC
/// (n*log(RSS/n) + df*log(n)). Coefficients return on the original scale.
AdaptiveLassoResult adaptive_lasso(const std::vector<std::vector<double>>& x, std::span<const double> y);

}  // namespace causalkit
