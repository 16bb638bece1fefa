#pragma once

#include <span>

namespace causalkit {

struct ShapiroResult {
    double w = 0.0;
    double p_value = 0.0;
};

/// Shapiro-Wilk normality test, Royston's AS R94 approximation.
/// Valid for 3 <= n <= 5000; throws NumericError outside that range or when
/// the sample has zero range.
ShapiroResult shapiro_wilk(std::span<const double> sample);

}  // namespace causalkit
