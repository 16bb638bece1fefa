#include "shapiro.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "prob.hpp"

namespace causalkit {

namespace {

double poly5(double u, double p5, double p4, double p3, double p2, double p1, double p0) {
    return ((((p5 * u + p4) * u + p3) * u + p2) * u + p1) * u + p0;
}

}  // namespace

ShapiroResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 5000) throw NumericError("shapiro_wilk: sample size outside the valid range 3..5000");

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    if (x.front() == x.back()) throw NumericError("shapiro_wilk: sample has zero range");

    // Expected normal order statistics (Blom) and the Royston weight vector.
    std::vector<double> m(n);
    double ssq_m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = prob::norm_ppf((static_cast<double>(i + 1) - 0.375) / (static_cast<double>(n) + 0.25));
        ssq_m += m[i] * m[i];
    }
    const double rsqrt_m = 1.0 / std::sqrt(ssq_m);

    std::vector<double> a(n);
    if (n == 3) {
        a[0] = -std::sqrt(0.5);
        a[1] = 0.0;
        a[2] = std::sqrt(0.5);
    } else {
        const double u = 1.0 / std::sqrt(static_cast<double>(n));
        const double an = poly5(u, -2.706056, 4.434685, -2.071190, -0.147981, 0.221157, m[n - 1] * rsqrt_m);
        double phi;
        if (n > 5) {
            const double an1 =
                poly5(u, -3.582633, 5.682633, -1.752461, -0.293762, 0.042981, m[n - 2] * rsqrt_m);
            phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                  (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
            a[n - 1] = an;
            a[n - 2] = an1;
            a[0] = -an;
            a[1] = -an1;
            for (std::size_t i = 2; i + 2 < n; ++i) a[i] = m[i] / std::sqrt(phi);
        } else {
            phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
            a[n - 1] = an;
            a[0] = -an;
            for (std::size_t i = 1; i + 1 < n; ++i) a[i] = m[i] / std::sqrt(phi);
        }
    }

    double mean = 0.0;
    for (double xi : x) mean += xi;
    mean /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += a[i] * x[i];
        den += (x[i] - mean) * (x[i] - mean);
    }
    double w = num * num / den;
    if (w > 1.0) w = 1.0;

    ShapiroResult res;
    res.w = w;
    const double nd = static_cast<double>(n);
    if (n == 3) {
        const double pi6 = 6.0 / 3.14159265358979323846;
        double p = pi6 * (std::asin(std::sqrt(w)) - std::asin(std::sqrt(0.75)));
        res.p_value = std::clamp(p, 0.0, 1.0);
        return res;
    }
    const double w1 = std::max(1.0 - w, 1e-15);
    double z;
    if (n <= 11) {
        const double gamma = -2.273 + 0.459 * nd;
        const double y = -std::log(gamma - std::log(w1));
        const double mu = 0.5440 - 0.39978 * nd + 0.025054 * nd * nd - 0.0006714 * nd * nd * nd;
        const double sigma = std::exp(1.3822 - 0.77857 * nd + 0.062767 * nd * nd - 0.0020322 * nd * nd * nd);
        z = (y - mu) / sigma;
    } else {
        const double ln_n = std::log(nd);
        const double y = std::log(w1);
        const double mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n * ln_n + 0.0038915 * ln_n * ln_n * ln_n;
        const double sigma = std::exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n * ln_n);
        z = (y - mu) / sigma;
    }
    res.p_value = prob::norm_sf(z);
    return res;
}

}  // namespace causalkit
