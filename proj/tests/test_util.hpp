#pragma once

// Shared helpers for the test suites: independent oracles (path enumeration,
// Kolmogorov-Smirnov, brute-force statistics) and fixture plumbing. Everything
// here is deliberately written without reusing the library's own
// implementation paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace testutil {

/// Brute-force total effects: sum over all directed paths of edge-weight
/// products, by DFS over the nonzero entries of a (acyclic) adjacency.
inline double path_sum(const causalkit::Mat& a, std::size_t from, std::size_t to) {
    if (from == to) return 0.0;
    double total = 0.0;
    const std::size_t p = a.rows;
    // every direct edge from -> i contributes a(i, from) * (paths i -> to)
    for (std::size_t i = 0; i < p; ++i) {
        const double w = a(i, from);
        if (w == 0.0) continue;
        if (i == to) {
            total += w;
        } else {
            total += w * path_sum(a, i, to);
        }
    }
    return total;
}

/// One-sample Kolmogorov-Smirnov test against U(0,1); asymptotic p-value.
inline double ks_uniform_p(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double cdf = values[i];
        d = std::max(d, std::abs((static_cast<double>(i + 1)) / n - cdf));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        p += sign * 2.0 * std::exp(-2.0 * lambda * lambda * k * k);
        sign = -sign;
    }
    return std::clamp(p, 0.0, 1.0);
}

/// Plain Pearson correlation, independent of the library.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

/// OLS slope of y on x, independent implementation.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

/// Scratch directory for a test case, cleaned on construction.
class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("causalkit_test_" + name)) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace testutil
