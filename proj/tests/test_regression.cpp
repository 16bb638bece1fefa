#include <doctest.h>

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "regression.hpp"
#include "rng.hpp"

using namespace causalkit;

namespace {

/// Centered design with k predictors and a known coefficient vector.
struct Problem {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
};

Problem make_problem(const std::vector<double>& beta, std::size_t n, std::uint64_t seed,
                     double noise = 0.5) {
    Problem p;
    rng::Stream s(seed);
    p.x.assign(beta.size(), std::vector<double>(n));
    p.y.assign(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        double value = noise * s.uniform_sym();
        for (std::size_t j = 0; j < beta.size(); ++j) {
            p.x[j][r] = s.gaussian();
            value += beta[j] * p.x[j][r];
        }
        p.y[r] = value;
    }
    return p;
}

}  // namespace

TEST_CASE("ols solves an exact linear system") {
    // y = 2 x1 - 3 x2, no noise
    const Problem p = make_problem({2.0, -3.0}, 50, 1, 0.0);
    const std::vector<double> beta = ols(p.x, p.y);
    CHECK(beta[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(beta[1] == doctest::Approx(-3.0).epsilon(1e-9));
    CHECK(ols({}, p.y).empty());
}

TEST_CASE("ols rejects singular designs") {
    Problem p = make_problem({1.0}, 30, 2);
    p.x.push_back(p.x[0]);  // duplicated predictor
    CHECK_THROWS_AS(ols(p.x, p.y), NumericError);
}

TEST_CASE("lasso coordinate descent endpoints") {
    const Problem p = make_problem({1.5, 0.0, -0.8}, 400, 3);
    const std::size_t k = p.x.size();
    const std::size_t n = p.y.size();
    Mat gram(k, k);
    std::vector<double> xty(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += p.x[a][r] * p.x[b][r];
            gram(a, b) = gram(b, a) = s;
        }
        for (std::size_t r = 0; r < n; ++r) xty[a] += p.x[a][r] * p.y[r];
    }
    SUBCASE("a huge penalty zeroes everything") {
        const std::vector<double> b = lasso_cd(gram, xty, n, 1e6);
        for (double v : b) CHECK(v == 0.0);
    }
    SUBCASE("a vanishing penalty reproduces OLS") {
        const std::vector<double> b = lasso_cd(gram, xty, n, 1e-12);
        const std::vector<double> ref = ols(p.x, p.y);
        for (std::size_t j = 0; j < k; ++j) CHECK(b[j] == doctest::Approx(ref[j]).epsilon(1e-6));
    }
}

TEST_CASE("adaptive lasso keeps the true support and drops the rest") {
    const std::vector<double> beta = {1.2, 0.0, -0.7, 0.0, 0.0};
    const Problem p = make_problem(beta, 1000, 4);
    const AdaptiveLassoResult res = adaptive_lasso(p.x, p.y);
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0) {
            CHECK(std::abs(res.coef[j] - beta[j]) < 0.1);
        } else {
            CHECK(res.coef[j] == 0.0);  // exact zero, not a small value
        }
    }
}

TEST_CASE("adaptive lasso BIC prefers sparsity over tiny gains") {
    // pure-noise predictors around an outcome they do not explain
    rng::Stream s(9);
    std::vector<std::vector<double>> x(4, std::vector<double>(600));
    std::vector<double> y(600);
    for (std::size_t r = 0; r < 600; ++r) {
        for (auto& col : x) col[r] = s.gaussian();
        y[r] = s.uniform_sym();
    }
    const AdaptiveLassoResult res = adaptive_lasso(x, y);
    int nonzero = 0;
    for (double v : res.coef) nonzero += v != 0.0 ? 1 : 0;
    CHECK(nonzero == 0);
}

TEST_CASE("adaptive lasso needs more rows than predictors") {
    const Problem p = make_problem({1.0, 2.0, 3.0}, 3, 5);
    CHECK_THROWS_AS(adaptive_lasso(p.x, p.y), NumericError);
}
