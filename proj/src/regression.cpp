#include "regression.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace causalkit {

namespace {

constexpr int kGridPoints = 50;
constexpr double kLambdaMinRatio = 1e-4;
constexpr double kSigma2Floor = 1e-12;
constexpr double kCdTol = 1e-10;
constexpr int kCdMaxSweeps = 10000;

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

}  // namespace

std::vector<double> ols(const std::vector<std::vector<double>>& x, std::span<const double> y) {
    const std::size_t k = x.size();
    if (k == 0) return {};
    const std::size_t n = y.size();
    Mat xtx(k, k);
    std::vector<double> xty(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += x[a][r] * x[b][r];
            xtx(a, b) = xtx(b, a) = s;
        }
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += x[a][r] * y[r];
        xty[a] = s;
    }
    return solve_linear(xtx, xty);
}

std::vector<double> lasso_cd(const Mat& gram, std::span<const double> xty, std::size_t n, double lambda,
                             std::vector<double> warm) {
    const std::size_t k = xty.size();
    std::vector<double> b = warm.size() == k ? std::move(warm) : std::vector<double>(k, 0.0);
    const double nd = static_cast<double>(n);
    for (int sweep = 0; sweep < kCdMaxSweeps; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double gjj = gram(j, j);
            if (gjj <= 0.0) {
                b[j] = 0.0;
                continue;
            }
            double rho = xty[j];
            for (std::size_t l = 0; l < k; ++l) {
                if (l != j) rho -= gram(j, l) * b[l];
            }
            const double bnew = soft_threshold(rho / nd, lambda) / (gjj / nd);
            max_delta = std::max(max_delta, std::abs(bnew - b[j]));
            b[j] = bnew;
        }
        if (max_delta < kCdTol) break;
    }
    return b;
}

AdaptiveLassoResult adaptive_lasso(const std::vector<std::vector<double>>& x, std::span<const double> y) {
    AdaptiveLassoResult res;
    const std::size_t k = x.size();
    const std::size_t n = y.size();
    if (k == 0) return res;
    if (n <= k) throw NumericError("adaptive_lasso: need more observations than predictors");

    const std::vector<double> b_ols = ols(x, y);

    // Scale predictors by |OLS coefficient|; a zero OLS coefficient gives the
    // predictor infinite penalty, i.e. it is dropped up front.
    std::vector<std::size_t> active;
    std::vector<std::vector<double>> z;
    for (std::size_t j = 0; j < k; ++j) {
        if (b_ols[j] == 0.0) continue;
        active.push_back(j);
        std::vector<double> col(n);
        const double w = std::abs(b_ols[j]);
        for (std::size_t r = 0; r < n; ++r) col[r] = x[j][r] * w;
        z.push_back(std::move(col));
    }
    res.coef.assign(k, 0.0);
    const std::size_t ka = active.size();
    if (ka == 0) return res;

    Mat gram(ka, ka);
    std::vector<double> zty(ka, 0.0);
    double yty = 0.0;
    for (double v : y) yty += v * v;
    for (std::size_t a = 0; a < ka; ++a) {
        for (std::size_t b = a; b < ka; ++b) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += z[a][r] * z[b][r];
            gram(a, b) = gram(b, a) = s;
        }
        for (std::size_t r = 0; r < n; ++r) zty[a] += z[a][r] * y[r];
    }

    const double nd = static_cast<double>(n);
    double lambda_max = 0.0;
    for (std::size_t a = 0; a < ka; ++a) lambda_max = std::max(lambda_max, std::abs(zty[a]) / nd);
    if (lambda_max <= 0.0) return res;

    double best_bic = 0.0;
    std::vector<double> best_b;
    double best_lambda = 0.0;
    std::vector<double> warm(ka, 0.0);
    for (int g = 0; g < kGridPoints; ++g) {
        const double lambda = lambda_max * std::pow(kLambdaMinRatio,
                                                    static_cast<double>(g) / (kGridPoints - 1));
        std::vector<double> b = lasso_cd(gram, zty, n, lambda, warm);
        warm = b;
        double rss = yty;
        for (std::size_t a = 0; a < ka; ++a) {
            rss -= 2.0 * b[a] * zty[a];
            for (std::size_t c = 0; c < ka; ++c) rss += b[a] * gram(a, c) * b[c];
        }
        rss = std::max(rss, 0.0);
        int df = 0;
        for (double v : b) df += v != 0.0 ? 1 : 0;
        const double bic = nd * std::log(std::max(rss / nd, kSigma2Floor)) + df * std::log(nd);
        if (best_b.empty() || bic < best_bic - 1e-12) {
            best_bic = bic;
            best_b = b;
            best_lambda = lambda;
        }
    }

    for (std::size_t a = 0; a < ka; ++a) {
        res.coef[active[a]] = best_b[a] * std::abs(b_ols[active[a]]);
    }
    res.lambda = best_lambda;
    res.bic = best_bic;
    return res;
}

}  // namespace causalkit
