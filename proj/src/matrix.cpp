#include "matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "errors.hpp"

namespace causalkit {

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows) throw NumericError("matmul: dimension mismatch");
    Mat out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Mat transpose(const Mat& a) {
    Mat out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

Mat add(const Mat& a, const Mat& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw NumericError("add: dimension mismatch");
    Mat out = a;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.v[i];
    return out;
}

Cholesky cholesky(const Mat& a) {
    Cholesky res;
    if (a.rows != a.cols) return res;
    const std::size_t n = a.rows;
    res.l = Mat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= res.l(j, k) * res.l(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return res;
        res.l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= res.l(i, k) * res.l(j, k);
            res.l(i, j) = s / res.l(j, j);
        }
    }
    res.ok = true;
    return res;
}

double chol_log_det(const Cholesky& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.l.rows; ++i) s += std::log(c.l(i, i));
    return 2.0 * s;
}

std::vector<double> chol_solve(const Cholesky& c, std::span<const double> b) {
    const std::size_t n = c.l.rows;
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= c.l(i, k) * y[k];
        y[i] = s / c.l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= c.l(k, ii) * x[k];
        x[ii] = s / c.l(ii, ii);
    }
    return x;
}

Mat spd_inverse(const Mat& a) {
    Cholesky c = cholesky(a);
    if (!c.ok) throw NumericError("spd_inverse: matrix is not positive definite");
    const std::size_t n = a.rows;
    Mat inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        std::vector<double> col = chol_solve(c, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    return inv;
}

std::vector<double> solve_linear(Mat a, std::vector<double> b) {
    if (a.rows != a.cols || a.rows != b.size()) throw NumericError("solve_linear: dimension mismatch");
    const std::size_t n = a.rows;
    // Row scale for a relative singularity test.
    std::vector<double> scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) scale[i] = std::max(scale[i], std::abs(a(i, j)));
        if (scale[i] == 0.0) throw NumericError("solve_linear: singular system (zero row)");
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k)) / scale[k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const double cand = std::abs(a(i, k)) / scale[i];
            if (cand > best) {
                best = cand;
                piv = i;
            }
        }
        if (best < 1e-12) throw NumericError("solve_linear: singular system");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
            std::swap(scale[k], scale[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
        x[ii] = s / a(ii, ii);
    }
    return x;
}

}  // namespace causalkit
