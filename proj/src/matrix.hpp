#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace causalkit {

/// Small dense row-major matrix of doubles. Sized for the p x p and N x p
/// shapes this library works with; not a general linear-algebra package.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {v.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {v.data() + i * cols, cols}; }

    bool operator==(const Mat&) const = default;

    static Mat identity(std::size_t n);
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
Mat add(const Mat& a, const Mat& b);

/// Cholesky factor L (lower) of a symmetric positive-definite matrix.
/// ok == false when the matrix is not (numerically) positive definite.
struct Cholesky {
    Mat l;
    bool ok = false;
};

Cholesky cholesky(const Mat& a);

/// log determinant of the factored matrix.
double chol_log_det(const Cholesky& c);

/// Solve A x = b given the Cholesky factor of A.
std::vector<double> chol_solve(const Cholesky& c, std::span<const double> b);

/// Inverse via the Cholesky factor. Throws NumericError when not SPD.
Mat spd_inverse(const Mat& a);

/// Solve a general square system by Gaussian elimination with partial
/// pivoting. Throws NumericError on (numerical) singularity.
std::vector<double> solve_linear(Mat a, std::vector<double> b);

}  // namespace causalkit
