#include "fit_indices.hpp"

#include <algorithm>
#include <cmath>

#include "bootstrap.hpp"
#include "errors.hpp"
#include "prob.hpp"

namespace causalkit {

Mat implied_covariance(const CausalModel& model) {
    const std::size_t p = model.variables.size();
    for (double v : model.residual_variances)
        if (v < 0.0) throw NumericError("implied_covariance: negative residual variance");
    // (I-A)^-1 = I + T with T the finite total-effect series; checks
    // triangularity on the way.
    const Mat t = total_effects(model).effects;
    Mat binv = Mat::identity(p);
    for (std::size_t i = 0; i < p * p; ++i) binv.v[i] += t.v[i];
    Mat scaled = binv;  // binv * Psi
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) scaled(i, j) *= model.residual_variances[j];
    Mat sigma = matmul(scaled, transpose(binv));
    // Symmetrize away rounding noise.
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            sigma(i, j) = sigma(j, i) = 0.5 * (sigma(i, j) + sigma(j, i));
    return sigma;
}

Mat sample_covariance(const DataMatrix& m) {
    if (m.rows < 2) throw NumericError("sample_covariance: need at least 2 observations");
    const std::size_t p = m.cols();
    std::vector<double> means(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) means[c] = mean_of(m.column(c));
    Mat s(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            double acc = 0.0;
            for (std::size_t r = 0; r < m.rows; ++r)
                acc += (m.at(r, a) - means[a]) * (m.at(r, b) - means[b]);
            s(a, b) = s(b, a) = acc / static_cast<double>(m.rows - 1);
        }
    }
    return s;
}

namespace {

double ml_discrepancy(const Mat& sigma, const Mat& s) {
    const std::size_t p = s.rows;
    const Cholesky cs = cholesky(s);
    if (!cs.ok) throw NumericError("chi_square: sample covariance is not positive definite");
    const Cholesky csig = cholesky(sigma);
    if (!csig.ok) throw NumericError("chi_square: implied covariance is not positive definite");
    // tr(S Sigma^-1) column by column.
    double trace = 0.0;
    std::vector<double> col(p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < p; ++i) col[i] = s(i, j);
        const std::vector<double> x = chol_solve(csig, col);
        trace += x[j];
    }
    return chol_log_det(csig) - chol_log_det(cs) + trace - static_cast<double>(p);
}

}  // namespace

ChiSquareResult chi_square(const CausalModel& model, const DataMatrix& data) {
    const std::size_t p = model.variables.size();
    if (data.cols() != p) throw ConfigError("chi_square: matrix does not match the model");
    if (data.rows <= p) throw NumericError("chi_square: need more observations than variables");

    const DataMatrix work = model.standardized ? standardize(data) : data;
    const Mat s = sample_covariance(work);
    const Mat sigma = implied_covariance(model);

    ChiSquareResult res;
    res.n = work.rows;
    std::size_t free_edges = 0;
    for (double v : model.adjacency.v) free_edges += v != 0.0 ? 1 : 0;
    res.free_parameters = free_edges + p;
    res.dof = static_cast<int>(p * (p + 1) / 2) - static_cast<int>(res.free_parameters);
    const double f = std::max(ml_discrepancy(sigma, s), 0.0);
    res.chi_square = static_cast<double>(work.rows - 1) * f;
    res.p_value = res.dof > 0 ? prob::chi2_sf(res.chi_square, res.dof) : 1.0;
    return res;
}

BaselineResult baseline_chi_square(const DataMatrix& data) {
    if (data.rows <= data.cols()) throw NumericError("baseline_chi_square: need more observations than variables");
    const std::size_t p = data.cols();
    const Mat s = sample_covariance(data);
    Mat diag(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        if (s(i, i) <= 0.0) throw NumericError("baseline_chi_square: zero-variance column");
        diag(i, i) = s(i, i);
    }
    BaselineResult res;
    res.chi_square = static_cast<double>(data.rows - 1) * std::max(ml_discrepancy(diag, s), 0.0);
    res.dof = static_cast<int>(p * (p - 1) / 2);
    return res;
}

FitIndices fit_indices(double chi, int dof, double chi_b, int dof_b, std::size_t n,
                       const Mat* implied, const Mat* sample) {
    if (dof <= 0 || dof_b <= 0) throw NumericError("fit_indices: degrees of freedom must be positive");
    if (n < 2) throw NumericError("fit_indices: need n > 1");
    if (chi_b <= 0.0) throw NumericError("fit_indices: NFI undefined for a zero baseline chi-square");
    const double baseline_ratio = chi_b / static_cast<double>(dof_b);
    if (baseline_ratio == 1.0) throw NumericError("fit_indices: TLI undefined when baseline chi-square/dof is 1");

    FitIndices out;
    out.chi_square = chi;
    out.dof = dof;
    out.baseline_chi_square = chi_b;
    out.baseline_dof = dof_b;
    out.n = n;
    out.p_chi_square = prob::chi2_sf(chi, dof);

    const double excess = std::max(chi - dof, 0.0);
    const double baseline_excess = std::max({chi_b - dof_b, chi - dof, 0.0});
    out.cfi = baseline_excess > 0.0 ? 1.0 - excess / baseline_excess : 1.0;
    out.nfi = (chi_b - chi) / chi_b;
    out.tli = (baseline_ratio - chi / static_cast<double>(dof)) / (baseline_ratio - 1.0);
    out.rmsea = std::sqrt(excess / (static_cast<double>(dof) * static_cast<double>(n - 1)));

    if (implied != nullptr && sample != nullptr) {
        const std::size_t p = sample->rows;
        const Cholesky csig = cholesky(*implied);
        if (!csig.ok) throw NumericError("fit_indices: implied covariance is not positive definite");
        // M = Sigma^-1 S
        Mat mmat(p, p);
        std::vector<double> col(p);
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t i = 0; i < p; ++i) col[i] = (*sample)(i, j);
            const std::vector<double> x = chol_solve(csig, col);
            for (std::size_t i = 0; i < p; ++i) mmat(i, j) = x[i];
        }
        Mat dev = mmat;
        for (std::size_t i = 0; i < p; ++i) dev(i, i) -= 1.0;
        auto trace_sq = [p](const Mat& a) {
            double t = 0.0;
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t k = 0; k < p; ++k) t += a(i, k) * a(k, i);
            return t;
        };
        const double gfi = 1.0 - trace_sq(dev) / trace_sq(mmat);
        out.gfi = gfi;
        out.agfi = 1.0 - (static_cast<double>(p * (p + 1)) / (2.0 * dof)) * (1.0 - gfi);
    }
    return out;
}

FitIndices score_model(const CausalModel& model, const DataMatrix& data) {
    const ChiSquareResult cs = chi_square(model, data);
    const DataMatrix work = model.standardized ? standardize(data) : data;
    const BaselineResult base = baseline_chi_square(work);
    const Mat sigma = implied_covariance(model);
    const Mat s = sample_covariance(work);
    FitIndices fi = fit_indices(cs.chi_square, cs.dof, base.chi_square, base.dof, cs.n, &sigma, &s);
    fi.variables = model.variables.size();
    fi.free_parameters = cs.free_parameters;
    return fi;
}

}  // namespace causalkit
