#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "dataset.hpp"
#include "lingam.hpp"
#include "matrix.hpp"

namespace causalkit {

/// Model-implied covariance Sigma = (I-A)^-1 Psi (I-A)^-T, with Psi the
/// diagonal of residual variances.
Mat implied_covariance(const CausalModel& model);

/// Sample covariance with divisor N-1.
Mat sample_covariance(const DataMatrix& m);

struct ChiSquareResult {
    double chi_square = 0.0;
    int dof = 0;
    double p_value = 1.0;
    std::size_t free_parameters = 0;  // nonzero direct effects + p residual variances
    std::size_t n = 0;
};

/// Maximum-likelihood discrepancy F = ln|Sigma| - ln|S| + tr(S Sigma^-1) - p,
/// scaled by (N-1). dof = p(p+1)/2 - free_parameters.
ChiSquareResult chi_square(const CausalModel& model, const DataMatrix& data);

struct BaselineResult {
    double chi_square = 0.0;
    /// Standard independence-baseline dof, p(p-1)/2. Published tables
    /// sometimes report a different baseline dof; fit_indices() therefore
    /// accepts the baseline pair explicitly.
    int dof = 0;
};

/// Independence baseline: Sigma_b = diag(S), which reduces the discrepancy to
/// -ln det of the correlation matrix.
BaselineResult baseline_chi_square(const DataMatrix& data);

struct FitIndices {
    double chi_square = 0.0;
    int dof = 0;
    double p_chi_square = 1.0;
    double baseline_chi_square = 0.0;
    int baseline_dof = 0;
    double cfi = 1.0;
    double nfi = 1.0;
    double tli = 1.0;  // not clamped; can exceed 1
    double rmsea = 0.0;
    std::optional<double> gfi;   // require covariance inputs
    std::optional<double> agfi;
    std::size_t n = 0;
    /// dof audit bookkeeping, filled when the indices come from a fitted
    /// model: dof = variables*(variables+1)/2 - free_parameters.
    std::size_t variables = 0;
    std::size_t free_parameters = 0;
};

/// Incremental and absolute fit indices from the chi-square pair. GFI/AGFI
/// (ML trace form) are filled when the implied and sample covariances are
/// supplied.
FitIndices fit_indices(double chi, int dof, double chi_b, int dof_b, std::size_t n,
                       const Mat* implied = nullptr, const Mat* sample = nullptr);

/// chi_square + baseline_chi_square + fit_indices in one call.
FitIndices score_model(const CausalModel& model, const DataMatrix& data);

}  // namespace causalkit
