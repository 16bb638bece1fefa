#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "matrix.hpp"

namespace causalkit {

/// Non-Gaussian error distributions for data generation. Gaussian errors are
/// deliberately not representable: linear models with Gaussian noise are not
/// identifiable from observational data.
enum class ErrorKind { uniform, laplace, gaussian_mixture };

struct ErrorSpec {
    ErrorKind kind = ErrorKind::uniform;
    double scale = 1.0;  // standard deviation of the error term
};

ErrorKind error_kind_from_string(const std::string& s);
std::string to_string(ErrorKind kind);

/// A known data-generating linear model: x_k = sum_{j<k} a_{k,j} x_j + e_k
/// with variables listed in causal order and a strictly lower triangular
/// direct-effect matrix.
struct GroundTruthModel {
    std::vector<std::string> variables;  // in causal order
    Mat adjacency;                       // a(i,j): direct effect of variable j on variable i
    std::vector<ErrorSpec> errors;

    void validate() const;
};

/// Draw n i.i.d. rows, solving the model in causal order. Deterministic per
/// seed; row streams are independent, so any row subset is reproducible.
DataMatrix generate(const GroundTruthModel& model, std::size_t n, std::uint64_t seed);

/// Population covariance (I-A)^-1 Psi (I-A)^-T implied by the model.
Mat truth_covariance(const GroundTruthModel& model);

/// Direct effects rescaled to the z-score scale of each variable:
/// a_std(i,j) = a(i,j) * sd(x_j) / sd(x_i).
Mat standardized_adjacency(const GroundTruthModel& model);

/// Nine-variable demo model over Q1..Q6, CIT, CT, ACT with Q1 exogenous and
/// CIT/CT/ACT pure sinks. Error scales are chosen so every variable has unit
/// population variance, which makes the standardized adjacency equal the raw
/// one.
GroundTruthModel nine_factor_fixture();

/// Convenience: data drawn from nine_factor_fixture.
DataMatrix nine_factor_data(std::uint64_t seed, std::size_t n = 504);

/// A fully populated 42-participant x 4-condition x 3-trial synthetic study
/// in wide trial-record form (Likert answers discretized, durations mapped
/// through an exp link, per-condition shifts injected). Intended for CLI
/// demos and ingestion tests.
std::vector<TrialRecord> synthetic_trials(std::uint64_t seed);

std::string ground_truth_to_json(const GroundTruthModel& model);
GroundTruthModel ground_truth_from_json(const std::string& text);

}  // namespace causalkit
