#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "matrix.hpp"
#include "shapiro.hpp"

namespace causalkit {

/// Constants of the maximum-entropy approximation to differential entropy:
/// H(u) ~ (1+log 2pi)/2 - k1 (E[log cosh u] - gamma)^2 - k2 (E[u exp(-u^2/2)])^2
/// for standardized u.
struct EntropyConstants {
    double k1 = 79.047;
    double k2 = 7.4129;
    double gamma = 0.37457;
};

/// Differential entropy of a standardized Gaussian, (1+log 2pi)/2.
inline constexpr double kGaussianEntropy = 1.4189385332046727;

/// Pairwise directed-path constraints. Entry (i, j) constrains the path from
/// variable j to variable i: 0 = forbidden, 1 = required, -1 = unknown.
/// Diagonal entries are ignored.
class PriorKnowledge {
public:
    PriorKnowledge() = default;
    explicit PriorKnowledge(std::size_t p) : p_(p), k_(p * p, -1) {}

    static PriorKnowledge unconstrained(std::size_t p) { return PriorKnowledge(p); }

    /// Build constraints from variable roles: exogenous variables have every
    /// incoming path forbidden, sinks every outgoing path. When
    /// forbid_sink_to_sink is false, paths between two sinks stay unknown.
    static PriorKnowledge from_roles(const std::vector<std::string>& variables,
                                     const std::vector<std::string>& exogenous,
                                     const std::vector<std::string>& sinks,
                                     bool forbid_sink_to_sink = true);

    std::size_t size() const { return p_; }
    int at(std::size_t i, std::size_t j) const { return i == j ? -1 : k_[i * p_ + j]; }
    void set(std::size_t i, std::size_t j, int v);

    /// All incoming paths of j forbidden.
    bool exogenous_constrained(std::size_t j) const;
    /// All outgoing paths of j forbidden.
    bool sink_constrained(std::size_t j) const;

    /// Rejects required cycles and required paths that are simultaneously
    /// forbidden (directly or through the required-path closure).
    void validate() const;

private:
    std::size_t p_ = 0;
    std::vector<std::int8_t> k_;
};

/// Discovered linear acyclic model. adjacency(i, j) is the direct effect of
/// variable j on variable i; permuted by causal_order it is strictly lower
/// triangular with exact zeros above the diagonal.
struct CausalModel {
    std::vector<std::string> variables;
    std::vector<std::size_t> causal_order;  // causal_order[k] = column index of the k-th variable
    Mat adjacency;
    std::vector<double> residual_variances;
    bool standardized = true;
    /// Structural residuals x - Ax on the fitted scale; kept for the
    /// normality audit, not serialized.
    DataMatrix residuals;
};

enum class RegressionMode { adaptive_lasso, ols_threshold };

struct FitOptions {
    bool standardize = true;
    RegressionMode regression = RegressionMode::adaptive_lasso;
    /// In ols_threshold mode, coefficients with |b| <= ols_threshold count as
    /// absent and are set to exact zero.
    double ols_threshold = 0.01;
    EntropyConstants entropy{};
};

/// Least-squares residual of xi on xj: xi - cov(xi,xj)/var(xj) * xj.
std::vector<double> residual(std::span<const double> xi, std::span<const double> xj);

/// Maximum-entropy differential-entropy approximation for standardized u.
double entropy_approx(std::span<const double> u, const EntropyConstants& c = {});

/// Evidence against candidate exogeneity: sum over the other variables of
/// min(0, D)^2, where D is the pairwise likelihood-ratio statistic built on
/// entropy_approx. Lower is more plausibly exogenous. Inputs must be
/// standardized columns of equal length; `others` is evaluated in the order
/// given.
double independence_score(std::span<const double> candidate,
                          const std::vector<std::vector<double>>& others,
                          const EntropyConstants& c = {});

/// Per-round snapshot handed to the optional search observer, for
/// diagnostics: the variable just selected and the residualized working
/// columns of the variables still in play.
struct StageOneRound {
    std::size_t selected;
    std::vector<std::size_t> remaining;               // after removal of `selected`
    std::vector<std::vector<double>> working_columns;  // aligned with `remaining`
    std::vector<double> selected_column;               // values of `selected` at selection time
};

using StageOneObserver = std::function<void(const StageOneRound&)>;

/// Stage 1: iteratively pick the admissible variable most plausibly
/// exogenous, then residualize the remainder against it. Ties within 1e-12
/// break toward the variable earliest in canonical (name-sorted) order.
std::vector<std::size_t> search_causal_order(const DataMatrix& m, const PriorKnowledge& pk,
                                             const EntropyConstants& c = {},
                                             const StageOneObserver& observer = {});

/// Stage 2: regress every variable on its predecessors in causal order.
/// Prior-knowledge-forbidden predecessors (directly, or transitively through
/// their fitted ancestors) are excluded so no forbidden path can appear.
CausalModel estimate_adjacency(const DataMatrix& m, const std::vector<std::size_t>& order,
                               const PriorKnowledge& pk, const FitOptions& opt = {});

/// Both stages. Standardizes internally by default.
CausalModel fit(const DataMatrix& m, const PriorKnowledge& pk, const FitOptions& opt = {});

struct ResidualNormality {
    std::string variable;
    double w = 0.0;
    double p_value = 0.0;
};

/// Shapiro-Wilk on the structural residuals e = x - Ax of a fitted model,
/// one result per variable.
std::vector<ResidualNormality> residual_normality_audit(const CausalModel& model, const DataMatrix& m);

/// Reachability closure of nonzero adjacency entries: reach(i, j) == true
/// when a directed path j -> ... -> i exists.
std::vector<std::vector<bool>> reachability(const Mat& adjacency);

}  // namespace causalkit
