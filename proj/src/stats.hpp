#pragma once

#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "matrix.hpp"

namespace causalkit {

/// n x k matrix of per-participant condition means for one factor: rows are
/// participants (sorted by id), columns follow condition_order. Throws
/// ValidationError naming the participant and condition of any empty cell.
Mat participant_condition_means(std::span<const TrialRecord> records, const std::string& factor,
                                std::span<const std::string> condition_order,
                                std::vector<std::string>* participant_ids = nullptr);

struct FriedmanResult {
    double w = 0.0;       // Kendall's W, tie-corrected
    double f = 0.0;       // F approximation W(n-1)/(1-W)
    double ddof1 = 0.0;   // (k-1) - 2/n
    double ddof2 = 0.0;   // (n-1) * ddof1
    double p_value = 1.0;
    bool degenerate = false;  // W == 1 exactly: F infinite, p reported as 0
};

/// Friedman test via Kendall's W with the standard tie correction; p from the
/// F upper tail.
FriedmanResult friedman(const Mat& block);

/// The F approximation alone, for replaying reported W values.
double friedman_f_from_w(double w, std::size_t n);

struct WilcoxonResult {
    double w_statistic = 0.0;  // min(W+, W-)
    double p_value = 1.0;      // two-sided
    std::size_t n_effective = 0;
    bool exact = false;
};

/// Paired Wilcoxon signed-rank test. Zero differences are dropped; ties get
/// average ranks. Exact enumeration for effective n <= 25, otherwise the
/// normal approximation with tie-corrected variance and no continuity
/// correction.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Benjamini-Hochberg step-up adjustment; returns values in input order.
std::vector<double> bh_fdr(std::span<const double> p_values);

/// Common-language effect size: P(x > y) + 0.5 P(x = y) over all cross pairs.
double cles(std::span<const double> a, std::span<const double> b);

struct PairwiseResult {
    std::string condition_a;
    std::string condition_b;
    double mean_a = 0.0, std_a = 0.0;
    double mean_b = 0.0, std_b = 0.0;
    double w_statistic = 0.0;
    double p_raw = 1.0;
    double p_adjusted = 1.0;
    double cles = 0.5;
};

struct FactorComparison {
    std::string factor;
    std::vector<std::string> conditions;
    FriedmanResult friedman;
    double shapiro_p = 1.0;  // advisory normality pre-check on the cell means
    std::vector<PairwiseResult> pairs;
};

/// Friedman on the per-participant condition means plus all k(k-1)/2 Wilcoxon
/// post-hoc pairs with BH correction applied across this factor's pairs.
/// raw_trials switches the blocks from participant means to
/// (participant, trial-index) cells.
FactorComparison compare_conditions(std::span<const TrialRecord> records, const std::string& factor,
                                    std::span<const std::string> condition_order,
                                    bool raw_trials = false);

/// Re-adjust the pairwise p-values of several factors as one BH family
/// (global-family mode) instead of the default per-factor families.
void apply_global_fdr(std::vector<FactorComparison>& factors);

}  // namespace causalkit
