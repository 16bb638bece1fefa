#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "lingam.hpp"
#include "matrix.hpp"

namespace causalkit {

/// Total causal effects: T(i, j) = change of variable i per unit intervention
/// on variable j, summed over all directed paths. T = (I-A)^-1 - I, computed
/// as the finite nilpotent series sum_{k=1..p-1} A^k.
struct TotalEffects {
    std::vector<std::string> variables;
    Mat effects;
};

TotalEffects total_effects(const CausalModel& model);

/// N rows drawn with replacement, uniformly, deterministically per seed.
DataMatrix resample(const DataMatrix& m, std::uint64_t seed);

struct BootstrapOptions {
    std::size_t count = 5000;
    std::uint64_t seed = 0;
    /// 0 = hardware concurrency. Any thread count yields bit-identical
    /// results.
    unsigned threads = 0;
    FitOptions fit{};
    /// A resample whose fit fails is recorded and excluded; more than this
    /// fraction of failures aborts with an error.
    double max_failure_fraction = 0.01;
    /// Retain the per-resample nonzero direct effects per edge (for
    /// percentile intervals).
    bool keep_samples = false;
};

struct BootstrapSummary {
    std::vector<std::string> variables;
    std::size_t requested = 0;  // B
    std::size_t completed = 0;  // successful resamples
    std::size_t excluded = 0;   // failed resamples
    std::uint64_t seed = 0;
    Mat edge_probability;       // fraction of completed resamples with a nonzero direct effect
    Mat median_direct_effect;   // median over the nonzero direct-effect samples
    Mat total_probability;
    Mat median_total_effect;
    /// Causal order of the full-data fit, kept as the reference order for
    /// rendering and for the median-effect model.
    std::vector<std::size_t> reference_order;
    /// Threshold applied by prune(); negative while unpruned.
    double prune_threshold = -1.0;
    /// Per-edge retained nonzero samples (row-major p*p), empty unless
    /// requested via BootstrapOptions::keep_samples.
    std::vector<std::vector<double>> direct_samples;
};

/// B independent (resample -> fit -> total_effects) runs with per-run seeds
/// split from the master seed; aggregation is order-insensitive, so any
/// thread count produces identical output.
BootstrapSummary bootstrap_fit(const DataMatrix& m, const PriorKnowledge& pk,
                               const BootstrapOptions& opt);

/// Zero out probability and median effect wherever the reproducibility
/// probability is strictly below the threshold; entries at the boundary are
/// kept. Idempotent at a fixed threshold.
BootstrapSummary prune(const BootstrapSummary& s, double threshold);

/// Build a fittable model from the pruned median direct effects: entries are
/// masked to the reference causal order's lower triangle (violations
/// counted), residual variances re-estimated from the structural residuals.
struct MedianEffectModel {
    CausalModel model;
    std::size_t masked_entries = 0;
};

MedianEffectModel median_effect_model(const BootstrapSummary& s, const DataMatrix& m,
                                      const FitOptions& opt = {});

}  // namespace causalkit
