#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bootstrap.hpp"
#include "dataset.hpp"
#include "fit_indices.hpp"
#include "lingam.hpp"
#include "stats.hpp"

namespace causalkit {

/// Significance stars at the conventional .05/.01/.001 thresholds.
std::string stars(double p);

nlohmann::json model_to_json(const CausalModel& model);
CausalModel model_from_json(const nlohmann::json& j);

nlohmann::json bootstrap_to_json(const BootstrapSummary& s);
BootstrapSummary bootstrap_from_json(const nlohmann::json& j);

/// Descriptives + Spearman correlations (with stars) + VIF for one matrix.
nlohmann::json describe_report(const DataMatrix& m);

/// Cause -> effect grid of median total effects and their probabilities.
nlohmann::json effects_report(const BootstrapSummary& s);

struct LabeledFit {
    std::string label;
    FitIndices indices;
};

nlohmann::json fit_report(const std::vector<LabeledFit>& rows);

nlohmann::json compare_report(const std::vector<FactorComparison>& factors);

/// Render any report JSON produced above as an aligned text table; dispatches
/// on the "kind" field.
std::string render_text(const nlohmann::json& report);

struct DotOptions {
    std::vector<std::string> sources;  // filled blue
    std::vector<std::string> sinks;    // filled red
};

/// Graphviz export; edge labels carry the direct effect rounded to 2 decimals.
std::string model_to_dot(const CausalModel& model, const DotOptions& opt = {});

/// Same, for a bootstrap summary: only edges with probability >= threshold
/// are rendered, labeled "effect (prob%)".
std::string bootstrap_to_dot(const BootstrapSummary& s, double threshold, const DotOptions& opt = {});

}  // namespace causalkit
