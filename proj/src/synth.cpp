#include "synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace causalkit {

namespace {

double draw_error(rng::Stream& stream, const ErrorSpec& spec) {
    switch (spec.kind) {
        case ErrorKind::uniform:
            // Uniform on [-sqrt(3) s, sqrt(3) s]: variance s^2.
            return spec.scale * std::sqrt(3.0) * stream.uniform_sym();
        case ErrorKind::laplace:
            return spec.scale * stream.laplace_unit();
        case ErrorKind::gaussian_mixture: {
            // Symmetric two-component mixture 0.5 N(-mu, s0^2) + 0.5 N(mu, s0^2)
            // with mu^2 + s0^2 = scale^2; bimodal, clearly non-Gaussian.
            const double mu = spec.scale * std::sqrt(0.75);
            const double s0 = spec.scale * 0.5;
            const double sign = stream.uniform01() < 0.5 ? -1.0 : 1.0;
            return sign * mu + s0 * stream.gaussian();
        }
    }
    throw NumericError("draw_error: unknown error kind");
}

}  // namespace

ErrorKind error_kind_from_string(const std::string& s) {
    if (s == "uniform") return ErrorKind::uniform;
    if (s == "laplace") return ErrorKind::laplace;
    if (s == "mixture" || s == "gaussian_mixture") return ErrorKind::gaussian_mixture;
    if (s == "gaussian" || s == "normal") {
        throw ConfigError("gaussian errors are not permitted: the model would not be identifiable");
    }
    throw ConfigError("unknown error distribution '" + s + "'");
}

std::string to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::uniform: return "uniform";
        case ErrorKind::laplace: return "laplace";
        case ErrorKind::gaussian_mixture: return "mixture";
    }
    return "?";
}

void GroundTruthModel::validate() const {
    const std::size_t p = variables.size();
    if (p == 0) throw ConfigError("ground truth model has no variables");
    if (adjacency.rows != p || adjacency.cols != p)
        throw ConfigError("ground truth adjacency must be p x p");
    if (errors.size() != p) throw ConfigError("ground truth needs one error spec per variable");
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            if (adjacency(i, j) != 0.0)
                throw ConfigError("ground truth adjacency must be strictly lower triangular in variable order");
        }
    }
    for (const auto& e : errors) {
        if (!(e.scale > 0.0)) throw ConfigError("error scales must be strictly positive");
    }
}

DataMatrix generate(const GroundTruthModel& model, std::size_t n, std::uint64_t seed) {
    model.validate();
    if (n == 0) throw ConfigError("generate: need at least one row");
    const std::size_t p = model.variables.size();
    DataMatrix out(model.variables, n);
    std::vector<double> x(p);
    for (std::size_t r = 0; r < n; ++r) {
        rng::Stream stream = rng::substream(seed, r);
        for (std::size_t k = 0; k < p; ++k) {
            double v = draw_error(stream, model.errors[k]);
            for (std::size_t j = 0; j < k; ++j) v += model.adjacency(k, j) * x[j];
            x[k] = v;
        }
        for (std::size_t k = 0; k < p; ++k) out.at(r, k) = x[k];
    }
    return out;
}

Mat truth_covariance(const GroundTruthModel& model) {
    model.validate();
    const std::size_t p = model.variables.size();
    // Built recursively in causal order: cov(x_k, x_j) = a_k' cov(pred, x_j).
    Mat sigma(p, p);
    for (std::size_t k = 0; k < p; ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            double c = 0.0;
            for (std::size_t l = 0; l < k; ++l) c += model.adjacency(k, l) * sigma(l, j);
            sigma(k, j) = sigma(j, k) = c;
        }
        double v = model.errors[k].scale * model.errors[k].scale;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                v += model.adjacency(k, a) * sigma(a, b) * model.adjacency(k, b);
        sigma(k, k) = v;
    }
    return sigma;
}

Mat standardized_adjacency(const GroundTruthModel& model) {
    const Mat sigma = truth_covariance(model);
    const std::size_t p = model.variables.size();
    Mat out(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            out(i, j) = model.adjacency(i, j) * std::sqrt(sigma(j, j) / sigma(i, i));
    return out;
}

GroundTruthModel nine_factor_fixture() {
    GroundTruthModel m;
    m.variables = measure_labels();
    const std::size_t p = m.variables.size();
    m.adjacency = Mat(p, p);
    auto idx = [&](const char* name) {
        return static_cast<std::size_t>(std::find(m.variables.begin(), m.variables.end(), name) -
                                        m.variables.begin());
    };
    auto edge = [&](const char* to, const char* from, double w) { m.adjacency(idx(to), idx(from)) = w; };
    edge("Q2", "Q1", 0.75);
    edge("Q3", "Q2", -0.65);
    edge("Q4", "Q3", -0.70);
    edge("Q5", "Q1", 0.35);
    edge("Q5", "Q4", 0.45);
    edge("Q6", "Q3", 0.60);
    edge("CIT", "Q6", 0.55);
    edge("CT", "Q2", -0.45);
    edge("ACT", "Q5", -0.50);

    // Error scales that give every variable unit population variance, so the
    // standardized adjacency is identical to the raw one.
    m.errors.assign(p, ErrorSpec{ErrorKind::uniform, 1.0});
    Mat sigma(p, p);
    for (std::size_t k = 0; k < p; ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            double c = 0.0;
            for (std::size_t l = 0; l < k; ++l) c += m.adjacency(k, l) * sigma(l, j);
            sigma(k, j) = sigma(j, k) = c;
        }
        double explained = 0.0;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                explained += m.adjacency(k, a) * sigma(a, b) * m.adjacency(k, b);
        if (explained >= 1.0) throw NumericError("nine_factor_fixture: edge weights leave no error variance");
        m.errors[k].scale = std::sqrt(1.0 - explained);
        sigma(k, k) = 1.0;
    }
    return m;
}

DataMatrix nine_factor_data(std::uint64_t seed, std::size_t n) {
    return generate(nine_factor_fixture(), n, seed);
}

std::vector<TrialRecord> synthetic_trials(std::uint64_t seed) {
    const GroundTruthModel model = nine_factor_fixture();
    const std::size_t p = model.variables.size();
    const std::vector<std::string> conditions = {"non", "early", "sync", "late"};
    // Per-condition shift applied to the exogenous variable's error.
    const std::vector<double> shift = {-0.9, 0.9, 0.6, -0.35};

    std::vector<TrialRecord> records;
    std::vector<double> x(p);
    for (int participant = 0; participant < 42; ++participant) {
        rng::Stream pstream = rng::substream(seed ^ 0x5CA1AB1Eull, static_cast<std::uint64_t>(participant));
        const double intercept = 0.35 * pstream.gaussian();
        for (std::size_t c = 0; c < conditions.size(); ++c) {
            for (int trial = 1; trial <= 3; ++trial) {
                const std::uint64_t row_id =
                    static_cast<std::uint64_t>(participant) * 12 + c * 3 + (trial - 1);
                rng::Stream stream = rng::substream(seed, row_id);
                for (std::size_t k = 0; k < p; ++k) {
                    double v = draw_error(stream, model.errors[k]);
                    if (k == 0) v += shift[c] + intercept;
                    for (std::size_t j = 0; j < k; ++j) v += model.adjacency(k, j) * x[j];
                    x[k] = v;
                }
                TrialRecord rec;
                rec.participant = participant < 9 ? "P0" + std::to_string(participant + 1)
                                                  : "P" + std::to_string(participant + 1);
                rec.condition = conditions[c];
                rec.trial = trial;
                for (std::size_t q = 0; q < 6; ++q) {
                    const int v = static_cast<int>(std::lround(3.0 + 1.1 * x[q]));
                    rec.likert[q] = std::clamp(v, 1, 5);
                }
                rec.cit = std::exp(1.10 + 0.25 * x[6]);
                rec.ct = std::exp(0.17 + 0.15 * x[7]);
                rec.act = std::exp(-0.04 + 0.12 * x[8]);
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

std::string ground_truth_to_json(const GroundTruthModel& model) {
    model.validate();
    nlohmann::json j;
    j["variables"] = model.variables;
    std::vector<std::vector<double>> adj(model.variables.size());
    for (std::size_t i = 0; i < model.variables.size(); ++i) {
        adj[i].assign(model.adjacency.row(i).begin(), model.adjacency.row(i).end());
    }
    j["adjacency"] = adj;
    nlohmann::json errs = nlohmann::json::array();
    for (const auto& e : model.errors) {
        errs.push_back({{"kind", to_string(e.kind)}, {"scale", e.scale}});
    }
    j["errors"] = errs;
    return j.dump(2);
}

GroundTruthModel ground_truth_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("ground truth JSON: ") + e.what());
    }
    GroundTruthModel m;
    try {
        m.variables = j.at("variables").get<std::vector<std::string>>();
        const auto adj = j.at("adjacency").get<std::vector<std::vector<double>>>();
        const std::size_t p = m.variables.size();
        m.adjacency = Mat(p, p);
        if (adj.size() != p) throw ValidationError("ground truth JSON: adjacency row count mismatch");
        for (std::size_t i = 0; i < p; ++i) {
            if (adj[i].size() != p) throw ValidationError("ground truth JSON: adjacency column count mismatch");
            for (std::size_t k = 0; k < p; ++k) m.adjacency(i, k) = adj[i][k];
        }
        for (const auto& e : j.at("errors")) {
            ErrorSpec spec;
            spec.kind = error_kind_from_string(e.at("kind").get<std::string>());
            spec.scale = e.at("scale").get<double>();
            m.errors.push_back(spec);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("ground truth JSON: ") + e.what());
    }
    m.validate();
    return m;
}

}  // namespace causalkit
