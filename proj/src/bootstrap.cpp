#include "bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "errors.hpp"
#include "rng.hpp"

namespace causalkit {

namespace {

double median_of(std::vector<double>& v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_triangular(const CausalModel& model) {
    const std::size_t p = model.variables.size();
    std::vector<std::size_t> pos(p);
    for (std::size_t k = 0; k < p; ++k) pos[model.causal_order[k]] = k;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            if (model.adjacency(i, j) != 0.0 && pos[j] >= pos[i]) {
                throw NumericError("total_effects: adjacency is not strictly lower triangular under the causal order");
            }
        }
    }
}

}  // namespace

TotalEffects total_effects(const CausalModel& model) {
    check_triangular(model);
    const std::size_t p = model.variables.size();
    TotalEffects out;
    out.variables = model.variables;
    out.effects = Mat(p, p);
    Mat power = model.adjacency;
    for (std::size_t k = 1; k < p; ++k) {
        for (std::size_t i = 0; i < p * p; ++i) out.effects.v[i] += power.v[i];
        if (k + 1 < p) power = matmul(power, model.adjacency);
    }
    return out;
}

DataMatrix resample(const DataMatrix& m, std::uint64_t seed) {
    if (m.rows == 0) throw NumericError("resample: empty matrix");
    rng::Stream stream(seed);
    DataMatrix out(m.columns, m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const std::size_t src = static_cast<std::size_t>(stream.below(m.rows));
        for (std::size_t c = 0; c < m.cols(); ++c) out.at(r, c) = m.at(src, c);
    }
    return out;
}

BootstrapSummary bootstrap_fit(const DataMatrix& m, const PriorKnowledge& pk,
                               const BootstrapOptions& opt) {
    if (opt.count == 0) throw ConfigError("bootstrap_fit: count must be at least 1");
    m.validate();

    const std::size_t p = m.cols();
    BootstrapSummary summary;
    summary.variables = m.columns;
    summary.requested = opt.count;
    summary.seed = opt.seed;

    // Reference fit on the full data; also surfaces systematic problems
    // before spending B resamples.
    const CausalModel reference = fit(m, pk, opt.fit);
    summary.reference_order = reference.causal_order;

    struct RunResult {
        Mat direct;
        Mat total;
        bool ok = false;
    };
    std::vector<RunResult> runs(opt.count);

    auto run_one = [&](std::size_t r) {
        const std::uint64_t run_seed = rng::nth_output(opt.seed, r);
        try {
            const DataMatrix re = resample(m, run_seed);
            const CausalModel model = fit(re, pk, opt.fit);
            runs[r].direct = model.adjacency;
            runs[r].total = total_effects(model).effects;
            runs[r].ok = true;
        } catch (const NumericError&) {
            runs[r].ok = false;
        }
    };

    unsigned threads = opt.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || opt.count < 2) {
        for (std::size_t r = 0; r < opt.count; ++r) run_one(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t r = next.fetch_add(1);
                    if (r >= opt.count) return;
                    run_one(r);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Aggregation walks runs in index order: independent of scheduling.
    summary.edge_probability = Mat(p, p);
    summary.median_direct_effect = Mat(p, p);
    summary.total_probability = Mat(p, p);
    summary.median_total_effect = Mat(p, p);
    if (opt.keep_samples) summary.direct_samples.assign(p * p, {});

    std::size_t ok_count = 0;
    for (const auto& run : runs) ok_count += run.ok ? 1 : 0;
    summary.completed = ok_count;
    summary.excluded = opt.count - ok_count;
    if (summary.excluded > opt.max_failure_fraction * static_cast<double>(opt.count)) {
        throw NumericError("bootstrap_fit: " + std::to_string(summary.excluded) + " of " +
                           std::to_string(opt.count) + " resamples failed to fit");
    }
    if (ok_count == 0) throw NumericError("bootstrap_fit: no resample produced a model");

    std::vector<double> direct_vals, total_vals;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            direct_vals.clear();
            total_vals.clear();
            for (const auto& run : runs) {
                if (!run.ok) continue;
                const double d = run.direct(i, j);
                if (d != 0.0) direct_vals.push_back(d);
                const double t = run.total(i, j);
                if (t != 0.0) total_vals.push_back(t);
            }
            summary.edge_probability(i, j) =
                static_cast<double>(direct_vals.size()) / static_cast<double>(ok_count);
            summary.total_probability(i, j) =
                static_cast<double>(total_vals.size()) / static_cast<double>(ok_count);
            if (opt.keep_samples) summary.direct_samples[i * p + j] = direct_vals;
            summary.median_direct_effect(i, j) = median_of(direct_vals);
            summary.median_total_effect(i, j) = median_of(total_vals);
        }
    }
    return summary;
}

BootstrapSummary prune(const BootstrapSummary& s, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) throw ConfigError("prune: threshold must lie in [0, 1]");
    BootstrapSummary out = s;
    const std::size_t p = s.variables.size();
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            if (out.edge_probability(i, j) < threshold) {
                out.edge_probability(i, j) = 0.0;
                out.median_direct_effect(i, j) = 0.0;
            }
            if (out.total_probability(i, j) < threshold) {
                out.total_probability(i, j) = 0.0;
                out.median_total_effect(i, j) = 0.0;
            }
        }
    }
    out.prune_threshold = threshold;
    return out;
}

MedianEffectModel median_effect_model(const BootstrapSummary& s, const DataMatrix& m,
                                      const FitOptions& opt) {
    const std::size_t p = s.variables.size();
    if (m.cols() != p) throw ConfigError("median_effect_model: matrix does not match the summary");
    if (s.reference_order.size() != p)
        throw ConfigError("median_effect_model: summary carries no reference order");

    MedianEffectModel out;
    out.model.variables = s.variables;
    out.model.causal_order = s.reference_order;
    out.model.standardized = opt.standardize;
    out.model.adjacency = Mat(p, p);

    std::vector<std::size_t> pos(p);
    for (std::size_t k = 0; k < p; ++k) pos[s.reference_order[k]] = k;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double v = s.median_direct_effect(i, j);
            if (v == 0.0) continue;
            if (pos[j] >= pos[i]) {
                ++out.masked_entries;
                continue;
            }
            out.model.adjacency(i, j) = v;
        }
    }

    const DataMatrix work = opt.standardize ? standardize(m) : m;
    out.model.residual_variances.assign(p, 0.0);
    out.model.residuals = DataMatrix(s.variables, work.rows);
    for (std::size_t i = 0; i < p; ++i) {
        double mean = 0.0;
        for (std::size_t r = 0; r < work.rows; ++r) {
            double e = work.at(r, i);
            for (std::size_t j = 0; j < p; ++j) {
                const double a = out.model.adjacency(i, j);
                if (a != 0.0) e -= a * work.at(r, j);
            }
            out.model.residuals.at(r, i) = e;
            mean += e;
        }
        mean /= static_cast<double>(work.rows);
        double ss = 0.0;
        for (std::size_t r = 0; r < work.rows; ++r) {
            const double d = out.model.residuals.at(r, i) - mean;
            ss += d * d;
        }
        out.model.residual_variances[i] = ss / static_cast<double>(work.rows - 1);
    }
    return out;
}

}  // namespace causalkit
