#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "errors.hpp"
#include "prob.hpp"
#include "shapiro.hpp"

namespace causalkit {

namespace {

double record_measure(const TrialRecord& r, std::size_t idx) {
    if (idx < 6) return static_cast<double>(r.likert[idx]);
    if (idx == 6) return r.cit;
    if (idx == 7) return r.ct;
    return r.act;
}

std::size_t factor_index(const std::string& factor) {
    std::string u = factor;
    for (char& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const auto& labels = measure_labels();
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == u) return i;
    throw ConfigError("unknown factor '" + factor + "'");
}

}  // namespace

Mat participant_condition_means(std::span<const TrialRecord> records, const std::string& factor,
                                std::span<const std::string> condition_order,
                                std::vector<std::string>* participant_ids) {
    const std::size_t fi = factor_index(factor);
    if (condition_order.size() < 2) throw ConfigError("need at least 2 conditions");

    std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> cells;
    for (const auto& r : records) cells[r.participant][r.condition] = {0.0, 0};
    for (const auto& r : records) {
        auto& cell = cells[r.participant][r.condition];
        cell.first += record_measure(r, fi);
        cell.second += 1;
    }

    Mat out(cells.size(), condition_order.size());
    std::size_t row = 0;
    for (const auto& [participant, conds] : cells) {
        for (std::size_t c = 0; c < condition_order.size(); ++c) {
            auto it = conds.find(condition_order[c]);
            if (it == conds.end() || it->second.second == 0) {
                throw ValidationError("participant '" + participant + "' has no trials in condition '" +
                                      condition_order[c] + "'");
            }
            out(row, c) = it->second.first / static_cast<double>(it->second.second);
        }
        if (participant_ids) participant_ids->push_back(participant);
        ++row;
    }
    return out;
}

FriedmanResult friedman(const Mat& block) {
    const std::size_t n = block.rows;
    const std::size_t k = block.cols;
    if (n < 2 || k < 2) throw NumericError("friedman: need at least 2 rows and 2 columns");

    std::vector<double> column_rank_sums(k, 0.0);
    double tie_correction = 0.0;  // sum over rows of sum(t^3 - t)
    std::vector<double> row(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) row[j] = block(i, j);
        const std::vector<double> ranks = average_ranks(row);
        for (std::size_t j = 0; j < k; ++j) column_rank_sums[j] += ranks[j];
        std::vector<double> sorted = row;
        std::sort(sorted.begin(), sorted.end());
        std::size_t a = 0;
        while (a < k) {
            std::size_t b = a;
            while (b + 1 < k && sorted[b + 1] == sorted[a]) ++b;
            const double t = static_cast<double>(b - a + 1);
            tie_correction += t * t * t - t;
            a = b + 1;
        }
    }

    double sum_r2 = 0.0;
    for (double r : column_rank_sums) sum_r2 += r * r;
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    const double denom = nd * nd * kd * (kd * kd - 1.0) - nd * tie_correction;
    if (denom <= 0.0) throw NumericError("friedman: every row is completely tied");
    const double w = (12.0 * sum_r2 - 3.0 * nd * nd * kd * (kd + 1.0) * (kd + 1.0)) / denom;

    FriedmanResult res;
    res.w = std::clamp(w, 0.0, 1.0);
    res.ddof1 = (kd - 1.0) - 2.0 / nd;
    res.ddof2 = (nd - 1.0) * res.ddof1;
    if (res.w >= 1.0) {
        res.degenerate = true;
        res.f = std::numeric_limits<double>::infinity();
        res.p_value = 0.0;
        return res;
    }
    res.f = friedman_f_from_w(res.w, n);
    res.p_value = prob::f_sf(res.f, res.ddof1, res.ddof2);
    return res;
}

double friedman_f_from_w(double w, std::size_t n) {
    if (w < 0.0 || w >= 1.0) {
        if (w == 1.0) return std::numeric_limits<double>::infinity();
        throw NumericError("friedman_f_from_w: W must lie in [0, 1]");
    }
    return w * static_cast<double>(n - 1) / (1.0 - w);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw NumericError("wilcoxon_signed_rank: paired samples of equal length required");

    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diff.push_back(d);
    }
    if (diff.empty()) throw NumericError("wilcoxon_signed_rank: all differences are zero");
    const std::size_t n = diff.size();

    std::vector<double> abs_diff(n);
    for (std::size_t i = 0; i < n; ++i) abs_diff[i] = std::abs(diff[i]);
    const std::vector<double> ranks = average_ranks(abs_diff);

    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (diff[i] > 0.0) w_plus += ranks[i];
    const double total = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
    const double w_minus = total - w_plus;

    WilcoxonResult res;
    res.n_effective = n;
    res.w_statistic = std::min(w_plus, w_minus);

    if (n <= 25) {
        // Exact null distribution of W+ by dynamic programming over doubled
        // ranks (average ranks are half-integers, doubling makes them exact
        // integers). Counts fit in uint64 since 2^25 < 2^64.
        std::vector<std::uint64_t> dist{1};
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r2 = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
            std::vector<std::uint64_t> next(dist.size() + r2, 0);
            for (std::size_t s = 0; s < dist.size(); ++s) {
                if (dist[s] == 0) continue;
                next[s] += dist[s];
                next[s + r2] += dist[s];
            }
            dist.swap(next);
        }
        const std::size_t w2 = static_cast<std::size_t>(std::llround(2.0 * res.w_statistic));
        std::uint64_t at_or_below = 0;
        for (std::size_t s = 0; s <= w2 && s < dist.size(); ++s) at_or_below += dist[s];
        const double denom = std::pow(2.0, static_cast<double>(n));
        res.p_value = std::min(1.0, 2.0 * static_cast<double>(at_or_below) / denom);
        res.exact = true;
        return res;
    }

    // Normal approximation, tie-corrected variance, no continuity correction.
    double tie_sum = 0.0;
    std::vector<double> sorted = abs_diff;
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_sum / 48.0;
    if (var <= 0.0) throw NumericError("wilcoxon_signed_rank: zero variance under ties");
    const double z = (w_plus - mean) / std::sqrt(var);
    res.p_value = 2.0 * prob::norm_sf(std::abs(z));
    res.p_value = std::min(1.0, res.p_value);
    res.exact = false;
    return res;
}

std::vector<double> bh_fdr(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0)) throw NumericError("bh_fdr: p-values must lie in [0, 1]");
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return p_values[x] < p_values[y]; });
    std::vector<double> adjusted(m, 0.0);
    double running_min = 1.0;
    for (std::size_t pos = m; pos-- > 0;) {
        const double candidate =
            p_values[order[pos]] * static_cast<double>(m) / static_cast<double>(pos + 1);
        running_min = std::min(running_min, candidate);
        adjusted[order[pos]] = std::min(running_min, 1.0);
    }
    return adjusted;
}

double cles(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw NumericError("cles: both samples must be nonempty");
    double score = 0.0;
    for (double x : a) {
        for (double y : b) {
            if (x > y)
                score += 1.0;
            else if (x == y)
                score += 0.5;
        }
    }
    return score / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

FactorComparison compare_conditions(std::span<const TrialRecord> records, const std::string& factor,
                                    std::span<const std::string> condition_order, bool raw_trials) {
    FactorComparison out;
    out.factor = measure_labels()[factor_index(factor)];
    out.conditions.assign(condition_order.begin(), condition_order.end());

    Mat block;
    if (!raw_trials) {
        block = participant_condition_means(records, factor, condition_order);
    } else {
        // Blocks are (participant, trial-index) cells; every block must be
        // observed in every condition.
        const std::size_t fi = factor_index(factor);
        std::map<std::pair<std::string, int>, std::map<std::string, double>> cells;
        for (const auto& r : records) cells[{r.participant, r.trial}][r.condition] = record_measure(r, fi);
        block = Mat(cells.size(), condition_order.size());
        std::size_t row = 0;
        for (const auto& [key, conds] : cells) {
            for (std::size_t c = 0; c < condition_order.size(); ++c) {
                auto it = conds.find(condition_order[c]);
                if (it == conds.end()) {
                    throw ValidationError("participant '" + key.first + "' trial " +
                                          std::to_string(key.second) + " missing condition '" +
                                          condition_order[c] + "'");
                }
                block(row, c) = it->second;
            }
            ++row;
        }
    }

    out.friedman = friedman(block);
    try {
        out.shapiro_p = shapiro_wilk(block.v).p_value;
    } catch (const NumericError&) {
        out.shapiro_p = std::numeric_limits<double>::quiet_NaN();
    }

    std::vector<double> raw_p;
    for (std::size_t a = 0; a < out.conditions.size(); ++a) {
        for (std::size_t b = a + 1; b < out.conditions.size(); ++b) {
            std::vector<double> col_a(block.rows), col_b(block.rows);
            for (std::size_t r = 0; r < block.rows; ++r) {
                col_a[r] = block(r, a);
                col_b[r] = block(r, b);
            }
            PairwiseResult pair;
            pair.condition_a = out.conditions[a];
            pair.condition_b = out.conditions[b];
            pair.mean_a = mean_of(col_a);
            pair.std_a = sample_std(col_a);
            pair.mean_b = mean_of(col_b);
            pair.std_b = sample_std(col_b);
            const WilcoxonResult w = wilcoxon_signed_rank(col_a, col_b);
            pair.w_statistic = w.w_statistic;
            pair.p_raw = w.p_value;
            pair.cles = cles(col_a, col_b);
            out.pairs.push_back(std::move(pair));
            raw_p.push_back(w.p_value);
        }
    }
    const std::vector<double> adjusted = bh_fdr(raw_p);
    for (std::size_t i = 0; i < out.pairs.size(); ++i) out.pairs[i].p_adjusted = adjusted[i];
    return out;
}

void apply_global_fdr(std::vector<FactorComparison>& factors) {
    std::vector<double> raw;
    for (const auto& f : factors)
        for (const auto& p : f.pairs) raw.push_back(p.p_raw);
    if (raw.empty()) return;
    const std::vector<double> adjusted = bh_fdr(raw);
    std::size_t k = 0;
    for (auto& f : factors)
        for (auto& p : f.pairs) p.p_adjusted = adjusted[k++];
}

}  // namespace causalkit
