#include "lingam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "errors.hpp"
#include "regression.hpp"

namespace causalkit {

namespace {

double covariance(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(n - 1);
}

std::vector<double> standardized_copy(std::span<const double> v) {
    const double mu = mean_of(v);
    const double sd = sample_std(v);
    if (sd <= 0.0) throw NumericError("standardize: zero-variance vector during causal search");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mu) / sd;
    return out;
}

/// Canonical rank of each column: position in the name-sorted order. All
/// cross-variable iteration is done in this order so that permuting input
/// columns permutes results exactly.
std::vector<std::size_t> canonical_ranks(const std::vector<std::string>& names) {
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
    std::vector<std::size_t> rank(names.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos;
    return rank;
}

/// Pairwise likelihood-ratio statistic for "a causes b" vs "b causes a" on
/// standardized columns: positive D supports a -> b.
double pair_diff_mutual_info(const std::vector<double>& a_std, const std::vector<double>& b_std,
                             const EntropyConstants& c) {
    std::vector<double> r_ab = residual(a_std, b_std);  // a on b
    std::vector<double> r_ba = residual(b_std, a_std);  // b on a
    const double sd_ab = sample_std(r_ab);
    const double sd_ba = sample_std(r_ba);
    if (sd_ab <= 0.0 || sd_ba <= 0.0)
        throw NumericError("independence measure: residual with zero variance");
    for (double& v : r_ab) v /= sd_ab;
    for (double& v : r_ba) v /= sd_ba;
    return (entropy_approx(b_std, c) + entropy_approx(r_ab, c)) -
           (entropy_approx(a_std, c) + entropy_approx(r_ba, c));
}

}  // namespace

PriorKnowledge PriorKnowledge::from_roles(const std::vector<std::string>& variables,
                                          const std::vector<std::string>& exogenous,
                                          const std::vector<std::string>& sinks,
                                          bool forbid_sink_to_sink) {
    const std::size_t p = variables.size();
    auto index_of = [&](const std::string& name) -> std::size_t {
        auto it = std::find(variables.begin(), variables.end(), name);
        if (it == variables.end()) throw ConfigError("unknown variable '" + name + "' in role list");
        return static_cast<std::size_t>(it - variables.begin());
    };
    std::set<std::size_t> exo, snk;
    for (const auto& name : exogenous) exo.insert(index_of(name));
    for (const auto& name : sinks) snk.insert(index_of(name));
    for (std::size_t e : exo)
        if (snk.count(e))
            throw ConfigError("variable '" + variables[e] + "' cannot be both exogenous and a sink");

    PriorKnowledge pk(p);
    for (std::size_t e : exo) {
        for (std::size_t j = 0; j < p; ++j)
            if (j != e) pk.set(e, j, 0);  // nothing reaches an exogenous variable
    }
    for (std::size_t s : snk) {
        for (std::size_t i = 0; i < p; ++i) {
            if (i == s) continue;
            if (!forbid_sink_to_sink && snk.count(i)) continue;
            pk.set(i, s, 0);  // a sink reaches nothing
        }
    }
    pk.validate();
    return pk;
}

void PriorKnowledge::set(std::size_t i, std::size_t j, int v) {
    if (i >= p_ || j >= p_) throw ConfigError("prior knowledge index out of range");
    if (v < -1 || v > 1) throw ConfigError("prior knowledge entries must be -1, 0 or 1");
    if (i == j) return;  // diagonal ignored
    k_[i * p_ + j] = static_cast<std::int8_t>(v);
}

bool PriorKnowledge::exogenous_constrained(std::size_t j) const {
    for (std::size_t i = 0; i < p_; ++i)
        if (i != j && at(j, i) != 0) return false;
    return p_ > 1;
}

bool PriorKnowledge::sink_constrained(std::size_t j) const {
    for (std::size_t i = 0; i < p_; ++i)
        if (i != j && at(i, j) != 0) return false;
    return p_ > 1;
}

void PriorKnowledge::validate() const {
    // Transitive closure of required paths; any closure edge that is also
    // forbidden, or a required cycle, is unsatisfiable.
    std::vector<std::vector<bool>> reach(p_, std::vector<bool>(p_, false));
    for (std::size_t i = 0; i < p_; ++i)
        for (std::size_t j = 0; j < p_; ++j)
            if (i != j && at(i, j) == 1) reach[i][j] = true;
    for (std::size_t k = 0; k < p_; ++k)
        for (std::size_t i = 0; i < p_; ++i)
            for (std::size_t j = 0; j < p_; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    for (std::size_t i = 0; i < p_; ++i) {
        if (reach[i][i]) throw ConfigError("prior knowledge contains a required cycle");
        for (std::size_t j = 0; j < p_; ++j) {
            if (i != j && reach[i][j] && at(i, j) == 0) {
                throw ConfigError("prior knowledge requires and forbids a path between the same variables");
            }
        }
    }
}

std::vector<double> residual(std::span<const double> xi, std::span<const double> xj) {
    if (xi.size() != xj.size() || xi.size() < 2)
        throw NumericError("residual: vectors must have equal length >= 2");
    const double var_j = covariance(xj, xj);
    if (var_j <= 0.0) throw NumericError("residual: regressor has zero variance");
    const double slope = covariance(xi, xj) / var_j;
    std::vector<double> out(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) out[k] = xi[k] - slope * xj[k];
    return out;
}

double entropy_approx(std::span<const double> u, const EntropyConstants& c) {
    const double n = static_cast<double>(u.size());
    double mean_log_cosh = 0.0;
    double mean_u_exp = 0.0;
    constexpr double kLog2 = 0.6931471805599453;
    for (double v : u) {
        if (!std::isfinite(v)) throw NumericError("entropy_approx: non-finite input");
        // log cosh v = |v| + log1p(exp(-2|v|)) - log 2, stable for any magnitude
        const double av = std::abs(v);
        mean_log_cosh += av + std::log1p(std::exp(-2.0 * av)) - kLog2;
        mean_u_exp += v * std::exp(-0.5 * v * v);
    }
    mean_log_cosh /= n;
    mean_u_exp /= n;
    const double d1 = mean_log_cosh - c.gamma;
    return kGaussianEntropy - c.k1 * d1 * d1 - c.k2 * mean_u_exp * mean_u_exp;
}

double independence_score(std::span<const double> candidate,
                          const std::vector<std::vector<double>>& others,
                          const EntropyConstants& c) {
    if (others.empty()) throw NumericError("independence_score: need at least 2 variables");
    const std::vector<double> cand(candidate.begin(), candidate.end());
    double score = 0.0;
    for (const auto& other : others) {
        const double d = pair_diff_mutual_info(cand, other, c);
        const double neg = std::min(0.0, d);
        score += neg * neg;
    }
    return score;
}

std::vector<std::size_t> search_causal_order(const DataMatrix& m, const PriorKnowledge& pk,
                                             const EntropyConstants& c,
                                             const StageOneObserver& observer) {
    const std::size_t p = m.cols();
    if (p < 2) throw NumericError("search_causal_order: need at least 2 variables");
    if (m.rows <= p) throw NumericError("search_causal_order: need more observations than variables");
    if (pk.size() != p) throw ConfigError("prior knowledge size does not match the matrix");
    pk.validate();

    const std::vector<std::size_t> rank = canonical_ranks(m.columns);
    auto canonical_less = [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; };

    std::vector<std::vector<double>> work(p);
    for (std::size_t j = 0; j < p; ++j) work[j] = m.column(j);

    std::vector<std::size_t> remaining(p);
    std::iota(remaining.begin(), remaining.end(), 0);
    std::sort(remaining.begin(), remaining.end(), canonical_less);

    std::vector<std::size_t> order;
    while (!remaining.empty()) {
        // Admissibility under the remaining constraints.
        std::vector<std::size_t> admissible;
        bool non_sink_left = false;
        for (std::size_t j : remaining)
            if (!pk.sink_constrained(j)) non_sink_left = true;
        for (std::size_t j : remaining) {
            bool blocked = false;
            for (std::size_t i : remaining) {
                if (i != j && pk.at(j, i) == 1) {
                    blocked = true;  // required ancestor not placed yet
                    break;
                }
            }
            if (!blocked && pk.sink_constrained(j) && non_sink_left) blocked = true;
            if (!blocked) admissible.push_back(j);
        }
        if (admissible.empty())
            throw NumericError("search_causal_order: prior knowledge constraints are unsatisfiable");

        // Exogenous-constrained variables take precedence over unconstrained ones.
        std::vector<std::size_t> candidates;
        for (std::size_t j : admissible)
            if (pk.exogenous_constrained(j)) candidates.push_back(j);
        if (candidates.empty()) candidates = admissible;

        std::size_t picked;
        if (candidates.size() == 1 || remaining.size() == 1) {
            picked = candidates.front();
        } else {
            // Pairwise statistics over the remaining set, each unordered pair
            // once, in canonical order (remaining is kept canonically sorted).
            std::vector<std::vector<double>> std_cols(p);
            for (std::size_t j : remaining) std_cols[j] = standardized_copy(work[j]);
            Mat d(p, p);
            for (std::size_t ai = 0; ai < remaining.size(); ++ai) {
                for (std::size_t bi = ai + 1; bi < remaining.size(); ++bi) {
                    const std::size_t a = remaining[ai];
                    const std::size_t b = remaining[bi];
                    const double dab = pair_diff_mutual_info(std_cols[a], std_cols[b], c);
                    d(a, b) = dab;
                    d(b, a) = -dab;
                }
            }
            double best_score = 0.0;
            bool have_best = false;
            picked = candidates.front();
            for (std::size_t cand : candidates) {
                double score = 0.0;
                for (std::size_t other : remaining) {
                    if (other == cand) continue;
                    const double neg = std::min(0.0, d(cand, other));
                    score += neg * neg;
                }
                if (!have_best || score < best_score - 1e-12) {
                    best_score = score;
                    picked = cand;
                    have_best = true;
                }
                // Ties within 1e-12 keep the earlier canonical candidate.
            }
        }

        order.push_back(picked);
        std::vector<double> picked_column = work[picked];
        remaining.erase(std::find(remaining.begin(), remaining.end(), picked));
        for (std::size_t j : remaining) work[j] = residual(work[j], picked_column);

        if (observer) {
            StageOneRound round;
            round.selected = picked;
            round.remaining = remaining;
            for (std::size_t j : remaining) round.working_columns.push_back(work[j]);
            round.selected_column = std::move(picked_column);
            observer(round);
        }
    }
    return order;
}

CausalModel estimate_adjacency(const DataMatrix& m, const std::vector<std::size_t>& order,
                               const PriorKnowledge& pk, const FitOptions& opt) {
    const std::size_t p = m.cols();
    if (m.rows <= p) throw NumericError("estimate_adjacency: need more observations than variables");
    if (pk.size() != p) throw ConfigError("prior knowledge size does not match the matrix");
    {
        std::vector<bool> seen(p, false);
        if (order.size() != p) throw ConfigError("estimate_adjacency: order is not a permutation");
        for (std::size_t v : order) {
            if (v >= p || seen[v]) throw ConfigError("estimate_adjacency: order is not a permutation");
            seen[v] = true;
        }
    }

    const std::vector<std::size_t> rank = canonical_ranks(m.columns);

    // Centered working copy; coefficients are unaffected and the intercept
    // drops out of every regression.
    std::vector<std::vector<double>> cols(p);
    for (std::size_t j = 0; j < p; ++j) {
        cols[j] = m.column(j);
        const double mu = mean_of(cols[j]);
        for (double& v : cols[j]) v -= mu;
    }

    CausalModel model;
    model.variables = m.columns;
    model.causal_order = order;
    model.adjacency = Mat(p, p);
    model.residual_variances.assign(p, 0.0);
    model.standardized = opt.standardize;

    // Fitted ancestor sets, maintained in causal order so that transitive
    // path constraints can be honored while fitting.
    std::vector<std::set<std::size_t>> ancestors(p);

    DataMatrix residual_matrix(m.columns, m.rows);

    for (std::size_t pos = 0; pos < p; ++pos) {
        const std::size_t target = order[pos];
        std::vector<std::size_t> preds(order.begin(), order.begin() + pos);
        std::sort(preds.begin(), preds.end(),
                  [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });

        std::vector<std::size_t> allowed;
        for (std::size_t j : preds) {
            if (pk.at(target, j) == 0) continue;
            bool tainted = false;
            for (std::size_t a : ancestors[j]) {
                if (pk.at(target, a) == 0) {
                    tainted = true;  // edge j -> target would open a forbidden path a -> target
                    break;
                }
            }
            if (!tainted) allowed.push_back(j);
        }

        std::vector<double> coef(allowed.size(), 0.0);
        if (!allowed.empty()) {
            std::vector<std::vector<double>> design;
            design.reserve(allowed.size());
            for (std::size_t j : allowed) design.push_back(cols[j]);
            if (opt.regression == RegressionMode::adaptive_lasso) {
                coef = adaptive_lasso(design, cols[target]).coef;
            } else {
                coef = ols(design, cols[target]);
                for (double& b : coef) {
                    if (std::abs(b) <= opt.ols_threshold) b = 0.0;
                }
            }
        }

        for (std::size_t k = 0; k < allowed.size(); ++k) {
            model.adjacency(target, allowed[k]) = coef[k];
            if (coef[k] != 0.0) {
                ancestors[target].insert(allowed[k]);
                ancestors[target].insert(ancestors[allowed[k]].begin(), ancestors[allowed[k]].end());
            }
        }

        double ss = 0.0;
        for (std::size_t r = 0; r < m.rows; ++r) {
            double e = cols[target][r];
            for (std::size_t k = 0; k < allowed.size(); ++k) e -= coef[k] * cols[allowed[k]][r];
            residual_matrix.at(r, target) = e;
            ss += e * e;
        }
        model.residual_variances[target] = ss / static_cast<double>(m.rows - 1);
    }

    model.residuals = std::move(residual_matrix);
    return model;
}

CausalModel fit(const DataMatrix& m, const PriorKnowledge& pk, const FitOptions& opt) {
    m.validate();
    const DataMatrix work = opt.standardize ? standardize(m) : m;
    const std::vector<std::size_t> order = search_causal_order(work, pk, opt.entropy);
    return estimate_adjacency(work, order, pk, opt);
}

std::vector<ResidualNormality> residual_normality_audit(const CausalModel& model, const DataMatrix& m) {
    if (m.cols() != model.variables.size())
        throw ConfigError("residual_normality_audit: matrix does not match the model");
    if (m.rows < 3 || m.rows > 5000)
        throw NumericError("residual_normality_audit: sample size outside the Shapiro-Wilk range 3..5000");
    const DataMatrix work = model.standardized ? standardize(m) : m;
    const std::size_t p = m.cols();
    std::vector<ResidualNormality> out;
    std::vector<double> e(work.rows);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t r = 0; r < work.rows; ++r) {
            double v = work.at(r, i);
            for (std::size_t j = 0; j < p; ++j) {
                const double a = model.adjacency(i, j);
                if (a != 0.0) v -= a * work.at(r, j);
            }
            e[r] = v;
        }
        const ShapiroResult sw = shapiro_wilk(e);
        out.push_back({model.variables[i], sw.w, sw.p_value});
    }
    return out;
}

std::vector<std::vector<bool>> reachability(const Mat& adjacency) {
    const std::size_t p = adjacency.rows;
    std::vector<std::vector<bool>> reach(p, std::vector<bool>(p, false));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (i != j && adjacency(i, j) != 0.0) reach[i][j] = true;
    for (std::size_t k = 0; k < p; ++k)
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    return reach;
}

}  // namespace causalkit
