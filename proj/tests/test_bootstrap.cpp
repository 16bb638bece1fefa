#include <doctest.h>

#include <cmath>
#include <set>

#include "bootstrap.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "lingam.hpp"
#include "rng.hpp"
#include "synth.hpp"
#include "test_util.hpp"

using namespace causalkit;

namespace {

CausalModel manual_model(std::vector<std::string> names, const std::vector<std::size_t>& order,
                         const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
    CausalModel m;
    m.variables = std::move(names);
    m.causal_order = order;
    m.adjacency = Mat(m.variables.size(), m.variables.size());
    for (const auto& [to, from, w] : edges) m.adjacency(to, from) = w;
    m.residual_variances.assign(m.variables.size(), 1.0);
    return m;
}

GroundTruthModel strong_chain() {
    GroundTruthModel m;
    m.variables = {"x1", "x2", "x3"};
    m.adjacency = Mat(3, 3);
    m.adjacency(1, 0) = 0.8;
    m.adjacency(2, 1) = 0.8;
    m.errors.assign(3, {ErrorKind::uniform, 1.0});
    return m;
}

}  // namespace

TEST_CASE("total effects on hand-checkable graphs") {
    SUBCASE("two-edge chain") {
        const CausalModel m = manual_model({"a", "b", "c"}, {0, 1, 2}, {{1, 0, 0.5}, {2, 1, 0.4}});
        const TotalEffects t = total_effects(m);
        CHECK(t.effects(1, 0) == doctest::Approx(0.5));
        CHECK(t.effects(2, 1) == doctest::Approx(0.4));
        CHECK(t.effects(2, 0) == doctest::Approx(0.2));
        CHECK(t.effects(0, 1) == 0.0);
    }
    SUBCASE("zero adjacency gives zero effects") {
        const CausalModel m = manual_model({"a", "b"}, {0, 1}, {});
        for (double v : total_effects(m).effects.v) CHECK(v == 0.0);
    }
    SUBCASE("cyclic adjacency is rejected") {
        CausalModel m = manual_model({"a", "b"}, {0, 1}, {{1, 0, 0.5}});
        m.adjacency(0, 1) = 0.3;  // violates the order
        CHECK_THROWS_AS(total_effects(m), NumericError);
    }
}

TEST_CASE("total effects match brute-force path enumeration on random DAGs") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        rng::Stream s(rng::nth_output(2024, seed));
        const std::size_t p = 2 + static_cast<std::size_t>(s.below(5));  // 2..6
        std::vector<std::string> names;
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < p; ++i) {
            names.push_back("v" + std::to_string(i));
            order.push_back(i);
        }
        CausalModel m = manual_model(names, order, {});
        for (std::size_t i = 1; i < p; ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (s.uniform01() < 0.6) m.adjacency(i, j) = s.uniform_sym() * 1.5;
        const TotalEffects t = total_effects(m);
        for (std::size_t to = 0; to < p; ++to)
            for (std::size_t from = 0; from < p; ++from) {
                if (to == from) continue;
                CHECK(std::abs(t.effects(to, from) - testutil::path_sum(m.adjacency, from, to)) < 1e-12);
            }
    }
}

TEST_CASE("total effects scale linearly in a single edge on a single-path graph") {
    for (double c : {0.25, 1.0, -2.0}) {
        const CausalModel m =
            manual_model({"a", "b", "c"}, {0, 1, 2}, {{1, 0, 0.5 * c}, {2, 1, 0.4}});
        CHECK(total_effects(m).effects(2, 0) == doctest::Approx(0.2 * c).epsilon(1e-15));
    }
}

TEST_CASE("resample") {
    SUBCASE("single row repeats") {
        DataMatrix m(std::vector<std::string>{"a"}, 1);
        m.at(0, 0) = 42.0;
        const DataMatrix r = resample(m, 7);
        CHECK(r.rows == 1);
        CHECK(r.at(0, 0) == 42.0);
    }
    SUBCASE("same seed, same draw") {
        const DataMatrix m = nine_factor_data(1, 100);
        CHECK(resample(m, 5).values == resample(m, 5).values);
        CHECK(resample(m, 5).values != resample(m, 6).values);
    }
    SUBCASE("inclusion frequency approaches 1 - 1/e") {
        DataMatrix m(std::vector<std::string>{"id"}, 504);
        for (std::size_t r = 0; r < 504; ++r) m.at(r, 0) = static_cast<double>(r);
        double total_fraction = 0.0;
        const int reps = 10000;
        for (int rep = 0; rep < reps; ++rep) {
            const DataMatrix r = resample(m, rng::nth_output(31337, rep));
            std::set<double> seen(r.values.begin(), r.values.end());
            total_fraction += static_cast<double>(seen.size()) / 504.0;
        }
        total_fraction /= reps;
        CHECK(std::abs(total_fraction - 0.632) < 0.02);
    }
}

TEST_CASE("bootstrap_fit semantics") {
    const GroundTruthModel truth = strong_chain();
    const DataMatrix data = generate(truth, 504, 17);
    const PriorKnowledge pk = PriorKnowledge::unconstrained(3);

    SUBCASE("B = 1 equals the single resampled fit") {
        BootstrapOptions opt;
        opt.count = 1;
        opt.seed = 77;
        const BootstrapSummary s = bootstrap_fit(data, pk, opt);
        const DataMatrix re = resample(data, rng::nth_output(77, 0));
        const CausalModel single = fit(re, pk);
        const TotalEffects te = total_effects(single);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                const double d = single.adjacency(i, j);
                CHECK(s.edge_probability(i, j) == (d != 0.0 ? 1.0 : 0.0));
                CHECK(s.median_direct_effect(i, j) == d);
                CHECK(s.median_total_effect(i, j) == te.effects(i, j));
            }
    }
    SUBCASE("strong edges reproduce, null edges stay rare") {
        BootstrapOptions opt;
        opt.count = 500;
        opt.seed = 4242;
        const BootstrapSummary s = bootstrap_fit(data, pk, opt);
        CHECK(s.excluded == 0);
        CHECK(s.edge_probability(1, 0) >= 0.95);
        CHECK(s.edge_probability(2, 1) >= 0.95);
        CHECK(s.edge_probability(0, 1) <= 0.30);  // reversed edge
        // median of nonzero direct effects near the truth
        CHECK(std::abs(s.median_direct_effect(1, 0) - standardized_adjacency(truth)(1, 0)) < 0.1);
        // pruning at 0.30 zeroes whatever sits below
        const BootstrapSummary pruned = prune(s, 0.30);
        for (std::size_t i = 0; i < 9; ++i) {
            if (pruned.edge_probability.v[i] == 0.0) CHECK(pruned.median_direct_effect.v[i] == 0.0);
            if (s.edge_probability.v[i] < 0.30) CHECK(pruned.edge_probability.v[i] == 0.0);
        }
        // direct edge is the only path for (1,0): medians agree in sign
        CHECK(pruned.median_total_effect(1, 0) * pruned.median_direct_effect(1, 0) > 0.0);
    }
    SUBCASE("thread count does not change the result") {
        BootstrapOptions opt;
        opt.count = 60;
        opt.seed = 99;
        opt.threads = 1;
        const BootstrapSummary one = bootstrap_fit(data, pk, opt);
        opt.threads = 8;
        const BootstrapSummary eight = bootstrap_fit(data, pk, opt);
        CHECK(one.edge_probability.v == eight.edge_probability.v);
        CHECK(one.median_direct_effect.v == eight.median_direct_effect.v);
        CHECK(one.total_probability.v == eight.total_probability.v);
        CHECK(one.median_total_effect.v == eight.median_total_effect.v);
        CHECK(one.completed == eight.completed);
    }
    SUBCASE("repeated calls are bit-identical") {
        BootstrapOptions opt;
        opt.count = 40;
        opt.seed = 3;
        const BootstrapSummary a = bootstrap_fit(data, pk, opt);
        const BootstrapSummary b = bootstrap_fit(data, pk, opt);
        CHECK(a.edge_probability.v == b.edge_probability.v);
        CHECK(a.median_total_effect.v == b.median_total_effect.v);
    }
}

TEST_CASE("bootstrap failure accounting") {
    // A column that is constant except for one row: resamples missing that row
    // have zero variance and must be excluded; at ~37% exclusions the run
    // aborts with the count in the message.
    DataMatrix fragile(std::vector<std::string>{"x", "spike"}, 504);
    rng::Stream s(11);
    for (std::size_t r = 0; r < 504; ++r) {
        fragile.at(r, 0) = s.uniform_sym();
        fragile.at(r, 1) = r == 0 ? 1.0 : 0.0;
    }
    BootstrapOptions opt;
    opt.count = 100;
    opt.seed = 5;
    try {
        bootstrap_fit(fragile, PriorKnowledge::unconstrained(2), opt);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("resamples failed") != std::string::npos);
    }
}

TEST_CASE("prune boundary semantics") {
    BootstrapSummary s;
    s.variables = {"a", "b"};
    s.requested = s.completed = 100;
    s.edge_probability = Mat(2, 2);
    s.median_direct_effect = Mat(2, 2);
    s.total_probability = Mat(2, 2);
    s.median_total_effect = Mat(2, 2);
    s.reference_order = {0, 1};
    s.edge_probability(1, 0) = 0.29;
    s.median_direct_effect(1, 0) = 0.5;
    s.edge_probability(0, 1) = 0.30;
    s.median_direct_effect(0, 1) = -0.4;
    s.total_probability(1, 0) = 0.29;
    s.median_total_effect(1, 0) = 0.5;

    const BootstrapSummary pruned = prune(s, 0.30);
    CHECK(pruned.edge_probability(1, 0) == 0.0);   // 0.29 < 0.30: pruned
    CHECK(pruned.median_direct_effect(1, 0) == 0.0);
    CHECK(pruned.edge_probability(0, 1) == 0.30);  // boundary kept
    CHECK(pruned.median_direct_effect(0, 1) == -0.4);
    CHECK(pruned.median_total_effect(1, 0) == 0.0);

    SUBCASE("threshold zero is the identity") {
        const BootstrapSummary same = prune(s, 0.0);
        CHECK(same.edge_probability.v == s.edge_probability.v);
        CHECK(same.median_direct_effect.v == s.median_direct_effect.v);
    }
    SUBCASE("idempotent at a fixed threshold") {
        const BootstrapSummary twice = prune(prune(s, 0.30), 0.30);
        CHECK(twice.edge_probability.v == pruned.edge_probability.v);
        CHECK(twice.median_direct_effect.v == pruned.median_direct_effect.v);
    }
    SUBCASE("threshold out of range") {
        CHECK_THROWS_AS(prune(s, 1.5), ConfigError);
    }
}

TEST_CASE("median effect model masks non-triangular medians and refits variances") {
    const DataMatrix data = generate(strong_chain(), 504, 21);
    BootstrapOptions opt;
    opt.count = 120;
    opt.seed = 9;
    const BootstrapSummary s = prune(bootstrap_fit(data, PriorKnowledge::unconstrained(3), opt), 0.30);
    const MedianEffectModel mm = median_effect_model(s, data);
    // triangular under the reference order
    std::vector<std::size_t> pos(3);
    for (std::size_t k = 0; k < 3; ++k) pos[mm.model.causal_order[k]] = k;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (pos[j] >= pos[i]) CHECK(mm.model.adjacency(i, j) == 0.0);
    for (double v : mm.model.residual_variances) CHECK(v > 0.0);
}

TEST_CASE("keep_samples retains the per-edge nonzero draws") {
    const DataMatrix data = generate(strong_chain(), 300, 2);
    BootstrapOptions opt;
    opt.count = 50;
    opt.seed = 31;
    opt.keep_samples = true;
    const BootstrapSummary s = bootstrap_fit(data, PriorKnowledge::unconstrained(3), opt);
    const std::size_t cell = 1 * 3 + 0;  // edge x1 -> x2
    REQUIRE(s.direct_samples.size() == 9);
    CHECK(static_cast<double>(s.direct_samples[cell].size()) ==
          doctest::Approx(s.edge_probability(1, 0) * static_cast<double>(s.completed)));
}
