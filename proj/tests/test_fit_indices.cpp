#include <doctest.h>

#include <cmath>

#include "dataset.hpp"
#include "errors.hpp"
#include "fit_indices.hpp"
#include "lingam.hpp"
#include "rng.hpp"
#include "synth.hpp"
#include "test_util.hpp"

using namespace causalkit;

namespace {

CausalModel manual_model(std::vector<std::string> names, const std::vector<std::size_t>& order,
                         const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
                         std::vector<double> psi) {
    CausalModel m;
    m.variables = std::move(names);
    m.causal_order = order;
    m.adjacency = Mat(m.variables.size(), m.variables.size());
    for (const auto& [to, from, w] : edges) m.adjacency(to, from) = w;
    m.residual_variances = std::move(psi);
    return m;
}

}  // namespace

TEST_CASE("implied covariance") {
    SUBCASE("identity for the empty model") {
        const CausalModel m = manual_model({"a", "b"}, {0, 1}, {}, {1.0, 1.0});
        const Mat sigma = implied_covariance(m);
        CHECK(sigma(0, 0) == doctest::Approx(1.0));
        CHECK(sigma(1, 1) == doctest::Approx(1.0));
        CHECK(sigma(0, 1) == doctest::Approx(0.0));
    }
    SUBCASE("two-variable chain, hand computation") {
        const CausalModel m = manual_model({"a", "b"}, {0, 1}, {{1, 0, 0.5}}, {1.0, 0.75});
        const Mat sigma = implied_covariance(m);
        CHECK(sigma(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sigma(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(sigma(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(sigma(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("fitted model tracks the sample covariance") {
        const DataMatrix data = nine_factor_data(8, 5000);
        const auto pk = PriorKnowledge::from_roles(measure_labels(), {"Q1"}, {"CIT", "CT", "ACT"});
        const CausalModel model = fit(data, pk);
        const Mat sigma = implied_covariance(model);
        const Mat s = sample_covariance(standardize(data));
        for (std::size_t i = 0; i < 9; ++i)
            for (std::size_t j = 0; j < 9; ++j) CHECK(std::abs(sigma(i, j) - s(i, j)) < 0.1);
    }
    SUBCASE("negative residual variance is rejected") {
        const CausalModel m = manual_model({"a"}, {0}, {}, {-0.5});
        CHECK_THROWS_AS(implied_covariance(m), NumericError);
    }
}

TEST_CASE("chi-square of the saturated model is zero") {
    const DataMatrix data = nine_factor_data(12, 504);
    FitOptions opt;
    opt.regression = RegressionMode::ols_threshold;
    opt.ols_threshold = 0.0;  // keep every coefficient: saturated recursive model
    const auto pk = PriorKnowledge::unconstrained(9);
    const CausalModel model = fit(data, pk, opt);
    const ChiSquareResult res = chi_square(model, data);
    CHECK(res.chi_square == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(std::abs(res.chi_square) < 1e-6);
    CHECK(res.dof == 45 - (36 + 9));
    CHECK(res.p_value == 1.0);
}

TEST_CASE("dof arithmetic: 14 free edges over 9 variables gives 22") {
    std::vector<std::string> names = measure_labels();
    std::vector<std::size_t> order(9);
    for (std::size_t i = 0; i < 9; ++i) order[i] = i;
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    // 14 lower-triangular cells
    const std::size_t wanted = 14;
    for (std::size_t i = 1; i < 9 && edges.size() < wanted; ++i)
        for (std::size_t j = 0; j < i && edges.size() < wanted; ++j)
            edges.push_back({i, j, 0.1 + 0.01 * static_cast<double>(i + j)});
    const CausalModel model = manual_model(names, order, edges, std::vector<double>(9, 1.0));
    const DataMatrix data = nine_factor_data(13, 504);
    const ChiSquareResult res = chi_square(model, data);
    CHECK(res.free_parameters == 14 + 9);
    CHECK(res.dof == 22);
}

TEST_CASE("chi-square p-values are uniform under the null") {
    // Gaussian fork x2 <- x1 -> x3, structure fixed by path constraints,
    // plain OLS estimation on the raw scale: the classic ML setting, so the
    // statistic is asymptotically chi-square(1) and p is uniform.
    PriorKnowledge pk(3);
    pk.set(0, 1, 0);
    pk.set(0, 2, 0);
    pk.set(1, 2, 0);
    pk.set(2, 1, 0);
    FitOptions opt;
    opt.standardize = false;
    opt.regression = RegressionMode::ols_threshold;
    opt.ols_threshold = 0.0;
    std::vector<double> pvals;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        rng::Stream s(rng::nth_output(31415, seed));
        DataMatrix data(std::vector<std::string>{"x1", "x2", "x3"}, 2000);
        for (std::size_t r = 0; r < 2000; ++r) {
            const double x1 = s.gaussian();
            data.at(r, 0) = x1;
            data.at(r, 1) = 0.8 * x1 + s.gaussian();
            data.at(r, 2) = -0.5 * x1 + s.gaussian();
        }
        const CausalModel model = fit(data, pk, opt);
        const ChiSquareResult res = chi_square(model, data);
        REQUIRE(res.dof == 1);
        pvals.push_back(res.p_value);
    }
    CHECK(testutil::ks_uniform_p(pvals) > 0.01);
}

TEST_CASE("baseline chi-square") {
    SUBCASE("independent columns give a near-zero baseline") {
        GroundTruthModel m;
        m.variables = {"a", "b", "c"};
        m.adjacency = Mat(3, 3);
        m.errors.assign(3, {ErrorKind::uniform, 1.0});
        const DataMatrix data = generate(m, 20000, 3);
        const BaselineResult res = baseline_chi_square(data);
        CHECK(res.chi_square < 15.0);  // chi2(3) scale, no signal
        CHECK(res.dof == 3);
    }
    SUBCASE("grows linearly in N for a correlated pair") {
        const GroundTruthModel truth = [] {
            GroundTruthModel m;
            m.variables = {"x1", "x2"};
            m.adjacency = Mat(2, 2);
            m.adjacency(1, 0) = 0.8;
            m.errors.assign(2, {ErrorKind::uniform, 1.0});
            return m;
        }();
        // same generating process, two sample sizes drawn with one seed
        const DataMatrix big = generate(truth, 40000, 5);
        DataMatrix half(big.columns, 20000);
        for (std::size_t r = 0; r < 20000; ++r)
            for (std::size_t c = 0; c < 2; ++c) half.at(r, c) = big.at(r, c);
        const double c_big = baseline_chi_square(big).chi_square;
        const double c_half = baseline_chi_square(half).chi_square;
        CHECK(c_big / c_half == doctest::Approx(2.0).epsilon(0.1));
    }
    SUBCASE("baseline dominates the fitted model") {
        const DataMatrix data = nine_factor_data(6, 504);
        const auto pk = PriorKnowledge::from_roles(measure_labels(), {"Q1"}, {"CIT", "CT", "ACT"});
        const CausalModel model = fit(data, pk);
        const ChiSquareResult fitted = chi_square(model, data);
        const BaselineResult base = baseline_chi_square(standardize(data));
        CHECK(base.chi_square > fitted.chi_square);
    }
}

TEST_CASE("fit indices replay reference values within 0.001") {
    SUBCASE("row with excess chi-square") {
        const FitIndices fi = fit_indices(30.688, 22, 2214.372, 22, 504);
        CHECK(std::abs(fi.cfi - 0.996) < 0.001);
        CHECK(std::abs(fi.nfi - 0.986) < 0.001);
        CHECK(std::abs(fi.tli - 0.996) < 0.001);
        CHECK(std::abs(fi.rmsea - 0.028) < 0.001);
        CHECK(std::abs(fi.p_chi_square - 0.103) < 0.001);
    }
    SUBCASE("row with chi-square below dof") {
        const FitIndices fi = fit_indices(6.362, 22, 2214.372, 22, 504);
        CHECK(std::abs(fi.cfi - 1.000) < 0.001);
        CHECK(std::abs(fi.nfi - 0.997) < 0.001);
        CHECK(std::abs(fi.tli - 1.007) < 0.001);  // no clamping above 1
        CHECK(fi.rmsea == 0.0);
        CHECK(std::abs(fi.p_chi_square - 0.9995) < 0.001);
    }
}

TEST_CASE("fit index edge cases and properties") {
    SUBCASE("chi-square equal to dof gives RMSEA zero") {
        const FitIndices fi = fit_indices(22.0, 22, 400.0, 36, 504);
        CHECK(fi.rmsea == 0.0);
        CHECK(fi.cfi == doctest::Approx(1.0));
    }
    SUBCASE("RMSEA monotone in chi-square") {
        double last = -1.0;
        for (double chi : {10.0, 22.0, 30.0, 60.0, 200.0}) {
            const FitIndices fi = fit_indices(chi, 22, 2000.0, 36, 504);
            CHECK(fi.rmsea >= last);
            last = fi.rmsea;
        }
    }
    SUBCASE("zero baseline chi-square is rejected (NFI undefined)") {
        CHECK_THROWS_AS(fit_indices(1.0, 2, 0.0, 3, 100), NumericError);
    }
    SUBCASE("baseline ratio of one is rejected (TLI undefined)") {
        CHECK_THROWS_AS(fit_indices(1.0, 2, 3.0, 3, 100), NumericError);
    }
    SUBCASE("nonpositive dof is rejected") {
        CHECK_THROWS_AS(fit_indices(1.0, 0, 3.0, 3, 100), NumericError);
    }
}

TEST_CASE("GFI and AGFI") {
    SUBCASE("GFI is exactly 1 when the model reproduces S") {
        Mat s(2, 2);
        s(0, 0) = 2.0; s(0, 1) = 0.6; s(1, 0) = 0.6; s(1, 1) = 1.5;
        const FitIndices fi = fit_indices(5.0, 2, 100.0, 3, 200, &s, &s);
        REQUIRE(fi.gfi.has_value());
        CHECK(*fi.gfi == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(*fi.agfi == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("mismatch lowers GFI and AGFI tracks the formula") {
        Mat sigma(2, 2);
        sigma(0, 0) = 1.0; sigma(1, 1) = 1.0;
        Mat s(2, 2);
        s(0, 0) = 1.0; s(0, 1) = 0.5; s(1, 0) = 0.5; s(1, 1) = 1.0;
        const FitIndices fi = fit_indices(5.0, 2, 100.0, 3, 200, &sigma, &s);
        REQUIRE(fi.gfi.has_value());
        CHECK(*fi.gfi < 1.0);
        const double expected_agfi = 1.0 - (2.0 * 3.0 / (2.0 * 2.0)) * (1.0 - *fi.gfi);
        CHECK(*fi.agfi == doctest::Approx(expected_agfi).epsilon(1e-12));
    }
}

TEST_CASE("score_model composes the pipeline") {
    const DataMatrix data = nine_factor_data(4, 2000);
    const auto pk = PriorKnowledge::from_roles(measure_labels(), {"Q1"}, {"CIT", "CT", "ACT"});
    const CausalModel model = fit(data, pk);
    const FitIndices fi = score_model(model, data);
    CHECK(fi.cfi > 0.95);   // correct structure at n=2000 fits well
    CHECK(fi.rmsea < 0.07);
    CHECK(fi.gfi.has_value());
    CHECK(*fi.gfi > 0.95);
    CHECK(fi.baseline_dof == 36);
}
