#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "causalkit.h"
#include "dataset.hpp"
#include "synth.hpp"
#include "test_util.hpp"

using nlohmann::json;

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    ck_string_free(s);
    return out;
}

struct MatrixGuard {
    ck_matrix* m = nullptr;
    ~MatrixGuard() { ck_matrix_free(m); }
};

}  // namespace

TEST_CASE("status names and null-argument handling") {
    CHECK(std::string(ck_status_name(CK_OK)) == "ok");
    CHECK(std::string(ck_status_name(CK_ERROR_NUMERIC)) == "numeric_error");
    size_t n = 0;
    CHECK(ck_dataset_trial_count(nullptr, &n) == CK_ERROR_INVALID_ARGUMENT);
    CHECK(std::string(ck_last_error()).size() > 0);
}

TEST_CASE("dataset loading and error mapping") {
    testutil::TempDir dir("capi_dataset");
    const auto records = causalkit::synthetic_trials(2);
    testutil::write_text(dir.path() / "trials.csv", causalkit::trials_to_csv(records));

    ck_dataset* ds = nullptr;
    REQUIRE(ck_dataset_load_csv((dir.path() / "trials.csv").string().c_str(), nullptr, &ds) == CK_OK);
    size_t n = 0;
    CHECK(ck_dataset_trial_count(ds, &n) == CK_OK);
    CHECK(n == 504);

    SUBCASE("missing file maps to io error") {
        ck_dataset* missing = nullptr;
        CHECK(ck_dataset_load_csv((dir.path() / "nope.csv").string().c_str(), nullptr, &missing) ==
              CK_ERROR_IO);
    }
    SUBCASE("bad row maps to validation error") {
        testutil::write_text(dir.path() / "bad.csv",
                             "participant,condition,trial,q1,q2,q3,q4,q5,q6,cit,ct,act\n"
                             "P01,non,1,9,3,3,3,3,3,2.5,1.1,0.9\n");
        ck_dataset* bad = nullptr;
        CHECK(ck_dataset_load_csv((dir.path() / "bad.csv").string().c_str(), nullptr, &bad) ==
              CK_ERROR_VALIDATION);
        CHECK(std::string(ck_last_error()).find("Likert") != std::string::npos);
    }
    SUBCASE("matrix projection and describe report") {
        MatrixGuard m;
        REQUIRE(ck_dataset_matrix(ds, R"({"columns":["Q1","CIT","CT"]})", &m.m) == CK_OK);
        size_t rows = 0, cols = 0;
        CHECK(ck_matrix_dims(m.m, &rows, &cols) == CK_OK);
        CHECK(rows == 504);
        CHECK(cols == 3);
        char* report = nullptr;
        REQUIRE(ck_describe_report(m.m, &report) == CK_OK);
        const json j = json::parse(take(report));
        CHECK(j.at("kind") == "describe");
        CHECK(j.at("descriptives").size() == 3);
        char* text = nullptr;
        REQUIRE(ck_render_text(j.dump().c_str(), &text) == CK_OK);
        const std::string rendered = take(text);
        CHECK(rendered.find("Factor") != std::string::npos);
        CHECK(rendered.find("VIF") != std::string::npos);
    }
    ck_dataset_free(ds);
}

TEST_CASE("matrix JSON round trip and standardization") {
    ck_matrix* m = nullptr;
    REQUIRE(ck_matrix_from_json(R"({"columns":["a","b"],"rows":[[1,4],[2,5],[3,9]]})", &m) == CK_OK);
    char* text = nullptr;
    REQUIRE(ck_matrix_to_json(m, &text) == CK_OK);
    const json j = json::parse(take(text));
    CHECK(j.at("rows").size() == 3);
    ck_matrix* z = nullptr;
    REQUIRE(ck_matrix_standardize(m, &z) == CK_OK);
    char* ztext = nullptr;
    REQUIRE(ck_matrix_to_json(z, &ztext) == CK_OK);
    const json zj = json::parse(take(ztext));
    CHECK(zj.at("rows")[0][0].get<double>() == doctest::Approx(-1.0));
    ck_matrix_free(z);
    ck_matrix_free(m);

    ck_matrix* bad = nullptr;
    CHECK(ck_matrix_from_json("{", &bad) == CK_ERROR_INVALID_ARGUMENT);
    CHECK(ck_matrix_from_json(R"({"columns":["a"],"rows":[[1],[2,3]]})", &bad) == CK_ERROR_VALIDATION);
}

TEST_CASE("prior knowledge creation") {
    ck_prior* pk = nullptr;
    const char* spec = R"({"variables":["Q1","Q2","CIT"],"exogenous":["Q1"],"sinks":["CIT"]})";
    REQUIRE(ck_prior_create(spec, &pk) == CK_OK);
    ck_prior_free(pk);

    ck_prior* bad = nullptr;
    CHECK(ck_prior_create(R"({"variables":["a"],"exogenous":["a"],"sinks":["a"]})", &bad) ==
          CK_ERROR_CONFIG);
    CHECK(ck_prior_create(R"({"variables":["a","b"],"required":[["a","b"],["b","a"]]})", &bad) ==
          CK_ERROR_CONFIG);
}

TEST_CASE("discovery, effects, audit and bootstrap through the C API") {
    ck_matrix* data = nullptr;
    REQUIRE(ck_synth_matrix(31, 504, &data) == CK_OK);
    ck_prior* pk = nullptr;
    const char* spec =
        R"({"variables":["Q1","Q2","Q3","Q4","Q5","Q6","CIT","CT","ACT"],"exogenous":["Q1"],"sinks":["CIT","CT","ACT"]})";
    REQUIRE(ck_prior_create(spec, &pk) == CK_OK);

    ck_model* model = nullptr;
    REQUIRE(ck_model_fit(data, pk, nullptr, &model) == CK_OK);

    char* mj = nullptr;
    REQUIRE(ck_model_to_json(model, &mj) == CK_OK);
    const std::string model_json = take(mj);
    ck_model* back = nullptr;
    REQUIRE(ck_model_from_json(model_json.c_str(), &back) == CK_OK);
    char* mj2 = nullptr;
    REQUIRE(ck_model_to_json(back, &mj2) == CK_OK);
    CHECK(take(mj2) == model_json);
    ck_model_free(back);

    char* dot = nullptr;
    REQUIRE(ck_model_to_dot(model, R"({"sources":["Q1"],"sinks":["CIT","CT","ACT"]})", &dot) == CK_OK);
    const std::string dot_text = take(dot);
    CHECK(dot_text.find("digraph") != std::string::npos);
    CHECK(dot_text.find("\"Q1\"") != std::string::npos);
    CHECK(dot_text.find("->") != std::string::npos);

    char* audit = nullptr;
    REQUIRE(ck_model_residual_audit(model, data, &audit) == CK_OK);
    const json aj = json::parse(take(audit));
    CHECK(aj.at("rows").size() == 9);
    for (const auto& row : aj.at("rows")) CHECK(row.at("p").get<double>() < 0.001);

    char* te = nullptr;
    REQUIRE(ck_model_total_effects(model, &te) == CK_OK);
    const json tj = json::parse(take(te));
    CHECK(tj.at("effects").size() == 9);

    char* fit_row = nullptr;
    REQUIRE(ck_model_fit_indices(model, data, "Causal model", &fit_row) == CK_OK);
    const json fr = json::parse(take(fit_row));
    CHECK(fr.at("label") == "Causal model");
    CHECK(fr.at("cfi").get<double>() > 0.9);

    ck_bootstrap* boot = nullptr;
    REQUIRE(ck_bootstrap_run(data, pk, R"({"count":60,"seed":5})", &boot) == CK_OK);
    ck_bootstrap* pruned = nullptr;
    REQUIRE(ck_bootstrap_prune(boot, 0.30, &pruned) == CK_OK);
    char* bj = nullptr;
    REQUIRE(ck_bootstrap_to_json(pruned, &bj) == CK_OK);
    const std::string boot_json = take(bj);
    ck_bootstrap* boot_back = nullptr;
    REQUIRE(ck_bootstrap_from_json(boot_json.c_str(), &boot_back) == CK_OK);
    char* effects = nullptr;
    REQUIRE(ck_bootstrap_effects_report(boot_back, &effects) == CK_OK);
    const json ej = json::parse(take(effects));
    CHECK(ej.at("kind") == "total_effects");
    for (const auto& cell : ej.at("cells")) {
        CHECK(cell.at("probability").get<double>() >= 0.30);
    }
    char* bdot = nullptr;
    REQUIRE(ck_bootstrap_to_dot(boot_back, 0.30, nullptr, &bdot) == CK_OK);
    CHECK(take(bdot).find("%") != std::string::npos);

    char* boot_fit = nullptr;
    REQUIRE(ck_bootstrap_fit_indices(pruned, data, "Bootstrapped causal model", nullptr, &boot_fit) ==
            CK_OK);
    const json bf = json::parse(take(boot_fit));
    CHECK(bf.at("label") == "Bootstrapped causal model");

    ck_bootstrap_free(boot_back);
    ck_bootstrap_free(pruned);
    ck_bootstrap_free(boot);
    ck_model_free(model);
    ck_prior_free(pk);
    ck_matrix_free(data);
}

TEST_CASE("condition comparison through the C API") {
    testutil::TempDir dir("capi_compare");
    testutil::write_text(dir.path() / "trials.csv",
                         causalkit::trials_to_csv(causalkit::synthetic_trials(6)));
    ck_dataset* ds = nullptr;
    REQUIRE(ck_dataset_load_csv((dir.path() / "trials.csv").string().c_str(), nullptr, &ds) == CK_OK);
    char* report = nullptr;
    REQUIRE(ck_compare_conditions(ds, R"({"factors":["Q1","CIT"]})", &report) == CK_OK);
    const json j = json::parse(take(report));
    CHECK(j.at("factors").size() == 2);
    CHECK(j.at("factors")[0].at("pairs").size() == 6);
    char* text = nullptr;
    REQUIRE(ck_render_text(j.dump().c_str(), &text) == CK_OK);
    CHECK(take(text).find("ddof1") != std::string::npos);
    ck_dataset_free(ds);
}

TEST_CASE("fit-index replay through the C API") {
    char* out = nullptr;
    REQUIRE(ck_fit_indices_from_inputs(30.688, 22, 2214.372, 22, 504, &out) == CK_OK);
    const json j = json::parse(take(out));
    CHECK(std::abs(j.at("cfi").get<double>() - 0.996) < 0.001);
    CHECK(std::abs(j.at("nfi").get<double>() - 0.986) < 0.001);
    CHECK(std::abs(j.at("tli").get<double>() - 0.996) < 0.001);
    CHECK(std::abs(j.at("rmsea").get<double>() - 0.028) < 0.001);

    double f = 0.0;
    REQUIRE(ck_friedman_f_from_w(0.40664, 42, &f) == CK_OK);
    CHECK(f == doctest::Approx(28.098).epsilon(1e-3));

    char* table = nullptr;
    const json rows = json::array({json::parse(R"({"label":"replay","chi_square":30.688,"dof":22,
        "p_chi_square":0.103,"baseline_chi_square":2214.372,"baseline_dof":22,"cfi":0.996,
        "gfi":null,"agfi":null,"nfi":0.986,"tli":0.996,"rmsea":0.028,"n":504})")});
    REQUIRE(ck_fit_table(rows.dump().c_str(), &table) == CK_OK);
    const json tj = json::parse(take(table));
    char* text = nullptr;
    REQUIRE(ck_render_text(tj.dump().c_str(), &text) == CK_OK);
    const std::string rendered = take(text);
    CHECK(rendered.find("RMSEA") != std::string::npos);
    CHECK(rendered.find("Acceptable thresholds") != std::string::npos);
}

TEST_CASE("synthetic CSV generator") {
    char* csv = nullptr;
    REQUIRE(ck_synth_trials_csv(9, &csv) == CK_OK);
    const std::string text = take(csv);
    CHECK(text.find("participant,condition,trial") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 505);  // header + 504 rows
}
