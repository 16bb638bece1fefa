#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "dataset.hpp"
#include "synth.hpp"
#include "test_util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
    const fs::path log = fs::temp_directory_path() / "causalkit_cli_out.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + CAUSALKIT_CLI_PATH + " " + args + " > " +
                            log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WEXITSTATUS(raw);
    res.output = testutil::read_text(log);
    return res;
}

/// Study CSV + config shared by the subcommand tests.
struct Workspace {
    testutil::TempDir dir;
    fs::path csv;
    fs::path config;

    explicit Workspace(const std::string& name, std::uint64_t seed = 4, int bootstrap_count = 50)
        : dir("cli_" + name) {
        csv = dir.path() / "trials.csv";
        testutil::write_text(csv, causalkit::trials_to_csv(causalkit::synthetic_trials(seed)));
        config = dir.path() / "config.json";
        const json cfg = {{"input", csv.string()},
                          {"output_dir", (dir.path() / "out").string()},
                          {"seed", 11},
                          {"bootstrap_count", bootstrap_count},
                          {"prune_threshold", 0.30}};
        testutil::write_text(config, cfg.dump(2));
    }

    std::string base_args() const { return "--config " + config.string(); }

    fs::path only_run_dir() const {
        for (const auto& entry : fs::directory_iterator(dir.path() / "out")) {
            if (entry.is_directory()) return entry.path();
        }
        FAIL("no run directory created");
        return {};
    }
};

}  // namespace

TEST_CASE("exit codes distinguish failure classes") {
    Workspace ws("exit_codes");
    SUBCASE("success is zero") {
        CHECK(run_cli("describe " + ws.base_args()).exit_code == 0);
    }
    SUBCASE("missing input file -> io class") {
        CHECK(run_cli("describe --input /nonexistent/trials.csv").exit_code == 5);
    }
    SUBCASE("config validation -> config class") {
        const fs::path bad = ws.dir.path() / "bad_config.json";
        testutil::write_text(bad, R"({"input":"x.csv","exogenous":["Q1"],"sinks":["Q1","CIT"]})");
        CHECK(run_cli("describe --config " + bad.string()).exit_code == 2);
    }
    SUBCASE("data validation -> validation class") {
        const fs::path bad = ws.dir.path() / "bad.csv";
        testutil::write_text(bad,
                             "participant,condition,trial,q1,q2,q3,q4,q5,q6,cit,ct,act\n"
                             "P01,non,1,6,3,3,3,3,3,2.5,1.1,0.9\n");
        const RunResult r = run_cli("describe --input " + bad.string());
        CHECK(r.exit_code == 3);
        CHECK(r.output.find("Likert") != std::string::npos);
    }
    SUBCASE("unknown flag -> config class") {
        CHECK(run_cli("describe --nonsense").exit_code == 2);
    }
    SUBCASE("bad prune threshold -> config class") {
        CHECK(run_cli("bootstrap " + ws.base_args() + " --prune-threshold 1.5").exit_code == 2);
    }
}

TEST_CASE("describe writes matching json and text artifacts") {
    Workspace ws("describe");
    const RunResult r = run_cli("describe " + ws.base_args());
    REQUIRE(r.exit_code == 0);
    const fs::path run = ws.only_run_dir();
    REQUIRE(fs::exists(run / "describe.json"));
    REQUIRE(fs::exists(run / "describe.txt"));
    REQUIRE(fs::exists(run / "config.json"));
    const json j = json::parse(testutil::read_text(run / "describe.json"));
    CHECK(j.at("n") == 504);
    CHECK(j.at("descriptives").size() == 9);
    // the text rendering carries the same mean, rounded to 2 decimals
    const double q1_mean = j.at("descriptives")[0].at("mean").get<double>();
    char expect[32];
    std::snprintf(expect, sizeof expect, "%.2f", q1_mean);
    CHECK(testutil::read_text(run / "describe.txt").find(expect) != std::string::npos);

    // a rerun produces byte-identical artifacts
    const std::string before = testutil::read_text(run / "describe.json");
    REQUIRE(run_cli("describe " + ws.base_args()).exit_code == 0);
    CHECK(testutil::read_text(run / "describe.json") == before);
}

TEST_CASE("discover writes a model and a role-respecting DOT graph") {
    Workspace ws("discover");
    const RunResult r = run_cli("discover " + ws.base_args());
    REQUIRE(r.exit_code == 0);
    const fs::path run = ws.only_run_dir();
    const json model = json::parse(testutil::read_text(run / "model.json"));
    CHECK(model.at("kind") == "causal_model");
    CHECK(model.at("causal_order_names")[0] == "Q1");

    const std::string dot = testutil::read_text(run / "model.dot");
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("-> \"Q1\"") == std::string::npos);  // nothing points into the source
    for (const std::string sink : {"CIT", "CT", "ACT"}) {
        CHECK(dot.find("\"" + sink + "\" ->") == std::string::npos);  // sinks are terminal
    }

    // rerun: byte-identical artifacts
    const std::string before_model = testutil::read_text(run / "model.json");
    const std::string before_dot = testutil::read_text(run / "model.dot");
    REQUIRE(run_cli("discover " + ws.base_args()).exit_code == 0);
    CHECK(testutil::read_text(run / "model.json") == before_model);
    CHECK(testutil::read_text(run / "model.dot") == before_dot);

    SUBCASE("export-dot reproduces the graph from the artifact") {
        const fs::path out = ws.dir.path() / "exported.dot";
        const RunResult e = run_cli("export-dot --artifact " + (run / "model.json").string() +
                                    " --out " + out.string());
        REQUIRE(e.exit_code == 0);
        CHECK(testutil::read_text(out).find("digraph") != std::string::npos);
    }
}

TEST_CASE("bootstrap smoke run prunes below the threshold") {
    Workspace ws("bootstrap");
    const RunResult r = run_cli("bootstrap " + ws.base_args());
    REQUIRE(r.exit_code == 0);
    const fs::path run = ws.only_run_dir();
    const json s = json::parse(testutil::read_text(run / "bootstrap.json"));
    CHECK(s.at("kind") == "bootstrap_summary");
    CHECK(s.at("requested") == 50);
    CHECK(s.at("prune_threshold").get<double>() == doctest::Approx(0.30));
    for (const auto& row : s.at("edge_probability")) {
        for (const auto& cell : row) {
            const double p = cell.get<double>();
            CHECK((p == 0.0 || p >= 0.30));
        }
    }
    CHECK(fs::exists(run / "bootstrap.dot"));

    SUBCASE("effects consumes the bootstrap artifact without recomputation") {
        REQUIRE(run_cli("effects " + ws.base_args()).exit_code == 0);
        const json e = json::parse(testutil::read_text(run / "effects.json"));
        CHECK(e.at("kind") == "total_effects");
        const auto medians = s.at("median_total_effect");
        for (const auto& cell : e.at("cells")) {
            const auto vars = s.at("variables").get<std::vector<std::string>>();
            std::size_t cause = 0, effect = 0;
            for (std::size_t i = 0; i < vars.size(); ++i) {
                if (vars[i] == cell.at("cause").get<std::string>()) cause = i;
                if (vars[i] == cell.at("effect").get<std::string>()) effect = i;
            }
            CHECK(cell.at("median_total_effect").get<double>() ==
                  medians[effect][cause].get<double>());
        }
    }
}

TEST_CASE("effects without a bootstrap artifact fails with the io class") {
    Workspace ws("effects_missing");
    CHECK(run_cli("effects " + ws.base_args()).exit_code == 5);
}

TEST_CASE("THREADS override does not change artifact bytes") {
    Workspace one("threads_one", 4, 40);
    Workspace eight("threads_eight", 4, 40);
    REQUIRE(run_cli("bootstrap " + one.base_args(), "THREADS=1").exit_code == 0);
    REQUIRE(run_cli("bootstrap " + eight.base_args(), "THREADS=8").exit_code == 0);
    const std::string a = testutil::read_text(one.only_run_dir() / "bootstrap.json");
    const std::string b = testutil::read_text(eight.only_run_dir() / "bootstrap.json");
    CHECK(a == b);
}

TEST_CASE("fit replay reproduces the reference index rows") {
    Workspace ws("fit_replay");
    const RunResult r = run_cli(
        "fit " + ws.base_args() +
        " --chi-square 30.688 --dof 22 --baseline-chi-square 2214.372 --baseline-dof 22 --n 504");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(testutil::read_text(ws.only_run_dir() / "fit.json"));
    const auto& row = j.at("rows")[0];
    CHECK(std::abs(row.at("cfi").get<double>() - 0.996) < 0.001);
    CHECK(std::abs(row.at("nfi").get<double>() - 0.986) < 0.001);
    CHECK(std::abs(row.at("tli").get<double>() - 0.996) < 0.001);
    CHECK(std::abs(row.at("rmsea").get<double>() - 0.028) < 0.001);
    CHECK(r.output.find("Acceptable thresholds") != std::string::npos);

    SUBCASE("partial replay flags are rejected") {
        CHECK(run_cli("fit " + ws.base_args() + " --chi-square 30.688").exit_code == 2);
    }
}

TEST_CASE("fit on data produces both model rows") {
    Workspace ws("fit_data", 4, 30);
    const RunResult r = run_cli("fit " + ws.base_args());
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(testutil::read_text(ws.only_run_dir() / "fit.json"));
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("label") == "Causal model");
    CHECK(j.at("rows")[1].at("label") == "Bootstrapped causal model");
    // dof audit: p(p+1)/2 - q
    for (const auto& row : j.at("rows")) {
        CHECK(row.at("dof").get<int>() > 0);
        CHECK(row.at("n").get<int>() == 504);
        const auto& audit = row.at("dof_audit");
        CHECK(audit.at("moments").get<int>() == 45);
        CHECK(audit.at("moments").get<int>() - audit.at("free_parameters").get<int>() ==
              row.at("dof").get<int>());
    }
}

TEST_CASE("compare renders the condition battery") {
    Workspace ws("compare");
    const RunResult r = run_cli("compare " + ws.base_args());
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(testutil::read_text(ws.only_run_dir() / "compare.json"));
    REQUIRE(j.at("factors").size() == 9);
    for (const auto& f : j.at("factors")) {
        CHECK(f.at("pairs").size() == 6);
        CHECK(f.at("friedman").at("ddof1").get<double>() == doctest::Approx(2.952).epsilon(1e-3));
    }
    CHECK(r.output.find("ddof2") != std::string::npos);
    // the synthetic study injects real condition effects on Q1
    CHECK(j.at("factors")[0].at("friedman").at("p").get<double>() < 0.01);
}

TEST_CASE("synth-data writes a loadable study") {
    Workspace ws("synth");
    const fs::path out = ws.dir.path() / "generated.csv";
    REQUIRE(run_cli("synth-data --seed 21 --out " + out.string()).exit_code == 0);
    const auto records = causalkit::load_trials(out);
    CHECK(records.size() == 504);
}
