// causalkit command-line pipeline: describe | discover | bootstrap | effects |
// fit | compare | export-dot (+ synth-data for demo input). Batch only; every
// subcommand reads a config/flags, runs through the C API and writes
// deterministic artifacts into a content-addressed output directory.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalkit.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Exit codes: distinct classes so scripts can distinguish failures.
enum ExitCode {
    kExitOk = 0,
    kExitConfig = 2,      // bad flags/config/constraints
    kExitValidation = 3,  // input data violates its contract
    kExitNumeric = 4,     // singular/unsatisfiable computation
    kExitIo = 5,          // missing/unwritable files
};

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw CliError{code, message}; }

void check(ck_status status) {
    if (status == CK_OK) return;
    const std::string message = std::string(ck_status_name(status)) + ": " + ck_last_error();
    switch (status) {
        case CK_ERROR_CONFIG:
        case CK_ERROR_INVALID_ARGUMENT: fail(kExitConfig, message);
        case CK_ERROR_VALIDATION: fail(kExitValidation, message);
        case CK_ERROR_NUMERIC: fail(kExitNumeric, message);
        case CK_ERROR_IO: fail(kExitIo, message);
        default: fail(kExitNumeric, message);
    }
}

/// Owned string coming back from the C API.
class CkString {
public:
    CkString() = default;
    ~CkString() { ck_string_free(ptr_); }
    CkString(const CkString&) = delete;
    CkString& operator=(const CkString&) = delete;
    char** out() { return &ptr_; }
    std::string str() const { return ptr_ ? ptr_ : ""; }

private:
    char* ptr_ = nullptr;
};

template <typename T, void (*Free)(T*)>
class Handle {
public:
    Handle() = default;
    ~Handle() { reset(); }
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    T** out() {
        reset();
        return &ptr_;
    }
    T* get() const { return ptr_; }
    void reset() {
        if (ptr_) Free(ptr_);
        ptr_ = nullptr;
    }

private:
    T* ptr_ = nullptr;
};

using DatasetHandle = Handle<ck_dataset, ck_dataset_free>;
using MatrixHandle = Handle<ck_matrix, ck_matrix_free>;
using PriorHandle = Handle<ck_prior, ck_prior_free>;
using ModelHandle = Handle<ck_model, ck_model_free>;
using BootstrapHandle = Handle<ck_bootstrap, ck_bootstrap_free>;

struct Config {
    std::string input;
    std::string delimiter = ",";
    json schema = json::object();
    std::vector<std::string> variables = {"Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "CIT", "CT", "ACT"};
    std::vector<std::string> exogenous = {"Q1"};
    std::vector<std::string> sinks = {"CIT", "CT", "ACT"};
    bool forbid_sink_to_sink = true;
    std::vector<std::string> condition_order;  // empty: first appearance
    std::vector<std::string> factors;          // empty: variables
    std::uint64_t bootstrap_count = 5000;
    double prune_threshold = 0.30;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string output_dir = "out";
    std::vector<std::string> formats = {"json", "text"};
    bool standardize = true;
    bool aggregate = false;
    bool raw_trials = false;
    std::string fdr_scope = "per_factor";
    std::string regression = "adaptive_lasso";
    double ols_threshold = 0.01;
};

template <typename T>
void load_field(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

Config load_config(const std::string& path) {
    Config cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) fail(kExitIo, "cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(kExitConfig, "config '" + path + "': " + e.what());
    }
    try {
        load_field(j, "input", cfg.input);
        load_field(j, "delimiter", cfg.delimiter);
        if (j.contains("schema")) cfg.schema = j.at("schema");
        load_field(j, "variables", cfg.variables);
        load_field(j, "exogenous", cfg.exogenous);
        load_field(j, "sinks", cfg.sinks);
        load_field(j, "forbid_sink_to_sink", cfg.forbid_sink_to_sink);
        load_field(j, "condition_order", cfg.condition_order);
        load_field(j, "factors", cfg.factors);
        load_field(j, "bootstrap_count", cfg.bootstrap_count);
        load_field(j, "prune_threshold", cfg.prune_threshold);
        load_field(j, "seed", cfg.seed);
        load_field(j, "threads", cfg.threads);
        load_field(j, "output_dir", cfg.output_dir);
        load_field(j, "formats", cfg.formats);
        load_field(j, "standardize", cfg.standardize);
        load_field(j, "aggregate", cfg.aggregate);
        load_field(j, "raw_trials", cfg.raw_trials);
        load_field(j, "fdr_scope", cfg.fdr_scope);
        load_field(j, "regression", cfg.regression);
        load_field(j, "ols_threshold", cfg.ols_threshold);
    } catch (const json::exception& e) {
        fail(kExitConfig, "config '" + path + "': " + e.what());
    }
    return cfg;
}

void validate_config(const Config& cfg) {
    if (cfg.prune_threshold < 0.0 || cfg.prune_threshold > 1.0)
        fail(kExitConfig, "prune threshold must lie in [0, 1]");
    if (cfg.bootstrap_count < 1) fail(kExitConfig, "bootstrap count must be at least 1");
    for (const auto& e : cfg.exogenous) {
        for (const auto& s : cfg.sinks) {
            if (e == s) fail(kExitConfig, "variable '" + e + "' cannot be both exogenous and a sink");
        }
    }
    if (cfg.delimiter.size() != 1) fail(kExitConfig, "delimiter must be a single character");
    if (cfg.regression != "adaptive_lasso" && cfg.regression != "ols")
        fail(kExitConfig, "regression must be 'adaptive_lasso' or 'ols'");
    if (cfg.fdr_scope != "per_factor" && cfg.fdr_scope != "global")
        fail(kExitConfig, "fdr_scope must be 'per_factor' or 'global'");
}

/// The analysis-relevant subset of the configuration. Artifacts are
/// content-addressed by a hash of this object so that reruns with the same
/// inputs land in the same directory and runs with different inputs cannot
/// mix. Execution-only knobs (threads, formats, output_dir) are excluded.
json analysis_fingerprint(const Config& cfg) {
    return json{{"input", cfg.input},
                {"delimiter", cfg.delimiter},
                {"schema", cfg.schema},
                {"variables", cfg.variables},
                {"exogenous", cfg.exogenous},
                {"sinks", cfg.sinks},
                {"forbid_sink_to_sink", cfg.forbid_sink_to_sink},
                {"condition_order", cfg.condition_order},
                {"factors", cfg.factors},
                {"bootstrap_count", cfg.bootstrap_count},
                {"prune_threshold", cfg.prune_threshold},
                {"seed", cfg.seed},
                {"standardize", cfg.standardize},
                {"aggregate", cfg.aggregate},
                {"raw_trials", cfg.raw_trials},
                {"fdr_scope", cfg.fdr_scope},
                {"regression", cfg.regression},
                {"ols_threshold", cfg.ols_threshold}};
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

fs::path run_directory(const Config& cfg) {
    const std::string hash = fnv1a_hex(analysis_fingerprint(cfg).dump());
    return fs::path(cfg.output_dir) / ("run-" + hash.substr(0, 12));
}

void write_file(const fs::path& path, const std::string& content) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(kExitIo, "cannot write '" + path.string() + "'");
    out << content;
}

bool wants(const Config& cfg, const std::string& format) {
    for (const auto& f : cfg.formats)
        if (f == format) return true;
    return false;
}

/// Writes <name>.json / <name>.txt per the configured formats and echoes the
/// text rendering to stdout.
void emit_report(const Config& cfg, const fs::path& dir, const std::string& name,
                 const std::string& report_json) {
    if (wants(cfg, "json")) write_file(dir / (name + ".json"), report_json);
    CkString text;
    check(ck_render_text(report_json.c_str(), text.out()));
    if (wants(cfg, "text")) write_file(dir / (name + ".txt"), text.str());
    std::cout << text.str();
}

void write_resolved_config(const Config& cfg, const fs::path& dir) {
    write_file(dir / "config.json", analysis_fingerprint(cfg).dump(2) + "\n");
}

json dataset_options(const Config& cfg) {
    return json{{"delimiter", cfg.delimiter}, {"schema", cfg.schema}};
}

void load_dataset(const Config& cfg, DatasetHandle& ds) {
    if (cfg.input.empty()) fail(kExitConfig, "no input file given (use --input or the config)");
    if (!fs::exists(cfg.input)) fail(kExitIo, "input file '" + cfg.input + "' does not exist");
    check(ck_dataset_load_csv(cfg.input.c_str(), dataset_options(cfg).dump().c_str(), ds.out()));
}

void build_matrix(const Config& cfg, const DatasetHandle& ds, MatrixHandle& m) {
    const json opt = {{"columns", cfg.variables}, {"aggregate", cfg.aggregate}};
    check(ck_dataset_matrix(ds.get(), opt.dump().c_str(), m.out()));
}

void build_prior(const Config& cfg, PriorHandle& pk) {
    const json spec = {{"variables", cfg.variables},
                       {"exogenous", cfg.exogenous},
                       {"sinks", cfg.sinks},
                       {"forbid_sink_to_sink", cfg.forbid_sink_to_sink}};
    check(ck_prior_create(spec.dump().c_str(), pk.out()));
}

json fit_options(const Config& cfg) {
    return json{{"standardize", cfg.standardize},
                {"regression", cfg.regression},
                {"ols_threshold", cfg.ols_threshold}};
}

json dot_options(const Config& cfg) {
    return json{{"sources", cfg.exogenous}, {"sinks", cfg.sinks}};
}

void fit_model(const Config& cfg, const MatrixHandle& m, const PriorHandle& pk, ModelHandle& model) {
    check(ck_model_fit(m.get(), pk.get(), fit_options(cfg).dump().c_str(), model.out()));
}

void run_bootstrap(const Config& cfg, const MatrixHandle& m, const PriorHandle& pk,
                   BootstrapHandle& summary) {
    json opt = fit_options(cfg);
    opt["count"] = cfg.bootstrap_count;
    opt["seed"] = cfg.seed;
    opt["threads"] = cfg.threads;
    check(ck_bootstrap_run(m.get(), pk.get(), opt.dump().c_str(), summary.out()));
}

// ------------------------------------------------------------ subcommands

int cmd_describe(const Config& cfg) {
    DatasetHandle ds;
    load_dataset(cfg, ds);
    MatrixHandle m;
    build_matrix(cfg, ds, m);
    CkString report;
    check(ck_describe_report(m.get(), report.out()));
    const fs::path dir = run_directory(cfg);
    write_resolved_config(cfg, dir);
    emit_report(cfg, dir, "describe", report.str());
    return kExitOk;
}

int cmd_discover(const Config& cfg) {
    DatasetHandle ds;
    load_dataset(cfg, ds);
    MatrixHandle m;
    build_matrix(cfg, ds, m);
    PriorHandle pk;
    build_prior(cfg, pk);
    ModelHandle model;
    fit_model(cfg, m, pk, model);

    const fs::path dir = run_directory(cfg);
    write_resolved_config(cfg, dir);
    CkString model_json;
    check(ck_model_to_json(model.get(), model_json.out()));
    write_file(dir / "model.json", model_json.str());
    CkString dot;
    check(ck_model_to_dot(model.get(), dot_options(cfg).dump().c_str(), dot.out()));
    write_file(dir / "model.dot", dot.str());
    CkString audit;
    check(ck_model_residual_audit(model.get(), m.get(), audit.out()));
    write_file(dir / "residual_audit.json", audit.str());
    std::cout << "model: " << (dir / "model.json").string() << "\n"
              << "graph: " << (dir / "model.dot").string() << "\n";
    return kExitOk;
}

int cmd_bootstrap(const Config& cfg) {
    DatasetHandle ds;
    load_dataset(cfg, ds);
    MatrixHandle m;
    build_matrix(cfg, ds, m);
    PriorHandle pk;
    build_prior(cfg, pk);
    BootstrapHandle raw;
    run_bootstrap(cfg, m, pk, raw);
    BootstrapHandle pruned;
    check(ck_bootstrap_prune(raw.get(), cfg.prune_threshold, pruned.out()));

    const fs::path dir = run_directory(cfg);
    write_resolved_config(cfg, dir);
    CkString summary_json;
    check(ck_bootstrap_to_json(pruned.get(), summary_json.out()));
    write_file(dir / "bootstrap.json", summary_json.str());
    CkString dot;
    check(ck_bootstrap_to_dot(pruned.get(), cfg.prune_threshold, dot_options(cfg).dump().c_str(),
                              dot.out()));
    write_file(dir / "bootstrap.dot", dot.str());
    std::cout << "bootstrap summary: " << (dir / "bootstrap.json").string() << "\n"
              << "graph: " << (dir / "bootstrap.dot").string() << "\n";
    return kExitOk;
}

int cmd_effects(const Config& cfg, const std::string& artifact_override) {
    fs::path artifact = artifact_override.empty() ? run_directory(cfg) / "bootstrap.json"
                                                  : fs::path(artifact_override);
    if (!fs::exists(artifact)) {
        fail(kExitIo, "bootstrap artifact '" + artifact.string() +
                          "' not found; run the bootstrap subcommand first");
    }
    std::ifstream in(artifact);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    BootstrapHandle summary;
    check(ck_bootstrap_from_json(text.c_str(), summary.out()));
    CkString report;
    check(ck_bootstrap_effects_report(summary.get(), report.out()));
    const fs::path dir = run_directory(cfg);
    write_resolved_config(cfg, dir);
    emit_report(cfg, dir, "effects", report.str());
    return kExitOk;
}

struct ReplayInputs {
    double chi_square = -1.0;
    int dof = 0;
    double baseline_chi_square = -1.0;
    int baseline_dof = 0;
    std::uint64_t n = 0;
    bool any() const { return chi_square >= 0.0 || baseline_chi_square >= 0.0 || n > 0 || dof > 0; }
    bool given() const { return chi_square >= 0.0 && dof > 0 && baseline_chi_square >= 0.0 && baseline_dof > 0 && n > 0; }
};

int cmd_fit(const Config& cfg, const ReplayInputs& replay) {
    if (replay.any() && !replay.given()) {
        fail(kExitConfig,
             "replay mode needs all of --chi-square, --dof, --baseline-chi-square, --baseline-dof, --n");
    }
    if (replay.given()) {
        // Replay mode: indices straight from a published chi-square pair.
        CkString row;
        check(ck_fit_indices_from_inputs(replay.chi_square, replay.dof, replay.baseline_chi_square,
                                         replay.baseline_dof, replay.n, row.out()));
        const json rows = json::array({json::parse(row.str())});
        CkString report;
        check(ck_fit_table(rows.dump().c_str(), report.out()));
        const fs::path dir = run_directory(cfg);
        write_resolved_config(cfg, dir);
        emit_report(cfg, dir, "fit", report.str());
        return kExitOk;
    }

    DatasetHandle ds;
    load_dataset(cfg, ds);
    MatrixHandle m;
    build_matrix(cfg, ds, m);
    PriorHandle pk;
    build_prior(cfg, pk);
    ModelHandle model;
    fit_model(cfg, m, pk, model);
    CkString model_row;
    check(ck_model_fit_indices(model.get(), m.get(), "Causal model", model_row.out()));

    // Reuse the bootstrap artifact when this configuration already produced
    // one; otherwise run the configured bootstrap.
    const fs::path dir = run_directory(cfg);
    const fs::path artifact = dir / "bootstrap.json";
    BootstrapHandle summary;
    if (fs::exists(artifact)) {
        std::ifstream in(artifact);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        check(ck_bootstrap_from_json(text.c_str(), summary.out()));
    } else {
        BootstrapHandle raw;
        run_bootstrap(cfg, m, pk, raw);
        check(ck_bootstrap_prune(raw.get(), cfg.prune_threshold, summary.out()));
    }
    CkString boot_row;
    check(ck_bootstrap_fit_indices(summary.get(), m.get(), "Bootstrapped causal model",
                                   fit_options(cfg).dump().c_str(), boot_row.out()));

    const json rows = json::array({json::parse(model_row.str()), json::parse(boot_row.str())});
    CkString report;
    check(ck_fit_table(rows.dump().c_str(), report.out()));
    write_resolved_config(cfg, dir);
    emit_report(cfg, dir, "fit", report.str());
    return kExitOk;
}

int cmd_compare(const Config& cfg) {
    DatasetHandle ds;
    load_dataset(cfg, ds);
    json opt;
    opt["factors"] = cfg.factors.empty() ? cfg.variables : cfg.factors;
    if (!cfg.condition_order.empty()) opt["condition_order"] = cfg.condition_order;
    opt["raw_trials"] = cfg.raw_trials;
    opt["fdr_scope"] = cfg.fdr_scope;
    CkString report;
    check(ck_compare_conditions(ds.get(), opt.dump().c_str(), report.out()));
    const fs::path dir = run_directory(cfg);
    write_resolved_config(cfg, dir);
    emit_report(cfg, dir, "compare", report.str());
    return kExitOk;
}

int cmd_export_dot(const Config& cfg, const std::string& artifact_path, const std::string& out_path) {
    if (!fs::exists(artifact_path)) fail(kExitIo, "artifact '" + artifact_path + "' does not exist");
    std::ifstream in(artifact_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(kExitValidation, std::string("artifact: ") + e.what());
    }
    const std::string kind = j.value("kind", "");
    CkString dot;
    if (kind == "causal_model") {
        ModelHandle model;
        check(ck_model_from_json(text.c_str(), model.out()));
        check(ck_model_to_dot(model.get(), dot_options(cfg).dump().c_str(), dot.out()));
    } else if (kind == "bootstrap_summary") {
        BootstrapHandle summary;
        check(ck_bootstrap_from_json(text.c_str(), summary.out()));
        check(ck_bootstrap_to_dot(summary.get(), cfg.prune_threshold, dot_options(cfg).dump().c_str(),
                                  dot.out()));
    } else {
        fail(kExitValidation, "artifact kind '" + kind + "' has no DOT rendering");
    }
    if (out_path.empty()) {
        std::cout << dot.str();
    } else {
        write_file(out_path, dot.str());
        std::cout << "graph: " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_synth_data(const Config& cfg, const std::string& out_path) {
    CkString csv;
    check(ck_synth_trials_csv(cfg.seed, csv.out()));
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        write_file(out_path, csv.str());
        std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causalkit — causal discovery and comparison battery for trial data"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    std::string config_path;
    Config flags;  // flag values layered over the config file
    app.add_option("-c,--config", config_path, "JSON config file");

    // Values present on the command line override the config file.
    std::optional<std::string> input, output_dir, regression;
    std::optional<std::uint64_t> seed, bootstrap_count;
    std::optional<double> prune_threshold;
    std::optional<unsigned> threads;
    std::vector<std::string> formats;
    bool aggregate = false;

    app.add_option("-i,--input", input, "input CSV of trial records");
    app.add_option("--seed", seed, "master seed");
    app.add_option("-B,--bootstrap-count", bootstrap_count, "number of bootstrap resamples");
    app.add_option("--prune-threshold", prune_threshold, "reproducibility threshold in [0,1]");
    app.add_option("-o,--output-dir", output_dir, "artifact directory");
    app.add_option("--format", formats, "output formats (json, text)");
    app.add_option("--regression", regression, "stage-2 regression: adaptive_lasso or ols");
    app.add_option("--threads", threads, "worker threads for the bootstrap (output-invariant)");
    app.add_flag("--aggregate", aggregate, "use participant x condition means instead of raw trials");

    auto* describe = app.add_subcommand("describe", "descriptive statistics, Spearman matrix and VIF");
    auto* discover = app.add_subcommand("discover", "fit the causal model and export JSON + DOT");
    auto* bootstrap = app.add_subcommand("bootstrap", "bootstrap edge/total-effect reliability, pruned");
    auto* effects = app.add_subcommand("effects", "total-effect grid from the bootstrap artifact");
    auto* fit = app.add_subcommand("fit", "SEM fit indices for discovered and bootstrapped models");
    auto* compare = app.add_subcommand("compare", "Friedman + Wilcoxon/BH/CLES condition battery");
    auto* export_dot = app.add_subcommand("export-dot", "render a model/bootstrap artifact as DOT");
    auto* synth = app.add_subcommand("synth-data", "write a synthetic demo study CSV");

    std::string artifact_path, dot_out, synth_out;
    effects->add_option("--artifact", artifact_path, "bootstrap artifact path (default: derived)");
    export_dot->add_option("--artifact", artifact_path, "model or bootstrap artifact JSON")->required();
    export_dot->add_option("--out", dot_out, "output .dot path (default: stdout)");
    synth->add_option("--out", synth_out, "output CSV path (default: stdout)");

    ReplayInputs replay;
    fit->add_option("--chi-square", replay.chi_square, "replay: model chi-square");
    fit->add_option("--dof", replay.dof, "replay: model dof");
    fit->add_option("--baseline-chi-square", replay.baseline_chi_square, "replay: baseline chi-square");
    fit->add_option("--baseline-dof", replay.baseline_dof, "replay: baseline dof");
    fit->add_option("--n", replay.n, "replay: sample size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        Config cfg = load_config(config_path);
        if (input) cfg.input = *input;
        if (seed) cfg.seed = *seed;
        if (bootstrap_count) cfg.bootstrap_count = *bootstrap_count;
        if (prune_threshold) cfg.prune_threshold = *prune_threshold;
        if (output_dir) cfg.output_dir = *output_dir;
        if (!formats.empty()) cfg.formats = formats;
        if (regression) cfg.regression = *regression;
        if (threads) cfg.threads = *threads;
        if (aggregate) cfg.aggregate = true;
        if (const char* env = std::getenv("THREADS")) {
            cfg.threads = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
        }
        validate_config(cfg);

        if (describe->parsed()) return cmd_describe(cfg);
        if (discover->parsed()) return cmd_discover(cfg);
        if (bootstrap->parsed()) return cmd_bootstrap(cfg);
        if (effects->parsed()) return cmd_effects(cfg, artifact_path);
        if (fit->parsed()) return cmd_fit(cfg, replay);
        if (compare->parsed()) return cmd_compare(cfg);
        if (export_dot->parsed()) return cmd_export_dot(cfg, artifact_path, dot_out);
        if (synth->parsed()) return cmd_synth_data(cfg, synth_out);
        fail(kExitConfig, "no subcommand given");
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
