#include "causalkit.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "bootstrap.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "fit_indices.hpp"
#include "lingam.hpp"
#include "report.hpp"
#include "stats.hpp"
#include "synth.hpp"

using nlohmann::json;

struct ck_dataset {
    std::vector<causalkit::TrialRecord> records;
};
struct ck_matrix {
    causalkit::DataMatrix m;
};
struct ck_prior {
    causalkit::PriorKnowledge pk;
    std::vector<std::string> variables;
    std::vector<std::string> exogenous;
    std::vector<std::string> sinks;
};
struct ck_model {
    causalkit::CausalModel model;
};
struct ck_bootstrap {
    causalkit::BootstrapSummary summary;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse_options(const char* options_json) {
    if (options_json == nullptr || *options_json == '\0') return json::object();
    json j = json::parse(options_json);  // throws json::exception on bad input
    if (!j.is_object()) throw causalkit::ConfigError("options JSON must be an object");
    return j;
}

template <typename Fn>
ck_status guarded(Fn&& fn) {
    try {
        fn();
        return CK_OK;
    } catch (const causalkit::ConfigError& e) {
        g_last_error = e.what();
        return CK_ERROR_CONFIG;
    } catch (const causalkit::ValidationError& e) {
        g_last_error = e.what();
        return CK_ERROR_VALIDATION;
    } catch (const causalkit::NumericError& e) {
        g_last_error = e.what();
        return CK_ERROR_NUMERIC;
    } catch (const causalkit::IoError& e) {
        g_last_error = e.what();
        return CK_ERROR_IO;
    } catch (const json::exception& e) {
        g_last_error = std::string("JSON: ") + e.what();
        return CK_ERROR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CK_ERROR_INTERNAL;
    }
}

ck_status require(bool ok, const char* message) {
    if (ok) return CK_OK;
    g_last_error = message;
    return CK_ERROR_INVALID_ARGUMENT;
}

causalkit::FitOptions fit_options_from_json(const json& j) {
    causalkit::FitOptions opt;
    opt.standardize = j.value("standardize", true);
    const std::string reg = j.value("regression", "adaptive_lasso");
    if (reg == "adaptive_lasso") {
        opt.regression = causalkit::RegressionMode::adaptive_lasso;
    } else if (reg == "ols") {
        opt.regression = causalkit::RegressionMode::ols_threshold;
    } else {
        throw causalkit::ConfigError("unknown regression mode '" + reg + "'");
    }
    opt.ols_threshold = j.value("ols_threshold", 0.01);
    if (opt.ols_threshold < 0.0) throw causalkit::ConfigError("ols_threshold must be nonnegative");
    if (j.contains("entropy")) {
        const json& e = j.at("entropy");
        opt.entropy.k1 = e.value("k1", opt.entropy.k1);
        opt.entropy.k2 = e.value("k2", opt.entropy.k2);
        opt.entropy.gamma = e.value("gamma", opt.entropy.gamma);
    }
    return opt;
}

causalkit::DotOptions dot_options_from_json(const char* options_json) {
    causalkit::DotOptions opt;
    const json j = parse_options(options_json);
    if (j.contains("sources")) opt.sources = j.at("sources").get<std::vector<std::string>>();
    if (j.contains("sinks")) opt.sinks = j.at("sinks").get<std::vector<std::string>>();
    return opt;
}

json matrix_to_json_obj(const causalkit::DataMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return json{{"columns", m.columns}, {"rows", rows}};
}

causalkit::DataMatrix matrix_from_json_obj(const json& j) {
    const auto columns = j.at("columns").get<std::vector<std::string>>();
    const auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
    causalkit::DataMatrix m(columns, rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != columns.size())
            throw causalkit::ValidationError("matrix JSON: ragged rows");
        for (std::size_t c = 0; c < columns.size(); ++c) m.at(r, c) = rows[r][c];
    }
    m.validate();
    return m;
}

json fit_indices_to_json(const std::string& label, const causalkit::FitIndices& fi) {
    causalkit::LabeledFit row{label, fi};
    return causalkit::fit_report({row}).at("rows").at(0);
}

}  // namespace

extern "C" {

const char* ck_status_name(ck_status status) {
    switch (status) {
        case CK_OK: return "ok";
        case CK_ERROR_INVALID_ARGUMENT: return "invalid_argument";
        case CK_ERROR_CONFIG: return "config_error";
        case CK_ERROR_VALIDATION: return "validation_error";
        case CK_ERROR_NUMERIC: return "numeric_error";
        case CK_ERROR_IO: return "io_error";
        case CK_ERROR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* ck_last_error(void) { return g_last_error.c_str(); }

void ck_string_free(char* s) { std::free(s); }

ck_status ck_dataset_load_csv(const char* path, const char* options_json, ck_dataset** out) {
    if (ck_status st = require(path && out, "ck_dataset_load_csv: null argument")) return st;
    return guarded([&] {
        const json j = parse_options(options_json);
        causalkit::CsvSchema schema;
        if (j.contains("delimiter")) {
            const std::string d = j.at("delimiter").get<std::string>();
            if (d.size() != 1) throw causalkit::ConfigError("delimiter must be a single character");
            schema.delimiter = d[0];
        }
        if (j.contains("schema")) {
            const json& s = j.at("schema");
            schema.participant = s.value("participant", schema.participant);
            schema.condition = s.value("condition", schema.condition);
            schema.trial = s.value("trial", schema.trial);
            for (std::size_t q = 0; q < 6; ++q) {
                const std::string key = "q" + std::to_string(q + 1);
                schema.likert[q] = s.value(key, schema.likert[q]);
            }
            schema.cit = s.value("cit", schema.cit);
            schema.ct = s.value("ct", schema.ct);
            schema.act = s.value("act", schema.act);
        }
        auto ds = std::make_unique<ck_dataset>();
        ds->records = causalkit::load_trials(path, schema);
        *out = ds.release();
    });
}

void ck_dataset_free(ck_dataset* ds) { delete ds; }

ck_status ck_dataset_trial_count(const ck_dataset* ds, size_t* out) {
    if (ck_status st = require(ds && out, "ck_dataset_trial_count: null argument")) return st;
    *out = ds->records.size();
    return CK_OK;
}

ck_status ck_dataset_matrix(const ck_dataset* ds, const char* options_json, ck_matrix** out) {
    if (ck_status st = require(ds && out, "ck_dataset_matrix: null argument")) return st;
    return guarded([&] {
        const json j = parse_options(options_json);
        std::vector<std::string> columns = causalkit::measure_labels();
        if (j.contains("columns")) columns = j.at("columns").get<std::vector<std::string>>();
        auto m = std::make_unique<ck_matrix>();
        if (j.value("aggregate", false)) {
            m->m = causalkit::to_matrix_aggregated(ds->records, columns);
        } else {
            m->m = causalkit::to_matrix(ds->records, columns);
        }
        *out = m.release();
    });
}

void ck_matrix_free(ck_matrix* m) { delete m; }

ck_status ck_matrix_dims(const ck_matrix* m, size_t* rows, size_t* cols) {
    if (ck_status st = require(m && rows && cols, "ck_matrix_dims: null argument")) return st;
    *rows = m->m.rows;
    *cols = m->m.cols();
    return CK_OK;
}

ck_status ck_matrix_from_json(const char* text, ck_matrix** out) {
    if (ck_status st = require(text && out, "ck_matrix_from_json: null argument")) return st;
    return guarded([&] {
        auto m = std::make_unique<ck_matrix>();
        m->m = matrix_from_json_obj(json::parse(text));
        *out = m.release();
    });
}

ck_status ck_matrix_to_json(const ck_matrix* m, char** out) {
    if (ck_status st = require(m && out, "ck_matrix_to_json: null argument")) return st;
    return guarded([&] { *out = dup_string(matrix_to_json_obj(m->m).dump(2)); });
}

ck_status ck_matrix_standardize(const ck_matrix* m, ck_matrix** out) {
    if (ck_status st = require(m && out, "ck_matrix_standardize: null argument")) return st;
    return guarded([&] {
        auto z = std::make_unique<ck_matrix>();
        z->m = causalkit::standardize(m->m);
        *out = z.release();
    });
}

ck_status ck_describe_report(const ck_matrix* m, char** json_out) {
    if (ck_status st = require(m && json_out, "ck_describe_report: null argument")) return st;
    return guarded([&] { *json_out = dup_string(causalkit::describe_report(m->m).dump(2)); });
}

ck_status ck_prior_create(const char* spec_json, ck_prior** out) {
    if (ck_status st = require(spec_json && out, "ck_prior_create: null argument")) return st;
    return guarded([&] {
        const json j = json::parse(spec_json);
        auto pk = std::make_unique<ck_prior>();
        pk->variables = j.at("variables").get<std::vector<std::string>>();
        if (j.contains("exogenous")) pk->exogenous = j.at("exogenous").get<std::vector<std::string>>();
        if (j.contains("sinks")) pk->sinks = j.at("sinks").get<std::vector<std::string>>();
        pk->pk = causalkit::PriorKnowledge::from_roles(pk->variables, pk->exogenous, pk->sinks,
                                                       j.value("forbid_sink_to_sink", true));
        auto index_of = [&](const std::string& name) {
            for (std::size_t i = 0; i < pk->variables.size(); ++i)
                if (pk->variables[i] == name) return i;
            throw causalkit::ConfigError("unknown variable '" + name + "' in constraint list");
        };
        if (j.contains("forbidden")) {
            for (const auto& pair : j.at("forbidden")) {
                pk->pk.set(index_of(pair.at(0).get<std::string>()), index_of(pair.at(1).get<std::string>()), 0);
            }
        }
        if (j.contains("required")) {
            for (const auto& pair : j.at("required")) {
                pk->pk.set(index_of(pair.at(0).get<std::string>()), index_of(pair.at(1).get<std::string>()), 1);
            }
        }
        pk->pk.validate();
        *out = pk.release();
    });
}

void ck_prior_free(ck_prior* pk) { delete pk; }

ck_status ck_model_fit(const ck_matrix* m, const ck_prior* pk, const char* options_json, ck_model** out) {
    if (ck_status st = require(m && pk && out, "ck_model_fit: null argument")) return st;
    return guarded([&] {
        if (m->m.columns != pk->variables)
            throw causalkit::ConfigError("prior knowledge variables do not match matrix columns");
        const causalkit::FitOptions opt = fit_options_from_json(parse_options(options_json));
        auto model = std::make_unique<ck_model>();
        model->model = causalkit::fit(m->m, pk->pk, opt);
        *out = model.release();
    });
}

void ck_model_free(ck_model* model) { delete model; }

ck_status ck_model_to_json(const ck_model* model, char** out) {
    if (ck_status st = require(model && out, "ck_model_to_json: null argument")) return st;
    return guarded([&] { *out = dup_string(causalkit::model_to_json(model->model).dump(2)); });
}

ck_status ck_model_from_json(const char* text, ck_model** out) {
    if (ck_status st = require(text && out, "ck_model_from_json: null argument")) return st;
    return guarded([&] {
        auto model = std::make_unique<ck_model>();
        model->model = causalkit::model_from_json(json::parse(text));
        *out = model.release();
    });
}

ck_status ck_model_to_dot(const ck_model* model, const char* options_json, char** out) {
    if (ck_status st = require(model && out, "ck_model_to_dot: null argument")) return st;
    return guarded([&] {
        *out = dup_string(causalkit::model_to_dot(model->model, dot_options_from_json(options_json)));
    });
}

ck_status ck_model_residual_audit(const ck_model* model, const ck_matrix* m, char** json_out) {
    if (ck_status st = require(model && m && json_out, "ck_model_residual_audit: null argument")) return st;
    return guarded([&] {
        const auto audit = causalkit::residual_normality_audit(model->model, m->m);
        json rows = json::array();
        for (const auto& row : audit) {
            rows.push_back({{"variable", row.variable}, {"w", row.w}, {"p", row.p_value}});
        }
        *json_out = dup_string(json{{"kind", "residual_audit"}, {"rows", rows}}.dump(2));
    });
}

ck_status ck_model_total_effects(const ck_model* model, char** json_out) {
    if (ck_status st = require(model && json_out, "ck_model_total_effects: null argument")) return st;
    return guarded([&] {
        const causalkit::TotalEffects te = causalkit::total_effects(model->model);
        json rows = json::array();
        for (std::size_t i = 0; i < te.effects.rows; ++i) {
            json row = json::array();
            for (std::size_t c = 0; c < te.effects.cols; ++c) row.push_back(te.effects(i, c));
            rows.push_back(std::move(row));
        }
        *json_out = dup_string(
            json{{"kind", "total_effects_matrix"}, {"variables", te.variables}, {"effects", rows}}.dump(2));
    });
}

ck_status ck_model_fit_indices(const ck_model* model, const ck_matrix* m, const char* label,
                               char** json_out) {
    if (ck_status st = require(model && m && json_out, "ck_model_fit_indices: null argument")) return st;
    return guarded([&] {
        const causalkit::FitIndices fi = causalkit::score_model(model->model, m->m);
        *json_out = dup_string(fit_indices_to_json(label ? label : "model", fi).dump(2));
    });
}

ck_status ck_bootstrap_run(const ck_matrix* m, const ck_prior* pk, const char* options_json,
                           ck_bootstrap** out) {
    if (ck_status st = require(m && pk && out, "ck_bootstrap_run: null argument")) return st;
    return guarded([&] {
        if (m->m.columns != pk->variables)
            throw causalkit::ConfigError("prior knowledge variables do not match matrix columns");
        const json j = parse_options(options_json);
        causalkit::BootstrapOptions opt;
        opt.count = j.value("count", static_cast<std::size_t>(5000));
        opt.seed = j.value("seed", static_cast<std::uint64_t>(0));
        opt.threads = j.value("threads", 0u);
        opt.keep_samples = j.value("keep_samples", false);
        opt.fit = fit_options_from_json(j);
        auto s = std::make_unique<ck_bootstrap>();
        s->summary = causalkit::bootstrap_fit(m->m, pk->pk, opt);
        *out = s.release();
    });
}

void ck_bootstrap_free(ck_bootstrap* s) { delete s; }

ck_status ck_bootstrap_prune(const ck_bootstrap* s, double threshold, ck_bootstrap** out) {
    if (ck_status st = require(s && out, "ck_bootstrap_prune: null argument")) return st;
    return guarded([&] {
        auto pruned = std::make_unique<ck_bootstrap>();
        pruned->summary = causalkit::prune(s->summary, threshold);
        *out = pruned.release();
    });
}

ck_status ck_bootstrap_to_json(const ck_bootstrap* s, char** out) {
    if (ck_status st = require(s && out, "ck_bootstrap_to_json: null argument")) return st;
    return guarded([&] { *out = dup_string(causalkit::bootstrap_to_json(s->summary).dump(2)); });
}

ck_status ck_bootstrap_from_json(const char* text, ck_bootstrap** out) {
    if (ck_status st = require(text && out, "ck_bootstrap_from_json: null argument")) return st;
    return guarded([&] {
        auto s = std::make_unique<ck_bootstrap>();
        s->summary = causalkit::bootstrap_from_json(json::parse(text));
        *out = s.release();
    });
}

ck_status ck_bootstrap_to_dot(const ck_bootstrap* s, double threshold, const char* options_json,
                              char** out) {
    if (ck_status st = require(s && out, "ck_bootstrap_to_dot: null argument")) return st;
    return guarded([&] {
        *out = dup_string(
            causalkit::bootstrap_to_dot(s->summary, threshold, dot_options_from_json(options_json)));
    });
}

ck_status ck_bootstrap_effects_report(const ck_bootstrap* s, char** json_out) {
    if (ck_status st = require(s && json_out, "ck_bootstrap_effects_report: null argument")) return st;
    return guarded([&] { *json_out = dup_string(causalkit::effects_report(s->summary).dump(2)); });
}

ck_status ck_bootstrap_fit_indices(const ck_bootstrap* s, const ck_matrix* m, const char* label,
                                   const char* options_json, char** json_out) {
    if (ck_status st = require(s && m && json_out, "ck_bootstrap_fit_indices: null argument")) return st;
    return guarded([&] {
        const causalkit::FitOptions opt = fit_options_from_json(parse_options(options_json));
        const causalkit::MedianEffectModel mm = causalkit::median_effect_model(s->summary, m->m, opt);
        const causalkit::FitIndices fi = causalkit::score_model(mm.model, m->m);
        json row = fit_indices_to_json(label ? label : "bootstrapped model", fi);
        row["masked_entries"] = mm.masked_entries;
        *json_out = dup_string(row.dump(2));
    });
}

ck_status ck_compare_conditions(const ck_dataset* ds, const char* options_json, char** json_out) {
    if (ck_status st = require(ds && json_out, "ck_compare_conditions: null argument")) return st;
    return guarded([&] {
        const json j = parse_options(options_json);
        std::vector<std::string> factors = causalkit::measure_labels();
        if (j.contains("factors")) factors = j.at("factors").get<std::vector<std::string>>();
        std::vector<std::string> condition_order;
        if (j.contains("condition_order")) {
            condition_order = j.at("condition_order").get<std::vector<std::string>>();
        } else {
            for (const auto& r : ds->records) {
                if (std::find(condition_order.begin(), condition_order.end(), r.condition) ==
                    condition_order.end()) {
                    condition_order.push_back(r.condition);
                }
            }
        }
        const bool raw_trials = j.value("raw_trials", false);
        std::vector<causalkit::FactorComparison> comparisons;
        for (const auto& factor : factors) {
            comparisons.push_back(
                causalkit::compare_conditions(ds->records, factor, condition_order, raw_trials));
        }
        const std::string scope = j.value("fdr_scope", "per_factor");
        if (scope == "global") {
            causalkit::apply_global_fdr(comparisons);
        } else if (scope != "per_factor") {
            throw causalkit::ConfigError("fdr_scope must be 'per_factor' or 'global'");
        }
        *json_out = dup_string(causalkit::compare_report(comparisons).dump(2));
    });
}

ck_status ck_fit_indices_from_inputs(double chi_square, int dof, double baseline_chi_square,
                                     int baseline_dof, size_t n, char** json_out) {
    if (ck_status st = require(json_out != nullptr, "ck_fit_indices_from_inputs: null argument")) return st;
    return guarded([&] {
        const causalkit::FitIndices fi =
            causalkit::fit_indices(chi_square, dof, baseline_chi_square, baseline_dof, n);
        *json_out = dup_string(fit_indices_to_json("replay", fi).dump(2));
    });
}

ck_status ck_friedman_f_from_w(double w, size_t n, double* f_out) {
    if (ck_status st = require(f_out != nullptr, "ck_friedman_f_from_w: null argument")) return st;
    return guarded([&] { *f_out = causalkit::friedman_f_from_w(w, n); });
}

ck_status ck_fit_table(const char* rows_json, char** json_out) {
    if (ck_status st = require(rows_json && json_out, "ck_fit_table: null argument")) return st;
    return guarded([&] {
        const json rows = json::parse(rows_json);
        if (!rows.is_array()) throw causalkit::ConfigError("ck_fit_table: expected a JSON array of rows");
        json report;
        report["kind"] = "fit";
        report["rows"] = rows;
        report["thresholds"] = causalkit::fit_report({}).at("thresholds");
        *json_out = dup_string(report.dump(2));
    });
}

ck_status ck_render_text(const char* report_json, char** text_out) {
    if (ck_status st = require(report_json && text_out, "ck_render_text: null argument")) return st;
    return guarded([&] { *text_out = dup_string(causalkit::render_text(json::parse(report_json))); });
}

ck_status ck_synth_trials_csv(uint64_t seed, char** csv_out) {
    if (ck_status st = require(csv_out != nullptr, "ck_synth_trials_csv: null argument")) return st;
    return guarded([&] {
        *csv_out = dup_string(causalkit::trials_to_csv(causalkit::synthetic_trials(seed)));
    });
}

ck_status ck_synth_matrix(uint64_t seed, size_t n, ck_matrix** out) {
    if (ck_status st = require(out != nullptr, "ck_synth_matrix: null argument")) return st;
    return guarded([&] {
        auto m = std::make_unique<ck_matrix>();
        m->m = causalkit::nine_factor_data(seed, n);
        *out = m.release();
    });
}

}  // extern "C"
