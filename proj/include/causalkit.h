/*
 * causalkit — C API for the causal-discovery toolkit.
 *
 * Every function returns a ck_status; CK_OK means success. On failure,
 * ck_last_error() returns a thread-local human-readable message. Objects are
 * opaque handles released with their matching _free function. Structured
 * inputs and outputs cross this boundary as JSON text; strings returned
 * through char** are owned by the caller and released with ck_string_free().
 */
#ifndef CAUSALKIT_H
#define CAUSALKIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CK_API __declspec(dllexport)
#else
#define CK_API __attribute__((visibility("default")))
#endif

typedef enum ck_status {
    CK_OK = 0,
    CK_ERROR_INVALID_ARGUMENT = 1, /* null handles, ill-formed JSON arguments */
    CK_ERROR_CONFIG = 2,           /* inconsistent options, labels or constraints */
    CK_ERROR_VALIDATION = 3,       /* input data violates its contract */
    CK_ERROR_NUMERIC = 4,          /* singular / unsatisfiable computation */
    CK_ERROR_IO = 5,               /* filesystem problems */
    CK_ERROR_INTERNAL = 6
} ck_status;

CK_API const char* ck_status_name(ck_status status);

/* Thread-local message describing the most recent failure in this thread. */
CK_API const char* ck_last_error(void);

CK_API void ck_string_free(char* s);

typedef struct ck_dataset ck_dataset;     /* validated trial records */
typedef struct ck_matrix ck_matrix;       /* column-named numeric matrix */
typedef struct ck_prior ck_prior;         /* prior-knowledge constraints */
typedef struct ck_model ck_model;         /* fitted causal model */
typedef struct ck_bootstrap ck_bootstrap; /* bootstrap summary */

/* ------------------------------------------------------------------ data */

/*
 * options_json (all fields optional):
 *   {"delimiter": ",",
 *    "schema": {"participant": "...", "condition": "...", "trial": "...",
 *               "q1": "...", ..., "q6": "...", "cit": "...", "ct": "...", "act": "..."}}
 */
CK_API ck_status ck_dataset_load_csv(const char* path, const char* options_json, ck_dataset** out);
CK_API void ck_dataset_free(ck_dataset* ds);
CK_API ck_status ck_dataset_trial_count(const ck_dataset* ds, size_t* out);

/*
 * options_json:
 *   {"columns": ["Q1", ...],            // default: all nine measures
 *    "aggregate": false}                // true: one row per participant x condition mean
 */
CK_API ck_status ck_dataset_matrix(const ck_dataset* ds, const char* options_json, ck_matrix** out);

CK_API void ck_matrix_free(ck_matrix* m);
CK_API ck_status ck_matrix_dims(const ck_matrix* m, size_t* rows, size_t* cols);
/* {"columns": [...], "rows": [[...], ...]} */
CK_API ck_status ck_matrix_from_json(const char* json, ck_matrix** out);
CK_API ck_status ck_matrix_to_json(const ck_matrix* m, char** out);
CK_API ck_status ck_matrix_standardize(const ck_matrix* m, ck_matrix** out);

/* Descriptives + Spearman + VIF report for a matrix. */
CK_API ck_status ck_describe_report(const ck_matrix* m, char** json_out);

/* ----------------------------------------------------------- discovery */

/*
 * spec_json:
 *   {"variables": ["Q1", ...],
 *    "exogenous": ["Q1"],               // every incoming path forbidden
 *    "sinks": ["CIT", "CT", "ACT"],     // every outgoing path forbidden
 *    "forbid_sink_to_sink": true,
 *    "forbidden": [[effect, cause], ...],  // extra pairwise path constraints
 *    "required":  [[effect, cause], ...]}
 */
CK_API ck_status ck_prior_create(const char* spec_json, ck_prior** out);
CK_API void ck_prior_free(ck_prior* pk);

/*
 * options_json:
 *   {"standardize": true,
 *    "regression": "adaptive_lasso" | "ols",
 *    "ols_threshold": 0.01}
 */
CK_API ck_status ck_model_fit(const ck_matrix* m, const ck_prior* pk, const char* options_json,
                              ck_model** out);
CK_API void ck_model_free(ck_model* model);
CK_API ck_status ck_model_to_json(const ck_model* model, char** out);
CK_API ck_status ck_model_from_json(const char* json, ck_model** out);
/* options_json: {"sources": [...], "sinks": [...]} node highlighting; may be NULL. */
CK_API ck_status ck_model_to_dot(const ck_model* model, const char* options_json, char** out);
/* Shapiro-Wilk on the structural residuals, one row per variable. */
CK_API ck_status ck_model_residual_audit(const ck_model* model, const ck_matrix* m, char** json_out);
/* Total causal effects (I-A)^-1 - I as a matrix JSON. */
CK_API ck_status ck_model_total_effects(const ck_model* model, char** json_out);
/* SEM fit indices of one fitted model against data. */
CK_API ck_status ck_model_fit_indices(const ck_model* model, const ck_matrix* m, const char* label,
                                      char** json_out);

/* ----------------------------------------------------------- bootstrap */

/*
 * options_json:
 *   {"count": 5000, "seed": 0, "threads": 0, "keep_samples": false,
 *    "standardize": true, "regression": "adaptive_lasso", "ols_threshold": 0.01}
 */
CK_API ck_status ck_bootstrap_run(const ck_matrix* m, const ck_prior* pk, const char* options_json,
                                  ck_bootstrap** out);
CK_API void ck_bootstrap_free(ck_bootstrap* s);
CK_API ck_status ck_bootstrap_prune(const ck_bootstrap* s, double threshold, ck_bootstrap** out);
CK_API ck_status ck_bootstrap_to_json(const ck_bootstrap* s, char** out);
CK_API ck_status ck_bootstrap_from_json(const char* json, ck_bootstrap** out);
CK_API ck_status ck_bootstrap_to_dot(const ck_bootstrap* s, double threshold, const char* options_json,
                                     char** out);
/* Cause -> effect grid of median total effects and probabilities. */
CK_API ck_status ck_bootstrap_effects_report(const ck_bootstrap* s, char** json_out);
/* Median-direct-effect model scored against the data: a "fit" report row. */
CK_API ck_status ck_bootstrap_fit_indices(const ck_bootstrap* s, const ck_matrix* m, const char* label,
                                          const char* options_json, char** json_out);

/* ----------------------------------------------------------- statistics */

/* Friedman + Wilcoxon/BH/CLES battery.
 * options_json:
 *   {"factors": ["Q1", ...],            // default: all nine measures
 *    "condition_order": ["non", ...],   // default: first appearance
 *    "raw_trials": false,
 *    "fdr_scope": "per_factor"}         // or "global": one BH family over all factors
 */
CK_API ck_status ck_compare_conditions(const ck_dataset* ds, const char* options_json, char** json_out);

/* Replay entry point: indices from an explicit chi-square pair. */
CK_API ck_status ck_fit_indices_from_inputs(double chi_square, int dof, double baseline_chi_square,
                                            int baseline_dof, size_t n, char** json_out);

/* F approximation of the Friedman test from Kendall's W. */
CK_API ck_status ck_friedman_f_from_w(double w, size_t n, double* f_out);

/* Combine per-model fit rows (JSON array of row objects) into one report. */
CK_API ck_status ck_fit_table(const char* rows_json, char** json_out);

/* ----------------------------------------------------------- rendering */

/* Aligned-text rendering of any report JSON produced by this library. */
CK_API ck_status ck_render_text(const char* report_json, char** text_out);

/* ----------------------------------------------------------- synthetic */

/* Synthetic 42x4x3 demo study as CSV text (see synth module). */
CK_API ck_status ck_synth_trials_csv(uint64_t seed, char** csv_out);
/* Data drawn from the built-in nine-variable ground-truth model. */
CK_API ck_status ck_synth_matrix(uint64_t seed, size_t n, ck_matrix** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CAUSALKIT_H */
