#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace causalkit {

/// One experiment trial in wide format: who, under which condition, which
/// repetition, six Likert answers and three walking durations in seconds.
struct TrialRecord {
    std::string participant;
    std::string condition;
    int trial = 0;
    std::array<int, 6> likert{};  // q1..q6, each in 1..5
    double cit = 0.0;
    double ct = 0.0;
    double act = 0.0;
};

/// Canonical measure labels, in their conventional order.
inline const std::vector<std::string>& measure_labels() {
    static const std::vector<std::string> labels = {"Q1", "Q2", "Q3", "Q4", "Q5",
                                                    "Q6", "CIT", "CT", "ACT"};
    return labels;
}

/// Column-named numeric matrix; the unit of all numeric work.
struct DataMatrix {
    std::vector<std::string> columns;
    std::size_t rows = 0;
    std::vector<double> values;  // row-major, rows x columns.size()

    DataMatrix() = default;
    DataMatrix(std::vector<std::string> cols, std::size_t n)
        : columns(std::move(cols)), rows(n), values(n * columns.size(), 0.0) {}

    std::size_t cols() const { return columns.size(); }
    double& at(std::size_t r, std::size_t c) { return values[r * columns.size() + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * columns.size() + c]; }

    std::vector<double> column(std::size_t c) const;
    /// Index of a named column; throws ConfigError when absent.
    std::size_t column_index(const std::string& name) const;

    /// Rejects non-finite entries and duplicate column names.
    void validate() const;
};

/// Maps logical field names to CSV header names.
struct CsvSchema {
    std::string participant = "participant";
    std::string condition = "condition";
    std::string trial = "trial";
    std::array<std::string, 6> likert = {"q1", "q2", "q3", "q4", "q5", "q6"};
    std::string cit = "cit";
    std::string ct = "ct";
    std::string act = "act";
    char delimiter = ',';
};

/// Parse a delimiter-separated file with a header row into validated trial
/// records. Errors carry the data row number and column name.
std::vector<TrialRecord> load_trials(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Serialize records back to CSV text (header included); used by fixtures.
std::string trials_to_csv(std::span<const TrialRecord> records, const CsvSchema& schema = {});

/// Project records onto the requested measure columns, one row per trial.
/// Column labels are the canonical measure labels (case-insensitive).
DataMatrix to_matrix(std::span<const TrialRecord> records, std::span<const std::string> columns);

/// Same projection, but one row per (participant, condition) cell holding the
/// mean over that participant's trials in that condition.
DataMatrix to_matrix_aggregated(std::span<const TrialRecord> records,
                                std::span<const std::string> columns);

/// Z-score every column (sample std, divisor N-1). Throws NumericError on a
/// zero-variance column, naming it.
DataMatrix standardize(const DataMatrix& m);

struct DescriptiveRow {
    std::string column;
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;  // sample, divisor N-1; 0 when n == 1 (see single_observation)
    double median = 0.0;
    double iqr = 0.0;
    double min = 0.0;
    double max = 0.0;
    bool single_observation = false;
};

/// Per-column descriptive statistics. Quartiles use linear interpolation
/// between closest ranks (h = (N-1)q).
std::vector<DescriptiveRow> describe(const DataMatrix& m);

struct SpearmanMatrix {
    std::vector<std::string> columns;
    Mat rho;
    Mat p_value;
    /// defined(i,j) == 0 marks pairs involving a constant column, for which
    /// rank correlation is undefined.
    Mat defined;
};

/// Spearman rank correlations with average ranks for ties; two-sided p via
/// the t approximation on N-2 degrees of freedom.
SpearmanMatrix spearman_matrix(const DataMatrix& m);

struct VifEntry {
    std::string column;
    double value = 1.0;
    bool finite = true;  // false flags exact collinearity
};

/// Variance inflation factors: VIF_j = 1/(1-R^2_j) from OLS of column j on
/// all other columns plus an intercept.
std::vector<VifEntry> vif(const DataMatrix& m);

/// Average ranks (ties share the mean rank), 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Type-7 quantile (linear interpolation, h = (N-1)q) of already-sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

double mean_of(std::span<const double> v);
double sample_std(std::span<const double> v);

}  // namespace causalkit
