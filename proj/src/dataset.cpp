#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "prob.hpp"

namespace causalkit {

namespace {

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ValidationError("row " + std::to_string(row) + ", column '" + column +
                              "': cannot parse '" + cell + "' as a number");
    }
    return value;
}

int parse_int(const std::string& cell, std::size_t row, const std::string& column) {
    int value = 0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ValidationError("row " + std::to_string(row) + ", column '" + column +
                              "': cannot parse '" + cell + "' as an integer");
    }
    return value;
}

// Accessor for a canonical measure label on a record.
double measure_value(const TrialRecord& r, std::size_t measure_idx) {
    switch (measure_idx) {
        case 0: case 1: case 2: case 3: case 4: case 5:
            return static_cast<double>(r.likert[measure_idx]);
        case 6: return r.cit;
        case 7: return r.ct;
        default: return r.act;
    }
}

std::size_t measure_index(const std::string& label) {
    const std::string u = upper(trim(label));
    const auto& labels = measure_labels();
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == u) return i;
    throw ConfigError("unknown column label '" + label + "'");
}

void check_duplicate_request(std::span<const std::string> columns) {
    std::set<std::string> seen;
    for (const auto& c : columns) {
        if (!seen.insert(upper(trim(c))).second)
            throw ConfigError("duplicate column label '" + c + "' in request");
    }
}

}  // namespace

std::vector<double> DataMatrix::column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
}

std::size_t DataMatrix::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ConfigError("unknown column '" + name + "'");
}

void DataMatrix::validate() const {
    std::set<std::string> seen;
    for (const auto& c : columns)
        if (!seen.insert(c).second) throw ValidationError("duplicate column name '" + c + "'");
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("matrix contains a non-finite entry");
}

std::vector<TrialRecord> load_trials(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::string header_line;
    if (!std::getline(in, header_line)) throw ValidationError("'" + path.string() + "': empty file");
    const std::vector<std::string> header = split_line(header_line, schema.delimiter);

    auto find_col = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ValidationError("'" + path.string() + "': missing column '" + name + "'");
    };

    const std::size_t ci_participant = find_col(schema.participant);
    const std::size_t ci_condition = find_col(schema.condition);
    const std::size_t ci_trial = find_col(schema.trial);
    std::array<std::size_t, 6> ci_likert{};
    for (std::size_t q = 0; q < 6; ++q) ci_likert[q] = find_col(schema.likert[q]);
    const std::size_t ci_cit = find_col(schema.cit);
    const std::size_t ci_ct = find_col(schema.ct);
    const std::size_t ci_act = find_col(schema.act);

    std::vector<TrialRecord> records;
    std::set<std::string> keys;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line, schema.delimiter);
        if (cells.size() != header.size()) {
            throw ValidationError("row " + std::to_string(row) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
        }
        TrialRecord rec;
        rec.participant = cells[ci_participant];
        rec.condition = cells[ci_condition];
        if (rec.participant.empty())
            throw ValidationError("row " + std::to_string(row) + ": empty participant id");
        if (rec.condition.empty())
            throw ValidationError("row " + std::to_string(row) + ": empty condition label");
        rec.trial = parse_int(cells[ci_trial], row, schema.trial);
        if (rec.trial <= 0)
            throw ValidationError("row " + std::to_string(row) + ", column '" + schema.trial +
                                  "': trial index must be positive");
        for (std::size_t q = 0; q < 6; ++q) {
            const int v = parse_int(cells[ci_likert[q]], row, schema.likert[q]);
            if (v < 1 || v > 5) {
                throw ValidationError("row " + std::to_string(row) + ", column '" + schema.likert[q] +
                                      "': Likert score " + std::to_string(v) + " outside 1..5");
            }
            rec.likert[q] = v;
        }
        auto duration = [&](std::size_t ci, const std::string& name) {
            const double v = parse_double(cells[ci], row, name);
            if (!std::isfinite(v) || v <= 0.0) {
                throw ValidationError("row " + std::to_string(row) + ", column '" + name +
                                      "': duration must be finite and strictly positive");
            }
            return v;
        };
        rec.cit = duration(ci_cit, schema.cit);
        rec.ct = duration(ci_ct, schema.ct);
        rec.act = duration(ci_act, schema.act);

        const std::string key = rec.participant + "\x1f" + rec.condition + "\x1f" + std::to_string(rec.trial);
        if (!keys.insert(key).second) {
            throw ValidationError("row " + std::to_string(row) + ": duplicate (participant, condition, trial) key (" +
                                  rec.participant + ", " + rec.condition + ", " + std::to_string(rec.trial) + ")");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string trials_to_csv(std::span<const TrialRecord> records, const CsvSchema& schema) {
    std::ostringstream out;
    const char d = schema.delimiter;
    out << schema.participant << d << schema.condition << d << schema.trial;
    for (const auto& q : schema.likert) out << d << q;
    out << d << schema.cit << d << schema.ct << d << schema.act << "\n";
    out.precision(10);
    for (const auto& r : records) {
        out << r.participant << d << r.condition << d << r.trial;
        for (int v : r.likert) out << d << v;
        out << d << r.cit << d << r.ct << d << r.act << "\n";
    }
    return out.str();
}

DataMatrix to_matrix(std::span<const TrialRecord> records, std::span<const std::string> columns) {
    check_duplicate_request(columns);
    std::vector<std::size_t> idx;
    std::vector<std::string> names;
    for (const auto& c : columns) {
        idx.push_back(measure_index(c));
        names.push_back(measure_labels()[idx.back()]);
    }
    DataMatrix m(names, records.size());
    for (std::size_t r = 0; r < records.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) m.at(r, c) = measure_value(records[r], idx[c]);
    return m;
}

DataMatrix to_matrix_aggregated(std::span<const TrialRecord> records,
                                std::span<const std::string> columns) {
    check_duplicate_request(columns);
    std::vector<std::size_t> idx;
    std::vector<std::string> names;
    for (const auto& c : columns) {
        idx.push_back(measure_index(c));
        names.push_back(measure_labels()[idx.back()]);
    }
    // Group by (participant, condition), conditions in first-appearance order.
    std::vector<std::string> condition_order;
    for (const auto& r : records)
        if (std::find(condition_order.begin(), condition_order.end(), r.condition) == condition_order.end())
            condition_order.push_back(r.condition);
    std::map<std::string, std::map<std::string, std::vector<const TrialRecord*>>> by_participant;
    for (const auto& r : records) by_participant[r.participant][r.condition].push_back(&r);

    std::size_t n_rows = 0;
    for (const auto& [p, conds] : by_participant) n_rows += conds.size();
    DataMatrix m(names, n_rows);
    std::size_t row = 0;
    for (const auto& [p, conds] : by_participant) {
        for (const auto& cond : condition_order) {
            auto it = conds.find(cond);
            if (it == conds.end()) continue;
            for (std::size_t c = 0; c < idx.size(); ++c) {
                double s = 0.0;
                for (const TrialRecord* rec : it->second) s += measure_value(*rec, idx[c]);
                m.at(row, c) = s / static_cast<double>(it->second.size());
            }
            ++row;
        }
    }
    m.rows = row;
    m.values.resize(row * names.size());
    return m;
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

DataMatrix standardize(const DataMatrix& m) {
    if (m.rows < 2) throw NumericError("standardize: need at least 2 observations");
    DataMatrix out = m;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        const std::vector<double> col = m.column(c);
        const double mu = mean_of(col);
        const double sd = sample_std(col);
        if (sd <= 0.0)
            throw NumericError("standardize: column '" + m.columns[c] + "' has zero variance");
        for (std::size_t r = 0; r < m.rows; ++r) out.at(r, c) = (m.at(r, c) - mu) / sd;
    }
    return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<DescriptiveRow> describe(const DataMatrix& m) {
    if (m.rows == 0) throw NumericError("describe: empty matrix");
    std::vector<DescriptiveRow> out;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        std::vector<double> col = m.column(c);
        std::sort(col.begin(), col.end());
        DescriptiveRow row;
        row.column = m.columns[c];
        row.n = m.rows;
        row.mean = mean_of(col);
        row.std_dev = sample_std(col);
        row.single_observation = m.rows == 1;
        row.median = quantile_sorted(col, 0.5);
        row.iqr = quantile_sorted(col, 0.75) - quantile_sorted(col, 0.25);
        row.min = col.front();
        row.max = col.back();
        out.push_back(row);
    }
    return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

SpearmanMatrix spearman_matrix(const DataMatrix& m) {
    const std::size_t p = m.cols();
    if (m.rows < 3) throw NumericError("spearman_matrix: need at least 3 observations");
    const double n = static_cast<double>(m.rows);

    std::vector<std::vector<double>> ranks(p);
    std::vector<bool> constant(p, false);
    for (std::size_t c = 0; c < p; ++c) {
        const std::vector<double> col = m.column(c);
        constant[c] = sample_std(col) == 0.0;
        ranks[c] = average_ranks(col);
    }

    SpearmanMatrix res;
    res.columns = m.columns;
    res.rho = Mat(p, p);
    res.p_value = Mat(p, p);
    res.defined = Mat(p, p, 1.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            if (constant[i] || constant[j]) {
                res.defined(i, j) = res.defined(j, i) = 0.0;
                res.rho(i, j) = res.rho(j, i) = std::numeric_limits<double>::quiet_NaN();
                res.p_value(i, j) = res.p_value(j, i) = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            if (i == j) {
                res.rho(i, i) = 1.0;
                res.p_value(i, i) = 0.0;
                continue;
            }
            // Pearson correlation of the rank vectors.
            const double mi = mean_of(ranks[i]);
            const double mj = mean_of(ranks[j]);
            double sxy = 0.0, sxx = 0.0, syy = 0.0;
            for (std::size_t r = 0; r < m.rows; ++r) {
                const double a = ranks[i][r] - mi;
                const double b = ranks[j][r] - mj;
                sxy += a * b;
                sxx += a * a;
                syy += b * b;
            }
            double rho = sxy / std::sqrt(sxx * syy);
            rho = std::clamp(rho, -1.0, 1.0);
            double pv;
            if (std::abs(rho) >= 1.0) {
                pv = 0.0;
            } else {
                const double t = rho * std::sqrt((n - 2.0) / (1.0 - rho * rho));
                pv = prob::t_two_sided_p(t, n - 2.0);
            }
            res.rho(i, j) = res.rho(j, i) = rho;
            res.p_value(i, j) = res.p_value(j, i) = pv;
        }
    }
    return res;
}

std::vector<VifEntry> vif(const DataMatrix& m) {
    const std::size_t p = m.cols();
    if (p < 2) throw NumericError("vif: need at least 2 columns");
    if (m.rows <= p) throw NumericError("vif: need more observations than columns");

    std::vector<VifEntry> out;
    for (std::size_t target = 0; target < p; ++target) {
        VifEntry entry;
        entry.column = m.columns[target];
        // OLS of the target on the other columns plus an intercept, done on
        // centered data so the intercept drops out.
        const std::vector<double> y_raw = m.column(target);
        const double ymean = mean_of(y_raw);
        std::vector<double> y(m.rows);
        double tss = 0.0;
        for (std::size_t r = 0; r < m.rows; ++r) {
            y[r] = y_raw[r] - ymean;
            tss += y[r] * y[r];
        }
        if (tss == 0.0) {
            // Constant target: regression undefined; report as collinear.
            entry.finite = false;
            entry.value = std::numeric_limits<double>::infinity();
            out.push_back(entry);
            continue;
        }
        // Rank-revealing modified Gram-Schmidt over the centered predictors:
        // dependent predictors are dropped so that collinearity among the
        // *other* columns cannot poison this column's R^2.
        std::vector<std::vector<double>> basis;
        for (std::size_t c = 0; c < p; ++c) {
            if (c == target) continue;
            std::vector<double> col = m.column(c);
            const double mu = mean_of(col);
            for (double& v : col) v -= mu;
            double norm0 = 0.0;
            for (double v : col) norm0 += v * v;
            if (norm0 == 0.0) continue;  // constant predictor carries no information
            for (const auto& q : basis) {
                double dot = 0.0;
                for (std::size_t r = 0; r < m.rows; ++r) dot += q[r] * col[r];
                for (std::size_t r = 0; r < m.rows; ++r) col[r] -= dot * q[r];
            }
            double norm1 = 0.0;
            for (double v : col) norm1 += v * v;
            if (norm1 <= 1e-20 * norm0) continue;  // linearly dependent, drop
            const double inv = 1.0 / std::sqrt(norm1);
            for (double& v : col) v *= inv;
            basis.push_back(std::move(col));
        }
        double fitted_ss = 0.0;
        for (const auto& q : basis) {
            double dot = 0.0;
            for (std::size_t r = 0; r < m.rows; ++r) dot += q[r] * y[r];
            fitted_ss += dot * dot;
        }
        const double r2 = fitted_ss / tss;
        if (r2 >= 1.0 - 1e-12) {
            entry.finite = false;
            entry.value = std::numeric_limits<double>::infinity();
        } else {
            entry.value = 1.0 / (1.0 - r2);
        }
        out.push_back(entry);
    }
    return out;
}

}  // namespace causalkit
