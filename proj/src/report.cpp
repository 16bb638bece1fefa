#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace causalkit {

namespace {

std::vector<std::vector<double>> mat_to_rows(const Mat& m) {
    std::vector<std::vector<double>> rows(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) rows[i].assign(m.row(i).begin(), m.row(i).end());
    return rows;
}

Mat mat_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Mat m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols) throw ValidationError("matrix JSON: ragged rows");
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string format_p(double p) {
    if (std::isnan(p)) return "-";
    if (p < 0.001) return "<.001";
    std::string s = fixed(p, 3);
    if (s.size() > 1 && s[0] == '0') s.erase(0, 1);  // .123 style
    return s;
}

/// Minimal aligned-column writer.
class TextTable {
public:
    void header(std::vector<std::string> cells) { rows_.insert(rows_.begin(), std::move(cells)); }
    void add(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

    std::string str() const {
        std::vector<std::size_t> width;
        for (const auto& row : rows_) {
            if (width.size() < row.size()) width.resize(row.size(), 0);
            for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
        }
        std::ostringstream os;
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            for (std::size_t c = 0; c < rows_[r].size(); ++c) {
                if (c) os << "  ";
                os << std::left << std::setw(static_cast<int>(width[c])) << rows_[r][c];
            }
            os << "\n";
            if (r == 0) {
                std::size_t total = 0;
                for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
                os << std::string(total, '-') << "\n";
            }
        }
        return os.str();
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

std::string quote_dot(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void dot_nodes(std::ostringstream& os, const std::vector<std::string>& variables, const DotOptions& opt) {
    auto contains = [](const std::vector<std::string>& v, const std::string& s) {
        return std::find(v.begin(), v.end(), s) != v.end();
    };
    for (const auto& name : variables) {
        os << "  " << quote_dot(name);
        if (contains(opt.sources, name)) {
            os << " [style=filled, fillcolor=\"#aecbfa\"]";
        } else if (contains(opt.sinks, name)) {
            os << " [style=filled, fillcolor=\"#f4b6b6\"]";
        }
        os << ";\n";
    }
}

std::string render_describe_text(const nlohmann::json& j);
std::string render_fit_text(const nlohmann::json& j);
std::string render_compare_text(const nlohmann::json& j);
std::string render_effects_text(const nlohmann::json& j);

}  // namespace

std::string stars(double p) {
    if (std::isnan(p)) return "";
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

nlohmann::json model_to_json(const CausalModel& model) {
    nlohmann::json j;
    j["kind"] = "causal_model";
    j["variables"] = model.variables;
    j["causal_order"] = model.causal_order;
    nlohmann::json order_names = nlohmann::json::array();
    for (std::size_t idx : model.causal_order) order_names.push_back(model.variables[idx]);
    j["causal_order_names"] = order_names;
    j["adjacency"] = mat_to_rows(model.adjacency);
    j["residual_variances"] = model.residual_variances;
    j["standardized"] = model.standardized;
    return j;
}

CausalModel model_from_json(const nlohmann::json& j) {
    CausalModel m;
    try {
        if (j.value("kind", "") != "causal_model") throw ValidationError("not a causal_model artifact");
        m.variables = j.at("variables").get<std::vector<std::string>>();
        m.causal_order = j.at("causal_order").get<std::vector<std::size_t>>();
        m.adjacency = mat_from_rows(j.at("adjacency").get<std::vector<std::vector<double>>>());
        m.residual_variances = j.at("residual_variances").get<std::vector<double>>();
        m.standardized = j.value("standardized", true);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("causal model JSON: ") + e.what());
    }
    const std::size_t p = m.variables.size();
    if (m.adjacency.rows != p || m.adjacency.cols != p || m.causal_order.size() != p ||
        m.residual_variances.size() != p) {
        throw ValidationError("causal model JSON: inconsistent dimensions");
    }
    return m;
}

nlohmann::json bootstrap_to_json(const BootstrapSummary& s) {
    nlohmann::json j;
    j["kind"] = "bootstrap_summary";
    j["variables"] = s.variables;
    j["requested"] = s.requested;
    j["completed"] = s.completed;
    j["excluded"] = s.excluded;
    j["seed"] = s.seed;
    j["edge_probability"] = mat_to_rows(s.edge_probability);
    j["median_direct_effect"] = mat_to_rows(s.median_direct_effect);
    j["total_probability"] = mat_to_rows(s.total_probability);
    j["median_total_effect"] = mat_to_rows(s.median_total_effect);
    j["reference_order"] = s.reference_order;
    if (s.prune_threshold >= 0.0) {
        j["prune_threshold"] = s.prune_threshold;
    } else {
        j["prune_threshold"] = nullptr;
    }
    return j;
}

BootstrapSummary bootstrap_from_json(const nlohmann::json& j) {
    BootstrapSummary s;
    try {
        if (j.value("kind", "") != "bootstrap_summary") throw ValidationError("not a bootstrap_summary artifact");
        s.variables = j.at("variables").get<std::vector<std::string>>();
        s.requested = j.at("requested").get<std::size_t>();
        s.completed = j.at("completed").get<std::size_t>();
        s.excluded = j.at("excluded").get<std::size_t>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.edge_probability = mat_from_rows(j.at("edge_probability"));
        s.median_direct_effect = mat_from_rows(j.at("median_direct_effect"));
        s.total_probability = mat_from_rows(j.at("total_probability"));
        s.median_total_effect = mat_from_rows(j.at("median_total_effect"));
        s.reference_order = j.at("reference_order").get<std::vector<std::size_t>>();
        if (!j.at("prune_threshold").is_null()) s.prune_threshold = j.at("prune_threshold").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bootstrap JSON: ") + e.what());
    }
    return s;
}

nlohmann::json describe_report(const DataMatrix& m) {
    const std::vector<DescriptiveRow> desc = describe(m);
    const SpearmanMatrix sp = spearman_matrix(m);
    std::vector<VifEntry> inflation;
    if (m.cols() >= 2 && m.rows > m.cols()) inflation = vif(m);

    nlohmann::json j;
    j["kind"] = "describe";
    j["n"] = m.rows;
    j["columns"] = m.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& d : desc) {
        rows.push_back({{"column", d.column},
                        {"n", d.n},
                        {"mean", d.mean},
                        {"std", d.std_dev},
                        {"median", d.median},
                        {"iqr", d.iqr},
                        {"min", d.min},
                        {"max", d.max},
                        {"single_observation", d.single_observation}});
    }
    j["descriptives"] = rows;

    nlohmann::json corr;
    corr["rho"] = mat_to_rows(sp.rho);
    corr["p"] = mat_to_rows(sp.p_value);
    std::vector<std::vector<std::string>> star_rows(m.cols(), std::vector<std::string>(m.cols()));
    for (std::size_t i = 0; i < m.cols(); ++i)
        for (std::size_t k = 0; k < m.cols(); ++k)
            star_rows[i][k] = sp.defined(i, k) != 0.0 && i != k ? stars(sp.p_value(i, k)) : "";
    corr["stars"] = star_rows;
    corr["defined"] = mat_to_rows(sp.defined);
    j["spearman"] = corr;

    nlohmann::json vif_rows = nlohmann::json::array();
    for (const auto& v : inflation) {
        vif_rows.push_back({{"column", v.column},
                            {"vif", v.finite ? nlohmann::json(v.value) : nlohmann::json(nullptr)},
                            {"finite", v.finite}});
    }
    j["vif"] = vif_rows;
    return j;
}

nlohmann::json effects_report(const BootstrapSummary& s) {
    nlohmann::json j;
    j["kind"] = "total_effects";
    j["variables"] = s.variables;
    j["prune_threshold"] = s.prune_threshold >= 0.0 ? nlohmann::json(s.prune_threshold) : nlohmann::json(nullptr);
    nlohmann::json cells = nlohmann::json::array();
    const std::size_t p = s.variables.size();
    for (std::size_t cause = 0; cause < p; ++cause) {
        for (std::size_t effect = 0; effect < p; ++effect) {
            if (cause == effect) continue;
            const double med = s.median_total_effect(effect, cause);
            const double prob = s.total_probability(effect, cause);
            if (med == 0.0 && prob == 0.0) continue;
            cells.push_back({{"cause", s.variables[cause]},
                             {"effect", s.variables[effect]},
                             {"median_total_effect", med},
                             {"probability", prob}});
        }
    }
    j["cells"] = cells;
    j["median_total_effect"] = mat_to_rows(s.median_total_effect);
    j["total_probability"] = mat_to_rows(s.total_probability);
    return j;
}

nlohmann::json fit_report(const std::vector<LabeledFit>& rows) {
    nlohmann::json j;
    j["kind"] = "fit";
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
        const FitIndices& fi = row.indices;
        nlohmann::json r = {{"label", row.label},
                            {"chi_square", fi.chi_square},
                            {"dof", fi.dof},
                            {"p_chi_square", fi.p_chi_square},
                            {"baseline_chi_square", fi.baseline_chi_square},
                            {"baseline_dof", fi.baseline_dof},
                            {"cfi", fi.cfi},
                            {"nfi", fi.nfi},
                            {"tli", fi.tli},
                            {"rmsea", fi.rmsea},
                            {"n", fi.n}};
        r["gfi"] = fi.gfi ? nlohmann::json(*fi.gfi) : nlohmann::json(nullptr);
        r["agfi"] = fi.agfi ? nlohmann::json(*fi.agfi) : nlohmann::json(nullptr);
        if (fi.variables > 0) {
            // dof audit: dof = p(p+1)/2 - q
            r["variables"] = fi.variables;
            r["free_parameters"] = fi.free_parameters;
            r["dof_audit"] = {{"moments", fi.variables * (fi.variables + 1) / 2},
                              {"free_parameters", fi.free_parameters},
                              {"dof", static_cast<long long>(fi.variables * (fi.variables + 1) / 2) -
                                          static_cast<long long>(fi.free_parameters)}};
        }
        out.push_back(r);
    }
    j["rows"] = out;
    j["thresholds"] = {{"p_chi_square", ">.050"}, {"cfi", ">0.950"}, {"gfi", ">0.950"},
                       {"agfi", ">0.950"},        {"nfi", ">0.950"}, {"tli", ">0.950"},
                       {"rmsea", "<0.070"}};
    return j;
}

nlohmann::json compare_report(const std::vector<FactorComparison>& factors) {
    nlohmann::json j;
    j["kind"] = "compare";
    nlohmann::json out = nlohmann::json::array();
    for (const auto& fc : factors) {
        nlohmann::json f;
        f["factor"] = fc.factor;
        f["conditions"] = fc.conditions;
        f["friedman"] = {{"w", fc.friedman.w},
                         {"ddof1", fc.friedman.ddof1},
                         {"ddof2", fc.friedman.ddof2},
                         {"f", fc.friedman.degenerate ? nlohmann::json(nullptr)
                                                      : nlohmann::json(fc.friedman.f)},
                         {"p", fc.friedman.p_value},
                         {"stars", stars(fc.friedman.p_value)},
                         {"degenerate", fc.friedman.degenerate}};
        f["shapiro_p"] = std::isnan(fc.shapiro_p) ? nlohmann::json(nullptr) : nlohmann::json(fc.shapiro_p);
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& p : fc.pairs) {
            pairs.push_back({{"a", p.condition_a},
                             {"b", p.condition_b},
                             {"mean_a", p.mean_a},
                             {"std_a", p.std_a},
                             {"mean_b", p.mean_b},
                             {"std_b", p.std_b},
                             {"w", p.w_statistic},
                             {"p_raw", p.p_raw},
                             {"p_adjusted", p.p_adjusted},
                             {"stars", stars(p.p_adjusted)},
                             {"cles", p.cles}});
        }
        f["pairs"] = pairs;
        out.push_back(f);
    }
    j["factors"] = out;
    return j;
}

namespace {

std::string render_describe_text(const nlohmann::json& j) {
    std::ostringstream os;
    TextTable table;
    const auto columns = j.at("columns").get<std::vector<std::string>>();
    std::vector<std::string> head = {"Factor", "N", "mean", "std", "median", "IQR", "min", "max"};
    for (const auto& c : columns) head.push_back(c);
    head.push_back("VIF");
    table.header(head);

    std::map<std::string, std::string> vif_text;
    for (const auto& v : j.at("vif")) {
        vif_text[v.at("column").get<std::string>()] =
            v.at("finite").get<bool>() ? fixed(v.at("vif").get<double>(), 2) : "inf";
    }

    const auto& rho = j.at("spearman").at("rho");
    const auto& starcells = j.at("spearman").at("stars");
    const auto& defined = j.at("spearman").at("defined");
    const auto& rows = j.at("descriptives");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& d = rows[i];
        std::vector<std::string> cells = {d.at("column").get<std::string>(),
                                          std::to_string(d.at("n").get<std::size_t>()),
                                          fixed(d.at("mean").get<double>(), 2),
                                          fixed(d.at("std").get<double>(), 2),
                                          fixed(d.at("median").get<double>(), 2),
                                          fixed(d.at("iqr").get<double>(), 2),
                                          fixed(d.at("min").get<double>(), 2),
                                          fixed(d.at("max").get<double>(), 2)};
        for (std::size_t k = 0; k < columns.size(); ++k) {
            if (defined[i][k].get<double>() == 0.0) {
                cells.push_back("-");
            } else {
                cells.push_back(fixed(rho[i][k].get<double>(), 2) + starcells[i][k].get<std::string>());
            }
        }
        const std::string col = d.at("column").get<std::string>();
        cells.push_back(vif_text.count(col) ? vif_text[col] : "-");
        table.add(cells);
    }
    os << table.str();
    os << "*: p<.05, **: p<.01, ***: p<.001\n";
    return os.str();
}

std::string render_fit_text(const nlohmann::json& j) {
    TextTable table;
    table.header({"Model", "chi2 (dof)", "p_chi2", "chi2_b (dof_b)", "CFI", "GFI", "AGFI", "NFI", "TLI",
                  "RMSEA"});
    for (const auto& r : j.at("rows")) {
        auto opt = [&](const char* key) {
            return r.at(key).is_null() ? std::string("-") : fixed(r.at(key).get<double>(), 3);
        };
        table.add({r.at("label").get<std::string>(),
                   fixed(r.at("chi_square").get<double>(), 3) + " (" + std::to_string(r.at("dof").get<int>()) + ")",
                   format_p(r.at("p_chi_square").get<double>()),
                   fixed(r.at("baseline_chi_square").get<double>(), 3) + " (" +
                       std::to_string(r.at("baseline_dof").get<int>()) + ")",
                   fixed(r.at("cfi").get<double>(), 3), opt("gfi"), opt("agfi"),
                   fixed(r.at("nfi").get<double>(), 3), fixed(r.at("tli").get<double>(), 3),
                   fixed(r.at("rmsea").get<double>(), 3)});
    }
    const auto& th = j.at("thresholds");
    table.add({"Acceptable thresholds", "-", th.at("p_chi_square").get<std::string>(), "-",
               th.at("cfi").get<std::string>(), th.at("gfi").get<std::string>(),
               th.at("agfi").get<std::string>(), th.at("nfi").get<std::string>(),
               th.at("tli").get<std::string>(), th.at("rmsea").get<std::string>()});
    return table.str();
}

std::string render_compare_text(const nlohmann::json& j) {
    std::ostringstream os;
    {
        TextTable table;
        table.header({"Factor", "W", "ddof1", "ddof2", "F", "p", ""});
        for (const auto& f : j.at("factors")) {
            const auto& fr = f.at("friedman");
            table.add({f.at("factor").get<std::string>(), fixed(fr.at("w").get<double>(), 3),
                       fixed(fr.at("ddof1").get<double>(), 3), fixed(fr.at("ddof2").get<double>(), 3),
                       fr.at("f").is_null() ? "inf" : fixed(fr.at("f").get<double>(), 3),
                       format_p(fr.at("p").get<double>()), fr.at("stars").get<std::string>()});
        }
        os << table.str() << "\n";
    }
    for (const auto& f : j.at("factors")) {
        os << f.at("factor").get<std::string>() << "\n";
        TextTable table;
        table.header({"A", "B", "Mean(A)", "Std(A)", "Mean(B)", "Std(B)", "W", "p-adj", "", "CLES"});
        for (const auto& p : f.at("pairs")) {
            table.add({p.at("a").get<std::string>(), p.at("b").get<std::string>(),
                       fixed(p.at("mean_a").get<double>(), 2), fixed(p.at("std_a").get<double>(), 2),
                       fixed(p.at("mean_b").get<double>(), 2), fixed(p.at("std_b").get<double>(), 2),
                       fixed(p.at("w").get<double>(), 1), format_p(p.at("p_adjusted").get<double>()),
                       p.at("stars").get<std::string>(), fixed(p.at("cles").get<double>(), 3)});
        }
        os << table.str();
    }
    os << "*: p<.05, **: p<.01, ***: p<.001\n";
    return os.str();
}

std::string render_effects_text(const nlohmann::json& j) {
    TextTable table;
    table.header({"Cause", "Effect", "Median total effect", "Probability"});
    for (const auto& c : j.at("cells")) {
        table.add({c.at("cause").get<std::string>(), c.at("effect").get<std::string>(),
                   fixed(c.at("median_total_effect").get<double>(), 3),
                   fixed(100.0 * c.at("probability").get<double>(), 0) + "%"});
    }
    return table.str();
}

std::string render_model_text(const nlohmann::json& j) {
    std::ostringstream os;
    os << "Causal order: ";
    const auto names = j.at("causal_order_names").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < names.size(); ++i) os << (i ? " -> " : "") << names[i];
    os << "\n";
    TextTable table;
    table.header({"Effect", "Cause", "Direct effect"});
    const auto vars = j.at("variables").get<std::vector<std::string>>();
    const auto adj = j.at("adjacency").get<std::vector<std::vector<double>>>();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        for (std::size_t k = 0; k < vars.size(); ++k) {
            if (adj[i][k] != 0.0) table.add({vars[i], vars[k], fixed(adj[i][k], 3)});
        }
    }
    os << table.str();
    return os.str();
}

}  // namespace

std::string render_text(const nlohmann::json& report) {
    const std::string kind = report.value("kind", "");
    if (kind == "describe") return render_describe_text(report);
    if (kind == "fit") return render_fit_text(report);
    if (kind == "compare") return render_compare_text(report);
    if (kind == "total_effects") return render_effects_text(report);
    if (kind == "causal_model") return render_model_text(report);
    throw ConfigError("render_text: unknown report kind '" + kind + "'");
}

std::string model_to_dot(const CausalModel& model, const DotOptions& opt) {
    std::ostringstream os;
    os << "digraph causal_model {\n  rankdir=TB;\n  node [shape=ellipse];\n";
    dot_nodes(os, model.variables, opt);
    const std::size_t p = model.variables.size();
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double a = model.adjacency(i, j);
            if (a == 0.0) continue;
            os << "  " << quote_dot(model.variables[j]) << " -> " << quote_dot(model.variables[i])
               << " [label=" << quote_dot(fixed(a, 2)) << "];\n";
        }
    }
    os << "}\n";
    return os.str();
}

std::string bootstrap_to_dot(const BootstrapSummary& s, double threshold, const DotOptions& opt) {
    std::ostringstream os;
    os << "digraph bootstrapped_causal_model {\n  rankdir=TB;\n  node [shape=ellipse];\n";
    dot_nodes(os, s.variables, opt);
    const std::size_t p = s.variables.size();
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double prob = s.edge_probability(i, j);
            const double med = s.median_direct_effect(i, j);
            if (prob < threshold || med == 0.0) continue;
            os << "  " << quote_dot(s.variables[j]) << " -> " << quote_dot(s.variables[i]) << " [label="
               << quote_dot(fixed(med, 2) + " (" + fixed(100.0 * prob, 0) + "%)") << "];\n";
        }
    }
    os << "}\n";
    return os.str();
}

}  // namespace causalkit
