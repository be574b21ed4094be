#include "qmst/export.hpp"

#include <map>
#include <ostream>

#include "qmst/error.hpp"
#include "qmst/format.hpp"

namespace qmst {

namespace {

json number(double v) {
    // JSON has no NaN; missing values are null.
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

void write_diag_cells(std::ostream& out, const Diagnostics& d, std::size_t tracked) {
    if (!d.valid) {
        out << ",nan,nan,nan,,,nan";
        for (std::size_t t = 0; t < tracked; ++t) out << ",nan";
        return;
    }
    out << ',' << format_double(d.lambda1) << ',' << format_double(d.v1sq_max) << ',' << format_double(d.entropy)
        << ',' << d.k_max << ',' << d.k_argmax << ',' << format_double(d.avg_path);
    for (double v : d.tracked_v1sq) out << ',' << format_double(v);
}

}  // namespace

void write_matrix_csv(std::ostream& out, const std::vector<std::string>& labels, const Eigen::MatrixXd& m) {
    if (static_cast<Eigen::Index>(labels.size()) != m.rows() || m.rows() != m.cols()) {
        throw DataError("matrix and label count disagree");
    }
    out << "asset";
    for (const auto& l : labels) out << ',' << l;
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
        out << '\n';
    }
}

json to_json(const QCorrMatrix& c) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < c.values.cols(); ++j) row.push_back(number(c.values(i, j)));
        rows.push_back(row);
    }
    return {{"q", c.q}, {"s", c.scale}, {"assets", c.assets}, {"values", rows}};
}

json to_json(const EigenSummary& e, double q, std::size_t scale) {
    return {{"q", q}, {"s", scale}, {"lambda", numbers(e.eigenvalues)}, {"v1", numbers(e.v1)}, {"entropy", e.entropy}};
}

json tree_to_json(const QMst& t) {
    json edges = json::array();
    for (const auto& e : t.edges) edges.push_back({{"i", e.i}, {"j", e.j}, {"w", number(e.weight)}});
    json j = {{"assets", t.assets}, {"edges", edges}};
    if (!t.sectors.empty()) j["sectors"] = t.sectors;
    return j;
}

QMst tree_from_json(const json& j) {
    try {
        auto labels = j.at("assets").get<std::vector<std::string>>();
        std::vector<TreeEdge> edges;
        for (const auto& e : j.at("edges")) {
            TreeEdge te;
            te.i = e.at("i").get<std::size_t>();
            te.j = e.at("j").get<std::size_t>();
            te.weight = e.contains("w") && e.at("w").is_number() ? e.at("w").get<double>() : 1.0;
            edges.push_back(te);
        }
        QMst t = tree_from_edges(std::move(labels), edges);
        if (j.contains("sectors")) t.sectors = j.at("sectors").get<std::vector<std::string>>();
        return t;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed tree JSON: ") + e.what());
    }
}

void write_tree_dot(std::ostream& out, const QMst& t, const std::string& name) {
    std::map<std::string, int> colour_keys;
    for (const auto& s : t.sectors) colour_keys.emplace(s, static_cast<int>(colour_keys.size()) + 1);
    out << "graph \"" << dot_escape(name) << "\" {\n";
    for (std::size_t i = 0; i < t.assets.size(); ++i) {
        out << "  n" << i << " [label=\"" << dot_escape(t.assets[i]) << '"';
        if (!t.sectors.empty()) {
            out << ", sector=\"" << dot_escape(t.sectors[i]) << "\", colorscheme=set312, color="
                << ((colour_keys[t.sectors[i]] - 1) % 12 + 1);
        }
        out << "];\n";
    }
    for (const auto& e : t.edges) {
        out << "  n" << e.i << " -- n" << e.j << " [weight=\"" << format_double(e.weight) << "\"];\n";
    }
    out << "}\n";
}

void write_diagnostics_table(std::ostream& out, const WindowSeries& ws, std::size_t qi, std::size_t si) {
    const auto& cfg = ws.config;
    const std::size_t slot = cfg.slot(qi, si);
    out << "window,window_end,n_assets,lambda1,v1sq_max,entropy,kmax,kmax_asset,avgL";
    for (const auto& t : cfg.tracked) out << ",v1sq_" << t;
    if (cfg.filter) {
        out << ",lambda1_f,v1sq_max_f,entropy_f,kmax_f,kmax_asset_f,avgL_f";
        for (const auto& t : cfg.tracked) out << ",v1sq_" << t << "_f";
    }
    out << '\n';
    for (const auto& w : ws.windows) {
        out << w.index << ',' << w.end_timestamp << ',' << w.assets.size();
        write_diag_cells(out, w.diag[slot], cfg.tracked.size());
        if (cfg.filter) write_diag_cells(out, w.filtered[slot], cfg.tracked.size());
        out << '\n';
    }
}

void write_distance_table(std::ostream& out, const WindowSeries& ws, std::size_t pi, std::size_t si) {
    const auto& cfg = ws.config;
    const std::size_t ps = cfg.pair_slot(pi, si);
    out << "window,window_end,d_dc0,d_rp1";
    if (cfg.filter) out << ",d_dc0_f,d_rp1_f";
    out << '\n';
    for (const auto& w : ws.windows) {
        out << w.index << ',' << w.end_timestamp << ',' << format_double(w.dist[ps].deltacon0) << ','
            << format_double(w.dist[ps].resistance);
        if (cfg.filter) {
            out << ',' << format_double(w.filtered_dist[ps].deltacon0) << ','
                << format_double(w.filtered_dist[ps].resistance);
        }
        out << '\n';
    }
}

json eigen_series_json(const WindowSeries& ws, std::size_t qi, std::size_t si, bool filtered) {
    const auto& cfg = ws.config;
    const std::size_t slot = cfg.slot(qi, si);
    json arr = json::array();
    for (const auto& w : ws.windows) {
        const auto& d = filtered ? w.filtered[slot] : w.diag[slot];
        json o = {{"window", w.index}, {"window_end", w.end_timestamp}, {"q", cfg.q_values[qi]}, {"s", cfg.scales[si]}};
        if (d.valid) {
            o["lambda"] = numbers(d.eigenvalues);
            o["v1"] = numbers(d.v1);
            o["entropy"] = d.entropy;
            o["assets"] = w.assets;
        } else {
            o["lambda"] = nullptr;
            o["v1"] = nullptr;
            o["entropy"] = nullptr;
        }
        arr.push_back(o);
    }
    return arr;
}

json rolling_config_json(const RollingConfig& cfg) {
    json pairs = json::array();
    for (const auto& p : cfg.q_pairs) pairs.push_back({p.first, p.second});
    return {{"window", cfg.window},   {"step", cfg.step},     {"q", cfg.q_values},
            {"scales", cfg.scales},   {"order", cfg.order},   {"subtract_mean", cfg.subtract_mean},
            {"filter", cfg.filter},   {"pairs", pairs},       {"track", cfg.tracked},
            {"emit_trees", cfg.keep_trees}, {"resistance_sum", "unordered pairs"},
            {"avg_path", "hop count, mean over unordered pairs"}};
}

json window_events_json(const WindowSeries& ws) {
    json arr = json::array();
    for (const auto& w : ws.windows) {
        if (w.dropped.empty() && w.notes.empty()) continue;
        arr.push_back({{"window", w.index}, {"window_end", w.end_timestamp}, {"dropped", w.dropped}, {"notes", w.notes}});
    }
    return arr;
}

}  // namespace qmst
