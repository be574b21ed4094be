#include "qmst/rolling.hpp"

#include <algorithm>
#include <cmath>

#include "qmst/error.hpp"
#include "qmst/format.hpp"
#include "qmst/parallel.hpp"
#include "qmst/rhoq.hpp"
#include "qmst/spectra.hpp"

namespace qmst {

void RollingConfig::validate(std::size_t length) const {
    if (step < 1) throw ConfigError("step must be >= 1");
    if (scales.empty()) throw ConfigError("no scales configured");
    std::size_t smax = *std::max_element(scales.begin(), scales.end());
    if (window < 4 * smax) {
        throw ConfigError("window " + std::to_string(window) + " shorter than 4 x largest scale " + std::to_string(smax));
    }
    if (window > length) {
        throw ConfigError("window " + std::to_string(window) + " longer than the " + std::to_string(length) +
                          " available returns");
    }
    detrend().validate(window);
    for (const auto& p : q_pairs) {
        q_index(p.first);
        q_index(p.second);
    }
}

DetrendConfig RollingConfig::detrend() const {
    DetrendConfig d;
    d.order = order;
    d.q_values = q_values;
    d.scales = scales;
    d.subtract_mean = subtract_mean;
    return d;
}

std::size_t RollingConfig::q_index(double q) const {
    for (std::size_t i = 0; i < q_values.size(); ++i) {
        if (q_values[i] == q) return i;
    }
    throw ConfigError("q = " + format_double(q) + " used in a q-pair but not among the configured q values");
}

std::size_t window_count(std::size_t length, std::size_t window, std::size_t step) {
    if (window == 0 || step == 0 || length < window) return 0;
    return (length - window) / step + 1;
}

std::vector<WindowBounds> window_plan(std::size_t length, std::size_t window, std::size_t step) {
    std::vector<WindowBounds> plan(window_count(length, window, step));
    for (std::size_t k = 0; k < plan.size(); ++k) plan[k] = {k * step, window};
    return plan;
}

namespace {

Diagnostics summarize(const QCorrMatrix& c, const RollingConfig& cfg, QMst& tree_out) {
    Diagnostics d;
    EigenSummary eig = eigen_summary(c);
    d.lambda1 = eig.lambda1();
    d.v1sq_max = eig.v1_squared_max();
    d.entropy = eig.entropy;
    d.eigenvalues = eig.eigenvalues;
    d.v1 = eig.v1;
    d.tracked_v1sq.assign(cfg.tracked.size(), kMissing);
    for (std::size_t t = 0; t < cfg.tracked.size(); ++t) {
        auto it = std::find(c.assets.begin(), c.assets.end(), cfg.tracked[t]);
        if (it != c.assets.end()) d.tracked_v1sq[t] = eig.v1_squared[static_cast<std::size_t>(it - c.assets.begin())];
    }
    tree_out = build_mst(to_distance(c));
    TreeMetrics m = tree_metrics(tree_out);
    d.k_max = m.k_max;
    d.k_argmax = m.k_argmax;
    d.avg_path = m.avg_path_length;
    d.valid = true;
    return d;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& drop) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::find(drop.begin(), drop.end(), i) == drop.end()) keep.push_back(i);
    }
    return keep;
}

PairDistances compare(const QMst& a, const QMst& b) {
    PairDistances d;
    d.deltacon0 = deltacon0(a.adjacency, b.adjacency);
    d.resistance = resistance_distance(a.adjacency, b.adjacency);
    return d;
}

}  // namespace

WindowResult analyze_window(const ReturnPanel& window, const RollingConfig& cfg) {
    const DetrendConfig dc = cfg.detrend();
    const std::size_t nq = cfg.q_values.size();
    const std::size_t ns = cfg.scales.size();
    const std::size_t npairs = cfg.q_pairs.size();

    WindowResult res;
    res.diag.resize(nq * ns);
    res.dist.resize(npairs * ns);
    if (cfg.filter) {
        res.filtered.resize(nq * ns);
        res.filtered_dist.resize(npairs * ns);
    }

    std::vector<std::size_t> drop;
    for (std::size_t s : cfg.scales) {
        for (std::size_t i : degenerate_assets(window, s, dc)) {
            if (std::find(drop.begin(), drop.end(), i) == drop.end()) drop.push_back(i);
        }
    }
    std::sort(drop.begin(), drop.end());
    for (std::size_t i : drop) res.dropped.push_back(window.assets[i]);
    const std::vector<std::size_t> keep = complement(window.num_assets(), drop);
    for (std::size_t i : keep) res.assets.push_back(window.assets[i]);
    if (keep.size() < 2) {
        res.notes.push_back("fewer than 2 non-degenerate assets");
        return res;
    }
    const ReturnPanel panel = drop.empty() ? window : window.select_assets(keep);

    std::vector<QMst> trees(nq * ns);
    std::vector<QMst> ftrees(cfg.filter ? nq * ns : 0);
    for (std::size_t si = 0; si < ns; ++si) {
        const std::size_t s = cfg.scales[si];
        auto mats = corr_matrices(panel, s, cfg.q_values, dc);
        for (std::size_t qi = 0; qi < nq; ++qi) {
            const std::size_t slot = cfg.slot(qi, si);
            res.diag[slot] = summarize(mats[qi], cfg, trees[slot]);
            if (!cfg.filter) continue;
            try {
                ResidualPanel resid = filter_market_factor(panel, res.diag[slot].v1);
                auto bad = degenerate_assets(resid.residuals, s, dc);
                const ReturnPanel* source = &resid.residuals;
                ReturnPanel reduced;
                if (!bad.empty()) {
                    reduced = resid.residuals.select_assets(complement(panel.num_assets(), bad));
                    source = &reduced;
                    std::string names;
                    for (std::size_t i : bad) names += (names.empty() ? "" : " ") + panel.assets[i];
                    res.notes.push_back("filtered q=" + format_double(cfg.q_values[qi]) + " s=" + std::to_string(s) +
                                        ": degenerate residuals dropped: " + names);
                }
                if (source->num_assets() < 2) throw DegenerateError("fewer than 2 non-degenerate residual series");
                res.filtered[slot] = summarize(corr_matrix(*source, cfg.q_values[qi], s, dc), cfg, ftrees[slot]);
            } catch (const DegenerateError& e) {
                res.notes.push_back("filtered q=" + format_double(cfg.q_values[qi]) + " s=" + std::to_string(s) + ": " +
                                    e.what());
            }
        }
    }

    for (std::size_t pi = 0; pi < npairs; ++pi) {
        const std::size_t qa = cfg.q_index(cfg.q_pairs[pi].first);
        const std::size_t qb = cfg.q_index(cfg.q_pairs[pi].second);
        for (std::size_t si = 0; si < ns; ++si) {
            const std::size_t ps = cfg.pair_slot(pi, si);
            res.dist[ps] = compare(trees[cfg.slot(qa, si)], trees[cfg.slot(qb, si)]);
            if (!cfg.filter) continue;
            const auto& fa = ftrees[cfg.slot(qa, si)];
            const auto& fb = ftrees[cfg.slot(qb, si)];
            if (res.filtered[cfg.slot(qa, si)].valid && res.filtered[cfg.slot(qb, si)].valid && fa.assets == fb.assets) {
                res.filtered_dist[ps] = compare(fa, fb);
            }
        }
    }
    if (cfg.keep_trees) {
        res.trees = std::move(trees);
        res.filtered_trees = std::move(ftrees);
    }
    return res;
}

WindowSeries run_rolling(const ReturnPanel& panel, const RollingConfig& cfg) {
    panel.validate();
    cfg.validate(panel.length());
    const auto plan = window_plan(panel.length(), cfg.window, cfg.step);
    if (plan.empty()) throw ConfigError("panel too short for a single window");

    WindowSeries ws;
    ws.config = cfg;
    ws.windows.resize(plan.size());
    auto run_one = [&](std::size_t k) {
        ReturnPanel w = slice_window(panel, plan[k].start, plan[k].length);
        WindowResult r = analyze_window(w, cfg);
        r.index = k;
        r.start = plan[k].start;
        r.end_timestamp = w.timestamps.back();
        ws.windows[k] = std::move(r);
    };
    // Window-level parallelism when there are enough windows to fill the
    // team; otherwise the pair loops inside each window run in parallel.
    if (plan.size() >= static_cast<std::size_t>(max_threads()) && max_threads() > 1) {
        parallel_for(plan.size(), run_one);
    } else {
        for (std::size_t k = 0; k < plan.size(); ++k) run_one(k);
    }
    return ws;
}

std::string to_string(Measure m) {
    switch (m) {
        case Measure::Lambda1: return "lambda1";
        case Measure::V1SquaredMax: return "v1sq_max";
        case Measure::Entropy: return "entropy";
        case Measure::AvgPathLength: return "avgL";
        case Measure::KMax: return "kmax";
        case Measure::DeltaCon0: return "d_dc0";
        case Measure::Resistance: return "d_rp1";
    }
    return "unknown";
}

Measure parse_measure(const std::string& name) {
    for (Measure m : {Measure::Lambda1, Measure::V1SquaredMax, Measure::Entropy, Measure::AvgPathLength, Measure::KMax,
                      Measure::DeltaCon0, Measure::Resistance}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown measure '" + name + "'");
}

std::vector<double> measure_series(const WindowSeries& ws, const MeasureKey& key) {
    const auto& cfg = ws.config;
    if (key.scale_index >= cfg.scales.size()) throw ConfigError("scale index out of range");
    if (key.filtered && !cfg.filter) throw ConfigError("filtered measures requested but filtering was off");
    const bool is_distance = key.measure == Measure::DeltaCon0 || key.measure == Measure::Resistance;
    if (is_distance ? key.index >= cfg.q_pairs.size() : key.index >= cfg.q_values.size()) {
        throw ConfigError("measure index out of range");
    }
    std::vector<double> out;
    out.reserve(ws.windows.size());
    for (const auto& w : ws.windows) {
        if (is_distance) {
            const auto& v = key.filtered ? w.filtered_dist : w.dist;
            const auto ps = cfg.pair_slot(key.index, key.scale_index);
            double x = ps < v.size() ? (key.measure == Measure::DeltaCon0 ? v[ps].deltacon0 : v[ps].resistance)
                                     : kMissing;
            out.push_back(x);
            continue;
        }
        const auto& v = key.filtered ? w.filtered : w.diag;
        const auto slot = cfg.slot(key.index, key.scale_index);
        if (slot >= v.size() || !v[slot].valid) {
            out.push_back(kMissing);
            continue;
        }
        const Diagnostics& d = v[slot];
        switch (key.measure) {
            case Measure::Lambda1: out.push_back(d.lambda1); break;
            case Measure::V1SquaredMax: out.push_back(d.v1sq_max); break;
            case Measure::Entropy: out.push_back(d.entropy); break;
            case Measure::AvgPathLength: out.push_back(d.avg_path); break;
            case Measure::KMax: out.push_back(static_cast<double>(d.k_max)); break;
            default: out.push_back(kMissing); break;
        }
    }
    return out;
}

std::vector<double> measure_acf(std::span<const double> x, std::size_t max_lag) {
    const std::size_t k = x.size();
    if (k < max_lag + 2) {
        throw DataError("autocorrelation needs at least max_lag + 2 = " + std::to_string(max_lag + 2) +
                        " values, got " + std::to_string(k));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw DataError("autocorrelation of a series with missing values");
    }
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(k);
    if (!(var > 0.0)) throw DegenerateError("autocorrelation of a constant series");
    std::vector<double> acf(max_lag + 1);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < k; ++i) acc += (x[i] - mean) * (x[i + lag] - mean);
        acf[lag] = (acc / static_cast<double>(k)) / var;
    }
    return acf;
}

Eigen::MatrixXd pearson_matrix(const std::vector<std::vector<double>>& series) {
    const auto n = static_cast<Eigen::Index>(series.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n, n, kMissing);
    if (series.empty()) return out;
    const std::size_t len = series.front().size();
    if (len < 3) throw DataError("measure correlations need at least 3 windows");
    std::vector<std::vector<double>> centred(series.size());
    std::vector<double> norm(series.size(), 0.0);
    std::vector<char> ok(series.size(), 1);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].size() != len) throw DataError("measure series differ in length");
        double mean = 0.0;
        for (double v : series[i]) {
            if (!std::isfinite(v)) ok[i] = 0;
            mean += v;
        }
        if (!ok[i]) continue;
        mean /= static_cast<double>(len);
        centred[i].resize(len);
        for (std::size_t k = 0; k < len; ++k) {
            centred[i][k] = series[i][k] - mean;
            norm[i] += centred[i][k] * centred[i][k];
        }
        if (!(norm[i] > 0.0)) ok[i] = 0;
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!ok[i]) continue;
        for (std::size_t j = i; j < series.size(); ++j) {
            if (!ok[j]) continue;
            double acc = 0.0;
            for (std::size_t k = 0; k < len; ++k) acc += centred[i][k] * centred[j][k];
            double r = i == j ? 1.0 : std::clamp(acc / std::sqrt(norm[i] * norm[j]), -1.0, 1.0);
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
        }
    }
    return out;
}

Eigen::MatrixXd measure_correlations(const WindowSeries& ws, std::span<const MeasureKey> keys) {
    if (ws.windows.size() < 3) throw DataError("measure correlations need at least 3 windows");
    std::vector<std::vector<double>> series;
    for (const auto& k : keys) series.push_back(measure_series(ws, k));
    return pearson_matrix(series);
}

}  // namespace qmst
