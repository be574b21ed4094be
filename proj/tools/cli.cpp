#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmst/detrend.hpp"
#include "qmst/error.hpp"
#include "qmst/export.hpp"
#include "qmst/format.hpp"
#include "qmst/graph.hpp"
#include "qmst/panel.hpp"
#include "qmst/parallel.hpp"
#include "qmst/rolling.hpp"
#include "qmst/synth.hpp"

namespace qmst::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Config files: flat INI/TOML `key = value` mirroring the long flags of the
// selected subcommand, or a JSON object (a run manifest's "config" member, or
// a flat object).
class FlatConfig : public CLI::ConfigINI {
public:
    explicit FlatConfig(const CLI::App* root) : root_(root) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const std::string sub = selected();
        auto first = text.find_first_not_of(" \t\r\n");
        std::vector<CLI::ConfigItem> items;
        if (first == std::string::npos || text[first] != '{') {
            std::istringstream ss(text);
            items = CLI::ConfigINI::from_config(ss);
        } else {
            items = from_json(text, sub);
        }
        for (auto& item : items) {
            if (item.parents.empty() && !sub.empty()) item.parents = {sub};
        }
        return items;
    }

private:
    std::string selected() const {
        auto subs = root_->get_subcommands();
        return subs.empty() ? std::string() : subs.front()->get_name();
    }

    static std::vector<CLI::ConfigItem> from_json(const std::string& text, const std::string& sub) {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw CLI::ConversionError(std::string("malformed JSON config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("JSON config must be an object");
        if (j.contains("command") && j.at("command").is_string() && j.at("command").get<std::string>() != sub) {
            throw CLI::ConversionError("config was written by '" + j.at("command").get<std::string>() +
                                       "', not '" + sub + "'");
        }
        const json& obj = j.contains("config") ? j.at("config") : j;
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : obj.items()) {
            CLI::ConfigItem item;
            item.name = key;
            if (value.is_string()) {
                item.inputs = {value.get<std::string>()};
            } else if (value.is_boolean()) {
                item.inputs = {value.get<bool>() ? "true" : "false"};
            } else if (value.is_number_integer()) {
                item.inputs = {std::to_string(value.get<long long>())};
            } else if (value.is_number()) {
                item.inputs = {format_double(value.get<double>())};
            } else {
                throw CLI::ConversionError("config key '" + key + "' must be a scalar");
            }
            items.push_back(std::move(item));
        }
        return items;
    }

    const CLI::App* root_;
};

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) {
        cur.erase(0, cur.find_first_not_of(" \t"));
        cur.erase(cur.find_last_not_of(" \t") + 1);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("malformed number '" + s + "' in " + what);
    }
}

std::size_t to_size(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size() || v < 0) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("malformed integer '" + s + "' in " + what);
    }
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& t : split_list(s)) out.push_back(to_double(t, what));
    if (out.empty()) throw ConfigError(what + " is empty");
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s, const std::string& what) {
    std::vector<std::size_t> out;
    for (const auto& t : split_list(s)) out.push_back(to_size(t, what));
    if (out.empty()) throw ConfigError(what + " is empty");
    return out;
}

std::vector<QPair> parse_pairs(const std::string& s) {
    std::vector<QPair> out;
    for (const auto& t : split_list(s)) {
        auto parts = split_list(t, ':');
        if (parts.size() != 2) throw ConfigError("q-pair '" + t + "' must look like 1:4");
        out.push_back({to_double(parts[0], "--pairs"), to_double(parts[1], "--pairs")});
    }
    return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F fmt, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += fmt(v[i]);
    }
    return out;
}

// Writes into a staging directory and moves the files into the output
// directory only once everything succeeded.
class OutputStage {
public:
    explicit OutputStage(fs::path out) : out_(std::move(out)) {
        if (out_.empty()) throw ConfigError("--out is required");
        staging_ = out_;
        staging_ += ".partial";
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }
    OutputStage(const OutputStage&) = delete;
    OutputStage& operator=(const OutputStage&) = delete;
    ~OutputStage() {
        std::error_code ec;
        if (!committed_) fs::remove_all(staging_, ec);
    }

    fs::path path(const std::string& name) {
        fs::path p = staging_ / name;
        fs::create_directories(p.parent_path());
        files_.push_back(name);
        return p;
    }

    const std::vector<std::string>& files() const { return files_; }

    void commit() {
        fs::create_directories(out_);
        for (const auto& name : files_) {
            fs::path dst = out_ / name;
            fs::create_directories(dst.parent_path());
            fs::rename(staging_ / name, dst);
        }
        fs::remove_all(staging_);
        committed_ = true;
    }

private:
    fs::path out_;
    fs::path staging_;
    std::vector<std::string> files_;
    bool committed_ = false;
};

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
}

void write_json(OutputStage& stage, const std::string& name, const json& j) {
    auto f = open_out(stage.path(name));
    f << j.dump(2) << '\n';
}

void write_manifest(OutputStage& stage, const std::string& command, const json& config, json extra) {
    json m = {{"tool", "qmst"}, {"version", kVersion}, {"command", command}, {"config", config}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    m["outputs"] = stage.files();
    write_json(stage, "manifest.json", m);
}

struct InputOptions {
    std::string input;
    std::string layout = "wide";
    bool returns_input = false;

    void add(CLI::App* app) {
        app->add_option("--input", input, "Input table (prices unless --returns-input)")->required();
        app->add_option("--layout", layout, "Input layout: wide|long")->check(CLI::IsMember({"wide", "long"}));
        app->add_flag("--returns-input", returns_input, "Input holds log-returns in wide layout");
    }

    ReturnPanel load(json& info) const {
        if (returns_input) {
            if (layout != "wide") throw ConfigError("--returns-input requires the wide layout");
            ReturnPanel r = load_returns(input);
            info = {{"assets", r.assets}, {"samples", r.length()}};
            return r;
        }
        PricePanel p = load_prices(input, parse_layout(layout));
        info = {{"assets", p.assets}, {"dropped_at_load", p.dropped}, {"samples", p.length()}, {"step_ms", p.step_ms}};
        return to_returns(p);
    }

    json config() const { return {{"input", input}, {"layout", layout}, {"returns-input", returns_input}}; }
};

// ---------------------------------------------------------------- returns

struct ReturnsCmd {
    std::string input;
    std::string layout = "wide";
    std::string out;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("returns", "Prices to log-returns and cumulative log-returns");
        c->add_option("--input", input, "Price table")->required();
        c->add_option("--layout", layout, "wide|long")->check(CLI::IsMember({"wide", "long"}));
        c->add_option("--out", out, "Output directory")->required();
        c->callback([this] { run(); });
    }

    void run() const {
        PricePanel p = load_prices(input, parse_layout(layout));
        ReturnPanel r = to_returns(p);
        OutputStage stage(out);
        {
            auto f = open_out(stage.path("returns.csv"));
            write_wide(f, r.timestamps, r.assets, r.returns);
        }
        {
            auto f = open_out(stage.path("cumulative_returns.csv"));
            write_wide(f, r.timestamps, r.assets, cumulative_returns(r));
        }
        write_manifest(stage, "returns", {{"input", input}, {"layout", layout}},
                       {{"input_info", {{"assets", p.assets}, {"dropped_at_load", p.dropped}, {"samples", p.length()}}}});
        stage.commit();
    }
};

// ---------------------------------------------------------------- analyze

struct AnalyzeCmd {
    InputOptions in;
    std::string out;
    std::string q = "1,4";
    std::string scales = "10";
    int order = 2;
    std::size_t window = 10080;
    std::size_t step = 1440;
    bool filter = false;
    std::string pairs = "1:4";
    std::string track;
    bool emit_trees = false;
    std::size_t acf_lags = 0;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("analyze", "Rolling-window q-dependent correlation, spectra and qMSTs");
        in.add(c);
        c->add_option("--out", out, "Output directory")->required();
        c->add_option("--q", q, "Comma-separated q values (> 0)");
        c->add_option("--scales", scales, "Comma-separated scales s");
        c->add_option("--order", order, "Detrending polynomial order (1..5)");
        c->add_option("--window", window, "Window length in samples");
        c->add_option("--step", step, "Window step in samples");
        c->add_flag("--filter", filter, "Also analyse the market-factor filtered matrices");
        c->add_option("--pairs", pairs, "q-pairs for graph distances, e.g. 1:4");
        c->add_option("--track", track, "Assets whose v1^2 is reported, comma-separated");
        c->add_flag("--emit-trees", emit_trees, "Write every window's trees (JSON + DOT)");
        c->add_option("--acf-lags", acf_lags, "Write measure autocorrelations up to this lag (0 = off)");
        c->callback([this] { run(); });
    }

    RollingConfig rolling() const {
        RollingConfig cfg;
        cfg.window = window;
        cfg.step = step;
        cfg.q_values = parse_doubles(q, "--q");
        cfg.scales = parse_sizes(scales, "--scales");
        cfg.order = order;
        cfg.filter = filter;
        cfg.q_pairs = pairs.empty() ? std::vector<QPair>{} : parse_pairs(pairs);
        cfg.tracked = split_list(track);
        cfg.keep_trees = emit_trees;
        return cfg;
    }

    json config(const RollingConfig& cfg) const {
        json c = in.config();
        auto fq = [](double v) { return format_double(v); };
        c["q"] = join(cfg.q_values, fq);
        c["scales"] = join(cfg.scales, [](std::size_t s) { return std::to_string(s); });
        c["order"] = cfg.order;
        c["window"] = cfg.window;
        c["step"] = cfg.step;
        c["filter"] = cfg.filter;
        c["pairs"] = join(cfg.q_pairs, [&](const QPair& p) { return fq(p.first) + ":" + fq(p.second); });
        c["track"] = join(cfg.tracked, [](const std::string& s) { return s; });
        c["emit-trees"] = cfg.keep_trees;
        c["acf-lags"] = acf_lags;
        return c;
    }

    void run() const {
        RollingConfig cfg = rolling();
        json info;
        ReturnPanel panel = in.load(info);
        cfg.validate(panel.length());
        WindowSeries ws = run_rolling(panel, cfg);

        OutputStage stage(out);
        const auto tag = [&](std::size_t qi, std::size_t si) {
            return "q" + format_q(cfg.q_values[qi]) + "_s" + std::to_string(cfg.scales[si]);
        };
        for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
            for (std::size_t qi = 0; qi < cfg.q_values.size(); ++qi) {
                {
                    auto f = open_out(stage.path("diag_" + tag(qi, si) + ".csv"));
                    write_diagnostics_table(f, ws, qi, si);
                }
                write_json(stage, "eigen_" + tag(qi, si) + ".json", eigen_series_json(ws, qi, si, false));
                if (cfg.filter) {
                    write_json(stage, "eigen_filtered_" + tag(qi, si) + ".json", eigen_series_json(ws, qi, si, true));
                }
                write_measure_stats(stage, ws, qi, si, tag(qi, si));
            }
            for (std::size_t pi = 0; pi < cfg.q_pairs.size(); ++pi) {
                auto f = open_out(stage.path("dist_q" + format_q(cfg.q_pairs[pi].first) + "-" +
                                             format_q(cfg.q_pairs[pi].second) + "_s" + std::to_string(cfg.scales[si]) +
                                             ".csv"));
                write_distance_table(f, ws, pi, si);
            }
        }
        if (cfg.keep_trees) write_trees(stage, ws, tag);

        json extra = {{"input_info", info},
                      {"resolved", rolling_config_json(cfg)},
                      {"windows", ws.windows.size()},
                      {"events", window_events_json(ws)}};
        write_manifest(stage, "analyze", config(cfg), extra);
        stage.commit();
    }

    void write_measure_stats(OutputStage& stage, const WindowSeries& ws, std::size_t qi, std::size_t si,
                             const std::string& tag) const {
        const Measure measures[] = {Measure::Lambda1, Measure::V1SquaredMax, Measure::Entropy,
                                    Measure::AvgPathLength, Measure::KMax};
        for (bool filtered : {false, true}) {
            if (filtered && !ws.config.filter) continue;
            std::vector<MeasureKey> keys;
            std::vector<std::string> names;
            for (Measure m : measures) {
                keys.push_back({m, si, qi, filtered});
                names.push_back(to_string(m));
            }
            const std::string suffix = (filtered ? "filtered_" : "") + tag;
            if (ws.windows.size() >= 3) {
                auto f = open_out(stage.path("measure_corr_" + suffix + ".csv"));
                write_matrix_csv(f, names, measure_correlations(ws, keys));
            }
            if (acf_lags > 0) {
                auto f = open_out(stage.path("acf_" + suffix + ".csv"));
                f << "lag";
                for (const auto& n : names) f << ',' << n;
                f << '\n';
                std::vector<std::vector<double>> cols;
                for (const auto& k : keys) {
                    auto x = measure_series(ws, k);
                    try {
                        cols.push_back(measure_acf(x, acf_lags));
                    } catch (const std::exception&) {
                        cols.push_back(std::vector<double>(acf_lags + 1, kMissing));
                    }
                }
                for (std::size_t lag = 0; lag <= acf_lags; ++lag) {
                    f << lag;
                    for (const auto& c : cols) f << ',' << format_double(c[lag]);
                    f << '\n';
                }
            }
        }
    }

    template <typename Tag>
    void write_trees(OutputStage& stage, const WindowSeries& ws, Tag tag) const {
        const auto& cfg = ws.config;
        for (const auto& w : ws.windows) {
            char idx[16];
            std::snprintf(idx, sizeof(idx), "%05zu", w.index);
            for (bool filtered : {false, true}) {
                const auto& trees = filtered ? w.filtered_trees : w.trees;
                const auto& diag = filtered ? w.filtered : w.diag;
                for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
                    for (std::size_t qi = 0; qi < cfg.q_values.size(); ++qi) {
                        std::size_t slot = cfg.slot(qi, si);
                        if (slot >= trees.size() || !diag[slot].valid) continue;
                        std::string base = std::string("trees/") + (filtered ? "filtered_" : "") + tag(qi, si) + "_w" + idx;
                        write_json(stage, base + ".json", tree_to_json(trees[slot]));
                        auto f = open_out(stage.path(base + ".dot"));
                        write_tree_dot(f, trees[slot], tag(qi, si) + "_w" + idx);
                    }
                }
            }
        }
    }
};

// ---------------------------------------------------------------- synth

struct SynthCmd {
    std::string kind = "fgn";
    std::string out;
    SynthSpec spec;
    double jump_sigmas = -10.0;
    bool prices = false;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("synth", "Synthetic panels with known ground truth");
        c->add_option("--kind", kind, "fgn|cascade|corr_pair|factor_panel|crash_panel");
        c->add_option("--out", out, "Output directory")->required();
        c->add_option("--length", spec.length, "Samples (power of two for fgn)");
        c->add_option("--seed", spec.seed, "64-bit seed");
        c->add_option("--H", spec.hurst, "Hurst exponent for fgn");
        c->add_option("--a", spec.weight, "Cascade weight in (0.5, 1)");
        c->add_option("--depth", spec.depth, "Cascade depth n (2^n samples)");
        c->add_option("--r", spec.r, "Correlation for corr_pair");
        c->add_option("--assets", spec.assets, "Number of assets for panels");
        c->add_option("--beta", spec.beta, "Factor loading");
        c->add_option("--sigma", spec.sigma, "Noise standard deviation");
        c->add_option("--jump", jump_sigmas, "Crash return per burst sample, in units of sigma");
        c->add_option("--crash-at", spec.crash_at, "Crash centre sample (default: middle)");
        c->add_flag("--prices", prices, "Emit pseudo-prices exp(cumsum(returns)) instead of returns");
        c->callback([this] { run(); });
    }

    void run() {
        spec.kind = parse_synth_kind(kind);
        spec.jump = jump_sigmas * spec.sigma;
        ReturnPanel r = spec.generate();
        OutputStage stage(out);
        const std::string name = prices ? "prices.csv" : "returns.csv";
        {
            auto f = open_out(stage.path(name));
            if (prices) {
                PricePanel p = to_prices(r, 0);
                write_wide(f, p.timestamps, p.assets, p.prices);
            } else {
                write_wide(f, r.timestamps, r.assets, r.returns);
            }
        }
        json config = {{"kind", kind},       {"length", spec.length}, {"seed", spec.seed},   {"H", spec.hurst},
                       {"a", spec.weight},   {"depth", spec.depth},   {"r", spec.r},         {"assets", spec.assets},
                       {"beta", spec.beta},  {"sigma", spec.sigma},   {"jump", jump_sigmas}, {"crash-at", spec.crash_at},
                       {"prices", prices}};
        write_manifest(stage, "synth", config, {{"generator", "mt19937_64 + inverse-normal-CDF"}});
        stage.commit();
    }
};

// ---------------------------------------------------------------- graphdist

struct GraphDistCmd {
    std::string tree_a;
    std::string tree_b;
    std::string out;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("graphdist", "DeltaCon0 and resistance-perturbation distance between two trees");
        c->add_option("--tree-a", tree_a, "First tree (JSON edge list)")->required();
        c->add_option("--tree-b", tree_b, "Second tree (JSON edge list)")->required();
        c->add_option("--out", out, "Output directory (stdout only when omitted)");
        c->callback([this] { run(); });
    }

    static QMst read_tree(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw DataError("cannot open " + path);
        try {
            return tree_from_json(json::parse(f));
        } catch (const json::exception& e) {
            throw DataError(path + ": " + e.what());
        }
    }

    void run() const {
        QMst a = read_tree(tree_a);
        QMst b = read_tree(tree_b);
        if (a.assets != b.assets) throw DataError("trees are defined on different asset lists");
        json result = {{"d_dc0", deltacon0(a.adjacency, b.adjacency)},
                       {"d_rp1", resistance_distance(a.adjacency, b.adjacency)},
                       {"d_rp1_sum", "unordered pairs"},
                       {"nodes", a.assets.size()}};
        std::cout << result.dump(2) << '\n';
        if (out.empty()) return;
        OutputStage stage(out);
        write_json(stage, "graphdist.json", result);
        write_manifest(stage, "graphdist", {{"tree-a", tree_a}, {"tree-b", tree_b}}, json::object());
        stage.commit();
    }
};

// ---------------------------------------------------------------- mfdfa

struct MfdfaCmd {
    InputOptions in;
    std::string out;
    std::string asset;
    std::string pair;
    std::string q = "1,2,4";
    std::string scales;
    int order = 2;
    std::size_t fit_min = 0;
    std::size_t fit_max = 0;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("mfdfa", "Fluctuation functions and scaling exponents of one series or a pair");
        in.add(c);
        c->add_option("--out", out, "Output directory")->required();
        c->add_option("--asset", asset, "Asset column (default: first)");
        c->add_option("--pair", pair, "Two assets X,Y for the bivariate analysis");
        c->add_option("--q", q, "Comma-separated q values (> 0)");
        c->add_option("--scales", scales, "Comma-separated scales (default: log-spaced grid)");
        c->add_option("--order", order, "Detrending polynomial order (1..5)");
        c->add_option("--fit-min", fit_min, "Smallest scale in the exponent fit");
        c->add_option("--fit-max", fit_max, "Largest scale in the exponent fit");
        c->callback([this] { run(); });
    }

    static std::size_t find_asset(const ReturnPanel& r, const std::string& name) {
        auto it = std::find(r.assets.begin(), r.assets.end(), name);
        if (it == r.assets.end()) throw DataError("asset '" + name + "' not in input");
        return static_cast<std::size_t>(it - r.assets.begin());
    }

    void run() const {
        json info;
        ReturnPanel r = in.load(info);
        std::size_t ix = 0, iy = 0;
        if (!pair.empty()) {
            auto names = split_list(pair);
            if (names.size() != 2) throw ConfigError("--pair needs exactly two assets");
            ix = find_asset(r, names[0]);
            iy = find_asset(r, names[1]);
        } else if (!asset.empty()) {
            ix = iy = find_asset(r, asset);
        }
        DetrendConfig cfg;
        cfg.order = order;
        cfg.q_values = parse_doubles(q, "--q");
        cfg.scales = scales.empty() ? default_scales(r.length(), order) : parse_sizes(scales, "--scales");
        FluctuationSet fs = pair_pipeline(r.returns[ix], r.returns[iy], cfg);
        for (const auto& p : fs.points) {
            if (p.degenerate) {
                throw DegenerateError("zero fluctuation function at s = " + std::to_string(p.scale), {ix, iy});
            }
        }
        FitRange range{fit_min ? fit_min : cfg.scales.front(), fit_max ? fit_max : cfg.scales.back()};
        ScalingExponents ex = estimate_exponents(fs, range);

        const std::string label = r.assets[ix] + (ix == iy ? "" : ":" + r.assets[iy]);
        OutputStage stage(out);
        {
            auto f = open_out(stage.path("fluctuations.csv"));
            write_fluctuation_header(f);
            write_fluctuations(f, label, fs);
        }
        auto fit = [](const std::optional<LogLogFit>& v) {
            return v ? json{{"slope", v->slope}, {"r2", v->r2}} : json(nullptr);
        };
        json per_q = json::array();
        for (const auto& e : ex.per_q) {
            per_q.push_back({{"q", e.q}, {"h_x", fit(e.h_x)}, {"h_y", fit(e.h_y)}, {"lambda_xy", fit(e.lambda_xy)}});
        }
        write_json(stage, "exponents.json",
                   {{"pair", label}, {"fit_range", {range.min_scale, range.max_scale}}, {"exponents", per_q}});
        json config = in.config();
        config["asset"] = asset;
        config["pair"] = pair;
        config["q"] = q;
        config["scales"] = join(cfg.scales, [](std::size_t s) { return std::to_string(s); });
        config["order"] = order;
        config["fit-min"] = range.min_scale;
        config["fit-max"] = range.max_scale;
        write_manifest(stage, "mfdfa", config, {{"input_info", info}});
        stage.commit();
    }
};

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"q-dependent detrended cross-correlation analysis and qMSTs", "qmst"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<FlatConfig>(&app));
    app.set_config("--config", "", "Config file (INI key = value, or a JSON run manifest)");

    ReturnsCmd returns_cmd;
    AnalyzeCmd analyze_cmd;
    SynthCmd synth_cmd;
    GraphDistCmd graphdist_cmd;
    MfdfaCmd mfdfa_cmd;
    returns_cmd.add(app);
    analyze_cmd.add(app);
    synth_cmd.add(app);
    graphdist_cmd.add(app);
    mfdfa_cmd.add(app);
    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();
        sub->add_option_function<int>("--threads", [](int n) { set_threads(n); }, "Cap on worker threads")
            ->check(CLI::PositiveNumber);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DegenerateError& e) {
        std::cerr << "numeric degeneracy: " << e.what() << '\n';
        return kDegenerate;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}

}  // namespace qmst::cli
