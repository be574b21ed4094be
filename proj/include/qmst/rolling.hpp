#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmst/detrend.hpp"
#include "qmst/graph.hpp"
#include "qmst/panel.hpp"

namespace qmst {

struct QPair {
    double first = 1.0;
    double second = 4.0;
};

struct RollingConfig {
    std::size_t window = 10080;  // one week of minutes
    std::size_t step = 1440;     // one day of minutes
    std::vector<double> q_values{1.0, 4.0};
    std::vector<std::size_t> scales{10};
    int order = 2;
    bool subtract_mean = true;
    bool filter = false;
    std::vector<QPair> q_pairs{{1.0, 4.0}};
    std::vector<std::string> tracked;  // assets whose v1^2 is reported
    bool keep_trees = false;

    // Checks W >= 4 max(s), W <= length, step >= 1, and that every q-pair
    // refers to configured q values.
    void validate(std::size_t length) const;
    DetrendConfig detrend() const;

    std::size_t q_index(double q) const;
    std::size_t slot(std::size_t qi, std::size_t si) const { return qi * scales.size() + si; }
    std::size_t pair_slot(std::size_t pi, std::size_t si) const { return pi * scales.size() + si; }
};

// floor((length - window) / step) + 1, or 0 when the series is too short.
// `length` counts returns (T - 1).
std::size_t window_count(std::size_t length, std::size_t window, std::size_t step);

struct WindowBounds {
    std::size_t start = 0;
    std::size_t length = 0;
};

std::vector<WindowBounds> window_plan(std::size_t length, std::size_t window, std::size_t step);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Spectral and tree diagnostics of one (q, s) correlation matrix.
struct Diagnostics {
    bool valid = false;
    double lambda1 = kMissing;
    double v1sq_max = kMissing;
    double entropy = kMissing;
    int k_max = 0;
    std::string k_argmax;
    double avg_path = kMissing;
    std::vector<double> tracked_v1sq;  // aligned with RollingConfig::tracked
    std::vector<double> eigenvalues;
    std::vector<double> v1;
};

struct PairDistances {
    double deltacon0 = kMissing;
    double resistance = kMissing;
};

struct WindowResult {
    std::size_t index = 0;  // 0-based window number
    std::size_t start = 0;
    std::int64_t end_timestamp = 0;
    std::vector<std::string> assets;   // assets analysed in this window
    std::vector<std::string> dropped;  // degenerate assets excluded here
    std::vector<std::string> notes;    // non-fatal per-window problems
    std::vector<Diagnostics> diag;     // indexed by RollingConfig::slot
    std::vector<Diagnostics> filtered;
    std::vector<PairDistances> dist;   // indexed by RollingConfig::pair_slot
    std::vector<PairDistances> filtered_dist;
    std::vector<QMst> trees;           // when keep_trees, by slot
    std::vector<QMst> filtered_trees;
};

struct WindowSeries {
    RollingConfig config;
    std::vector<WindowResult> windows;
};

// Full pipeline on one window panel.
WindowResult analyze_window(const ReturnPanel& window, const RollingConfig& cfg);

// Windows are evaluated independently and collected in order; results do
// not depend on the thread count.
WindowSeries run_rolling(const ReturnPanel& panel, const RollingConfig& cfg);

enum class Measure { Lambda1, V1SquaredMax, Entropy, AvgPathLength, KMax, DeltaCon0, Resistance };

std::string to_string(Measure m);
Measure parse_measure(const std::string& name);

struct MeasureKey {
    Measure measure = Measure::Lambda1;
    std::size_t scale_index = 0;
    std::size_t index = 0;  // q index, or q-pair index for the two distances
    bool filtered = false;
};

std::vector<double> measure_series(const WindowSeries& ws, const MeasureKey& key);

// A(x, dk) = (1/K) sum_k (x_k - <x>)(x_{k+dk} - <x>) / sigma^2, dk = 0..max_lag.
std::vector<double> measure_acf(std::span<const double> x, std::size_t max_lag);

// Pearson correlation of equally long series. Rows/columns of constant or
// non-finite series are NaN (unavailable).
Eigen::MatrixXd pearson_matrix(const std::vector<std::vector<double>>& series);

Eigen::MatrixXd measure_correlations(const WindowSeries& ws, std::span<const MeasureKey> keys);

}  // namespace qmst
