#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmst/graph.hpp"
#include "qmst/rhoq.hpp"
#include "qmst/rolling.hpp"
#include "qmst/spectra.hpp"

namespace qmst {

using nlohmann::json;

// Square table with a header row and a leading label column.
void write_matrix_csv(std::ostream& out, const std::vector<std::string>& labels, const Eigen::MatrixXd& m);

json to_json(const QCorrMatrix& c);
json to_json(const EigenSummary& e, double q, std::size_t scale);

// {assets, edges: [{i, j, w}]}
json tree_to_json(const QMst& t);
QMst tree_from_json(const json& j);

// Graphviz description: node labels, sector as the colour key.
void write_tree_dot(std::ostream& out, const QMst& t, const std::string& name);

// One row per window for a (q, s) slot:
// window,window_end,n_assets,lambda1,v1sq_max,entropy,kmax,kmax_asset,avgL,
// v1sq_<tracked>..., and the _f columns of the filtered matrix when enabled.
void write_diagnostics_table(std::ostream& out, const WindowSeries& ws, std::size_t qi, std::size_t si);

// window,window_end,d_dc0,d_rp1[,d_dc0_f,d_rp1_f] for a (q-pair, s) slot.
void write_distance_table(std::ostream& out, const WindowSeries& ws, std::size_t pi, std::size_t si);

// Array of per-window eigen summaries for a (q, s) slot.
json eigen_series_json(const WindowSeries& ws, std::size_t qi, std::size_t si, bool filtered);

json rolling_config_json(const RollingConfig& cfg);

// Per-window dropped assets and notes (only windows that have any).
json window_events_json(const WindowSeries& ws);

}  // namespace qmst
