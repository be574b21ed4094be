#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmst/detrend.hpp"
#include "qmst/panel.hpp"

namespace qmst {

// |rho| may exceed 1 by at most this much from rounding before it is
// clamped; anything larger is an internal defect.
inline constexpr double kRhoTolerance = 1e-12;

// N x N matrix of rho_q(s), symmetric with unit diagonal.
struct QCorrMatrix {
    double q = 0.0;
    std::size_t scale = 0;
    std::vector<std::string> assets;
    std::vector<std::string> sectors;  // empty when the panel has none
    Eigen::MatrixXd values;
};

// sqrt(2 (1 - C)), zero diagonal.
struct QDistMatrix {
    double q = 0.0;
    std::size_t scale = 0;
    std::vector<std::string> assets;
    std::vector<std::string> sectors;
    Eigen::MatrixXd values;
};

// Ratio of the q-th moments: sign(r) |r|^q with r = F_xy / sqrt(F_xx F_yy),
// so q = 2 reproduces the DCCA coefficient. Clamped to [-1, 1] within
// kRhoTolerance; a zero denominator throws DegenerateError.
double rho_q(double fxy, double fxx, double fyy, double q);
double rho_q(const FluctuationSet& fs, double q, std::size_t scale);

// Assets whose detrended profile vanishes at this scale (no rho defined).
std::vector<std::size_t> degenerate_assets(const ReturnPanel& panel, std::size_t scale, const DetrendConfig& cfg);

// rho_q matrices for several q at one scale. Per-asset detrended profiles
// and univariate fluctuation functions are computed once; pairs are then
// evaluated in parallel. Output order follows q_values.
std::vector<QCorrMatrix> corr_matrices(const ReturnPanel& panel, std::size_t scale, std::span<const double> q_values,
                                       const DetrendConfig& cfg);

QCorrMatrix corr_matrix(const ReturnPanel& panel, double q, std::size_t scale, const DetrendConfig& cfg);

// Serial reference: one full pair_pipeline per pair, no shared caches.
// Kept for tests and benchmarks; must agree bit for bit with corr_matrix.
QCorrMatrix corr_matrix_serial(const ReturnPanel& panel, double q, std::size_t scale, const DetrendConfig& cfg);

QDistMatrix to_distance(const QCorrMatrix& c);

}  // namespace qmst
