#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmst/detrend.hpp"
#include "qmst/panel.hpp"
#include "qmst/rhoq.hpp"

namespace qmst {

struct EigenSummary {
    std::vector<double> eigenvalues;  // descending
    std::vector<double> v1;           // unit norm, component sum > 0
    std::vector<double> v1_squared;
    double entropy = 0.0;             // Shannon entropy of v1_squared

    double lambda1() const { return eigenvalues.front(); }
    double v1_squared_max() const;
};

// Full symmetric eigendecomposition. Rejects inputs asymmetric beyond 1e-10.
EigenSummary eigen_summary(const Eigen::MatrixXd& c);
EigenSummary eigen_summary(const QCorrMatrix& c);

// -sum p ln p with 0 ln 0 = 0. Components must be >= 0 and sum to 1.
double entropy(std::span<const double> p);

// Panel with the leading market mode regressed out of each asset.
struct ResidualPanel {
    ReturnPanel residuals;
    std::vector<double> factor;      // Z1(k)
    std::vector<double> intercepts;  // a_i
    std::vector<double> slopes;      // b_i
};

// Residual series whose RMS falls below this (on unit-variance inputs) are
// rounding noise of an exact fit and are returned as exact zeros.
inline constexpr double kResidualZeroRms = 1e-10;

// Standardizes each asset over the panel, forms Z1 = sum_m v1_m c_m and
// regresses every standardized series on Z1 by OLS.
ResidualPanel filter_market_factor(const ReturnPanel& panel, std::span<const double> v1);

QCorrMatrix residual_corr(const ResidualPanel& resid, double q, std::size_t scale, const DetrendConfig& cfg);

}  // namespace qmst
