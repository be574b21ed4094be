#include "qmst/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "qmst/error.hpp"
#include "qmst/format.hpp"

namespace qmst {

double EigenSummary::v1_squared_max() const {
    return v1_squared.empty() ? 0.0 : *std::max_element(v1_squared.begin(), v1_squared.end());
}

EigenSummary eigen_summary(const Eigen::MatrixXd& c) {
    if (c.rows() != c.cols() || c.rows() == 0) throw DataError("eigen_summary needs a non-empty square matrix");
    const Eigen::Index n = c.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::fabs(c(i, j) - c(j, i)) > 1e-10) {
                throw DataError("matrix not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
    if (solver.info() != Eigen::Success) throw DegenerateError("eigendecomposition did not converge");

    EigenSummary out;
    const auto& vals = solver.eigenvalues();  // ascending
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.eigenvalues[static_cast<std::size_t>(i)] = vals(n - 1 - i);

    Eigen::VectorXd v = solver.eigenvectors().col(n - 1);
    v.normalize();
    double sum = v.sum();
    if (sum < 0.0 || (sum == 0.0 && [&] {
            for (Eigen::Index i = 0; i < n; ++i)
                if (v(i) != 0.0) return v(i) < 0.0;
            return false;
        }())) {
        v = -v;
    }
    out.v1.assign(v.data(), v.data() + n);
    out.v1_squared.resize(out.v1.size());
    double total = 0.0;
    for (std::size_t i = 0; i < out.v1.size(); ++i) {
        out.v1_squared[i] = out.v1[i] * out.v1[i];
        total += out.v1_squared[i];
    }
    for (double& p : out.v1_squared) p /= total;
    out.entropy = entropy(out.v1_squared);
    return out;
}

EigenSummary eigen_summary(const QCorrMatrix& c) {
    return eigen_summary(c.values);
}

double entropy(std::span<const double> p) {
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0 || !std::isfinite(v)) throw DataError("entropy: negative or non-finite component " + format_double(v));
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw DataError("entropy: components sum to " + format_double(sum) + ", not 1");
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return std::max(0.0, h);
}

ResidualPanel filter_market_factor(const ReturnPanel& panel, std::span<const double> v1) {
    const std::size_t n = panel.num_assets();
    const std::size_t len = panel.length();
    if (v1.size() != n) {
        throw DataError("eigenvector has " + std::to_string(v1.size()) + " components for " + std::to_string(n) +
                        " assets");
    }
    if (len < 3) throw DataError("filtering needs at least 3 samples");

    std::vector<Series> std_series(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = panel.returns[i];
        double mean = 0.0;
        for (double v : r) mean += v;
        mean /= static_cast<double>(len);
        double var = 0.0;
        for (double v : r) var += (v - mean) * (v - mean);
        var /= static_cast<double>(len);
        if (!(var > 0.0)) throw DegenerateError("asset " + panel.assets[i] + " is constant in the window", {i});
        double sd = std::sqrt(var);
        Series c(len);
        for (std::size_t k = 0; k < len; ++k) c[k] = (r[k] - mean) / sd;
        std_series[i] = std::move(c);
    }

    ResidualPanel out;
    out.factor.assign(len, 0.0);
    for (std::size_t k = 0; k < len; ++k) {
        double z = 0.0;
        for (std::size_t m = 0; m < n; ++m) z += v1[m] * std_series[m][k];
        out.factor[k] = z;
    }
    double zmean = 0.0;
    for (double z : out.factor) zmean += z;
    zmean /= static_cast<double>(len);
    double zvar = 0.0;
    for (double z : out.factor) zvar += (z - zmean) * (z - zmean);
    if (!(zvar > 0.0)) throw DegenerateError("market factor Z1 has zero variance");

    out.residuals.timestamps = panel.timestamps;
    out.residuals.assets = panel.assets;
    out.residuals.sectors = panel.sectors;
    out.residuals.returns.resize(n);
    out.intercepts.resize(n);
    out.slopes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = std_series[i];
        double cmean = 0.0;
        for (double v : c) cmean += v;
        cmean /= static_cast<double>(len);
        double cov = 0.0;
        for (std::size_t k = 0; k < len; ++k) cov += (c[k] - cmean) * (out.factor[k] - zmean);
        double b = cov / zvar;
        double a = cmean - b * zmean;
        Series eps(len);
        double ss = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
            eps[k] = c[k] - a - b * out.factor[k];
            ss += eps[k] * eps[k];
        }
        if (std::sqrt(ss / static_cast<double>(len)) < kResidualZeroRms) std::fill(eps.begin(), eps.end(), 0.0);
        out.intercepts[i] = a;
        out.slopes[i] = b;
        out.residuals.returns[i] = std::move(eps);
    }
    return out;
}

QCorrMatrix residual_corr(const ResidualPanel& resid, double q, std::size_t scale, const DetrendConfig& cfg) {
    return corr_matrix(resid.residuals, q, scale, cfg);
}

}  // namespace qmst
