#include "qmst/rhoq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qmst/error.hpp"
#include "qmst/format.hpp"
#include "qmst/parallel.hpp"

namespace qmst {

namespace {

void check_panel(const ReturnPanel& panel, std::size_t scale, const DetrendConfig& cfg) {
    if (panel.num_assets() < 2) throw DataError("correlation matrix needs at least 2 assets");
    validate_order(cfg.order);
    validate_scale(panel.length(), scale, cfg.order);
}

std::string asset_list(const ReturnPanel& panel, const std::vector<std::size_t>& rows) {
    std::string out;
    for (std::size_t r : rows) {
        if (!out.empty()) out += ", ";
        out += panel.assets[r];
    }
    return out;
}

}  // namespace

double rho_q(double fxy, double fxx, double fyy, double q) {
    double denom = std::sqrt(fxx * fyy);
    if (!(denom > 0.0) || !std::isfinite(denom)) throw DegenerateError("degenerate pair: zero fluctuation function");
    double r = fxy / denom;
    double rho = std::copysign(std::pow(std::fabs(r), q), r);
    if (std::fabs(rho) > 1.0 + kRhoTolerance) {
        throw std::logic_error("rho_q = " + format_double(rho) + " outside [-1, 1] beyond rounding tolerance");
    }
    return std::clamp(rho, -1.0, 1.0);
}

double rho_q(const FluctuationSet& fs, double q, std::size_t scale) {
    const auto& p = fs.at(q, scale);
    return rho_q(p.fxy, p.fxx, p.fyy, q);
}

std::vector<std::size_t> degenerate_assets(const ReturnPanel& panel, std::size_t scale, const DetrendConfig& cfg) {
    validate_scale(panel.length(), scale, cfg.order);
    std::vector<char> flag(panel.num_assets(), 0);
    parallel_for(panel.num_assets(), [&](std::size_t i) {
        Series res = detrended_segments(profile(panel.returns[i], cfg.subtract_mean), scale, cfg.order);
        bool all_zero = true;
        for (double v : res) {
            if (v != 0.0) {
                all_zero = false;
                break;
            }
        }
        flag[i] = all_zero ? 1 : 0;
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < flag.size(); ++i) {
        if (flag[i]) out.push_back(i);
    }
    return out;
}

std::vector<QCorrMatrix> corr_matrices(const ReturnPanel& panel, std::size_t scale, std::span<const double> q_values,
                                       const DetrendConfig& cfg) {
    check_panel(panel, scale, cfg);
    for (double q : q_values) validate_q(q);
    const std::size_t n = panel.num_assets();
    const std::size_t nq = q_values.size();
    const std::size_t segs = 2 * segments_per_side(panel.length(), scale);

    std::vector<Series> residuals(n);
    std::vector<double> funi(n * nq);  // funi[i * nq + k] = F_ii at q_values[k]
    parallel_for(n, [&](std::size_t i) {
        residuals[i] = detrended_segments(profile(panel.returns[i], cfg.subtract_mean), scale, cfg.order);
        std::vector<double> f2(segs);
        segment_products(residuals[i], residuals[i], scale, f2);
        for (std::size_t k = 0; k < nq; ++k) funi[i * nq + k] = fluctuation(f2, q_values[k]);
    });

    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < nq; ++k) {
            if (!(funi[i * nq + k] > 0.0)) {
                bad.push_back(i);
                break;
            }
        }
    }
    if (!bad.empty()) {
        throw DegenerateError("degenerate assets at scale " + std::to_string(scale) + ": " + asset_list(panel, bad),
                              bad);
    }

    std::vector<QCorrMatrix> out(nq);
    for (std::size_t k = 0; k < nq; ++k) {
        out[k].q = q_values[k];
        out[k].scale = scale;
        out[k].assets = panel.assets;
        out[k].sectors = panel.sectors;
        out[k].values = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    parallel_for(pairs.size(), [&](std::size_t p) {
        auto [i, j] = pairs[p];
        std::vector<double> f2(segs);
        segment_products(residuals[i], residuals[j], scale, f2);
        for (std::size_t k = 0; k < nq; ++k) {
            double rho = rho_q(signed_fluctuation(f2, q_values[k]), funi[i * nq + k], funi[j * nq + k], q_values[k]);
            auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            out[k].values(a, b) = rho;
            out[k].values(b, a) = rho;
        }
    });
    return out;
}

QCorrMatrix corr_matrix(const ReturnPanel& panel, double q, std::size_t scale, const DetrendConfig& cfg) {
    const double qs[] = {q};
    return std::move(corr_matrices(panel, scale, qs, cfg).front());
}

QCorrMatrix corr_matrix_serial(const ReturnPanel& panel, double q, std::size_t scale, const DetrendConfig& cfg) {
    check_panel(panel, scale, cfg);
    validate_q(q);
    DetrendConfig one = cfg;
    one.q_values = {q};
    one.scales = {scale};
    const std::size_t n = panel.num_assets();
    QCorrMatrix out;
    out.q = q;
    out.scale = scale;
    out.assets = panel.assets;
    out.sectors = panel.sectors;
    out.values = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            auto fs = pair_pipeline(panel.returns[i], panel.returns[j], one);
            double rho;
            try {
                rho = rho_q(fs, q, scale);
            } catch (const DegenerateError&) {
                throw DegenerateError("degenerate pair (" + panel.assets[i] + ", " + panel.assets[j] + ")", {i, j});
            }
            auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            out.values(a, b) = rho;
            out.values(b, a) = rho;
        }
    }
    return out;
}

QDistMatrix to_distance(const QCorrMatrix& c) {
    QDistMatrix d;
    d.q = c.q;
    d.scale = c.scale;
    d.assets = c.assets;
    d.sectors = c.sectors;
    const Eigen::Index n = c.values.rows();
    d.values = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            d.values(i, j) = std::sqrt(std::max(0.0, 2.0 * (1.0 - c.values(i, j))));
        }
    }
    return d;
}

}  // namespace qmst
