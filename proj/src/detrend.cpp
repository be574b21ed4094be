#include "qmst/detrend.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>
#include <set>

#include "qmst/error.hpp"
#include "qmst/format.hpp"

namespace qmst {

void validate_order(int order) {
    if (order < 1 || order > 5) throw ConfigError("polynomial order must be in 1..5, got " + std::to_string(order));
}

void validate_q(double q) {
    if (!(q > 0.0) || !std::isfinite(q)) {
        throw ConfigError("q must be finite and > 0 (q = 0 and q < 0 are unsupported), got " + format_double(q));
    }
}

void validate_scale(std::size_t length, std::size_t scale, int order) {
    if (scale < static_cast<std::size_t>(order) + 2) {
        throw ConfigError("scale " + std::to_string(scale) + " below order+2 = " + std::to_string(order + 2));
    }
    if (scale > length) {
        throw ConfigError("scale " + std::to_string(scale) + " exceeds series length " + std::to_string(length));
    }
    if (2 * segments_per_side(length, scale) < 4) {
        throw ConfigError("scale " + std::to_string(scale) + " leaves fewer than 4 segments on length " +
                          std::to_string(length));
    }
}

void DetrendConfig::validate(std::size_t length) const {
    validate_order(order);
    if (q_values.empty()) throw ConfigError("no q values configured");
    for (double q : q_values) validate_q(q);
    if (scales.empty()) throw ConfigError("no scales configured");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (i > 0 && scales[i] <= scales[i - 1]) throw ConfigError("scales must be strictly increasing");
        validate_scale(length, scales[i], order);
    }
}

std::vector<std::size_t> default_scales(std::size_t length, int order, std::size_t points) {
    std::size_t lo = std::max<std::size_t>(10, static_cast<std::size_t>(order) + 2);
    std::size_t hi = length / 5;
    if (hi < lo) throw ConfigError("series of length " + std::to_string(length) + " too short for a scale grid");
    std::set<std::size_t> grid;
    if (points < 2 || hi == lo) {
        grid.insert(lo);
    } else {
        double step = std::log(static_cast<double>(hi) / lo) / static_cast<double>(points - 1);
        for (std::size_t k = 0; k < points; ++k) {
            auto s = static_cast<std::size_t>(std::llround(lo * std::exp(step * k)));
            grid.insert(std::clamp(s, lo, hi));
        }
    }
    return {grid.begin(), grid.end()};
}

Series profile(std::span<const double> x, bool subtract_mean) {
    if (x.empty()) throw DataError("profile of an empty series");
    double mean = 0.0;
    if (subtract_mean) {
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
    }
    Series out(x.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += x[i] - mean;
        out[i] = acc;
    }
    return out;
}

std::size_t segments_per_side(std::size_t length, std::size_t scale) {
    return scale == 0 ? 0 : length / scale;
}

std::vector<std::size_t> segment_starts(std::size_t length, std::size_t scale) {
    std::size_t m = segments_per_side(length, scale);
    std::vector<std::size_t> starts;
    starts.reserve(2 * m);
    for (std::size_t v = 0; v < m; ++v) starts.push_back(v * scale);
    for (std::size_t v = 0; v < m; ++v) starts.push_back(length - (v + 1) * scale);
    return starts;
}

SegmentDetrender::SegmentDetrender(std::size_t scale, int order) : scale_(scale), order_(order) {
    validate_order(order);
    if (scale < static_cast<std::size_t>(order) + 2) {
        throw ConfigError("scale " + std::to_string(scale) + " below order+2");
    }
    const std::size_t rows = static_cast<std::size_t>(order) + 1;
    basis_.assign(rows * scale, 0.0);
    const double mid = 0.5 * static_cast<double>(scale + 1);
    const double half = 0.5 * static_cast<double>(scale - 1);
    for (std::size_t j = 0; j < rows; ++j) {
        double* b = basis_.data() + j * scale;
        for (std::size_t k = 0; k < scale; ++k) {
            double t = (static_cast<double>(k + 1) - mid) / half;
            b[k] = std::pow(t, static_cast<double>(j));
        }
        // Modified Gram-Schmidt, two passes.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                const double* a = basis_.data() + i * scale;
                double dot = 0.0;
                for (std::size_t k = 0; k < scale; ++k) dot += a[k] * b[k];
                for (std::size_t k = 0; k < scale; ++k) b[k] -= dot * a[k];
            }
        }
        double norm = 0.0;
        for (std::size_t k = 0; k < scale; ++k) norm += b[k] * b[k];
        norm = std::sqrt(norm);
        assert(norm > 0.0 && "distinct abscissae give a full-rank basis");
        for (std::size_t k = 0; k < scale; ++k) b[k] /= norm;
    }
}

void SegmentDetrender::residual(std::span<const double> segment, std::span<double> out) const {
    assert(segment.size() == scale_ && out.size() == scale_);
    std::copy(segment.begin(), segment.end(), out.begin());
    const std::size_t rows = static_cast<std::size_t>(order_) + 1;
    for (std::size_t j = 0; j < rows; ++j) {
        const double* b = basis_.data() + j * scale_;
        double coef = 0.0;
        for (std::size_t k = 0; k < scale_; ++k) coef += b[k] * segment[k];
        for (std::size_t k = 0; k < scale_; ++k) out[k] -= coef * b[k];
    }
}

Series detrended_segments(std::span<const double> prof, std::size_t scale, int order) {
    if (scale > prof.size()) {
        throw ConfigError("scale " + std::to_string(scale) + " exceeds profile length " + std::to_string(prof.size()));
    }
    SegmentDetrender det(scale, order);
    auto starts = segment_starts(prof.size(), scale);
    Series out(starts.size() * scale);
    for (std::size_t v = 0; v < starts.size(); ++v) {
        det.residual(prof.subspan(starts[v], scale), std::span<double>(out).subspan(v * scale, scale));
    }
    return out;
}

void segment_products(std::span<const double> xres, std::span<const double> yres, std::size_t scale,
                      std::span<double> out) {
    assert(xres.size() == yres.size() && xres.size() == out.size() * scale);
    const double inv = 1.0 / static_cast<double>(scale);
    for (std::size_t v = 0; v < out.size(); ++v) {
        const double* x = xres.data() + v * scale;
        const double* y = yres.data() + v * scale;
        double acc = 0.0;
        for (std::size_t k = 0; k < scale; ++k) acc += x[k] * y[k];
        out[v] = acc * inv;
    }
}

SegmentCovariances segment_covariances(std::span<const double> xp, std::span<const double> yp, std::size_t scale,
                                       int order) {
    if (xp.size() != yp.size()) throw DataError("profiles differ in length");
    if (scale > xp.size()) {
        throw ConfigError("scale " + std::to_string(scale) + " exceeds profile length " + std::to_string(xp.size()));
    }
    Series xr = detrended_segments(xp, scale, order);
    Series yr = detrended_segments(yp, scale, order);
    SegmentCovariances out;
    out.scale = scale;
    out.values.resize(xr.size() / scale);
    segment_products(xr, yr, scale, out.values);
    return out;
}

double fluctuation(std::span<const double> f2, double q) {
    validate_q(q);
    if (f2.empty()) throw DataError("no segments");
    const double half_q = 0.5 * q;
    double acc = 0.0;
    for (double v : f2) acc += std::pow(v, half_q);
    acc /= static_cast<double>(f2.size());
    return std::pow(acc, 1.0 / q);
}

double signed_fluctuation(std::span<const double> f2, double q) {
    validate_q(q);
    if (f2.empty()) throw DataError("no segments");
    const double half_q = 0.5 * q;
    double acc = 0.0;
    for (double v : f2) {
        double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        acc += sign * std::pow(std::fabs(v), half_q);
    }
    acc /= static_cast<double>(f2.size());
    double root = std::pow(std::fabs(acc), 1.0 / q);
    return acc < 0.0 ? -root : root;
}

const FluctuationPoint& FluctuationSet::at(double q, std::size_t scale) const {
    for (const auto& p : points) {
        if (p.q == q && p.scale == scale) return p;
    }
    throw DataError("no fluctuation value for q=" + format_double(q) + ", s=" + std::to_string(scale));
}

std::vector<double> FluctuationSet::q_values() const {
    std::vector<double> out;
    for (const auto& p : points) {
        if (std::find(out.begin(), out.end(), p.q) == out.end()) out.push_back(p.q);
    }
    return out;
}

std::vector<std::size_t> FluctuationSet::scales() const {
    std::vector<std::size_t> out;
    for (const auto& p : points) {
        if (std::find(out.begin(), out.end(), p.scale) == out.end()) out.push_back(p.scale);
    }
    return out;
}

FluctuationSet fluctuation_functions(const SegmentCovariances& xy, const SegmentCovariances& xx,
                                     const SegmentCovariances& yy, std::span<const double> q_values) {
    if (xy.values.size() != xx.values.size() || xy.values.size() != yy.values.size()) {
        throw DataError("covariance sequences differ in length");
    }
    FluctuationSet fs;
    for (double q : q_values) {
        FluctuationPoint p;
        p.q = q;
        p.scale = xy.scale;
        p.fxy = signed_fluctuation(xy.values, q);
        p.fxx = fluctuation(xx.values, q);
        p.fyy = fluctuation(yy.values, q);
        p.degenerate = p.fxx == 0.0 || p.fyy == 0.0;
        fs.points.push_back(p);
    }
    return fs;
}

FluctuationSet pair_pipeline(std::span<const double> x, std::span<const double> y, const DetrendConfig& cfg) {
    if (x.size() != y.size()) throw DataError("series differ in length");
    cfg.validate(x.size());
    Series xp = profile(x, cfg.subtract_mean);
    Series yp = profile(y, cfg.subtract_mean);
    FluctuationSet out;
    for (std::size_t s : cfg.scales) {
        Series xr = detrended_segments(xp, s, cfg.order);
        Series yr = detrended_segments(yp, s, cfg.order);
        SegmentCovariances cxy{s, std::vector<double>(xr.size() / s)};
        SegmentCovariances cxx = cxy;
        SegmentCovariances cyy = cxy;
        segment_products(xr, yr, s, cxy.values);
        segment_products(xr, xr, s, cxx.values);
        segment_products(yr, yr, s, cyy.values);
        auto fs = fluctuation_functions(cxy, cxx, cyy, cfg.q_values);
        out.points.insert(out.points.end(), fs.points.begin(), fs.points.end());
    }
    return out;
}

std::optional<LogLogFit> fit_loglog(std::span<const double> scales, std::span<const double> values) {
    if (scales.size() != values.size()) throw DataError("fit inputs differ in length");
    if (scales.size() < 3) throw ConfigError("need at least 3 scales in the fit range");
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;
    }
    const auto n = static_cast<double>(scales.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        mx += std::log(scales[i]);
        my += std::log(values[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        double dx = std::log(scales[i]) - mx;
        double dy = std::log(values[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw ConfigError("fit range has a single distinct scale");
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

const ExponentEstimate& ScalingExponents::at(double q) const {
    for (const auto& e : per_q) {
        if (e.q == q) return e;
    }
    throw DataError("no exponent for q=" + format_double(q));
}

ScalingExponents estimate_exponents(const FluctuationSet& fs, FitRange range) {
    ScalingExponents out;
    out.fit_range = range;
    std::vector<std::size_t> in_range;
    for (std::size_t s : fs.scales()) {
        if (s >= range.min_scale && s <= range.max_scale) in_range.push_back(s);
    }
    std::sort(in_range.begin(), in_range.end());
    if (in_range.size() < 3) {
        throw ConfigError("fit range [" + std::to_string(range.min_scale) + ", " + std::to_string(range.max_scale) +
                          "] holds " + std::to_string(in_range.size()) + " scales, need at least 3");
    }
    std::vector<double> xs(in_range.begin(), in_range.end());
    for (double q : fs.q_values()) {
        std::vector<double> fxx, fyy, fxy;
        for (std::size_t s : in_range) {
            const auto& p = fs.at(q, s);
            fxx.push_back(p.fxx);
            fyy.push_back(p.fyy);
            fxy.push_back(p.fxy);
        }
        ExponentEstimate e;
        e.q = q;
        e.h_x = fit_loglog(xs, fxx);
        e.h_y = fit_loglog(xs, fyy);
        e.lambda_xy = fit_loglog(xs, fxy);
        out.per_q.push_back(e);
    }
    return out;
}

void write_fluctuation_header(std::ostream& out) {
    out << "pair,q,s,Fxy,Fxx,Fyy\n";
}

void write_fluctuations(std::ostream& out, const std::string& pair, const FluctuationSet& fs) {
    for (const auto& p : fs.points) {
        out << pair << ',' << format_double(p.q) << ',' << p.scale << ',' << format_double(p.fxy) << ','
            << format_double(p.fxx) << ',' << format_double(p.fyy) << '\n';
    }
}

}  // namespace qmst
