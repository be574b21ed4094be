#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmst/panel.hpp"

namespace qmst {

// Parameters of the detrended (cross-)fluctuation analysis.
struct DetrendConfig {
    int order = 2;                        // polynomial order m, 1..5
    std::vector<double> q_values{1.0, 4.0};
    std::vector<std::size_t> scales{10};  // segment lengths, strictly increasing
    bool subtract_mean = true;            // mean-subtract before integrating

    // Checks m, q > 0, scale ordering, s >= m+2, and that every scale gives
    // at least 4 segments (2 per side) on a series of `length` samples.
    void validate(std::size_t length) const;
};

void validate_order(int order);
void validate_q(double q);
void validate_scale(std::size_t length, std::size_t scale, int order);

// Log-spaced integer scales from max(10, m+2) to length/5, deduplicated.
std::vector<std::size_t> default_scales(std::size_t length, int order, std::size_t points = 20);

// Cumulative sum of the (optionally mean-subtracted) series.
Series profile(std::span<const double> x, bool subtract_mean = true);

// Number of segments of length s that fit from one end (M_s).
std::size_t segments_per_side(std::size_t length, std::size_t scale);

// Start offsets of the 2*M_s segments: M_s from the beginning followed by
// M_s taken from the end.
std::vector<std::size_t> segment_starts(std::size_t length, std::size_t scale);

// Least-squares polynomial detrending on a fixed segment length. The fit is
// a projection onto an orthonormal polynomial basis built on abscissae
// recentred on the segment midpoint.
class SegmentDetrender {
public:
    SegmentDetrender(std::size_t scale, int order);

    std::size_t scale() const { return scale_; }
    int order() const { return order_; }

    // out = segment - best polynomial fit. Both spans have length scale().
    void residual(std::span<const double> segment, std::span<double> out) const;

private:
    std::size_t scale_;
    int order_;
    std::vector<double> basis_;  // (order+1) rows of length scale, orthonormal
};

// Detrended profile, segment after segment (2*M_s*s values).
Series detrended_segments(std::span<const double> prof, std::size_t scale, int order);

// Segment-wise (co)variances f^2(s, nu).
struct SegmentCovariances {
    std::size_t scale = 0;
    std::vector<double> values;
};

SegmentCovariances segment_covariances(std::span<const double> xp, std::span<const double> yp,
                                       std::size_t scale, int order);

// Same, from already detrended residual blocks.
void segment_products(std::span<const double> xres, std::span<const double> yres, std::size_t scale,
                      std::span<double> out);

// q-order fluctuation function of non-negative segment variances.
double fluctuation(std::span<const double> f2, double q);

// q-order bivariate fluctuation function. Each segment enters with the sign
// of its covariance and the outer 1/q root keeps the sign of the average.
double signed_fluctuation(std::span<const double> f2, double q);

struct FluctuationPoint {
    double q = 0.0;
    std::size_t scale = 0;
    double fxy = 0.0;
    double fxx = 0.0;
    double fyy = 0.0;
    bool degenerate = false;  // a univariate function is exactly zero
};

struct FluctuationSet {
    std::vector<FluctuationPoint> points;

    const FluctuationPoint& at(double q, std::size_t scale) const;
    std::vector<double> q_values() const;
    std::vector<std::size_t> scales() const;
};

FluctuationSet fluctuation_functions(const SegmentCovariances& xy, const SegmentCovariances& xx,
                                     const SegmentCovariances& yy, std::span<const double> q_values);

// Profiles, detrending and fluctuation functions over all (q, s) in cfg.
FluctuationSet pair_pipeline(std::span<const double> x, std::span<const double> y, const DetrendConfig& cfg);

struct FitRange {
    std::size_t min_scale = 0;
    std::size_t max_scale = 0;
};

struct LogLogFit {
    double slope = 0.0;
    double r2 = 0.0;
};

// OLS slope of log(value) on log(scale). Empty when any value is <= 0.
std::optional<LogLogFit> fit_loglog(std::span<const double> scales, std::span<const double> values);

struct ExponentEstimate {
    double q = 0.0;
    std::optional<LogLogFit> h_x;
    std::optional<LogLogFit> h_y;
    std::optional<LogLogFit> lambda_xy;  // absent when F_xy <= 0 somewhere in range
};

struct ScalingExponents {
    FitRange fit_range;
    std::vector<ExponentEstimate> per_q;

    const ExponentEstimate& at(double q) const;
};

ScalingExponents estimate_exponents(const FluctuationSet& fs, FitRange range);

// Columns: pair,q,s,Fxy,Fxx,Fyy
void write_fluctuation_header(std::ostream& out);
void write_fluctuations(std::ostream& out, const std::string& pair, const FluctuationSet& fs);

}  // namespace qmst
