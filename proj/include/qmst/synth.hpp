#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "qmst/panel.hpp"

namespace qmst {

// std::mt19937_64 (fully specified by the C++ standard) with uniforms built
// from the top 53 bits and normals from the inverse normal CDF, so streams
// are identical on every conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

// Autocovariance of unit-variance fractional Gaussian noise at lag k.
double fgn_autocovariance(double hurst, std::size_t lag);

// Exact fGn by circulant embedding (Davies-Harte). length must be a power of
// two. Throws ConfigError when the embedding spectrum is negative.
Series gen_fgn(double hurst, std::size_t length, std::uint64_t seed);

// Binomial multiplicative cascade measure of 2^depth cells summing to 1.
// At each split one child, chosen by coin flip, receives weight a.
Series cascade_measure(double weight, int depth, std::uint64_t seed);

// Cascade measure minus its mean.
Series gen_cascade(double weight, int depth, std::uint64_t seed);

// h(q) = 1/q - log2(a^q + (1-a)^q) / q for the cascade above.
double cascade_hurst(double weight, double q);

// Jointly Gaussian i.i.d. pair with correlation r.
std::pair<Series, Series> gen_corr_pair(double r, std::size_t length, std::uint64_t seed);

// r_i = beta * Z + sigma * e_i with standard normal Z and e_i.
ReturnPanel gen_factor_panel(std::size_t assets, std::size_t length, double beta, double sigma, std::uint64_t seed);

inline constexpr std::size_t kCrashBurstLength = 10;

// First sample of the crash burst centred at crash_at.
std::size_t crash_burst_start(std::size_t length, std::size_t crash_at);

// i.i.d. N(0, sigma^2) returns with a common return `jump` added to every
// asset on kCrashBurstLength consecutive samples centred at crash_at.
ReturnPanel gen_crash_panel(std::size_t assets, std::size_t length, double jump, std::size_t crash_at, double sigma,
                            std::uint64_t seed);

enum class SynthKind { Fgn, Cascade, CorrPair, FactorPanel, CrashPanel };

SynthKind parse_synth_kind(const std::string& name);
std::string to_string(SynthKind kind);

struct SynthSpec {
    SynthKind kind = SynthKind::Fgn;
    std::size_t length = 1 << 16;  // samples; cascades use 2^depth instead
    std::uint64_t seed = 1;
    double hurst = 0.5;
    double weight = 0.7;
    int depth = 16;
    double r = 0.0;
    std::size_t assets = 10;
    double beta = 1.0;
    double sigma = 1.0;
    double jump = -10.0;
    std::size_t crash_at = 0;  // 0 = middle of the series

    void validate() const;
    // Wraps the generator output as a return panel with 1-minute epoch-ms
    // timestamps starting at one minute.
    ReturnPanel generate() const;
};

// Epoch-ms timestamps 60000 * (1..length).
std::vector<std::int64_t> minute_grid(std::size_t length);

}  // namespace qmst
