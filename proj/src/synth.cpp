#include "qmst/synth.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <unsupported/Eigen/FFT>

#include "qmst/error.hpp"
#include "qmst/format.hpp"

namespace qmst {

namespace {

bool is_power_of_two(std::size_t n) {
    return n > 0 && (n & (n - 1)) == 0;
}

// Stream for the common factor of a panel; assets use seed ^ i.
constexpr std::uint64_t kFactorStream = 0x9E3779B97F4A7C15ULL;

}  // namespace

double Rng::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, uniform());
}

double fgn_autocovariance(double hurst, std::size_t lag) {
    const double h2 = 2.0 * hurst;
    const double k = static_cast<double>(lag);
    if (lag == 0) return 1.0;
    return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(k - 1.0, h2));
}

Series gen_fgn(double hurst, std::size_t length, std::uint64_t seed) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw ConfigError("Hurst exponent must lie in (0, 1), got " + format_double(hurst));
    if (!is_power_of_two(length)) throw ConfigError("fGn length must be a power of two, got " + std::to_string(length));

    const std::size_t n = length;
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= n; ++k) row[k] = fgn_autocovariance(hurst, k);
    for (std::size_t k = n + 1; k < m; ++k) row[k] = fgn_autocovariance(hurst, m - k);

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, row);
    std::vector<double> lambda(m);
    double peak = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        lambda[k] = spectrum[k].real();
        peak = std::max(peak, std::fabs(lambda[k]));
    }
    for (double& l : lambda) {
        if (l < -1e-10 * peak) throw ConfigError("circulant embedding has a negative eigenvalue");
        l = std::max(l, 0.0);
    }

    Rng rng(seed);
    std::vector<std::complex<double>> w(m);
    const double md = static_cast<double>(m);
    w[0] = std::sqrt(lambda[0] / md) * rng.normal();
    for (std::size_t k = 1; k < n; ++k) {
        double scale = std::sqrt(lambda[k] / (2.0 * md));
        double re = rng.normal();
        double im = rng.normal();
        w[k] = {scale * re, scale * im};
        w[m - k] = std::conj(w[k]);
    }
    w[n] = std::sqrt(lambda[n] / md) * rng.normal();

    std::vector<std::complex<double>> x;
    fft.fwd(x, w);
    Series out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = x[j].real();
    return out;
}

Series cascade_measure(double weight, int depth, std::uint64_t seed) {
    if (!(weight > 0.5 && weight < 1.0)) throw ConfigError("cascade weight must lie in (0.5, 1), got " + format_double(weight));
    if (depth < 1 || depth > 30) throw ConfigError("cascade depth must lie in 1..30");
    Rng rng(seed);
    Series mu{1.0};
    for (int level = 0; level < depth; ++level) {
        Series next(mu.size() * 2);
        for (std::size_t c = 0; c < mu.size(); ++c) {
            bool left_heavy = rng.coin();
            double wl = left_heavy ? weight : 1.0 - weight;
            next[2 * c] = mu[c] * wl;
            next[2 * c + 1] = mu[c] * (1.0 - wl);
        }
        mu = std::move(next);
    }
    return mu;
}

Series gen_cascade(double weight, int depth, std::uint64_t seed) {
    if (depth < 10) throw ConfigError("cascade depth must be at least 10, got " + std::to_string(depth));
    Series mu = cascade_measure(weight, depth, seed);
    double mean = 0.0;
    for (double v : mu) mean += v;
    mean /= static_cast<double>(mu.size());
    for (double& v : mu) v -= mean;
    return mu;
}

double cascade_hurst(double weight, double q) {
    return 1.0 / q - std::log2(std::pow(weight, q) + std::pow(1.0 - weight, q)) / q;
}

std::pair<Series, Series> gen_corr_pair(double r, std::size_t length, std::uint64_t seed) {
    if (!(r >= -1.0 && r <= 1.0)) throw ConfigError("correlation must lie in [-1, 1], got " + format_double(r));
    Rng rx(seed ^ 0);
    Rng ry(seed ^ 1);
    const double c = std::sqrt(1.0 - r * r);
    Series x(length), y(length);
    for (std::size_t k = 0; k < length; ++k) {
        x[k] = rx.normal();
        y[k] = r * x[k] + c * ry.normal();
    }
    return {std::move(x), std::move(y)};
}

std::vector<std::int64_t> minute_grid(std::size_t length) {
    std::vector<std::int64_t> t(length);
    for (std::size_t m = 0; m < length; ++m) t[m] = 60'000LL * static_cast<std::int64_t>(m + 1);
    return t;
}

namespace {

ReturnPanel empty_panel(std::size_t assets, std::size_t length) {
    ReturnPanel p;
    p.timestamps = minute_grid(length);
    for (std::size_t i = 0; i < assets; ++i) p.assets.push_back("A" + std::to_string(i + 1));
    p.returns.assign(assets, Series(length));
    return p;
}

}  // namespace

ReturnPanel gen_factor_panel(std::size_t assets, std::size_t length, double beta, double sigma, std::uint64_t seed) {
    if (assets < 2) throw ConfigError("factor panel needs at least 2 assets");
    if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
    ReturnPanel p = empty_panel(assets, length);
    Rng zr(seed ^ kFactorStream);
    Series z(length);
    for (double& v : z) v = zr.normal();
    for (std::size_t i = 0; i < assets; ++i) {
        Rng er(seed ^ i);
        for (std::size_t k = 0; k < length; ++k) p.returns[i][k] = beta * z[k] + sigma * er.normal();
    }
    return p;
}

std::size_t crash_burst_start(std::size_t length, std::size_t crash_at) {
    std::size_t half = kCrashBurstLength / 2;
    std::size_t start = crash_at > half ? crash_at - half : 0;
    if (start + kCrashBurstLength > length) start = length - kCrashBurstLength;
    return start;
}

ReturnPanel gen_crash_panel(std::size_t assets, std::size_t length, double jump, std::size_t crash_at, double sigma,
                            std::uint64_t seed) {
    if (assets < 10) throw ConfigError("crash panel needs at least 10 assets");
    if (crash_at == 0 || crash_at >= length) throw ConfigError("crash time must lie strictly inside the series");
    if (!(jump < 0.0)) throw ConfigError("crash jump must be negative");
    if (!(sigma > 0.0)) throw ConfigError("noise sigma must be > 0");
    if (length < kCrashBurstLength) throw ConfigError("series shorter than the crash burst");
    ReturnPanel p = empty_panel(assets, length);
    const std::size_t start = crash_burst_start(length, crash_at);
    for (std::size_t i = 0; i < assets; ++i) {
        Rng er(seed ^ i);
        for (std::size_t k = 0; k < length; ++k) p.returns[i][k] = sigma * er.normal();
        for (std::size_t k = start; k < start + kCrashBurstLength; ++k) p.returns[i][k] += jump;
    }
    return p;
}

SynthKind parse_synth_kind(const std::string& name) {
    if (name == "fgn") return SynthKind::Fgn;
    if (name == "cascade") return SynthKind::Cascade;
    if (name == "corr_pair") return SynthKind::CorrPair;
    if (name == "factor_panel") return SynthKind::FactorPanel;
    if (name == "crash_panel") return SynthKind::CrashPanel;
    throw ConfigError("unknown synth kind '" + name + "'");
}

std::string to_string(SynthKind kind) {
    switch (kind) {
        case SynthKind::Fgn: return "fgn";
        case SynthKind::Cascade: return "cascade";
        case SynthKind::CorrPair: return "corr_pair";
        case SynthKind::FactorPanel: return "factor_panel";
        case SynthKind::CrashPanel: return "crash_panel";
    }
    return "unknown";
}

void SynthSpec::validate() const {
    switch (kind) {
        case SynthKind::Fgn:
            if (!(hurst > 0.0 && hurst < 1.0)) throw ConfigError("H must lie in (0, 1), got " + format_double(hurst));
            if (!is_power_of_two(length)) throw ConfigError("fGn length must be a power of two");
            break;
        case SynthKind::Cascade:
            if (!(weight > 0.5 && weight < 1.0)) throw ConfigError("cascade weight must lie in (0.5, 1)");
            if (depth < 10 || depth > 30) throw ConfigError("cascade depth must lie in 10..30");
            break;
        case SynthKind::CorrPair:
            if (!(r >= -1.0 && r <= 1.0)) throw ConfigError("r must lie in [-1, 1]");
            if (length < 2) throw ConfigError("length must be >= 2");
            break;
        case SynthKind::FactorPanel:
            if (assets < 2) throw ConfigError("factor panel needs at least 2 assets");
            if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
            if (length < 2) throw ConfigError("length must be >= 2");
            break;
        case SynthKind::CrashPanel:
            if (assets < 10) throw ConfigError("crash panel needs at least 10 assets");
            if (!(jump < 0.0)) throw ConfigError("crash jump must be negative");
            if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
            if (length < kCrashBurstLength + 2) throw ConfigError("series too short for a crash burst");
            if (crash_at >= length) throw ConfigError("crash time beyond the series");
            break;
    }
}

ReturnPanel SynthSpec::generate() const {
    validate();
    switch (kind) {
        case SynthKind::Fgn: {
            ReturnPanel p = empty_panel(1, length);
            p.assets = {"FGN"};
            p.returns[0] = gen_fgn(hurst, length, seed);
            return p;
        }
        case SynthKind::Cascade: {
            Series s = gen_cascade(weight, depth, seed);
            ReturnPanel p = empty_panel(1, s.size());
            p.assets = {"CASCADE"};
            p.returns[0] = std::move(s);
            return p;
        }
        case SynthKind::CorrPair: {
            auto [x, y] = gen_corr_pair(r, length, seed);
            ReturnPanel p = empty_panel(2, length);
            p.assets = {"X", "Y"};
            p.returns[0] = std::move(x);
            p.returns[1] = std::move(y);
            return p;
        }
        case SynthKind::FactorPanel:
            return gen_factor_panel(assets, length, beta, sigma, seed);
        case SynthKind::CrashPanel:
            return gen_crash_panel(assets, length, jump, crash_at == 0 ? length / 2 : crash_at, sigma, seed);
    }
    throw ConfigError("unknown synth kind");
}

}  // namespace qmst
