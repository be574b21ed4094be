#include <doctest.h>

#include <cmath>

#include "qmst/error.hpp"
#include "qmst/parallel.hpp"
#include "qmst/rhoq.hpp"
#include "qmst/synth.hpp"

using namespace qmst;

namespace {

ReturnPanel noise_panel(std::size_t n, std::size_t t, std::uint64_t seed) {
    ReturnPanel p;
    p.timestamps = minute_grid(t);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        p.assets.push_back("N" + std::to_string(i));
        Series x(t);
        for (double& v : x) v = rng.normal();
        p.returns.push_back(std::move(x));
    }
    return p;
}

double pearson(const Series& x, const Series& y) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("rho of a series with itself and its negation") {
    auto p = noise_panel(1, 2000, 4);
    Series x = p.returns[0], nx(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) nx[k] = -x[k];
    DetrendConfig cfg;
    cfg.q_values = {0.5, 1, 2, 4};
    cfg.scales = {10, 32, 128};
    auto same = pair_pipeline(x, x, cfg);
    auto neg = pair_pipeline(x, nx, cfg);
    for (double q : cfg.q_values) {
        for (std::size_t s : cfg.scales) {
            CHECK(rho_q(same, q, s) == 1.0);
            CHECK(rho_q(neg, q, s) == -1.0);
        }
    }
}

TEST_CASE("rho_q at q = 2 is the DCCA coefficient") {
    CHECK(rho_q(0.5, 1.0, 1.0, 2.0) == doctest::Approx(0.25));
    CHECK(rho_q(-0.5, 1.0, 1.0, 2.0) == doctest::Approx(-0.25));
    CHECK(rho_q(1.0, 2.0, 0.5, 4.0) == 1.0);
    CHECK_THROWS_AS(rho_q(0.0, 0.0, 1.0, 2.0), DegenerateError);
    CHECK_THROWS_AS(rho_q(1.5, 1.0, 1.0, 1.0), std::logic_error);
    CHECK(rho_q(1.0 + 1e-13, 1.0, 1.0, 1.0) == 1.0);
}

TEST_CASE("correlated Gaussian pair converges to its population correlation") {
    double mean = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto [x, y] = gen_corr_pair(0.8, 1 << 16, seed * 7919);
        DetrendConfig cfg;
        cfg.q_values = {2.0};
        cfg.scales = {32};
        mean += rho_q(pair_pipeline(x, y, cfg), 2.0, 32);
    }
    CHECK(std::fabs(mean / 20.0 - 0.8) < 0.05);
}

TEST_CASE("identical assets give an all-ones matrix") {
    auto p = noise_panel(1, 500, 9);
    p.assets.push_back("copy");
    p.returns.push_back(p.returns[0]);
    auto c = corr_matrix(p, 1.0, 10, DetrendConfig{});
    CHECK(c.values(0, 1) == 1.0);
    CHECK(c.values(1, 0) == 1.0);
    CHECK(c.values(0, 0) == 1.0);
}

TEST_CASE("independent white noise gives near-zero off-diagonals") {
    auto p = noise_panel(3, 1 << 15, 77);
    auto c = corr_matrix(p, 2.0, 10, DetrendConfig{});
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i != j) CHECK(std::fabs(c.values(i, j)) < 0.05);
        }
    }
}

TEST_CASE("exact one-factor panel gives unit correlations") {
    auto p = noise_panel(1, 1000, 3);
    Series z = p.returns[0];
    p.returns.clear();
    p.assets.clear();
    for (int i = 0; i < 4; ++i) {
        Series r(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) r[k] = (0.5 + i) * z[k];
        p.returns.push_back(r);
        p.assets.push_back("F" + std::to_string(i));
    }
    for (double q : {1.0, 4.0}) {
        auto c = corr_matrix(p, q, 10, DetrendConfig{});
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) CHECK(c.values(i, j) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("positive rescaling leaves rho unchanged") {
    auto p = noise_panel(2, 3000, 13);
    auto [x, y] = gen_corr_pair(0.5, 3000, 5);
    DetrendConfig cfg;
    cfg.q_values = {1, 2, 4};
    cfg.scales = {10, 50};
    Series y8(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) y8[k] = 8.0 * y[k];
    auto a = pair_pipeline(x, y, cfg), b = pair_pipeline(x, y8, cfg);
    for (double q : cfg.q_values) {
        for (std::size_t s : cfg.scales) CHECK(rho_q(a, q, s) == doctest::Approx(rho_q(b, q, s)).epsilon(1e-14));
    }
}

TEST_CASE("distance transform") {
    QCorrMatrix c;
    c.values.resize(3, 3);
    c.values << 1, 1, -1, 1, 1, 0.5, -1, 0.5, 1;
    auto d = to_distance(c);
    CHECK(d.values(0, 1) == 0.0);
    CHECK(d.values(0, 2) == 2.0);
    CHECK(d.values(1, 2) == doctest::Approx(1.0));
    CHECK(d.values(0, 0) == 0.0);
}

TEST_CASE("cached panel evaluation is bit-identical to per-pair evaluation") {
    auto p = noise_panel(9, 2000, 21);
    DetrendConfig cfg;
    for (double q : {0.5, 1.0, 2.0, 4.0}) {
        for (std::size_t s : {10, 40}) {
            auto fast = corr_matrix(p, q, s, cfg);
            auto slow = corr_matrix_serial(p, q, s, cfg);
            CHECK(fast.values == slow.values);
        }
    }
}

TEST_CASE("result does not depend on the thread count") {
    auto p = noise_panel(12, 3000, 22);
    const int before = max_threads();
    set_threads(1);
    auto one = corr_matrix(p, 4.0, 10, DetrendConfig{});
    set_threads(4);
    auto four = corr_matrix(p, 4.0, 10, DetrendConfig{});
    set_threads(before);
    CHECK(one.values == four.values);
}

TEST_CASE("q = 2 matrix approaches the Pearson matrix on i.i.d. data") {
    auto p = noise_panel(5, 1 << 15, 31);
    Rng rng(99);
    // Mix in a common component so the Pearson matrix is not trivial.
    Series z(1 << 15);
    for (double& v : z) v = rng.normal();
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t k = 0; k < z.size(); ++k) p.returns[i][k] += 0.3 * (i + 1) * z[k];
    }
    auto c = corr_matrix(p, 2.0, 10, DetrendConfig{});
    double worst = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            worst = std::max(worst, std::fabs(c.values(i, j) - pearson(p.returns[i], p.returns[j])));
        }
    }
    CHECK(worst < 0.1);
}

TEST_CASE("metric property on random panels") {
    Rng pick(5);
    for (double q : {1.0, 4.0}) {
        for (int panel = 0; panel < 4; ++panel) {
            auto d = to_distance(corr_matrix(noise_panel(12, 1500, 300 + panel), q, 10, DetrendConfig{})).values;
            for (int t = 0; t < 2500; ++t) {
                auto i = static_cast<Eigen::Index>(pick.uniform() * 12);
                auto j = static_cast<Eigen::Index>(pick.uniform() * 12);
                auto k = static_cast<Eigen::Index>(pick.uniform() * 12);
                CHECK(d(i, k) <= d(i, j) + d(j, k) + 1e-9);
            }
        }
    }
}

TEST_CASE("flat assets are reported as degenerate") {
    auto p = noise_panel(3, 400, 2);
    p.returns[1].assign(400, 0.0);
    DetrendConfig cfg;
    CHECK(degenerate_assets(p, 10, cfg) == std::vector<std::size_t>{1});
    try {
        corr_matrix(p, 1.0, 10, cfg);
        FAIL("expected a degenerate error");
    } catch (const DegenerateError& e) {
        CHECK(e.assets() == std::vector<std::size_t>{1});
    }
}

TEST_CASE("non-positive q is rejected") {
    auto p = noise_panel(2, 300, 1);
    CHECK_THROWS_AS(corr_matrix(p, 0.0, 10, DetrendConfig{}), ConfigError);
    CHECK_THROWS_AS(corr_matrix(p, -2.0, 10, DetrendConfig{}), ConfigError);
}
