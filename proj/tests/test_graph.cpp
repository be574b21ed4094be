#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "qmst/error.hpp"
#include "qmst/graph.hpp"
#include "qmst/synth.hpp"

using namespace qmst;

namespace {

Eigen::MatrixXd random_distances(int n, Rng& rng) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = 2.0 * rng.uniform();
    }
    return d;
}

oracle::Matrix to_rows(const Eigen::MatrixXd& m) {
    oracle::Matrix out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    }
    return out;
}

Adjacency star(std::size_t n) {
    std::vector<TreeEdge> e;
    for (std::size_t j = 1; j < n; ++j) e.push_back({0, j, 1.0});
    return adjacency_from_edges(n, e);
}

Adjacency path(std::size_t n) {
    std::vector<TreeEdge> e;
    for (std::size_t j = 1; j < n; ++j) e.push_back({j - 1, j, 1.0});
    return adjacency_from_edges(n, e);
}

std::vector<std::string> labels(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("n" + std::to_string(i));
    return out;
}

// Random labelled tree from a random Pruefer sequence.
std::vector<TreeEdge> random_tree(std::size_t n, Rng& rng) {
    std::vector<std::size_t> seq(n - 2);
    for (auto& v : seq) v = static_cast<std::size_t>(rng.uniform() * n);
    std::vector<TreeEdge> out;
    for (const auto& e : oracle::pruefer_decode(seq, n)) out.push_back({e.i, e.j, 1.0});
    return out;
}

}  // namespace

TEST_CASE("two nodes") {
    Eigen::MatrixXd d(2, 2);
    d << 0, 0.7, 0.7, 0;
    auto t = build_mst(d);
    REQUIRE(t.edges.size() == 1);
    CHECK(t.edges[0].i == 0);
    CHECK(t.edges[0].j == 1);
    auto m = tree_metrics(t);
    CHECK(m.avg_path_length == 1.0);
    CHECK(m.k_max == 1);
}

TEST_CASE("four-node example") {
    Eigen::MatrixXd d(4, 4);
    d << 0, 1, 4, 4, 1, 0, 2, 4, 4, 2, 0, 3, 4, 4, 3, 0;
    auto t = build_mst(d);
    CHECK(t.total_weight() == 6.0);
    std::vector<std::pair<std::size_t, std::size_t>> got;
    for (const auto& e : t.edges) got.emplace_back(e.i, e.j);
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {2, 3}});
    CHECK(oracle::brute_force_mst_weight(to_rows(d)) == 6.0);
}

TEST_CASE("spanning tree weight is optimal") {
    Rng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 4 + trial % 4;
        auto d = random_distances(n, rng);
        auto t = build_mst(d);
        CHECK(t.edges.size() == static_cast<std::size_t>(n - 1));
        CHECK(is_connected(t.adjacency));
        CHECK(std::fabs(t.total_weight() - oracle::brute_force_mst_weight(to_rows(d))) <= 1e-12);
    }
}

TEST_CASE("no random spanning tree is lighter") {
    Rng rng(7);
    auto d = random_distances(25, rng);
    double best = build_mst(d).total_weight();
    for (int k = 0; k < 1000; ++k) {
        double w = 0.0;
        for (const auto& e : random_tree(25, rng)) w += d(e.i, e.j);
        CHECK(best <= w);
    }
}

TEST_CASE("monotone transform keeps the edge set") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        auto d = random_distances(15, rng);
        auto a = build_mst(d);
        auto b = build_mst(d.cwiseProduct(d));
        CHECK(a.adjacency == b.adjacency);
    }
}

TEST_CASE("ties resolve deterministically") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Ones(4, 4);
    d.diagonal().setZero();
    auto t = build_mst(d);
    for (const auto& e : t.edges) CHECK(e.i == 0);
}

TEST_CASE("invalid distance matrices") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d(0, 1) = 1.0;
    CHECK_THROWS(build_mst(d));
    d(1, 0) = 1.0;
    d(0, 2) = d(2, 0) = -0.5;
    CHECK_THROWS(build_mst(d));
    d(0, 2) = d(2, 0) = std::nan("");
    CHECK_THROWS(build_mst(d));
}

TEST_CASE("star and path metrics") {
    auto s = tree_from_edges(labels(4), {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}});
    auto ms = tree_metrics(s);
    CHECK(ms.k_max == 3);
    CHECK(ms.k_argmax == "n0");
    CHECK(ms.avg_path_length == doctest::Approx(1.5));
    auto p = tree_from_edges(labels(4), {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
    auto mp = tree_metrics(p);
    CHECK(mp.k_max == 2);
    CHECK(mp.k_argmax == "n1");
    CHECK(mp.avg_path_length == doctest::Approx(10.0 / 6.0));
    CHECK(mp.diameter == 3);
}

TEST_CASE("tree metric bounds on random trees") {
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
        std::size_t n = 3 + static_cast<std::size_t>(rng.uniform() * 30);
        auto t = tree_from_edges(labels(n), random_tree(n, rng));
        auto m = tree_metrics(t);
        CHECK(m.avg_path_length <= m.diameter);
        CHECK(m.avg_path_length >= 1.0);
        CHECK(m.k_max <= static_cast<int>(n) - 1);
        auto hops = hop_distances(t.adjacency);
        auto ref = oracle::hop_distances(to_rows(t.adjacency));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) CHECK(hops(i, j) == ref[i][j]);
        }
    }
}

TEST_CASE("edge lists that are not trees") {
    CHECK_THROWS(tree_from_edges(labels(4), {{0, 1, 1}, {1, 2, 1}}));
    CHECK_THROWS(tree_from_edges(labels(4), {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}));
    CHECK_THROWS(tree_from_edges(labels(3), {{0, 1, 1}, {1, 5, 1}}));
}

TEST_CASE("DeltaCon0") {
    auto s4 = star(4), p4 = path(4);
    CHECK(deltacon0(s4, s4) == 0.0);
    double d = deltacon0(s4, p4);
    CHECK(d > 0.0);
    CHECK(std::fabs(d - oracle::deltacon0(to_rows(s4), to_rows(p4))) < 1e-9);
    CHECK(deltacon0(p4, s4) == d);
    Rng rng(12);
    for (int k = 0; k < 20; ++k) {
        auto a = adjacency_from_edges(12, random_tree(12, rng));
        auto b = adjacency_from_edges(12, random_tree(12, rng));
        double v = deltacon0(a, b);
        CHECK(v >= 0.0);
        CHECK(std::fabs(v - oracle::deltacon0(to_rows(a), to_rows(b))) < 1e-9);
        CHECK(v == deltacon0(b, a));
    }
    CHECK_THROWS(deltacon0(star(4), star(5)));
}

TEST_CASE("resistance distance") {
    auto s4 = star(4), p4 = path(4);
    CHECK(resistance_distance(p4, p4) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(resistance_distance(p4, s4) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(resistance_distance(s4, p4) == resistance_distance(p4, s4));
    std::vector<TreeEdge> rev;
    for (std::size_t j = 1; j < 4; ++j) rev.push_back({3 - j, 4 - j, 1.0});
    auto r4 = adjacency_from_edges(4, {{0, 2, 1}, {2, 1, 1}, {1, 3, 1}});
    CHECK(std::fabs(resistance_distance(p4, r4) - oracle::resistance_distance(to_rows(p4), to_rows(r4))) < 1e-9);
    CHECK(resistance_distance(p4, adjacency_from_edges(4, rev)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("effective resistance equals hop count on trees") {
    Rng rng(99);
    for (int k = 0; k < 30; ++k) {
        std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 40);
        Adjacency a = n == 2 ? path(2) : adjacency_from_edges(n, random_tree(n, rng));
        auto r = effective_resistance(a);
        auto h = hop_distances(a);
        CHECK((r - h.cast<double>()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("adjacency checks") {
    Adjacency a = path(3);
    a(0, 0) = 1;
    CHECK_THROWS(deltacon0(a, path(3)));
    Adjacency b = path(3);
    b(0, 2) = 1;
    CHECK_THROWS(resistance_distance(b, path(3)));
    Adjacency c = Adjacency::Zero(3, 3);
    c(0, 1) = c(1, 0) = 1;
    CHECK_THROWS_AS(effective_resistance(c), DataError);
}

TEST_CASE("union-find") {
    UnionFind uf(5);
    CHECK(uf.unite(0, 1));
    CHECK(uf.unite(3, 4));
    CHECK_FALSE(uf.unite(1, 0));
    CHECK(uf.unite(1, 4));
    CHECK(uf.find(0) == uf.find(3));
    CHECK(uf.find(2) != uf.find(0));
}
