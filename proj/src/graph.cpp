#include "qmst/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "qmst/error.hpp"

namespace qmst {

namespace {

void check_adjacency(const Adjacency& a, const char* what) {
    if (a.rows() != a.cols()) throw DataError(std::string(what) + ": adjacency not square");
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            double v = a(i, j);
            if (v != 0.0 && v != 1.0) throw DataError(std::string(what) + ": adjacency not binary");
            if (v != a(j, i)) throw DataError(std::string(what) + ": adjacency not symmetric");
            if (i == j && v != 0.0) throw DataError(std::string(what) + ": self loop");
        }
    }
}

void check_same_size(const Adjacency& a1, const Adjacency& a2) {
    check_adjacency(a1, "first graph");
    check_adjacency(a2, "second graph");
    if (a1.rows() != a2.rows()) {
        throw DataError("graphs have different node counts: " + std::to_string(a1.rows()) + " vs " +
                        std::to_string(a2.rows()));
    }
}

}  // namespace

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

bool UnionFind::unite(std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (rank_[x] < rank_[y]) std::swap(x, y);
    parent_[y] = x;
    if (rank_[x] == rank_[y]) ++rank_[x];
    return true;
}

double QMst::total_weight() const {
    double w = 0.0;
    for (const auto& e : edges) w += e.weight;
    return w;
}

Adjacency adjacency_from_edges(std::size_t n, const std::vector<TreeEdge>& edges) {
    Adjacency a = Adjacency::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& e : edges) {
        if (e.i >= n || e.j >= n || e.i == e.j) throw DataError("edge endpoint out of range");
        a(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = 1.0;
        a(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = 1.0;
    }
    return a;
}

QMst tree_from_edges(std::vector<std::string> labels, const std::vector<TreeEdge>& edges) {
    const std::size_t n = labels.size();
    if (n < 2) throw DataError("tree needs at least 2 nodes");
    if (edges.size() != n - 1) {
        throw DataError("tree on " + std::to_string(n) + " nodes needs " + std::to_string(n - 1) + " edges, got " +
                        std::to_string(edges.size()));
    }
    UnionFind uf(n);
    QMst t;
    t.assets = std::move(labels);
    t.degrees.assign(n, 0);
    for (auto e : edges) {
        if (e.i >= n || e.j >= n || e.i == e.j) throw DataError("edge endpoint out of range");
        if (e.i > e.j) std::swap(e.i, e.j);
        if (!uf.unite(e.i, e.j)) throw DataError("edge list contains a cycle");
        ++t.degrees[e.i];
        ++t.degrees[e.j];
        t.edges.push_back(e);
    }
    t.adjacency = adjacency_from_edges(n, t.edges);
    return t;
}

QMst build_mst(const Eigen::MatrixXd& d, std::vector<std::string> labels) {
    if (d.rows() != d.cols()) throw DataError("distance matrix not square");
    const auto n = static_cast<std::size_t>(d.rows());
    if (n < 2) throw DataError("MST needs at least 2 nodes");
    if (labels.empty()) {
        for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    }
    if (labels.size() != n) throw DataError("label count does not match distance matrix");

    std::vector<TreeEdge> candidates;
    candidates.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double w = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            double wt = d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            if (std::isnan(w) || !std::isfinite(w) || w < 0.0) {
                throw DataError("invalid distance at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            if (w != wt) throw DataError("distance matrix not symmetric");
            candidates.push_back({i, j, w});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const TreeEdge& a, const TreeEdge& b) {
        return std::tie(a.weight, a.i, a.j) < std::tie(b.weight, b.i, b.j);
    });

    UnionFind uf(n);
    QMst t;
    t.assets = std::move(labels);
    t.degrees.assign(n, 0);
    for (const auto& e : candidates) {
        if (!uf.unite(e.i, e.j)) continue;
        t.edges.push_back(e);
        ++t.degrees[e.i];
        ++t.degrees[e.j];
        if (t.edges.size() == n - 1) break;
    }
    t.adjacency = adjacency_from_edges(n, t.edges);
    return t;
}

QMst build_mst(const QDistMatrix& d) {
    QMst t = build_mst(d.values, d.assets);
    t.sectors = d.sectors;
    return t;
}

Eigen::MatrixXi hop_distances(const Adjacency& a) {
    const Eigen::Index n = a.rows();
    std::vector<std::vector<Eigen::Index>> nbr(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (a(i, j) != 0.0) nbr[static_cast<std::size_t>(i)].push_back(j);

    Eigen::MatrixXi dist = Eigen::MatrixXi::Constant(n, n, -1);
    std::queue<Eigen::Index> frontier;
    for (Eigen::Index src = 0; src < n; ++src) {
        dist(src, src) = 0;
        frontier.push(src);
        while (!frontier.empty()) {
            Eigen::Index u = frontier.front();
            frontier.pop();
            for (Eigen::Index v : nbr[static_cast<std::size_t>(u)]) {
                if (dist(src, v) < 0) {
                    dist(src, v) = dist(src, u) + 1;
                    frontier.push(v);
                }
            }
        }
    }
    return dist;
}

bool is_connected(const Adjacency& a) {
    if (a.rows() == 0) return true;
    Eigen::MatrixXi d = hop_distances(a);
    return (d.row(0).array() >= 0).all();
}

TreeMetrics tree_metrics(const QMst& t) {
    const std::size_t n = t.assets.size();
    if (n < 2 || t.edges.size() != n - 1) throw DataError("tree_metrics needs a spanning tree");
    TreeMetrics m;
    for (std::size_t i = 0; i < n; ++i) {
        int k = t.degrees[i];
        if (k > m.k_max || (k == m.k_max && t.assets[i] < m.k_argmax)) {
            m.k_max = k;
            m.k_argmax = t.assets[i];
        }
    }
    Eigen::MatrixXi hops = hop_distances(t.adjacency);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < hops.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < hops.cols(); ++j) {
            if (hops(i, j) < 0) throw DataError("tree is disconnected");
            sum += hops(i, j);
            m.diameter = std::max(m.diameter, hops(i, j));
        }
    }
    m.avg_path_length = sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
    return m;
}

Eigen::MatrixXd deltacon_affinity(const Adjacency& a, double eps) {
    const Eigen::Index n = a.rows();
    Eigen::VectorXd deg = a.rowwise().sum();
    Eigen::MatrixXd m = -eps * a;
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) += 1.0 + eps * eps * deg(i);
    // Strictly diagonally dominant for eps < 1 / (1 + max degree), hence SPD.
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw std::logic_error("DeltaCon system not positive definite");
    return llt.solve(Eigen::MatrixXd::Identity(n, n));
}

double deltacon0(const Adjacency& a1, const Adjacency& a2) {
    check_same_size(a1, a2);
    double kmax = std::max(a1.rowwise().sum().maxCoeff(), a2.rowwise().sum().maxCoeff());
    double eps = 1.0 / (1.0 + kmax);
    Eigen::MatrixXd s1 = deltacon_affinity(a1, eps);
    Eigen::MatrixXd s2 = deltacon_affinity(a2, eps);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s1.rows(); ++i) {
        for (Eigen::Index j = 0; j < s1.cols(); ++j) {
            double d = std::sqrt(std::max(0.0, s1(i, j))) - std::sqrt(std::max(0.0, s2(i, j)));
            acc += d * d;
        }
    }
    return std::sqrt(acc);
}

Eigen::MatrixXd effective_resistance(const Adjacency& a) {
    check_adjacency(a, "graph");
    if (!is_connected(a)) throw DataError("effective resistance needs a connected graph");
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd lap = -a;
    Eigen::VectorXd deg = a.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i) lap(i, i) = deg(i);
    // L+ = (L + J/n)^{-1} - J/n for a connected graph.
    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd shifted = lap.array() + inv_n;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
    Eigen::MatrixXd pinv = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
    pinv.array() -= inv_n;
    Eigen::MatrixXd r(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) r(i, j) = i == j ? 0.0 : pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j);
    return r;
}

double resistance_distance(const Adjacency& a1, const Adjacency& a2) {
    check_same_size(a1, a2);
    Eigen::MatrixXd r1 = effective_resistance(a1);
    Eigen::MatrixXd r2 = effective_resistance(a2);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r1.rows(); ++i)
        for (Eigen::Index j = i + 1; j < r1.cols(); ++j) acc += std::fabs(r1(i, j) - r2(i, j));
    return acc;
}

}  // namespace qmst
