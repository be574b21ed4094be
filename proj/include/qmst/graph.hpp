#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmst/rhoq.hpp"

namespace qmst {

// Binary symmetric adjacency matrix stored as doubles (0 or 1).
using Adjacency = Eigen::MatrixXd;

class UnionFind {
public:
    explicit UnionFind(std::size_t n);

    std::size_t find(std::size_t x);
    // Returns false when x and y were already connected.
    bool unite(std::size_t x, std::size_t y);

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> rank_;
};

struct TreeEdge {
    std::size_t i = 0;  // i < j
    std::size_t j = 0;
    double weight = 0.0;
};

struct QMst {
    std::vector<std::string> assets;
    std::vector<std::string> sectors;
    std::vector<TreeEdge> edges;  // in insertion (Kruskal) order
    Adjacency adjacency;
    std::vector<int> degrees;

    double total_weight() const;
};

// Kruskal over all pairs ordered by (weight, i, j). Distances must be finite,
// non-negative and symmetric.
QMst build_mst(const Eigen::MatrixXd& d, std::vector<std::string> labels = {});
QMst build_mst(const QDistMatrix& d);

// Tree from an explicit edge list (for imported trees).
QMst tree_from_edges(std::vector<std::string> labels, const std::vector<TreeEdge>& edges);

Adjacency adjacency_from_edges(std::size_t n, const std::vector<TreeEdge>& edges);

struct TreeMetrics {
    int k_max = 0;
    std::string k_argmax;          // ties go to the lexicographically smallest label
    double avg_path_length = 0.0;  // mean hop count over unordered pairs
    int diameter = 0;
};

TreeMetrics tree_metrics(const QMst& t);

// All-pairs hop counts by BFS; -1 for unreachable pairs.
Eigen::MatrixXi hop_distances(const Adjacency& a);

bool is_connected(const Adjacency& a);

// DeltaCon0 with eps = 1 / (1 + max degree over both graphs) and the root
// Euclidean distance between the affinity matrices.
double deltacon0(const Adjacency& a1, const Adjacency& a2);

// Affinity (I + eps^2 D - eps A)^{-1}.
Eigen::MatrixXd deltacon_affinity(const Adjacency& a, double eps);

// Effective resistances of the unit-weight graph from the Laplacian
// pseudoinverse. Throws DataError on a disconnected graph.
Eigen::MatrixXd effective_resistance(const Adjacency& a);

// sum over i < j of |R1_ij - R2_ij|.
double resistance_distance(const Adjacency& a1, const Adjacency& a2);

}  // namespace qmst
