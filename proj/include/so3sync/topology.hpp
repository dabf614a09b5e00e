#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "so3sync/so3.hpp"

namespace so3sync {

/// Undirected interconnection graph. Agents are 0-based internally; the
/// scenario format and all printed output use 1-based ids.
struct Graph {
    int n_agents = 0;
    std::vector<std::pair<int, int>> edges;
};

/// One edge of the tree with its virtual orientation. The relative attitude
/// carried by the edge is R_head' R_tail.
struct OrientedEdge {
    int head = 0;
    int tail = 0;
};

/// A validated undirected tree with a fixed orientation on every edge.
///
/// Orientation: for an edge {i, j} with i < j the head is j and the tail is
/// i. Edges are indexed by ascending (tail, head).
class OrientedTree {
public:
    int n_agents() const { return n_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }

    const std::vector<OrientedEdge>& edges() const { return edges_; }
    const OrientedEdge& edge(int k) const { return edges_.at(static_cast<std::size_t>(k)); }

    /// Edges whose head is `agent` (M_i^+).
    const std::vector<int>& m_plus(int agent) const { return m_plus_.at(static_cast<std::size_t>(agent)); }
    /// Edges whose tail is `agent` (M_i^-).
    const std::vector<int>& m_minus(int agent) const { return m_minus_.at(static_cast<std::size_t>(agent)); }

    /// Neighbors of `agent`, ascending.
    std::vector<int> neighbors(int agent) const;

    /// Index of the edge joining a and b, or -1.
    int edge_index(int a, int b) const;

private:
    friend OrientedTree validate_tree(const Graph& g);

    int n_ = 0;
    std::vector<OrientedEdge> edges_;
    std::vector<std::vector<int>> m_plus_;
    std::vector<std::vector<int>> m_minus_;
};

/// Checks that `g` is an undirected tree and orients it.
///
/// Errors: InvalidGraph (N < 2, self-loop, out-of-range id), DuplicateEdge,
/// HasCycle (|E| >= N), NotConnected.
OrientedTree validate_tree(const Graph& g);

/// Relative attitudes along the tree and against the desired attitude.
struct EdgeAttitudes {
    std::vector<RotationMatrix> rbar;  ///< R_head' R_tail per edge
    RotationMatrix rbar_leader;        ///< R0' R_leader
};

EdgeAttitudes build_edge_attitudes(const OrientedTree& tree, std::span<const RotationMatrix> attitudes,
                                   const RotationMatrix& r0, int leader = 0);

/// The 3N x 3(N-1) block matrix L. Block (i, k) is -Rbar_k when i is the
/// head of edge k, I when i is its tail and zero otherwise.
class LMatrix {
public:
    LMatrix(Eigen::MatrixXd blocks, int leader) : l_(std::move(blocks)), leader_(leader) {}

    const Eigen::MatrixXd& matrix() const { return l_; }
    int leader() const { return leader_; }
    Mat3 block(int agent, int edge) const { return l_.block<3, 3>(3 * agent, 3 * edge); }

    /// Rows of the leader agent (L_1).
    Eigen::MatrixXd l1() const { return l_.middleRows(3 * leader_, 3); }
    /// L with the leader's rows removed (L_2).
    Eigen::MatrixXd l2() const;

private:
    Eigen::MatrixXd l_;
    int leader_;
};

/// Generic form over raw 3x3 blocks; used for the linearized matrix with
/// half-turn relative attitudes as well.
LMatrix build_l(const OrientedTree& tree, std::span<const Mat3> rbar, int leader = 0);
LMatrix build_l(const OrientedTree& tree, const EdgeAttitudes& ea, int leader = 0);

/// Smallest singular value of L_2.
double min_singular_l2(const LMatrix& l);

/// L' omega; component k equals omega_tail - Rbar_k' omega_head.
Eigen::VectorXd edge_velocities(const LMatrix& l, const Eigen::VectorXd& omega);

/// Uniform random labeled tree on n vertices (via a random Pruefer sequence).
Graph random_tree(int n, std::mt19937_64& rng);

}  // namespace so3sync
