#include "so3sync/topology.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

namespace so3sync {

std::vector<int> OrientedTree::neighbors(int agent) const {
    std::vector<int> out;
    for (int k : m_plus(agent)) out.push_back(edges_[static_cast<std::size_t>(k)].tail);
    for (int k : m_minus(agent)) out.push_back(edges_[static_cast<std::size_t>(k)].head);
    std::sort(out.begin(), out.end());
    return out;
}

int OrientedTree::edge_index(int a, int b) const {
    const int tail = std::min(a, b);
    const int head = std::max(a, b);
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        if (edges_[k].tail == tail && edges_[k].head == head) {
            return static_cast<int>(k);
        }
    }
    return -1;
}

OrientedTree validate_tree(const Graph& g) {
    const int n = g.n_agents;
    if (n < 2) {
        throw Error(Errc::InvalidGraph, "need at least 2 agents");
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& [a, b] : g.edges) {
        if (a < 0 || b < 0 || a >= n || b >= n) {
            throw Error(Errc::InvalidGraph, "agent id out of range");
        }
        if (a == b) {
            std::ostringstream os;
            os << "self-loop on agent " << a + 1;
            throw Error(Errc::InvalidGraph, os.str());
        }
        if (!seen.emplace(std::min(a, b), std::max(a, b)).second) {
            std::ostringstream os;
            os << "edge {" << a + 1 << "," << b + 1 << "} listed twice";
            throw Error(Errc::DuplicateEdge, os.str());
        }
    }
    const int m = static_cast<int>(seen.size());
    if (m >= n) {
        throw Error(Errc::HasCycle, "a tree on N agents has exactly N-1 edges");
    }
    if (m < n - 1) {
        throw Error(Errc::NotConnected, "fewer than N-1 edges");
    }

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [a, b] : seen) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    std::queue<int> frontier;
    frontier.push(0);
    visited[0] = true;
    int count = 1;
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (!visited[static_cast<std::size_t>(w)]) {
                visited[static_cast<std::size_t>(w)] = true;
                ++count;
                frontier.push(w);
            }
        }
    }
    if (count != n) {
        throw Error(Errc::NotConnected, "graph is not connected");
    }

    OrientedTree tree;
    tree.n_ = n;
    tree.m_plus_.resize(static_cast<std::size_t>(n));
    tree.m_minus_.resize(static_cast<std::size_t>(n));
    // std::set orders pairs by (smaller id, larger id) = (tail, head).
    for (const auto& [tail, head] : seen) {
        const int k = static_cast<int>(tree.edges_.size());
        tree.edges_.push_back({head, tail});
        tree.m_plus_[static_cast<std::size_t>(head)].push_back(k);
        tree.m_minus_[static_cast<std::size_t>(tail)].push_back(k);
    }
    return tree;
}

EdgeAttitudes build_edge_attitudes(const OrientedTree& tree, std::span<const RotationMatrix> attitudes,
                                   const RotationMatrix& r0, int leader) {
    if (static_cast<int>(attitudes.size()) != tree.n_agents()) {
        throw Error(Errc::DimensionMismatch, "one attitude per agent required");
    }
    EdgeAttitudes ea;
    ea.rbar.reserve(tree.edges().size());
    for (const auto& e : tree.edges()) {
        ea.rbar.push_back(attitudes[static_cast<std::size_t>(e.head)].transpose() *
                          attitudes[static_cast<std::size_t>(e.tail)]);
    }
    ea.rbar_leader = r0.transpose() * attitudes[static_cast<std::size_t>(leader)];
    return ea;
}

Eigen::MatrixXd LMatrix::l2() const {
    const Eigen::Index rows = l_.rows() - 3;
    Eigen::MatrixXd out(rows, l_.cols());
    const Eigen::Index top = 3 * leader_;
    out.topRows(top) = l_.topRows(top);
    out.bottomRows(rows - top) = l_.bottomRows(rows - top);
    return out;
}

LMatrix build_l(const OrientedTree& tree, std::span<const Mat3> rbar, int leader) {
    const int n = tree.n_agents();
    if (static_cast<int>(rbar.size()) != tree.n_edges()) {
        throw Error(Errc::DimensionMismatch, "one relative attitude per edge required");
    }
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(3 * n, 3 * (n - 1));
    for (int k = 0; k < tree.n_edges(); ++k) {
        const auto& e = tree.edge(k);
        l.block<3, 3>(3 * e.head, 3 * k) = -rbar[static_cast<std::size_t>(k)];
        l.block<3, 3>(3 * e.tail, 3 * k) = Mat3::Identity();
    }
    return LMatrix(std::move(l), leader);
}

LMatrix build_l(const OrientedTree& tree, const EdgeAttitudes& ea, int leader) {
    std::vector<Mat3> raw;
    raw.reserve(ea.rbar.size());
    for (const auto& r : ea.rbar) raw.push_back(r.matrix());
    return build_l(tree, raw, leader);
}

double min_singular_l2(const LMatrix& l) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(l.l2());
    return svd.singularValues().minCoeff();
}

Eigen::VectorXd edge_velocities(const LMatrix& l, const Eigen::VectorXd& omega) {
    if (omega.size() != l.matrix().rows()) {
        throw Error(Errc::DimensionMismatch, "omega must have 3N entries");
    }
    return l.matrix().transpose() * omega;
}

Graph random_tree(int n, std::mt19937_64& rng) {
    if (n < 2) {
        throw Error(Errc::InvalidArgument, "random_tree needs n >= 2");
    }
    Graph g;
    g.n_agents = n;
    if (n == 2) {
        g.edges = {{0, 1}};
        return g;
    }
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<int> code(static_cast<std::size_t>(n - 2));
    for (auto& c : code) c = pick(rng);

    std::vector<int> degree(static_cast<std::size_t>(n), 1);
    for (int c : code) ++degree[static_cast<std::size_t>(c)];
    std::set<int> leaves;
    for (int v = 0; v < n; ++v) {
        if (degree[static_cast<std::size_t>(v)] == 1) leaves.insert(v);
    }
    for (int c : code) {
        const int leaf = *leaves.begin();
        leaves.erase(leaves.begin());
        g.edges.emplace_back(leaf, c);
        if (--degree[static_cast<std::size_t>(c)] == 1) leaves.insert(c);
    }
    const int a = *leaves.begin();
    const int b = *std::next(leaves.begin());
    g.edges.emplace_back(a, b);
    return g;
}

}  // namespace so3sync
