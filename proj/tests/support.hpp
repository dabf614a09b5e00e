// Generators and independent reference computations shared by the tests.
// Oracles here deliberately avoid the library routine they check: rotations
// come from Eigen::AngleAxis, the polar factor from a symmetric square root,
// torques from an explicit neighbor loop.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "so3sync/analysis.hpp"
#include "so3sync/scenario.hpp"

namespace so3sync::testing {

#ifndef SO3SYNC_SCENARIO_DIR
#define SO3SYNC_SCENARIO_DIR "scenarios"
#endif

inline std::filesystem::path scenario_path(const std::string& name) {
    return std::filesystem::path(SO3SYNC_SCENARIO_DIR) / name;
}

inline constexpr double kPi = std::numbers::pi;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Vec3 vec(double lo = -1.0, double hi = 1.0) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

    Vec3 unit() {
        std::normal_distribution<double> nd;
        Vec3 v;
        do {
            v = Vec3(nd(rng_), nd(rng_), nd(rng_));
        } while (v.norm() < 1e-3);
        return v.normalized();
    }

    Mat3 mat(double lo = -1.0, double hi = 1.0) {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = uniform(lo, hi);
        return m;
    }

    /// Rotation built by Eigen, uniform angle in [-pi, pi].
    Mat3 rotation_matrix() { return Eigen::AngleAxisd(uniform(-kPi, kPi), unit()).toRotationMatrix(); }
    RotationMatrix rotation() { return RotationMatrix(rotation_matrix()); }

    Mat3 symmetric() {
        const Mat3 m = mat();
        return 0.5 * (m + m.transpose());
    }

    /// Symmetric positive definite with well separated eigenvalues.
    SymMatrix3 gain() {
        const double a = uniform(1.0, 4.0);
        const double b = a + uniform(0.5, 3.0);
        const double c = b + uniform(0.5, 3.0);
        const Mat3 q = rotation_matrix();
        const Mat3 m = q * Vec3(a, b, c).asDiagonal() * q.transpose();
        return SymMatrix3(0.5 * (m + m.transpose()));
    }

    Mat3 inertia() {
        const Mat3 q = rotation_matrix();
        const Mat3 m = q * vec(0.1, 1.0).cwiseAbs().asDiagonal() * q.transpose();
        return 0.5 * (m + m.transpose()) + 0.05 * Mat3::Identity();
    }

    /// Random tree by attaching each new vertex to a random earlier one,
    /// then relabelling with a random permutation.
    Graph tree(int n) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        std::shuffle(perm.begin(), perm.end(), rng_);
        Graph g;
        g.n_agents = n;
        for (int v = 1; v < n; ++v) {
            const int u = integer(0, v - 1);
            g.edges.emplace_back(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
        }
        return g;
    }

private:
    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// so3 oracles
// ---------------------------------------------------------------------------

inline Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

inline Mat3 axis_angle_oracle(double theta, const Vec3& u) {
    return Eigen::AngleAxisd(theta, u.normalized()).toRotationMatrix();
}

/// Nearest rotation: M (M'M)^{-1/2} via symmetric eigen-decomposition.
inline Mat3 polar_oracle(const Mat3& m) {
    const Eigen::SelfAdjointEigenSolver<Mat3> es(m.transpose() * m);
    const Mat3 inv_sqrt =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return m * inv_sqrt;
}

// ---------------------------------------------------------------------------
// network oracles
// ---------------------------------------------------------------------------

struct Network {
    OrientedTree tree;
    GainAssignment gains;
    RotationMatrix r0;
    std::vector<Mat3> inertia;
    SystemState state;

    ClosedLoop loop() const { return ClosedLoop(tree, gains, r0, InertiaSet(inertia)); }
};

inline Network random_network(Gen& g, int n, bool random_leader = true) {
    Network net{validate_tree(g.tree(n)), {}, g.rotation(), {}, {}};
    net.gains.k_r0 = g.uniform(0.5, 3.0);
    net.gains.k_r = g.uniform(0.5, 3.0);
    net.gains.k_w = g.uniform(0.5, 3.0);
    net.gains.leader = random_leader ? g.integer(0, n - 1) : 0;
    net.gains.a_leader = g.gain();
    for (int k = 0; k < n - 1; ++k) net.gains.a_edge.push_back(g.gain());
    for (int i = 0; i < n; ++i) {
        net.inertia.push_back(g.inertia());
        net.state.attitudes.push_back(g.rotation());
        net.state.omegas.push_back(g.vec(-2.0, 2.0));
    }
    return net;
}

/// Edge matrix A for the unordered pair {a, b}, looked up by scanning.
inline const SymMatrix3& pair_gain(const Network& net, int a, int b) {
    for (int k = 0; k < net.tree.n_edges(); ++k) {
        const auto& e = net.tree.edge(k);
        if ((e.head == a && e.tail == b) || (e.head == b && e.tail == a)) {
            return net.gains.a_edge[static_cast<std::size_t>(k)];
        }
    }
    throw std::logic_error("no such edge");
}

/// tau_i = -k_r0 psi(A0 R0' R_i) [leader] - k_r sum_j psi(A_ij R_j' R_i) - k_w w_i.
inline Vec3 torque_oracle(const Network& net, int i) {
    const Mat3& ri = net.state.attitudes[static_cast<std::size_t>(i)].matrix();
    Vec3 tau = -net.gains.k_w * net.state.omegas[static_cast<std::size_t>(i)];
    if (i == net.gains.leader) {
        const Mat3 p = net.gains.a_leader.matrix() * net.r0.matrix().transpose() * ri;
        tau -= net.gains.k_r0 * 0.5 * Vec3(p(2, 1) - p(1, 2), p(0, 2) - p(2, 0), p(1, 0) - p(0, 1));
    }
    for (int j = 0; j < net.tree.n_agents(); ++j) {
        if (j == i || net.tree.edge_index(i, j) < 0) continue;
        const Mat3& rj = net.state.attitudes[static_cast<std::size_t>(j)].matrix();
        const Mat3 p = pair_gain(net, i, j).matrix() * rj.transpose() * ri;
        tau -= net.gains.k_r * 0.5 * Vec3(p(2, 1) - p(1, 2), p(0, 2) - p(2, 0), p(1, 0) - p(0, 1));
    }
    return tau;
}

inline double lyapunov_oracle(const Network& net) {
    const auto& r = net.state.attitudes;
    const Mat3 i3 = Mat3::Identity();
    const auto lead = static_cast<std::size_t>(net.gains.leader);
    double v = net.gains.k_r0 *
               (net.gains.a_leader.matrix() * (i3 - net.r0.matrix().transpose() * r[lead].matrix())).trace();
    for (int k = 0; k < net.tree.n_edges(); ++k) {
        const auto& e = net.tree.edge(k);
        const Mat3 rbar = r[static_cast<std::size_t>(e.head)].matrix().transpose() * r[static_cast<std::size_t>(e.tail)].matrix();
        v += net.gains.k_r * (net.gains.a_edge[static_cast<std::size_t>(k)].matrix() * (i3 - rbar)).trace();
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        v += net.state.omegas[i].dot(net.inertia[i] * net.state.omegas[i]);
    }
    return 0.5 * v;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace so3sync::testing
