#include "so3sync/controller.hpp"

#include <cmath>
#include <sstream>

namespace so3sync {

EigenAxes eigen_axes(const SymMatrix3& a) {
    const Eigen::SelfAdjointEigenSolver<Mat3> es(a.matrix());
    return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

void check_gain_matrix(const SymMatrix3& a, double gap_tol, const std::string& name) {
    const Vec3 ev = eigen_axes(a).values;
    if (!(ev(0) > 0.0)) {
        throw Error(Errc::NonPositiveDefiniteGain, name + " is not positive definite");
    }
    if (!(ev(1) - ev(0) > gap_tol) || !(ev(2) - ev(1) > gap_tol)) {
        throw Error(Errc::RepeatedEigenvalue, name + " needs three distinct eigenvalues");
    }
}

}  // namespace

void validate_gains(const GainAssignment& gains, const OrientedTree& tree, double gap_tol) {
    for (double k : {gains.k_r0, gains.k_r, gains.k_w}) {
        if (!(k > 0.0) || !std::isfinite(k)) {
            throw Error(Errc::NonPositiveGain, "k_r0, k_r and k_w must be positive");
        }
    }
    if (static_cast<int>(gains.a_edge.size()) != tree.n_edges()) {
        throw Error(Errc::DimensionMismatch, "one gain matrix per edge required");
    }
    if (gains.leader < 0 || gains.leader >= tree.n_agents()) {
        throw Error(Errc::InvalidArgument, "leader agent out of range");
    }
    check_gain_matrix(gains.a_leader, gap_tol, "leader gain A0");
    for (int k = 0; k < tree.n_edges(); ++k) {
        const auto& e = tree.edge(k);
        std::ostringstream name;
        name << "edge gain A{" << e.tail + 1 << "," << e.head + 1 << "}";
        check_gain_matrix(gains.a_edge[static_cast<std::size_t>(k)], gap_tol, name.str());
    }
}

Vec3 local_torque(int i, const RotationMatrix& r_i, const Vec3& omega_i,
                  const std::map<int, RotationMatrix>& neighbor_attitudes,
                  const std::optional<RotationMatrix>& r0, const GainAssignment& gains,
                  const OrientedTree& tree) {
    const bool is_leader = (i == gains.leader);
    if (is_leader && !r0) {
        throw Error(Errc::MissingLeaderAttitude, "leader agent needs R0");
    }
    if (!is_leader && r0) {
        throw Error(Errc::InvalidArgument, "R0 is only available to the leader agent");
    }
    const std::vector<int> nbrs = tree.neighbors(i);
    for (const auto& [j, _] : neighbor_attitudes) {
        if (tree.edge_index(i, j) < 0) {
            std::ostringstream os;
            os << "agent " << j + 1 << " is not a neighbor of " << i + 1;
            throw Error(Errc::UnknownNeighbor, os.str());
        }
    }

    Vec3 tau = -gains.k_w * omega_i;
    if (is_leader) {
        tau -= gains.k_r0 * psi(gains.a_leader.matrix() * r0->matrix().transpose() * r_i.matrix());
    }
    for (int j : nbrs) {
        const auto it = neighbor_attitudes.find(j);
        if (it == neighbor_attitudes.end()) {
            std::ostringstream os;
            os << "missing attitude of neighbor " << j + 1;
            throw Error(Errc::MissingNeighbor, os.str());
        }
        const Mat3& a_ij = gains.a_edge[static_cast<std::size_t>(tree.edge_index(i, j))].matrix();
        tau -= gains.k_r * psi(a_ij * it->second.matrix().transpose() * r_i.matrix());
    }
    return tau;
}

Torque stacked_torque(const SystemState& state, const OrientedTree& tree, const GainAssignment& gains,
                      const RotationMatrix& r0) {
    const int n = tree.n_agents();
    if (state.n_agents() != n || static_cast<int>(state.omegas.size()) != n) {
        throw Error(Errc::DimensionMismatch, "state does not match the tree");
    }
    const EdgeAttitudes ea = build_edge_attitudes(tree, state.attitudes, r0, gains.leader);
    const LMatrix l = build_l(tree, ea, gains.leader);

    Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(3 * n);
    psi0.segment<3>(3 * gains.leader) = psi(gains.a_leader.matrix() * ea.rbar_leader.matrix());

    Eigen::VectorXd psi_bar(3 * (n - 1));
    for (int k = 0; k < n - 1; ++k) {
        psi_bar.segment<3>(3 * k) =
            psi(gains.a_edge[static_cast<std::size_t>(k)].matrix() * ea.rbar[static_cast<std::size_t>(k)].matrix());
    }
    return Torque(-gains.k_r0 * psi0 - gains.k_r * (l.matrix() * psi_bar) - gains.k_w * state.stacked_omega());
}

void compact_torque(std::span<const Mat3> attitudes, std::span<const Vec3> omegas, const OrientedTree& tree,
                    const GainAssignment& gains, const Mat3& r0, std::span<Vec3> out) {
    const std::size_t n = attitudes.size();
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = -gains.k_w * omegas[i];
    }
    const auto lead = static_cast<std::size_t>(gains.leader);
    out[lead] -= gains.k_r0 * psi(gains.a_leader.matrix() * (r0.transpose() * attitudes[lead]));

    const auto& edges = tree.edges();
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto head = static_cast<std::size_t>(edges[k].head);
        const auto tail = static_cast<std::size_t>(edges[k].tail);
        const Mat3 rbar = attitudes[head].transpose() * attitudes[tail];
        const Vec3 p = psi(gains.a_edge[k].matrix() * rbar);
        // Column k of L: I at the tail, -Rbar_k at the head.
        out[tail] -= gains.k_r * p;
        out[head] += gains.k_r * (rbar * p);
    }
}

}  // namespace so3sync
