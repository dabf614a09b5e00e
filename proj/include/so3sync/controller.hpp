#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "so3sync/state.hpp"
#include "so3sync/topology.hpp"

namespace so3sync {

inline constexpr double kEigenGapTol = 1e-9;

/// Feedback gains. Each edge stores one matrix shared by both endpoints;
/// only the leader agent carries a_leader.
struct GainAssignment {
    double k_r0 = 1.0;
    double k_r = 1.0;
    double k_w = 1.0;
    std::vector<SymMatrix3> a_edge;  ///< indexed like OrientedTree::edges()
    SymMatrix3 a_leader;
    int leader = 0;

    /// k_{R0} for slot 0 (leader edge), k_R for tree edges.
    double slot_gain(int slot) const { return slot == 0 ? k_r0 : k_r; }
    /// Slot 0 is the leader edge, slot k >= 1 is tree edge k - 1.
    const SymMatrix3& slot_matrix(int slot) const {
        return slot == 0 ? a_leader : a_edge.at(static_cast<std::size_t>(slot - 1));
    }
};

/// Eigen-decomposition of a gain matrix, ascending eigenvalues.
struct EigenAxes {
    Vec3 values;
    Mat3 vectors;  ///< column c pairs with values(c)
};

EigenAxes eigen_axes(const SymMatrix3& a);

/// Throws NonPositiveGain, NonPositiveDefiniteGain, RepeatedEigenvalue or
/// DimensionMismatch.
void validate_gains(const GainAssignment& gains, const OrientedTree& tree, double gap_tol = kEigenGapTol);

/// Stacked 3N torque vector.
class Torque {
public:
    explicit Torque(Eigen::VectorXd stacked) : tau_(std::move(stacked)) {}

    const Eigen::VectorXd& stacked() const { return tau_; }
    Vec3 agent(int i) const { return tau_.segment<3>(3 * i); }
    int n_agents() const { return static_cast<int>(tau_.size() / 3); }

private:
    Eigen::VectorXd tau_;
};

/// Torque of agent `i` from its own state and its neighbors' attitudes only.
///
/// `r0` must be supplied for the leader agent and omitted otherwise.
/// Errors: MissingLeaderAttitude, UnknownNeighbor, MissingNeighbor,
/// InvalidArgument (r0 given to a follower).
Vec3 local_torque(int i, const RotationMatrix& r_i, const Vec3& omega_i,
                  const std::map<int, RotationMatrix>& neighbor_attitudes,
                  const std::optional<RotationMatrix>& r0, const GainAssignment& gains,
                  const OrientedTree& tree);

/// -k_r0 Psi0 - k_r L PsiBar - k_w omega, with L assembled densely.
Torque stacked_torque(const SystemState& state, const OrientedTree& tree, const GainAssignment& gains,
                      const RotationMatrix& r0);

/// Same torque evaluated edge by edge on raw (possibly non-orthonormal)
/// attitude matrices; the integrator's hot path.
void compact_torque(std::span<const Mat3> attitudes, std::span<const Vec3> omegas, const OrientedTree& tree,
                    const GainAssignment& gains, const Mat3& r0, std::span<Vec3> out);

}  // namespace so3sync
