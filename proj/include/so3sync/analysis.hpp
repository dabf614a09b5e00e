#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "so3sync/dynamics.hpp"

namespace so3sync {

inline constexpr double kSpectrumTol = 1e-7;

// ---------------------------------------------------------------------------
// Energy functions
// ---------------------------------------------------------------------------

/// V = 0.5 (k_r0 tr(A0 (I - Rbar_10)) + w' J w + k_r sum_k tr(A_k (I - Rbar_k))).
double lyapunov_value(const SystemState& state, const ClosedLoop& loop);

/// Same expression on raw relative-attitude matrices.
double lyapunov_from_edges(std::span<const Mat3> rbar, const Mat3& rbar_leader, const Eigen::VectorXd& omega,
                           const GainAssignment& gains, const InertiaSet& inertia);

// ---------------------------------------------------------------------------
// Equilibria
// ---------------------------------------------------------------------------

/// A point of the equilibrium set with zero velocity.
///
/// There are N slots: slot 0 is the leader edge (R0' R_leader) and slot
/// k >= 1 is tree edge k - 1. A slot value of 0 keeps the relative attitude
/// at identity; 1..3 selects a half turn about the matching eigen-axis of
/// that slot's gain matrix (eigenvalues ascending).
struct Equilibrium {
    std::vector<int> slots;

    int n_slots() const { return static_cast<int>(slots.size()); }
    bool is_desired() const;
    std::vector<int> pi_set() const;
    /// e.g. "0:1 3:2" (slot:axis for every half-turn slot), "-" when desired.
    std::string label() const;

    friend bool operator==(const Equilibrium&, const Equilibrium&) = default;
};

/// Encodes slots as a base-4 integer with slot 0 least significant.
std::uint64_t equilibrium_code(const Equilibrium& eq);
Equilibrium equilibrium_from_code(std::uint64_t code, int n_slots);

/// Unit eigen-axis u_q of a half-turn slot.
Vec3 slot_axis(const Equilibrium& eq, int slot, const GainAssignment& gains);
/// Rbar_q*: identity or R(pi, u_q).
RotationMatrix slot_attitude(const Equilibrium& eq, int slot, const GainAssignment& gains);
/// Eigenvalue lambda_{u_q} of A_q paired with the slot's axis.
double slot_eigenvalue(const Equilibrium& eq, int slot, const GainAssignment& gains);

/// Absolute attitudes realizing the given leader-edge and tree-edge
/// relative attitudes (propagated outward from the leader).
std::vector<RotationMatrix> attitudes_from_edges(std::span<const Mat3> rbar, const Mat3& rbar_leader,
                                                 const OrientedTree& tree, const RotationMatrix& r0, int leader);

/// Zero-velocity state at the equilibrium.
SystemState equilibrium_state(const Equilibrium& eq, const ClosedLoop& loop);

/// sum_q |Rbar_q' Rbar_q*|_I + ||omega||.
double equilibrium_distance(const SystemState& state, const Equilibrium& eq, const ClosedLoop& loop);

/// sum_{q in pi} k_q (tr(A_q) - lambda_{u_q}) - V. Throws EmptyPiSet at the
/// desired equilibrium.
double chetaev_value(const SystemState& state, const Equilibrium& eq, const ClosedLoop& loop);

struct EquilibriumSet {
    Equilibrium desired;
    std::vector<Equilibrium> undesired;  ///< ascending by code
    bool exhaustive = false;
};

/// All 4^N - 1 undesired points when that count is <= limit, otherwise a
/// seeded uniform sample of `limit` distinct points.
EquilibriumSet enumerate_equilibria(const GainAssignment& gains, const OrientedTree& tree, std::int64_t limit,
                                    std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Hessian of the Chetaev function
// ---------------------------------------------------------------------------

/// Analytic Hessian blocks of the Chetaev function at an undesired point.
///
/// Coordinates, in order: theta_10, mu_10 (3), theta_k for half-turn tree
/// slots, mu_k (3 each) for half-turn tree slots, rotation vectors r_p
/// (3 each) for identity slots, omega (3N). The (theta, mu) chart is
/// singular at theta = 0, so identity slots use exponential coordinates;
/// their blocks are -k_p E(A_p).
struct HessianReport {
    double h11 = 0.0;                  ///< (k_r0 / 2)(tr A0 - lambda_u0)
    Mat3 h22;                          ///< -4 k_r0 E(A0)
    Eigen::VectorXd h33;               ///< (k_r / 2)(tr A_k - lambda_uk), half-turn tree slots
    Eigen::MatrixXd h44;               ///< -4 k_r blockdiag(E(A_k)), half-turn tree slots
    Eigen::MatrixXd identity_blocks;   ///< -k_p blockdiag(E(A_p)), identity slots
    Eigen::MatrixXd j_block;           ///< -J / 2 as stated alongside the other blocks
    std::vector<int> pi_tree_slots;
    std::vector<int> identity_slots;

    /// Block-diagonal assembly in the coordinate order above, using the
    /// given omega block.
    Eigen::MatrixXd assembled(const Eigen::MatrixXd& omega_block) const;

    bool h11_positive() const { return h11 > 0.0; }
    bool h33_positive_definite() const { return h33.size() == 0 || h33.minCoeff() > 0.0; }
    bool h22_negative_definite() const;
    bool h44_negative_definite() const;
    bool j_block_negative_definite() const;
};

/// Throws LeaderSlotNotPi when slot 0 is not a half turn, EmptyPiSet at
/// the desired point.
HessianReport hessian_blocks(const Equilibrium& eq, const GainAssignment& gains, const InertiaSet& inertia);

struct HessianCheck {
    Eigen::MatrixXd fd;        ///< central-difference Hessian, coordinates as above
    int n_positive = 0;
    int n_negative = 0;
    double attitude_block_error = 0.0;  ///< max |fd - analytic| on the attitude blocks
    double omega_block_error = 0.0;     ///< max |fd_omega - (-J)|
    bool indefinite() const { return n_positive > 0 && n_negative > 0; }
};

/// Central-difference Hessian of the Chetaev function at an undesired
/// equilibrium. When slot 0 is identity the analytic comparison uses the
/// exponential-coordinate blocks for all identity slots.
HessianCheck chetaev_hessian_check(const Equilibrium& eq, const ClosedLoop& loop, double step = 1e-4);

// ---------------------------------------------------------------------------
// Linearization
// ---------------------------------------------------------------------------

/// 6N x 6N Jacobian of the closed loop at `eq` in the state ordering
/// (r_10, r_1..r_{N-1}, omega), where Rbar_q = Rbar_q* exp(hat(r_q)).
Eigen::MatrixXd build_jacobian(const Equilibrium& eq, const GainAssignment& gains, const OrientedTree& tree,
                               const InertiaSet& inertia);

/// Gamma blocks E(A_q Rbar_q*) for every slot (slot 0 first).
std::vector<Mat3> gamma_blocks(const Equilibrium& eq, const GainAssignment& gains);

/// Closed-loop vector field in the exponential coordinates above.
Eigen::VectorXd exp_coordinate_field(const Eigen::VectorXd& x, const Equilibrium& eq, const ClosedLoop& loop);

/// Central-difference Jacobian of exp_coordinate_field at x = 0.
Eigen::MatrixXd jacobian_fd(const Equilibrium& eq, const ClosedLoop& loop, double step = 1e-6);

struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;
    double max_real = 0.0;
    double min_abs = 0.0;
    /// min |Re| over eigenvalues with |Im| > tol; +inf when there are none.
    double min_abs_real_among_oscillatory = 0.0;
    bool has_zero = false;
    bool has_imaginary = false;
    bool unstable = false;
};

/// Dense general eigen-decomposition; throws EigensolverFailure.
SpectrumReport classify_spectrum(const Eigen::MatrixXd& m, double tol = kSpectrumTol);

}  // namespace so3sync
