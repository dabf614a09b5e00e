#pragma once

#include <functional>
#include <span>
#include <vector>

#include "so3sync/controller.hpp"
#include "so3sync/state.hpp"
#include "so3sync/topology.hpp"

namespace so3sync {

inline constexpr double kMaxStep = 0.01;
inline constexpr double kDivergenceOmega = 1e3;

/// Per-agent inertia matrices (kg m^2), symmetric positive definite.
class InertiaSet {
public:
    InertiaSet() = default;
    /// Throws NotSymmetric or NonPositiveDefiniteInertia.
    explicit InertiaSet(std::vector<Mat3> j);

    int size() const { return static_cast<int>(j_.size()); }
    const Mat3& j(int i) const { return j_.at(static_cast<std::size_t>(i)); }
    const Mat3& j_inv(int i) const { return j_inv_.at(static_cast<std::size_t>(i)); }
    Eigen::MatrixXd block_diagonal() const;

private:
    std::vector<Mat3> j_;
    std::vector<Mat3> j_inv_;
};

/// Everything the closed loop needs besides the state.
struct ClosedLoop {
    ClosedLoop(OrientedTree tree, GainAssignment gains, RotationMatrix r0, InertiaSet inertia);

    OrientedTree tree;
    GainAssignment gains;
    RotationMatrix r0;
    InertiaSet inertia;

    int n_agents() const { return tree.n_agents(); }
};

struct StateRate {
    std::vector<Vec3> attitude_rate;  ///< omega_i, with dR_i/dt = R_i hat(omega_i)
    std::vector<Vec3> omega_dot;
};

/// Angular acceleration of every agent given raw attitude matrices.
using AccelerationFn = std::function<void(std::span<const Mat3>, std::span<const Vec3>, std::span<Vec3>)>;

/// J^-1 (-omega x J omega + tau) for every agent.
void closed_loop_acceleration(std::span<const Mat3> attitudes, std::span<const Vec3> omegas,
                              const ClosedLoop& loop, std::span<Vec3> omega_dot);

StateRate derivative(const SystemState& state, const ClosedLoop& loop);

/// One RK4 step in the ambient matrix space followed by polar projection.
///
/// Errors: InvalidArgument (h outside (0, 0.01]), IntegrationDiverged.
SystemState step(const SystemState& state, double h, const ClosedLoop& loop);

/// Same integrator with zero torque.
SystemState step_torque_free(const SystemState& state, double h, const InertiaSet& inertia);

/// Generic form used by both of the above.
SystemState rk4_step(const SystemState& state, double h, const AccelerationFn& accel);

struct TrajectorySample {
    SystemState state;
    double lyapunov = 0.0;
    std::vector<double> leader_errors;         ///< |R0' R_i|_I per agent
    std::vector<double> edge_errors;           ///< |Rbar_k|_I per edge
    std::vector<double> edge_velocity_norms;   ///< ||omega_bar_k|| per edge
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
};

TrajectorySample make_sample(const SystemState& state, const ClosedLoop& loop);

/// Fixed-step integration from `initial` over [t0, t0 + tf].
///
/// Records the initial state, every `sample_every`-th step and the final
/// state. When tf is not a multiple of h the last step is shortened.
Trajectory simulate(const ClosedLoop& loop, const SystemState& initial, double tf, double h, int sample_every);

}  // namespace so3sync
