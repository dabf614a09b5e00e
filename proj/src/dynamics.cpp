#include "so3sync/dynamics.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "so3sync/analysis.hpp"

namespace so3sync {

InertiaSet::InertiaSet(std::vector<Mat3> j) : j_(std::move(j)) {
    j_inv_.reserve(j_.size());
    for (std::size_t i = 0; i < j_.size(); ++i) {
        const SymMatrix3 sym(j_[i]);
        const Eigen::SelfAdjointEigenSolver<Mat3> es(sym.matrix());
        if (!(es.eigenvalues().minCoeff() > 0.0)) {
            std::ostringstream os;
            os << "inertia of agent " << i + 1 << " is not positive definite";
            throw Error(Errc::NonPositiveDefiniteInertia, os.str());
        }
        j_inv_.push_back(j_[i].inverse());
    }
}

Eigen::MatrixXd InertiaSet::block_diagonal() const {
    const auto n = static_cast<Eigen::Index>(j_.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.block<3, 3>(3 * i, 3 * i) = j_[static_cast<std::size_t>(i)];
    }
    return out;
}

ClosedLoop::ClosedLoop(OrientedTree tree_, GainAssignment gains_, RotationMatrix r0_, InertiaSet inertia_)
    : tree(std::move(tree_)), gains(std::move(gains_)), r0(r0_), inertia(std::move(inertia_)) {
    validate_gains(gains, tree);
    if (inertia.size() != tree.n_agents()) {
        throw Error(Errc::DimensionMismatch, "one inertia matrix per agent required");
    }
}

void closed_loop_acceleration(std::span<const Mat3> attitudes, std::span<const Vec3> omegas,
                              const ClosedLoop& loop, std::span<Vec3> omega_dot) {
    compact_torque(attitudes, omegas, loop.tree, loop.gains, loop.r0.matrix(), omega_dot);
    for (std::size_t i = 0; i < attitudes.size(); ++i) {
        const int a = static_cast<int>(i);
        const Vec3& w = omegas[i];
        omega_dot[i] = loop.inertia.j_inv(a) * (omega_dot[i] - w.cross(loop.inertia.j(a) * w));
    }
}

StateRate derivative(const SystemState& state, const ClosedLoop& loop) {
    const auto n = state.attitudes.size();
    std::vector<Mat3> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = state.attitudes[i].matrix();
    StateRate rate;
    rate.attitude_rate = state.omegas;
    rate.omega_dot.resize(n);
    closed_loop_acceleration(r, state.omegas, loop, rate.omega_dot);
    return rate;
}

SystemState rk4_step(const SystemState& state, double h, const AccelerationFn& accel) {
    if (!(h > 0.0) || h > kMaxStep) {
        throw Error(Errc::InvalidArgument, "step size must lie in (0, 0.01]");
    }
    const std::size_t n = state.attitudes.size();
    std::vector<Mat3> r0(n), rs(n);
    std::vector<Vec3> w0 = state.omegas, ws(n);
    std::array<std::vector<Mat3>, 4> kr;
    std::array<std::vector<Vec3>, 4> kw;
    for (std::size_t i = 0; i < n; ++i) r0[i] = state.attitudes[i].matrix();

    const auto stage = [&](int s, const std::vector<Mat3>& r, const std::vector<Vec3>& w) {
        auto& dr = kr[static_cast<std::size_t>(s)];
        auto& dw = kw[static_cast<std::size_t>(s)];
        dr.resize(n);
        dw.resize(n);
        for (std::size_t i = 0; i < n; ++i) dr[i] = r[i] * hat(w[i]);
        accel(r, w, dw);
    };
    const auto advance = [&](int s, double c) {
        const auto& dr = kr[static_cast<std::size_t>(s)];
        const auto& dw = kw[static_cast<std::size_t>(s)];
        for (std::size_t i = 0; i < n; ++i) {
            rs[i] = r0[i] + c * dr[i];
            ws[i] = w0[i] + c * dw[i];
        }
    };

    stage(0, r0, w0);
    advance(0, 0.5 * h);
    stage(1, rs, ws);
    advance(1, 0.5 * h);
    stage(2, rs, ws);
    advance(2, h);
    stage(3, rs, ws);

    SystemState next;
    next.t = state.t + h;
    next.attitudes.reserve(n);
    next.omegas.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Mat3 r = r0[i] + (h / 6.0) * (kr[0][i] + 2.0 * kr[1][i] + 2.0 * kr[2][i] + kr[3][i]);
        next.omegas[i] = w0[i] + (h / 6.0) * (kw[0][i] + 2.0 * kw[1][i] + 2.0 * kw[2][i] + kw[3][i]);
        if (!next.omegas[i].allFinite() || next.omegas[i].norm() > kDivergenceOmega) {
            std::ostringstream os;
            os << "|omega_" << i + 1 << "| exceeds " << kDivergenceOmega << " rad/s at t = " << next.t;
            throw Error(Errc::IntegrationDiverged, os.str());
        }
        try {
            next.attitudes.push_back(project_to_so3(r));
        } catch (const Error& e) {
            std::ostringstream os;
            os << "attitude of agent " << i + 1 << " left the manifold at t = " << next.t << " (" << e.what() << ")";
            throw Error(Errc::IntegrationDiverged, os.str());
        }
    }
    return next;
}

SystemState step(const SystemState& state, double h, const ClosedLoop& loop) {
    return rk4_step(state, h, [&loop](std::span<const Mat3> r, std::span<const Vec3> w, std::span<Vec3> dw) {
        closed_loop_acceleration(r, w, loop, dw);
    });
}

SystemState step_torque_free(const SystemState& state, double h, const InertiaSet& inertia) {
    return rk4_step(state, h, [&inertia](std::span<const Mat3>, std::span<const Vec3> w, std::span<Vec3> dw) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            const int a = static_cast<int>(i);
            dw[i] = -inertia.j_inv(a) * w[i].cross(inertia.j(a) * w[i]);
        }
    });
}

TrajectorySample make_sample(const SystemState& state, const ClosedLoop& loop) {
    TrajectorySample s;
    s.state = state;
    s.lyapunov = lyapunov_value(state, loop);
    const EdgeAttitudes ea = build_edge_attitudes(loop.tree, state.attitudes, loop.r0, loop.gains.leader);
    for (const auto& r : state.attitudes) {
        s.leader_errors.push_back(attitude_norm(loop.r0.transpose() * r));
    }
    for (const auto& r : ea.rbar) {
        s.edge_errors.push_back(attitude_norm(r));
    }
    const Eigen::VectorXd wbar = edge_velocities(build_l(loop.tree, ea, loop.gains.leader), state.stacked_omega());
    for (int k = 0; k < loop.tree.n_edges(); ++k) {
        s.edge_velocity_norms.push_back(wbar.segment<3>(3 * k).norm());
    }
    return s;
}

Trajectory simulate(const ClosedLoop& loop, const SystemState& initial, double tf, double h, int sample_every) {
    if (!(tf >= 0.0) || !std::isfinite(tf)) {
        throw Error(Errc::InvalidArgument, "tf must be non-negative");
    }
    if (sample_every < 1) {
        throw Error(Errc::InvalidArgument, "sample_every must be >= 1");
    }
    if (initial.n_agents() != loop.n_agents() || static_cast<int>(initial.omegas.size()) != loop.n_agents()) {
        throw Error(Errc::DimensionMismatch, "initial state does not match the network");
    }
    Trajectory traj;
    traj.samples.push_back(make_sample(initial, loop));

    const double t_end = initial.t + tf;
    // Integer step count keeps time stamps free of accumulated drift.
    const auto full_steps = static_cast<long long>(std::floor(tf / h + 1e-9));
    SystemState s = initial;
    for (long long k = 1; k <= full_steps; ++k) {
        s = step(s, h, loop);
        s.t = initial.t + static_cast<double>(k) * h;
        if (k % sample_every == 0 || (k == full_steps && t_end - s.t <= 1e-12)) {
            traj.samples.push_back(make_sample(s, loop));
        }
    }
    const double rest = t_end - s.t;
    if (rest > 1e-12) {
        s = step(s, rest, loop);
        s.t = t_end;
        traj.samples.push_back(make_sample(s, loop));
    }
    return traj;
}

}  // namespace so3sync
