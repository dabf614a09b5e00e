#include "so3sync/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace so3sync {

namespace {

std::vector<Mat3> raw(std::span<const RotationMatrix> rs) {
    std::vector<Mat3> out;
    out.reserve(rs.size());
    for (const auto& r : rs) out.push_back(r.matrix());
    return out;
}

/// Inverse right Jacobian of SO(3): d/dt r for Rbar* exp(hat(r)) driven by
/// body rate xi is J_r^-1(r) xi.
Mat3 right_jacobian_inverse(const Vec3& r) {
    const double theta = r.norm();
    const Mat3 k = hat(r);
    double c = 1.0 / 12.0;
    if (theta > 1e-4) {
        c = 1.0 / (theta * theta) - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
    }
    return Mat3::Identity() + 0.5 * k + c * k * k;
}

Mat3 rodrigues_raw(double theta, const Vec3& mu) {
    const Mat3 m = hat(mu);
    return Mat3::Identity() + std::sin(theta) * m + (1.0 - std::cos(theta)) * m * m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Energy functions
// ---------------------------------------------------------------------------

double lyapunov_from_edges(std::span<const Mat3> rbar, const Mat3& rbar_leader, const Eigen::VectorXd& omega,
                           const GainAssignment& gains, const InertiaSet& inertia) {
    const Mat3 id = Mat3::Identity();
    double attitude_edges = 0.0;
    for (std::size_t k = 0; k < rbar.size(); ++k) {
        attitude_edges += (gains.a_edge[k].matrix() * (id - rbar[k])).trace();
    }
    double kinetic = 0.0;
    for (int i = 0; i < inertia.size(); ++i) {
        const Vec3 w = omega.segment<3>(3 * i);
        kinetic += w.dot(inertia.j(i) * w);
    }
    const double leader = (gains.a_leader.matrix() * (id - rbar_leader)).trace();
    return 0.5 * (gains.k_r0 * leader + kinetic + gains.k_r * attitude_edges);
}

double lyapunov_value(const SystemState& state, const ClosedLoop& loop) {
    const EdgeAttitudes ea = build_edge_attitudes(loop.tree, state.attitudes, loop.r0, loop.gains.leader);
    return lyapunov_from_edges(raw(ea.rbar), ea.rbar_leader.matrix(), state.stacked_omega(), loop.gains,
                               loop.inertia);
}

// ---------------------------------------------------------------------------
// Equilibria
// ---------------------------------------------------------------------------

bool Equilibrium::is_desired() const {
    return std::all_of(slots.begin(), slots.end(), [](int s) { return s == 0; });
}

std::vector<int> Equilibrium::pi_set() const {
    std::vector<int> out;
    for (int q = 0; q < n_slots(); ++q) {
        if (slots[static_cast<std::size_t>(q)] != 0) out.push_back(q);
    }
    return out;
}

std::string Equilibrium::label() const {
    if (is_desired()) return "-";
    std::ostringstream os;
    bool first = true;
    for (int q : pi_set()) {
        if (!first) os << ' ';
        os << q << ':' << slots[static_cast<std::size_t>(q)];
        first = false;
    }
    return os.str();
}

std::uint64_t equilibrium_code(const Equilibrium& eq) {
    std::uint64_t code = 0;
    for (int q = eq.n_slots() - 1; q >= 0; --q) {
        code = 4 * code + static_cast<std::uint64_t>(eq.slots[static_cast<std::size_t>(q)]);
    }
    return code;
}

Equilibrium equilibrium_from_code(std::uint64_t code, int n_slots) {
    Equilibrium eq;
    eq.slots.resize(static_cast<std::size_t>(n_slots));
    for (auto& s : eq.slots) {
        s = static_cast<int>(code % 4);
        code /= 4;
    }
    return eq;
}

Vec3 slot_axis(const Equilibrium& eq, int slot, const GainAssignment& gains) {
    const int choice = eq.slots.at(static_cast<std::size_t>(slot));
    if (choice < 1 || choice > 3) {
        throw Error(Errc::InvalidArgument, "slot is not a half turn");
    }
    return eigen_axes(gains.slot_matrix(slot)).vectors.col(choice - 1);
}

double slot_eigenvalue(const Equilibrium& eq, int slot, const GainAssignment& gains) {
    const int choice = eq.slots.at(static_cast<std::size_t>(slot));
    if (choice < 1 || choice > 3) {
        throw Error(Errc::InvalidArgument, "slot is not a half turn");
    }
    return eigen_axes(gains.slot_matrix(slot)).values(choice - 1);
}

RotationMatrix slot_attitude(const Equilibrium& eq, int slot, const GainAssignment& gains) {
    if (eq.slots.at(static_cast<std::size_t>(slot)) == 0) {
        return RotationMatrix::identity();
    }
    return rot_axis_angle(AxisAngle(std::numbers::pi, slot_axis(eq, slot, gains)));
}

std::vector<RotationMatrix> attitudes_from_edges(std::span<const Mat3> rbar, const Mat3& rbar_leader,
                                                 const OrientedTree& tree, const RotationMatrix& r0, int leader) {
    const auto n = static_cast<std::size_t>(tree.n_agents());
    std::vector<Mat3> r(n);
    std::vector<bool> known(n, false);
    r[static_cast<std::size_t>(leader)] = r0.matrix() * rbar_leader;
    known[static_cast<std::size_t>(leader)] = true;
    std::queue<int> frontier;
    frontier.push(leader);
    while (!frontier.empty()) {
        const int a = frontier.front();
        frontier.pop();
        const Mat3 ra = r[static_cast<std::size_t>(a)];
        for (int k : tree.m_plus(a)) {  // a is head: R_tail = R_head Rbar_k
            const auto tail = static_cast<std::size_t>(tree.edge(k).tail);
            if (!known[tail]) {
                r[tail] = ra * rbar[static_cast<std::size_t>(k)];
                known[tail] = true;
                frontier.push(static_cast<int>(tail));
            }
        }
        for (int k : tree.m_minus(a)) {  // a is tail: R_head = R_tail Rbar_k'
            const auto head = static_cast<std::size_t>(tree.edge(k).head);
            if (!known[head]) {
                r[head] = ra * rbar[static_cast<std::size_t>(k)].transpose();
                known[head] = true;
                frontier.push(static_cast<int>(head));
            }
        }
    }
    std::vector<RotationMatrix> out;
    out.reserve(n);
    for (const auto& m : r) out.emplace_back(m);
    return out;
}

SystemState equilibrium_state(const Equilibrium& eq, const ClosedLoop& loop) {
    const int n = loop.n_agents();
    if (eq.n_slots() != n) {
        throw Error(Errc::DimensionMismatch, "equilibrium needs one slot per agent");
    }
    std::vector<Mat3> rbar;
    for (int k = 1; k < n; ++k) rbar.push_back(slot_attitude(eq, k, loop.gains).matrix());
    SystemState s;
    s.attitudes = attitudes_from_edges(rbar, slot_attitude(eq, 0, loop.gains).matrix(), loop.tree, loop.r0,
                                       loop.gains.leader);
    s.omegas.assign(static_cast<std::size_t>(n), Vec3::Zero());
    return s;
}

double equilibrium_distance(const SystemState& state, const Equilibrium& eq, const ClosedLoop& loop) {
    const EdgeAttitudes ea = build_edge_attitudes(loop.tree, state.attitudes, loop.r0, loop.gains.leader);
    double d = attitude_norm(ea.rbar_leader.transpose() * slot_attitude(eq, 0, loop.gains));
    for (int k = 1; k < loop.n_agents(); ++k) {
        d += attitude_norm(ea.rbar[static_cast<std::size_t>(k - 1)].transpose() * slot_attitude(eq, k, loop.gains));
    }
    return d + state.stacked_omega().norm();
}

namespace {

double chetaev_offset(const Equilibrium& eq, const GainAssignment& gains) {
    double c = 0.0;
    for (int q : eq.pi_set()) {
        c += gains.slot_gain(q) * (gains.slot_matrix(q).matrix().trace() - slot_eigenvalue(eq, q, gains));
    }
    return c;
}

}  // namespace

double chetaev_value(const SystemState& state, const Equilibrium& eq, const ClosedLoop& loop) {
    if (eq.is_desired()) {
        throw Error(Errc::EmptyPiSet, "the Chetaev function needs at least one half-turn slot");
    }
    return chetaev_offset(eq, loop.gains) - lyapunov_value(state, loop);
}

EquilibriumSet enumerate_equilibria(const GainAssignment& gains, const OrientedTree& tree, std::int64_t limit,
                                    std::uint64_t seed) {
    if (limit < 1) {
        throw Error(Errc::InvalidArgument, "limit must be >= 1");
    }
    const int n = tree.n_agents();
    if (n > 31) {
        throw Error(Errc::InvalidArgument, "equilibrium codes overflow beyond 31 slots");
    }
    if (static_cast<int>(gains.a_edge.size()) != tree.n_edges()) {
        throw Error(Errc::DimensionMismatch, "one gain matrix per edge required");
    }
    const std::uint64_t total = (std::uint64_t{1} << (2 * n)) - 1;  // undesired count
    EquilibriumSet set;
    set.desired.slots.assign(static_cast<std::size_t>(n), 0);
    const auto want = static_cast<std::uint64_t>(limit);
    if (total <= want) {
        set.exhaustive = true;
        for (std::uint64_t c = 1; c <= total; ++c) set.undesired.push_back(equilibrium_from_code(c, n));
        return set;
    }
    // Floyd's sampling of `want` distinct codes from [1, total].
    std::mt19937_64 rng(seed);
    std::set<std::uint64_t> picked;
    for (std::uint64_t j = total - want; j < total; ++j) {
        std::uniform_int_distribution<std::uint64_t> dist(0, j);
        const std::uint64_t t = dist(rng);
        if (!picked.insert(t + 1).second) picked.insert(j + 1);
    }
    for (std::uint64_t c : picked) set.undesired.push_back(equilibrium_from_code(c, n));
    return set;
}

// ---------------------------------------------------------------------------
// Hessian
// ---------------------------------------------------------------------------

namespace {

struct HessianLayout {
    bool leader_pi = false;
    std::vector<int> pi_tree;
    std::vector<int> identity;
    int attitude_dim = 0;
};

HessianLayout layout_of(const Equilibrium& eq) {
    HessianLayout l;
    l.leader_pi = eq.slots.at(0) != 0;
    for (int q = 1; q < eq.n_slots(); ++q) {
        (eq.slots[static_cast<std::size_t>(q)] != 0 ? l.pi_tree : l.identity).push_back(q);
    }
    if (!l.leader_pi) l.identity.insert(l.identity.begin(), 0);
    l.attitude_dim = (l.leader_pi ? 4 : 0) + 4 * static_cast<int>(l.pi_tree.size()) +
                     3 * static_cast<int>(l.identity.size());
    return l;
}

HessianReport analytic_hessian(const Equilibrium& eq, const GainAssignment& gains, const InertiaSet& inertia) {
    const HessianLayout lay = layout_of(eq);
    HessianReport h;
    h.pi_tree_slots = lay.pi_tree;
    h.identity_slots = lay.identity;
    if (lay.leader_pi) {
        const Mat3& a0 = gains.a_leader.matrix();
        h.h11 = 0.5 * gains.k_r0 * (a0.trace() - slot_eigenvalue(eq, 0, gains));
        h.h22 = -4.0 * gains.k_r0 * e_matrix(a0);
    } else {
        h.h11 = 0.0;
        h.h22.setZero();
    }
    const auto np = static_cast<Eigen::Index>(lay.pi_tree.size());
    h.h33.resize(np);
    h.h44 = Eigen::MatrixXd::Zero(3 * np, 3 * np);
    for (Eigen::Index p = 0; p < np; ++p) {
        const int q = lay.pi_tree[static_cast<std::size_t>(p)];
        const Mat3& a = gains.slot_matrix(q).matrix();
        h.h33(p) = 0.5 * gains.k_r * (a.trace() - slot_eigenvalue(eq, q, gains));
        h.h44.block<3, 3>(3 * p, 3 * p) = -4.0 * gains.k_r * e_matrix(a);
    }
    const auto ni = static_cast<Eigen::Index>(lay.identity.size());
    h.identity_blocks = Eigen::MatrixXd::Zero(3 * ni, 3 * ni);
    for (Eigen::Index p = 0; p < ni; ++p) {
        const int q = lay.identity[static_cast<std::size_t>(p)];
        h.identity_blocks.block<3, 3>(3 * p, 3 * p) = -gains.slot_gain(q) * e_matrix(gains.slot_matrix(q).matrix());
    }
    h.j_block = -0.5 * inertia.block_diagonal();
    return h;
}

bool negative_definite(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return true;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    return es.eigenvalues().maxCoeff() < 0.0;
}

}  // namespace

bool HessianReport::h22_negative_definite() const { return negative_definite(h22); }
bool HessianReport::h44_negative_definite() const { return negative_definite(h44); }
bool HessianReport::j_block_negative_definite() const { return negative_definite(j_block); }

Eigen::MatrixXd HessianReport::assembled(const Eigen::MatrixXd& omega_block) const {
    const bool leader_pi = identity_slots.empty() || identity_slots.front() != 0;
    const auto np = static_cast<Eigen::Index>(pi_tree_slots.size());
    const Eigen::Index att = (leader_pi ? 4 : 0) + 4 * np + identity_blocks.rows();
    const Eigen::Index dim = att + omega_block.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::Index o = 0;
    if (leader_pi) {
        out(0, 0) = h11;
        out.block<3, 3>(1, 1) = h22;
        o = 4;
    }
    out.block(o, o, np, np) = h33.asDiagonal();
    o += np;
    out.block(o, o, 3 * np, 3 * np) = h44;
    o += 3 * np;
    out.block(o, o, identity_blocks.rows(), identity_blocks.cols()) = identity_blocks;
    o += identity_blocks.rows();
    out.block(o, o, omega_block.rows(), omega_block.cols()) = omega_block;
    return out;
}

HessianReport hessian_blocks(const Equilibrium& eq, const GainAssignment& gains, const InertiaSet& inertia) {
    if (eq.is_desired()) {
        throw Error(Errc::EmptyPiSet, "the Hessian is taken at an undesired equilibrium");
    }
    if (eq.slots.at(0) == 0) {
        throw Error(Errc::LeaderSlotNotPi, "analytic blocks H11/H22 need a half-turn leader slot");
    }
    return analytic_hessian(eq, gains, inertia);
}

HessianCheck chetaev_hessian_check(const Equilibrium& eq, const ClosedLoop& loop, double step) {
    if (eq.is_desired()) {
        throw Error(Errc::EmptyPiSet, "the Hessian is taken at an undesired equilibrium");
    }
    const GainAssignment& gains = loop.gains;
    const HessianLayout lay = layout_of(eq);
    const int n = loop.n_agents();
    const int dim = lay.attitude_dim + 3 * n;
    const double offset = chetaev_offset(eq, gains);

    // Chetaev function as a function of the chart coordinates y (y = 0 at eq).
    const auto vbar = [&](const Eigen::VectorXd& y) {
        std::vector<Mat3> rbar(static_cast<std::size_t>(n - 1), Mat3::Identity());
        Mat3 rbar_leader = Mat3::Identity();
        const auto slot_ref = [&](int q) -> Mat3& { return q == 0 ? rbar_leader : rbar[static_cast<std::size_t>(q - 1)]; };
        Eigen::Index o = 0;
        if (lay.leader_pi) {
            rbar_leader = rodrigues_raw(std::numbers::pi + y(0), slot_axis(eq, 0, gains) + y.segment<3>(1));
            o = 4;
        }
        const auto np = static_cast<Eigen::Index>(lay.pi_tree.size());
        for (Eigen::Index p = 0; p < np; ++p) {
            const int q = lay.pi_tree[static_cast<std::size_t>(p)];
            slot_ref(q) = rodrigues_raw(std::numbers::pi + y(o + p), slot_axis(eq, q, gains) + y.segment<3>(o + np + 3 * p));
        }
        o += 4 * np;
        for (std::size_t p = 0; p < lay.identity.size(); ++p) {
            slot_ref(lay.identity[p]) = exp_so3(y.segment<3>(o + 3 * static_cast<Eigen::Index>(p))).matrix();
        }
        const Eigen::VectorXd omega = y.tail(3 * n);
        return offset - lyapunov_from_edges(rbar, rbar_leader, omega, gains, loop.inertia);
    };

    HessianCheck chk;
    chk.fd = Eigen::MatrixXd::Zero(dim, dim);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
    const double f0 = vbar(zero);
    for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd ei = Eigen::VectorXd::Zero(dim);
        ei(i) = step;
        chk.fd(i, i) = (vbar(2 * ei) - 2.0 * f0 + vbar(-2 * ei)) / (4.0 * step * step);
        for (int j = i + 1; j < dim; ++j) {
            Eigen::VectorXd ej = Eigen::VectorXd::Zero(dim);
            ej(j) = step;
            const double v = (vbar(ei + ej) - vbar(ei - ej) - vbar(-ei + ej) + vbar(-ei - ej)) / (4.0 * step * step);
            chk.fd(i, j) = v;
            chk.fd(j, i) = v;
        }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(chk.fd);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()(i) > 0.0) ++chk.n_positive;
        if (es.eigenvalues()(i) < 0.0) ++chk.n_negative;
    }

    const Eigen::MatrixXd exact_omega = -loop.inertia.block_diagonal();
    const Eigen::MatrixXd analytic = analytic_hessian(eq, gains, loop.inertia).assembled(exact_omega);
    const int att = lay.attitude_dim;
    chk.attitude_block_error = (chk.fd.topLeftCorner(att, att) - analytic.topLeftCorner(att, att)).cwiseAbs().maxCoeff();
    chk.omega_block_error = (chk.fd.bottomRightCorner(3 * n, 3 * n) - exact_omega).cwiseAbs().maxCoeff();
    return chk;
}

// ---------------------------------------------------------------------------
// Linearization
// ---------------------------------------------------------------------------

std::vector<Mat3> gamma_blocks(const Equilibrium& eq, const GainAssignment& gains) {
    std::vector<Mat3> g;
    for (int q = 0; q < eq.n_slots(); ++q) {
        g.push_back(e_matrix(gains.slot_matrix(q).matrix() * slot_attitude(eq, q, gains).matrix()));
    }
    return g;
}

Eigen::MatrixXd build_jacobian(const Equilibrium& eq, const GainAssignment& gains, const OrientedTree& tree,
                               const InertiaSet& inertia) {
    const int n = tree.n_agents();
    if (eq.n_slots() != n || inertia.size() != n) {
        throw Error(Errc::DimensionMismatch, "equilibrium, tree and inertia sizes differ");
    }
    const int lead = gains.leader;
    std::vector<Mat3> rstar;
    for (int k = 1; k < n; ++k) rstar.push_back(slot_attitude(eq, k, gains).matrix());
    const Eigen::MatrixXd lbar = build_l(tree, rstar, lead).matrix();
    const std::vector<Mat3> gamma = gamma_blocks(eq, gains);

    Eigen::MatrixXd gamma0 = Eigen::MatrixXd::Zero(3 * n, 3);
    gamma0.block<3, 3>(3 * lead, 0) = gamma[0];
    Eigen::MatrixXd gamma_edges = Eigen::MatrixXd::Zero(3 * (n - 1), 3 * (n - 1));
    for (int k = 1; k < n; ++k) {
        gamma_edges.block<3, 3>(3 * (k - 1), 3 * (k - 1)) = gamma[static_cast<std::size_t>(k)];
    }
    Eigen::MatrixXd j_inv = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    for (int i = 0; i < n; ++i) j_inv.block<3, 3>(3 * i, 3 * i) = inertia.j_inv(i);

    const int w = 3 * n;  // first omega column
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6 * n, 6 * n);
    m.block<3, 3>(0, w + 3 * lead) = Mat3::Identity();                      // M13
    m.block(3, w, 3 * (n - 1), 3 * n) = lbar.transpose();                     // M23
    m.block(w, 0, 3 * n, 3) = j_inv * (-gains.k_r0 * gamma0);                  // J^-1 M31
    m.block(w, 3, 3 * n, 3 * (n - 1)) = j_inv * (-gains.k_r * lbar * gamma_edges);  // J^-1 M32
    m.block(w, w, 3 * n, 3 * n) = -gains.k_w * j_inv;                          // J^-1 M33
    return m;
}

Eigen::VectorXd exp_coordinate_field(const Eigen::VectorXd& x, const Equilibrium& eq, const ClosedLoop& loop) {
    const int n = loop.n_agents();
    const auto& tree = loop.tree;
    std::vector<Mat3> rbar(static_cast<std::size_t>(n - 1));
    for (int k = 1; k < n; ++k) {
        rbar[static_cast<std::size_t>(k - 1)] =
            slot_attitude(eq, k, loop.gains).matrix() * exp_so3(x.segment<3>(3 * k)).matrix();
    }
    const Mat3 rbar_leader = slot_attitude(eq, 0, loop.gains).matrix() * exp_so3(x.segment<3>(0)).matrix();
    const std::vector<Mat3> attitudes =
        raw(attitudes_from_edges(rbar, rbar_leader, tree, loop.r0, loop.gains.leader));

    std::vector<Vec3> omegas(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) omegas[static_cast<std::size_t>(i)] = x.segment<3>(3 * n + 3 * i);
    std::vector<Vec3> omega_dot(static_cast<std::size_t>(n));
    closed_loop_acceleration(attitudes, omegas, loop, omega_dot);

    Eigen::VectorXd dx(6 * n);
    dx.segment<3>(0) = right_jacobian_inverse(x.segment<3>(0)) * omegas[static_cast<std::size_t>(loop.gains.leader)];
    for (int k = 1; k < n; ++k) {
        const auto& e = tree.edge(k - 1);
        const Vec3 wbar = omegas[static_cast<std::size_t>(e.tail)] -
                          rbar[static_cast<std::size_t>(k - 1)].transpose() * omegas[static_cast<std::size_t>(e.head)];
        dx.segment<3>(3 * k) = right_jacobian_inverse(x.segment<3>(3 * k)) * wbar;
    }
    for (int i = 0; i < n; ++i) dx.segment<3>(3 * n + 3 * i) = omega_dot[static_cast<std::size_t>(i)];
    return dx;
}

Eigen::MatrixXd jacobian_fd(const Equilibrium& eq, const ClosedLoop& loop, double step) {
    const int dim = 6 * loop.n_agents();
    Eigen::MatrixXd m(dim, dim);
    for (int c = 0; c < dim; ++c) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
        e(c) = step;
        m.col(c) = (exp_coordinate_field(e, eq, loop) - exp_coordinate_field(-e, eq, loop)) / (2.0 * step);
    }
    return m;
}

SpectrumReport classify_spectrum(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(Errc::DimensionMismatch, "spectrum needs a nonempty square matrix");
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::EigensolverFailure, "dense eigensolver did not converge");
    }
    SpectrumReport rep;
    const Eigen::VectorXcd ev = es.eigenvalues();
    rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    rep.max_real = -std::numeric_limits<double>::infinity();
    rep.min_abs = std::numeric_limits<double>::infinity();
    rep.min_abs_real_among_oscillatory = std::numeric_limits<double>::infinity();
    for (const auto& z : rep.eigenvalues) {
        rep.max_real = std::max(rep.max_real, z.real());
        rep.min_abs = std::min(rep.min_abs, std::abs(z));
        if (std::abs(z.imag()) > tol) {
            rep.min_abs_real_among_oscillatory = std::min(rep.min_abs_real_among_oscillatory, std::abs(z.real()));
            if (std::abs(z.real()) <= tol) rep.has_imaginary = true;
        }
    }
    rep.has_zero = rep.min_abs <= tol;
    rep.unstable = rep.max_real > tol;
    return rep;
}

}  // namespace so3sync
