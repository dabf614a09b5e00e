#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "so3sync/analysis.hpp"

namespace so3sync::cli {

namespace {

constexpr double kLemma1Floor = 1e-8;
constexpr double kIdentityTol = 1e-12;
constexpr double kMonotoneSlack = 1e-9;

// One independent stream per trial so results do not depend on --jobs.
std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Vec3 v;
    do {
        v = Vec3(nd(rng), nd(rng), nd(rng));
    } while (v.norm() < 1e-6);
    return v.normalized();
}

RotationMatrix random_rotation(std::mt19937_64& rng) {
    return rot_axis_angle(AxisAngle(uniform(rng, -std::numbers::pi, std::numbers::pi), random_unit(rng)));
}

Mat3 conjugate(const Vec3& diag, const RotationMatrix& q) {
    const Mat3 m = q.matrix() * diag.asDiagonal() * q.matrix().transpose();
    return 0.5 * (m + m.transpose());
}

SymMatrix3 random_gain(std::mt19937_64& rng) {
    const double a = uniform(rng, 1.0, 4.0);
    const double b = a + uniform(rng, 0.5, 3.0);
    const double c = b + uniform(rng, 0.5, 3.0);
    return SymMatrix3(conjugate(Vec3(a, b, c), random_rotation(rng)));
}

Mat3 random_inertia(std::mt19937_64& rng) {
    return conjugate(Vec3(uniform(rng, 0.1, 1.0), uniform(rng, 0.1, 1.0), uniform(rng, 0.1, 1.0)), random_rotation(rng));
}

template <class Trial>
FuzzResult run_trials(int trials, int jobs, bool lower_is_worse, Trial&& trial) {
    FuzzResult r;
    r.trials = trials;
    r.worst = lower_is_worse ? std::numeric_limits<double>::infinity() : 0.0;
    std::mutex mu;
    std::vector<std::pair<int, std::string>> failures;
    parallel_for(trials, jobs, [&](int t) {
        std::string label;
        const auto [value, ok] = trial(t, label);
        const std::lock_guard lock(mu);
        if (ok) ++r.passed;
        if (!ok) failures.emplace_back(t, "trial " + std::to_string(t) + ": " + label);
        const bool worse = lower_is_worse ? value < r.worst : value > r.worst;
        if (worse) {
            r.worst = value;
            r.worst_label = "trial " + std::to_string(t) + (label.empty() ? "" : ", " + label);
        }
    });
    std::sort(failures.begin(), failures.end());
    for (auto& f : failures) r.failures.push_back(std::move(f.second));
    return r;
}

}  // namespace

FuzzResult fuzz_lemma1(int trials, std::uint64_t seed, int jobs) {
    return run_trials(trials, jobs, true, [seed](int t, std::string& label) {
        auto rng = trial_rng(seed, t);
        const int n = std::uniform_int_distribution<int>(2, 12)(rng);
        const int leader = std::uniform_int_distribution<int>(0, n - 1)(rng);
        const OrientedTree tree = validate_tree(random_tree(n, rng));
        std::vector<RotationMatrix> r;
        for (int i = 0; i < n; ++i) r.push_back(random_rotation(rng));
        const RotationMatrix r0 = random_rotation(rng);
        const EdgeAttitudes ea = build_edge_attitudes(tree, r, r0, leader);
        const double s = min_singular_l2(build_l(tree, ea, leader));
        label = "N=" + std::to_string(n) + " leader=" + std::to_string(leader + 1);
        return std::pair{s, s > kLemma1Floor};
    });
}

FuzzResult fuzz_identities(int trials, std::uint64_t seed, int jobs) {
    return run_trials(trials, jobs, false, [seed](int t, std::string& label) {
        auto rng = trial_rng(seed, t);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        const Vec3 x(u(rng), u(rng), u(rng));
        const Vec3 y(u(rng), u(rng), u(rng));
        Mat3 a;
        for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = u(rng);
        const double theta = uniform(rng, 0.0, std::numbers::pi - 1e-3);
        const Vec3 axis = random_unit(rng);
        const RotationMatrix r = rot_axis_angle(AxisAngle(theta, axis));

        const std::pair<const char*, double> residuals[] = {
            {"vex(hat(x)) = x", (vex(hat(x)) - x).cwiseAbs().maxCoeff()},
            {"hat(x) y = x cross y", (hat(x) * y - x.cross(y)).cwiseAbs().maxCoeff()},
            {"hat(x) hat(y) = y x' - (x'y) I",
             (hat(x) * hat(y) - (y * x.transpose() - x.dot(y) * Mat3::Identity())).cwiseAbs().maxCoeff()},
            {"psi(A) = vex((A - A')/2)", (psi(a) - vex(0.5 * (a - a.transpose()))).cwiseAbs().maxCoeff()},
            {"psi(A hat(x)) = E(A) x", (psi(a * hat(x)) - e_matrix(a) * x).cwiseAbs().maxCoeff()},
            {"tr(A hat(x)) = -2 x' psi(A)", std::abs((a * hat(x)).trace() + 2.0 * x.dot(psi(a)))},
            {"R hat(x) R' = hat(R x)",
             (r.matrix() * hat(x) * r.matrix().transpose() - hat(r * x)).cwiseAbs().maxCoeff()},
            {"R' R = I", r.orthonormality_error()},
            {"det R = 1", std::abs(r.matrix().determinant() - 1.0)},
            {"exp(log R) = R", (rot_axis_angle(log_so3(r)).matrix() - r.matrix()).cwiseAbs().maxCoeff()},
            {"|R|_I = |sin(theta/2)|", std::abs(attitude_norm(r) - std::abs(std::sin(0.5 * theta)))},
        };
        double worst = 0.0;
        for (const auto& [name, res] : residuals) {
            if (res > worst) {
                worst = res;
                label = name;
            }
        }
        return std::pair{worst, worst < kIdentityTol};
    });
}

FuzzResult fuzz_lyapunov(int trials, std::uint64_t seed, int jobs) {
    return run_trials(trials, jobs, false, [seed](int t, std::string& label) {
        auto rng = trial_rng(seed, t);
        const int n = std::uniform_int_distribution<int>(2, 7)(rng);
        OrientedTree tree = validate_tree(random_tree(n, rng));
        GainAssignment g;
        g.k_r0 = uniform(rng, 0.5, 3.0);
        g.k_r = uniform(rng, 0.5, 3.0);
        g.k_w = uniform(rng, 0.5, 3.0);
        g.leader = std::uniform_int_distribution<int>(0, n - 1)(rng);
        g.a_leader = random_gain(rng);
        for (int k = 0; k < tree.n_edges(); ++k) g.a_edge.push_back(random_gain(rng));
        std::vector<Mat3> j;
        for (int i = 0; i < n; ++i) j.push_back(random_inertia(rng));
        const RotationMatrix r0 = random_rotation(rng);
        SystemState s;
        for (int i = 0; i < n; ++i) {
            s.attitudes.push_back(random_rotation(rng));
            s.omegas.emplace_back(uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0));
        }
        const ClosedLoop loop(std::move(tree), std::move(g), r0, InertiaSet(std::move(j)));
        const Trajectory traj = simulate(loop, s, 10.0, 1e-3, 10);
        double worst = 0.0;
        for (std::size_t k = 1; k < traj.samples.size(); ++k) {
            worst = std::max(worst, traj.samples[k].lyapunov - traj.samples[k - 1].lyapunov);
        }
        label = "N=" + std::to_string(n);
        return std::pair{worst, worst <= kMonotoneSlack};
    });
}

}  // namespace so3sync::cli
