#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "so3sync/analysis.hpp"
#include "so3sync/scenario.hpp"

namespace so3sync::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kConvergedTol = 1e-3;

const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Plots a trajectory written by `so3sync simulate`.

usage: plot_trajectory.py [run_dir]
"""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    cols = {name: [float(r[i]) for r in body] for i, name in enumerate(header)}
    return header, cols


def main():
    run_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
    header, traj = load(os.path.join(run_dir, "trajectory.csv"))
    vheader, vel = load(os.path.join(run_dir, "edge_velocities.csv"))
    t = traj["t"]

    leader = [h for h in header if h.startswith("|R0'")]
    edges = [h for h in header if h.startswith("edge")]
    n_agents = len(leader)

    fig, axes = plt.subplots(2, 2, figsize=(12, 8), sharex=True)

    ax = axes[0][0]
    for k, name in enumerate(edges, start=1):
        ax.plot(t, traj[name], label=f"edge {k}")
    ax.set_ylabel(r"$|\bar R_k|_I$")
    ax.set_title("Edge attitude errors")
    ax.legend(fontsize="small")

    ax = axes[0][1]
    for k, name in enumerate(vheader[1:], start=1):
        ax.plot(vel["t"], vel[name], label=f"edge {k}")
    ax.set_ylabel(r"$\|\bar\omega_k\|$")
    ax.set_title("Edge velocity errors")
    ax.legend(fontsize="small")

    ax = axes[1][0]
    for i, name in enumerate(leader, start=1):
        ax.plot(t, traj[name], label=f"agent {i}")
    ax.set_ylabel(r"$|R_0^\top R_i|_I$")
    ax.set_title("Attitude errors to the leader")
    ax.set_xlabel("t [s]")
    ax.legend(fontsize="small")

    ax = axes[1][1]
    for i in range(1, n_agents + 1):
        wx, wy, wz = traj[f"w{i}x"], traj[f"w{i}y"], traj[f"w{i}z"]
        ax.plot(t, [(a * a + b * b + c * c) ** 0.5 for a, b, c in zip(wx, wy, wz)], label=f"agent {i}")
    ax.set_ylabel(r"$\|\omega_i\|$ [rad/s]")
    ax.set_title("Angular velocities")
    ax.set_xlabel("t [s]")
    ax.legend(fontsize="small")

    fig.tight_layout()
    out = os.path.join(run_dir, "trajectory.png")
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
)PY";

void append(std::string& line, double v) {
    line += format_double(v);
}

std::string trajectory_csv(const Trajectory& traj, int n_agents) {
    std::string s = "t,V";
    for (int i = 1; i <= n_agents; ++i) s += ",|R0'R" + std::to_string(i) + "|_I";
    for (int k = 1; k < n_agents; ++k) s += ",edge" + std::to_string(k) + "_err";
    for (int i = 1; i <= n_agents; ++i) {
        for (const char c : {'x', 'y', 'z'}) s += ",w" + std::to_string(i) + c;
    }
    s += '\n';
    for (const auto& smp : traj.samples) {
        append(s, smp.state.t);
        s += ',';
        append(s, smp.lyapunov);
        for (double e : smp.leader_errors) {
            s += ',';
            append(s, e);
        }
        for (double e : smp.edge_errors) {
            s += ',';
            append(s, e);
        }
        for (const auto& w : smp.state.omegas) {
            for (int c = 0; c < 3; ++c) {
                s += ',';
                append(s, w(c));
            }
        }
        s += '\n';
    }
    return s;
}

std::string edge_velocity_csv(const Trajectory& traj, int n_agents) {
    std::string s = "t";
    for (int k = 1; k < n_agents; ++k) s += ",edge" + std::to_string(k) + "_vel";
    s += '\n';
    for (const auto& smp : traj.samples) {
        append(s, smp.state.t);
        for (double v : smp.edge_velocity_norms) {
            s += ',';
            append(s, v);
        }
        s += '\n';
    }
    return s;
}

// Anything wrong with the scenario input maps to kInputError.
struct ScenarioFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Scenario read_scenario(const std::string& path) {
    if (!fs::exists(path)) {
        throw ScenarioFailure("scenario file not found: " + path);
    }
    try {
        return load_scenario(path);
    } catch (const Error& ex) {
        throw ScenarioFailure(path + ": " + ex.what());
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario;
    std::optional<double> tf;
    std::optional<double> dt;
    std::optional<int> sample_every;
    std::string out = ".";
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
    const Scenario sc = read_scenario(args.scenario);
    const ClosedLoop loop = sc.closed_loop();
    const double tf = args.tf.value_or(sc.integration.tf);
    const double h = args.dt.value_or(sc.integration.h);
    const int every = args.sample_every.value_or(sc.integration.sample_every);
    if (!(h > 0.0) || h > kMaxStep) throw Error(Errc::InvalidArgument, "--dt must lie in (0, 0.01]");

    const auto t0 = std::chrono::steady_clock::now();
    const Trajectory traj = simulate(loop, sc.initial_state(), tf, h, every);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path dir(args.out);
    fs::create_directories(dir);
    const int n = sc.n_agents();
    write_atomic(dir / "trajectory.csv", trajectory_csv(traj, n));
    write_atomic(dir / "edge_velocities.csv", edge_velocity_csv(traj, n));
    write_atomic(dir / "plot_trajectory.py", kPlotScript);
    fs::permissions(dir / "plot_trajectory.py", fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                    fs::perm_options::add);

    const TrajectorySample& last = traj.samples.back();
    std::vector<double> omega_norms;
    for (const auto& w : last.state.omegas) omega_norms.push_back(w.norm());
    const auto max_of = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
    const bool converged = max_of(last.leader_errors) < kConvergedTol && max_of(omega_norms) < kConvergedTol &&
                           max_of(last.edge_errors) < kConvergedTol;

    json report;
    report["scenario"] = args.scenario;
    report["tf"] = tf;
    report["h"] = h;
    report["sample_every"] = every;
    report["samples"] = traj.samples.size();
    report["final_time"] = last.state.t;
    report["final_lyapunov"] = last.lyapunov;
    report["final_leader_errors"] = last.leader_errors;
    report["final_edge_errors"] = last.edge_errors;
    report["final_velocity_norms"] = omega_norms;
    report["converged"] = converged;
    report["tolerance"] = kConvergedTol;
    report["wall_time_s"] = wall;
    report["outputs"] = {{"trajectory", (dir / "trajectory.csv").string()},
                         {"edge_velocities", (dir / "edge_velocities.csv").string()},
                         {"plot_script", (dir / "plot_trajectory.py").string()}};
    report["exit_status"] = static_cast<int>(kOk);
    write_atomic(dir / "summary.json", report.dump(2) + "\n");

    out << "simulated " << n << " agents to t = " << last.state.t << " (" << traj.samples.size() << " samples, "
        << wall << " s)\n"
        << "max leader error " << max_of(last.leader_errors) << ", max |w| " << max_of(omega_norms)
        << (converged ? ", converged\n" : ", not converged\n");
    return kOk;
}

// ---------------------------------------------------------------------------
// equilibria
// ---------------------------------------------------------------------------

struct EquilibriaArgs {
    std::string scenario;
    bool exhaustive = false;
    int sample = 200;
    std::string seed;
    bool include_desired = false;
    int jobs = 1;
    std::string out = ".";
};

struct EquilibriumRow {
    Equilibrium eq;
    std::uint64_t code = 0;
    SpectrumReport spectrum;
    double fd_error = 0.0;
    std::optional<bool> hessian_indefinite;
    double hessian_block_error = std::numeric_limits<double>::quiet_NaN();
    bool violation = false;
};

EquilibriumRow analyze(const Equilibrium& eq, const ClosedLoop& loop) {
    EquilibriumRow row;
    row.eq = eq;
    row.code = equilibrium_code(eq);
    const Eigen::MatrixXd m = build_jacobian(eq, loop.gains, loop.tree, loop.inertia);
    row.spectrum = classify_spectrum(m);
    const Eigen::MatrixXd fd = jacobian_fd(eq, loop);
    row.fd_error = (m - fd).norm() / std::max(1.0, m.norm());
    if (eq.is_desired()) {
        row.violation = !(row.spectrum.max_real < 0.0);
    } else {
        const HessianCheck hc = chetaev_hessian_check(eq, loop);
        row.hessian_indefinite = hc.indefinite();
        row.hessian_block_error = std::max(hc.attitude_block_error, hc.omega_block_error);
        row.violation = !row.spectrum.unstable || row.spectrum.has_zero || row.spectrum.has_imaginary ||
                        !hc.indefinite();
    }
    return row;
}

std::string join_ints(const std::vector<int>& v, const Equilibrium* eq = nullptr) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) s += ';';
        s += std::to_string(eq ? eq->slots[static_cast<std::size_t>(v[i])] : v[i]);
    }
    return s;
}

int cmd_equilibria(const EquilibriaArgs& args, std::ostream& out, std::ostream& err) {
    const Scenario sc = read_scenario(args.scenario);
    const ClosedLoop loop = sc.closed_loop();
    const int n = sc.n_agents();
    if (args.exhaustive && n > 10) {
        throw Error(Errc::InvalidArgument, "--exhaustive is limited to 10 agents (4^N - 1 points)");
    }
    if (args.sample < 1) throw Error(Errc::InvalidArgument, "--sample must be >= 1");
    if (args.jobs < 1) throw Error(Errc::InvalidArgument, "--jobs must be >= 1");

    std::int64_t limit = args.sample;
    if (args.exhaustive) limit = (std::int64_t{1} << (2 * n)) - 1;
    const std::uint64_t seed = resolve_seed(args.seed);
    const EquilibriumSet set = enumerate_equilibria(loop.gains, loop.tree, limit, seed);

    std::vector<Equilibrium> points = set.undesired;
    if (args.include_desired) points.insert(points.begin(), set.desired);
    std::vector<EquilibriumRow> rows(points.size());
    parallel_for(static_cast<int>(points.size()), args.jobs,
                 [&](int i) { rows[static_cast<std::size_t>(i)] = analyze(points[static_cast<std::size_t>(i)], loop); });

    std::string csv =
        "code,pi_set,axes,desired,max_re,min_abs,has_zero,has_imaginary,unstable,hessian_indefinite,"
        "hessian_block_err,jacobian_fd_err\n";
    int violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        const std::vector<int> pi = r.eq.pi_set();
        csv += std::to_string(r.code) + ',' + join_ints(pi) + ',' + join_ints(pi, &r.eq) + ',' +
               (r.eq.is_desired() ? "1," : "0,") + format_double(r.spectrum.max_real) + ',' +
               format_double(r.spectrum.min_abs) + ',' + (r.spectrum.has_zero ? "1," : "0,") +
               (r.spectrum.has_imaginary ? "1," : "0,") + (r.spectrum.unstable ? "1," : "0,");
        csv += r.hessian_indefinite ? (*r.hessian_indefinite ? "1," : "0,") : ",";
        csv += (std::isnan(r.hessian_block_error) ? std::string() : format_double(r.hessian_block_error)) + ',' +
               format_double(r.fd_error) + '\n';
        if (r.violation) {
            ++violations;
            err << "violation at equilibrium " << r.code << " (" << r.eq.label() << "): max Re " << r.spectrum.max_real
                << ", min |lambda| " << r.spectrum.min_abs << "\n";
        }
        if (!r.eq.is_desired()) worst_margin = std::min(worst_margin, std::min(r.spectrum.max_real, r.spectrum.min_abs));
    }
    const fs::path dir(args.out);
    fs::create_directories(dir);
    write_atomic(dir / "equilibria.csv", csv);

    out << rows.size() << " equilibria (" << (set.exhaustive ? "exhaustive" : "sampled, seed " + std::to_string(seed))
        << "), " << violations << " violations";
    if (std::isfinite(worst_margin)) out << ", smallest undesired margin " << worst_margin;
    out << "\n";
    return violations == 0 ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// linearize
// ---------------------------------------------------------------------------

struct LinearizeArgs {
    std::string scenario;
    std::string slots;
    std::string out;
};

Equilibrium parse_slots(const std::string& text, int n) {
    Equilibrium eq;
    if (text.empty()) {
        eq.slots.assign(static_cast<std::size_t>(n), 0);
        return eq;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int v = -1;
        const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || p != item.data() + item.size() || v < 0 || v > 3) {
            throw Error(Errc::InvalidArgument, "--slots expects comma-separated values in 0..3");
        }
        eq.slots.push_back(v);
    }
    if (eq.n_slots() != n) {
        throw Error(Errc::DimensionMismatch, "--slots needs " + std::to_string(n) + " values");
    }
    return eq;
}

int cmd_linearize(const LinearizeArgs& args, std::ostream& out) {
    const Scenario sc = read_scenario(args.scenario);
    const ClosedLoop loop = sc.closed_loop();
    const Equilibrium eq = parse_slots(args.slots, sc.n_agents());
    const Eigen::MatrixXd m = build_jacobian(eq, loop.gains, loop.tree, loop.inertia);
    const SpectrumReport spec = classify_spectrum(m);

    json report;
    report["slots"] = eq.slots;
    report["label"] = eq.label();
    report["desired"] = eq.is_desired();
    report["max_re"] = spec.max_real;
    report["min_abs"] = spec.min_abs;
    report["has_zero"] = spec.has_zero;
    report["has_imaginary"] = spec.has_imaginary;
    report["unstable"] = spec.unstable;
    json ev = json::array();
    for (const auto& l : spec.eigenvalues) ev.push_back({l.real(), l.imag()});
    report["eigenvalues"] = ev;
    out << report.dump(2) << "\n";

    if (!args.out.empty()) {
        std::string csv;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (c > 0) csv += ',';
                csv += format_double(m(r, c));
            }
            csv += '\n';
        }
        write_atomic(args.out, csv);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// fuzz
// ---------------------------------------------------------------------------

struct FuzzArgs {
    std::string suite;
    int trials = 200;
    std::string seed;
    int jobs = 1;
};

int cmd_fuzz(const FuzzArgs& args, std::ostream& out, std::ostream& err) {
    if (args.trials < 1) throw Error(Errc::InvalidArgument, "--trials must be >= 1");
    if (args.jobs < 1) throw Error(Errc::InvalidArgument, "--jobs must be >= 1");
    const std::uint64_t seed = resolve_seed(args.seed);
    FuzzResult r;
    std::string metric;
    if (args.suite == "lemma1") {
        r = fuzz_lemma1(args.trials, seed, args.jobs);
        metric = "min singular value of L2";
    } else if (args.suite == "identities") {
        r = fuzz_identities(args.trials, seed, args.jobs);
        metric = "max residual";
    } else {
        r = fuzz_lyapunov(args.trials, seed, args.jobs);
        metric = "max V increase";
    }
    out << args.suite << ": " << r.passed << "/" << r.trials << " pass (seed " << seed << "), " << metric << " "
        << r.worst;
    if (!r.worst_label.empty()) out << " [" << r.worst_label << "]";
    out << "\n";
    for (const auto& f : r.failures) err << "  " << f << "\n";
    return r.passed == r.trials ? kOk : kCheckFailed;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(Errc::IoError, "cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw Error(Errc::IoError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(Errc::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::uint64_t resolve_seed(const std::string& flag_value) {
    std::string text = flag_value;
    if (text.empty()) {
        const char* env = std::getenv("SO3SYNC_SEED");
        if (env == nullptr || *env == '\0') return 1;
        text = env;
    }
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) {
        throw Error(Errc::InvalidArgument, "seed must be a non-negative integer: " + text);
    }
    return v;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
    const int workers = std::max(1, std::min(jobs, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard lock(mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Leader-follower attitude synchronization on SO(3)", "so3sync"};
    app.require_subcommand(1);

    SimulateArgs sim;
    double tf = 0.0;
    double dt = 0.0;
    int every = 0;
    auto* s = app.add_subcommand("simulate", "Integrate a scenario and write trajectory.csv, summary.json and a plot script");
    s->add_option("--scenario", sim.scenario, "Scenario file")->required();
    auto* tf_opt = s->add_option("--tf", tf, "Final time [s] (default: scenario)");
    auto* dt_opt = s->add_option("--dt", dt, "Step size [s] (default: scenario)");
    auto* every_opt = s->add_option("--sample-every", every, "Record every k-th step (default: scenario)");
    s->add_option("--out", sim.out, "Output directory")->capture_default_str();

    EquilibriaArgs eqa;
    auto* e = app.add_subcommand("equilibria", "Classify undesired equilibria by linearization");
    e->add_option("--scenario", eqa.scenario, "Scenario file")->required();
    e->add_flag("--exhaustive", eqa.exhaustive, "All 4^N - 1 undesired points");
    e->add_option("--sample", eqa.sample, "Sample size when not exhaustive")->capture_default_str();
    e->add_option("--seed", eqa.seed, "Sampling seed (default: $SO3SYNC_SEED or 1)");
    e->add_flag("--include-desired", eqa.include_desired, "Add a row for the desired equilibrium");
    e->add_option("--jobs", eqa.jobs, "Worker threads")->capture_default_str();
    e->add_option("--out", eqa.out, "Output directory")->capture_default_str();

    FuzzArgs fz;
    auto* f = app.add_subcommand("fuzz", "Run a seeded property suite");
    f->add_option("--suite", fz.suite, "lemma1 | identities | lyapunov")
        ->required()
        ->check(CLI::IsMember({"lemma1", "identities", "lyapunov"}));
    f->add_option("--trials", fz.trials, "Number of trials")->capture_default_str();
    f->add_option("--seed", fz.seed, "Seed (default: $SO3SYNC_SEED or 1)");
    f->add_option("--jobs", fz.jobs, "Worker threads")->capture_default_str();

    LinearizeArgs lin;
    auto* l = app.add_subcommand("linearize", "Jacobian and spectrum at one equilibrium");
    l->add_option("--scenario", lin.scenario, "Scenario file")->required();
    l->add_option("--slots", lin.slots,
                  "Comma-separated slot values 0..3, leader edge first (default: desired point)");
    l->add_option("--out", lin.out, "Write the Jacobian as CSV to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*s) {
            if (tf_opt->count() > 0) sim.tf = tf;
            if (dt_opt->count() > 0) sim.dt = dt;
            if (every_opt->count() > 0) sim.sample_every = every;
            return cmd_simulate(sim, out);
        }
        if (*e) return cmd_equilibria(eqa, out, err);
        if (*f) return cmd_fuzz(fz, out, err);
        return cmd_linearize(lin, out);
    } catch (const ScenarioFailure& ex) {
        err << "error: " << ex.what() << "\n";
        return kInputError;
    } catch (const Error& ex) {
        err << "error: " << ex.what() << "\n";
        switch (ex.code()) {
            case Errc::IntegrationDiverged:
            case Errc::EigensolverFailure:
            case Errc::IoError:
                return kRuntimeError;
            default:
                return kInputError;
        }
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kRuntimeError;
    }
}

}  // namespace so3sync::cli
