#include "so3sync/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace so3sync {

using nlohmann::json;

ParseError::ParseError(int line, int column, const std::string& what)
    : Error(Errc::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

ValidationError::ValidationError(Errc constraint, std::string key, const std::string& what)
    : Error(Errc::ValidationError, std::string(to_string(constraint)) + " at '" + key + "': " + what),
      constraint_(constraint),
      key_(std::move(key)) {}

namespace {

[[noreturn]] void invalid(Errc c, const std::string& key, const std::string& what) {
    throw ValidationError(c, key, what);
}

void require_keys(const json& obj, const std::string& key, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
    if (!obj.is_object()) invalid(Errc::InvalidArgument, key, "expected an object");
    for (const char* r : required) {
        if (!obj.contains(r)) invalid(Errc::InvalidArgument, key.empty() ? r : key + "." + r, "missing key");
    }
    for (const auto& [k, _] : obj.items()) {
        const auto match = [&](const char* s) { return k == s; };
        if (std::none_of(required.begin(), required.end(), match) &&
            std::none_of(optional.begin(), optional.end(), match)) {
            invalid(Errc::InvalidArgument, key.empty() ? k : key + "." + k, "unknown key");
        }
    }
}

double number(const json& v, const std::string& key) {
    if (!v.is_number()) invalid(Errc::InvalidArgument, key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(Errc::InvalidArgument, key, "expected a finite number");
    return d;
}

int integer(const json& v, const std::string& key) {
    if (!v.is_number_integer()) invalid(Errc::InvalidArgument, key, "expected an integer");
    return v.get<int>();
}

Vec3 vec3(const json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 3) invalid(Errc::InvalidArgument, key, "expected 3 numbers");
    return {number(v[0], key + "[0]"), number(v[1], key + "[1]"), number(v[2], key + "[2]")};
}

Mat3 matrix(const json& v, const std::string& key) {
    if (v.is_array() && v.size() == 3 && v[0].is_number()) {
        return vec3(v, key).asDiagonal();
    }
    if (!v.is_array() || v.size() != 3) invalid(Errc::InvalidArgument, key, "expected 3 diagonal entries or a 3x3 array");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        m.row(r) = vec3(v[static_cast<std::size_t>(r)], key + "[" + std::to_string(r) + "]").transpose();
    }
    return m;
}

SymMatrix3 symmetric(const json& v, const std::string& key) {
    const Mat3 m = matrix(v, key);
    try {
        return SymMatrix3(m);
    } catch (const Error&) {
        invalid(Errc::NotSymmetric, key, "matrix must be symmetric");
    }
}

AxisAngle axis_angle(const json& v, const std::string& key, double unit) {
    require_keys(v, key, {"angle", "axis"});
    const double angle = number(v["angle"], key + ".angle") * unit;
    try {
        return AxisAngle::from_unnormalized(angle, vec3(v["axis"], key + ".axis"));
    } catch (const Error&) {
        invalid(Errc::NonUnitAxis, key + ".axis", "axis must be nonzero");
    }
}

void check_gain(const SymMatrix3& a, const std::string& key) {
    const Vec3 ev = eigen_axes(a).values;
    if (!(ev(0) > 0.0)) invalid(Errc::NonPositiveDefiniteGain, key, "gain matrix must be positive definite");
    if (!(ev(1) - ev(0) > kEigenGapTol) || !(ev(2) - ev(1) > kEigenGapTol)) {
        invalid(Errc::RepeatedEigenvalue, key, "gain matrix needs three distinct eigenvalues");
    }
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
    int line = 1;
    int col = 1;
    const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json matrix_json(const Mat3& m) {
    if (m.isDiagonal(0.0)) {
        return json::array({m(0, 0), m(1, 1), m(2, 2)});
    }
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

json axis_angle_json(const AxisAngle& aa) { return {{"angle", aa.theta()}, {"axis", vec_json(aa.axis())}}; }

}  // namespace

Graph Scenario::graph() const {
    Graph g;
    g.n_agents = n_agents();
    for (const auto& e : edges) g.edges.emplace_back(e.i - 1, e.j - 1);
    return g;
}

ClosedLoop Scenario::closed_loop() const {
    OrientedTree tree = validate_tree(graph());
    GainAssignment gains;
    gains.k_r0 = k_r0;
    gains.k_r = k_r;
    gains.k_w = k_w;
    gains.a_leader = leader.a0;
    gains.leader = leader.agent - 1;
    gains.a_edge.resize(static_cast<std::size_t>(tree.n_edges()));
    for (const auto& e : edges) {
        gains.a_edge[static_cast<std::size_t>(tree.edge_index(e.i - 1, e.j - 1))] = e.a;
    }
    std::vector<Mat3> j;
    for (const auto& a : agents) j.push_back(a.inertia);
    return ClosedLoop(std::move(tree), std::move(gains), rot_axis_angle(leader.r0), InertiaSet(std::move(j)));
}

SystemState Scenario::initial_state() const {
    SystemState s;
    for (const auto& a : agents) {
        s.attitudes.push_back(rot_axis_angle(a.initial_attitude));
        s.omegas.push_back(a.initial_omega);
    }
    return s;
}

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        throw ParseError(line, col, e.what());
    }

    require_keys(doc, "", {"agents", "edges", "leader", "gains"}, {"angle_unit", "integration"});
    double unit = 1.0;
    if (doc.contains("angle_unit")) {
        const json& u = doc["angle_unit"];
        if (u == "deg") {
            unit = std::numbers::pi / 180.0;
        } else if (u != "rad") {
            invalid(Errc::InvalidArgument, "angle_unit", "expected \"rad\" or \"deg\"");
        }
    }

    Scenario s;
    const json& agents = doc["agents"];
    if (!agents.is_array() || agents.size() < 2) invalid(Errc::InvalidGraph, "agents", "need at least 2 agents");
    for (std::size_t idx = 0; idx < agents.size(); ++idx) {
        const std::string key = "agents[" + std::to_string(idx) + "]";
        const json& a = agents[idx];
        require_keys(a, key, {"id", "inertia", "attitude"}, {"omega"});
        AgentSpec spec;
        spec.id = integer(a["id"], key + ".id");
        spec.inertia = matrix(a["inertia"], key + ".inertia");
        try {
            (void)InertiaSet({spec.inertia});
        } catch (const Error& e) {
            invalid(e.code(), key + ".inertia", "inertia must be symmetric positive definite");
        }
        spec.initial_attitude = axis_angle(a["attitude"], key + ".attitude", unit);
        if (a.contains("omega")) spec.initial_omega = vec3(a["omega"], key + ".omega");
        s.agents.push_back(spec);
    }
    std::sort(s.agents.begin(), s.agents.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        if (s.agents[i].id != static_cast<int>(i) + 1) {
            invalid(Errc::InvalidGraph, "agents", "ids must be exactly 1..N");
        }
    }

    const json& edges = doc["edges"];
    if (!edges.is_array()) invalid(Errc::InvalidArgument, "edges", "expected an array");
    for (std::size_t idx = 0; idx < edges.size(); ++idx) {
        const std::string key = "edges[" + std::to_string(idx) + "]";
        const json& e = edges[idx];
        require_keys(e, key, {"i", "j", "a"});
        EdgeSpec spec;
        spec.i = integer(e["i"], key + ".i");
        spec.j = integer(e["j"], key + ".j");
        spec.a = symmetric(e["a"], key + ".a");
        check_gain(spec.a, key + ".a");
        s.edges.push_back(spec);
    }
    try {
        (void)validate_tree(s.graph());
    } catch (const Error& e) {
        invalid(e.code(), "edges", e.what());
    }

    json leader = doc["leader"];
    if (leader.is_array()) {
        if (leader.size() != 1) invalid(Errc::MultipleLeaders, "leader", "exactly one leader-informed agent");
        leader = leader[0];
    }
    require_keys(leader, "leader", {"r0", "a0"}, {"agent"});
    if (leader.contains("agent")) s.leader.agent = integer(leader["agent"], "leader.agent");
    if (s.leader.agent < 1 || s.leader.agent > s.n_agents()) {
        invalid(Errc::InvalidArgument, "leader.agent", "unknown agent id");
    }
    s.leader.r0 = axis_angle(leader["r0"], "leader.r0", unit);
    s.leader.a0 = symmetric(leader["a0"], "leader.a0");
    check_gain(s.leader.a0, "leader.a0");

    const json& gains = doc["gains"];
    require_keys(gains, "gains", {"k_r0", "k_r", "k_w"});
    s.k_r0 = number(gains["k_r0"], "gains.k_r0");
    s.k_r = number(gains["k_r"], "gains.k_r");
    s.k_w = number(gains["k_w"], "gains.k_w");
    for (const auto& [name, v] : {std::pair{"gains.k_r0", s.k_r0}, {"gains.k_r", s.k_r}, {"gains.k_w", s.k_w}}) {
        if (!(v > 0.0)) invalid(Errc::NonPositiveGain, name, "gain must be positive");
    }

    if (doc.contains("integration")) {
        const json& in = doc["integration"];
        require_keys(in, "integration", {}, {"h", "tf", "sample_every"});
        if (in.contains("h")) s.integration.h = number(in["h"], "integration.h");
        if (in.contains("tf")) s.integration.tf = number(in["tf"], "integration.tf");
        if (in.contains("sample_every")) s.integration.sample_every = integer(in["sample_every"], "integration.sample_every");
        if (!(s.integration.h > 0.0) || s.integration.h > kMaxStep) {
            invalid(Errc::InvalidArgument, "integration.h", "step must lie in (0, 0.01]");
        }
        if (!(s.integration.tf >= 0.0)) invalid(Errc::InvalidArgument, "integration.tf", "must be >= 0");
        if (s.integration.sample_every < 1) invalid(Errc::InvalidArgument, "integration.sample_every", "must be >= 1");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read scenario file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    json doc;
    doc["angle_unit"] = "rad";
    json agents = json::array();
    for (const auto& a : s.agents) {
        agents.push_back({{"id", a.id},
                          {"inertia", matrix_json(a.inertia)},
                          {"attitude", axis_angle_json(a.initial_attitude)},
                          {"omega", vec_json(a.initial_omega)}});
    }
    doc["agents"] = agents;
    json edges = json::array();
    for (const auto& e : s.edges) edges.push_back({{"i", e.i}, {"j", e.j}, {"a", matrix_json(e.a.matrix())}});
    doc["edges"] = edges;
    doc["leader"] = {{"agent", s.leader.agent}, {"r0", axis_angle_json(s.leader.r0)}, {"a0", matrix_json(s.leader.a0.matrix())}};
    doc["gains"] = {{"k_r0", s.k_r0}, {"k_r", s.k_r}, {"k_w", s.k_w}};
    doc["integration"] = {{"h", s.integration.h}, {"tf", s.integration.tf}, {"sample_every", s.integration.sample_every}};
    return doc.dump(2) + "\n";
}

bool operator==(const Scenario& a, const Scenario& b) {
    const auto same_aa = [](const AxisAngle& x, const AxisAngle& y) {
        return x.theta() == y.theta() && x.axis() == y.axis();
    };
    if (a.agents.size() != b.agents.size() || a.edges.size() != b.edges.size()) return false;
    for (std::size_t i = 0; i < a.agents.size(); ++i) {
        const auto& x = a.agents[i];
        const auto& y = b.agents[i];
        if (x.id != y.id || x.inertia != y.inertia || !same_aa(x.initial_attitude, y.initial_attitude) ||
            x.initial_omega != y.initial_omega) {
            return false;
        }
    }
    for (std::size_t k = 0; k < a.edges.size(); ++k) {
        if (a.edges[k].i != b.edges[k].i || a.edges[k].j != b.edges[k].j || !(a.edges[k].a == b.edges[k].a)) {
            return false;
        }
    }
    return a.leader.agent == b.leader.agent && same_aa(a.leader.r0, b.leader.r0) && a.leader.a0 == b.leader.a0 &&
           a.k_r0 == b.k_r0 && a.k_r == b.k_r && a.k_w == b.k_w && a.integration.h == b.integration.h &&
           a.integration.tf == b.integration.tf && a.integration.sample_every == b.integration.sample_every;
}

}  // namespace so3sync
