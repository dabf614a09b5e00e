#include <gtest/gtest.h>

#include <fstream>
#include "json.hpp"

#include "support.hpp"

using namespace so3sync;
using namespace so3sync::testing;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json fig1_json() { return json::parse(read_file(scenario_path("fig1.scenario"))); }

/// Runs parse_scenario and returns the ValidationError's (constraint, key).
std::pair<Errc, std::string> validation_of(const json& doc) {
    try {
        parse_scenario(doc.dump());
    } catch (const ValidationError& e) {
        return {e.constraint(), e.key()};
    } catch (const Error& e) {
        return {Errc::IoError, std::string(e.what())};
    }
    return {Errc::IoError, "accepted"};
}

Errc error_code_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::IoError;
}

}  // namespace

TEST(Scenario, SevenAgentFileMatchesPublishedParameters) {
    const Scenario s = load_scenario(scenario_path("fig1.scenario"));
    ASSERT_EQ(s.n_agents(), 7);
    EXPECT_EQ(s.k_r0, 2.5);
    EXPECT_EQ(s.k_r, 2.0);
    EXPECT_EQ(s.k_w, 1.5);
    EXPECT_EQ(s.leader.agent, 1);
    EXPECT_EQ(s.leader.a0, SymMatrix3::diagonal(5, 8, 10));
    EXPECT_NEAR(s.leader.r0.theta(), 0.8 * kPi, 1e-15);
    EXPECT_LE((s.leader.r0.axis() - Vec3(1, 4, 2).normalized()).norm(), 1e-15);

    for (int i = 1; i <= 7; ++i) {
        const Mat3 j = Vec3(i, i + 2, 2 * i).asDiagonal().toDenseMatrix() / 10.0;
        EXPECT_LE((s.agents[static_cast<std::size_t>(i - 1)].inertia - j).cwiseAbs().maxCoeff(), 1e-15) << i;
        EXPECT_EQ(s.agents[static_cast<std::size_t>(i - 1)].id, i);
    }

    const Vec3 u1 = Vec3::UnitY();
    const Vec3 u2 = Vec3(1, 1, 0).normalized();
    const std::pair<double, Vec3> att[7] = {{-0.1, u2}, {0.3, u1}, {0.6, u1}, {-0.2, u2},
                                            {0.5, u1},  {-0.2, u2}, {0.1, u2}};
    const Vec3 om[7] = {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}, {0, 2, 1}, {1, 1, 1}, {1, 3, 1}, {3, 0, 1}};
    const SystemState init = s.initial_state();
    for (std::size_t i = 0; i < 7; ++i) {
        EXPECT_LE((init.attitudes[i].matrix() - axis_angle_oracle(att[i].first * kPi, att[i].second)).cwiseAbs().maxCoeff(),
                  1e-14)
            << i;
        EXPECT_EQ(init.omegas[i], om[i]);
    }

    const std::tuple<int, int, Vec3> edges[6] = {{2, 7, {5, 6, 8}}, {1, 3, {6, 8, 10}}, {3, 5, {7, 8, 9}},
                                                 {3, 6, {5, 7, 8}}, {4, 5, {6, 7, 10}}, {6, 7, {5, 7, 10}}};
    ASSERT_EQ(s.edges.size(), 6u);
    for (const auto& [i, j, d] : edges) {
        const auto it = std::find_if(s.edges.begin(), s.edges.end(), [&](const EdgeSpec& e) {
            return std::min(e.i, e.j) == i && std::max(e.i, e.j) == j;
        });
        ASSERT_NE(it, s.edges.end()) << i << "-" << j;
        EXPECT_EQ(it->a, SymMatrix3::diagonal(d(0), d(1), d(2)));
    }
    EXPECT_EQ(s.integration.h, 1e-3);
    EXPECT_EQ(s.integration.tf, 30.0);
}

TEST(Scenario, ClosedLoopUsesZeroBasedIndices) {
    const Scenario s = load_scenario(scenario_path("fig1.scenario"));
    const ClosedLoop loop = s.closed_loop();
    EXPECT_EQ(loop.gains.leader, 0);
    EXPECT_EQ(loop.n_agents(), 7);
    // Gain of tree edge {1,3} in 1-based ids is the one between indices 0 and 2.
    const int k = loop.tree.edge_index(0, 2);
    ASSERT_GE(k, 0);
    EXPECT_EQ(loop.gains.a_edge[static_cast<std::size_t>(k)], SymMatrix3::diagonal(6, 8, 10));
    EXPECT_LE((loop.inertia.j(6) - Mat3(Vec3(0.7, 0.9, 1.4).asDiagonal())).norm(), 1e-15);
}

TEST(Scenario, ValidationErrors) {
    json d = fig1_json();
    d["edges"][2]["a"] = {5, 5, 8};
    EXPECT_EQ(validation_of(d), std::make_pair(Errc::RepeatedEigenvalue, std::string("edges[2].a")));

    d = fig1_json();
    d["edges"].push_back({{"i", 1}, {"j", 7}, {"a", {1, 2, 3}}});
    EXPECT_EQ(validation_of(d).first, Errc::HasCycle);
    EXPECT_EQ(validation_of(d).second, "edges");

    d = fig1_json();
    d["edges"][5] = {{"i", 1}, {"j", 2}, {"a", {1, 2, 3}}};
    d["edges"].erase(4);
    EXPECT_EQ(validation_of(d).first, Errc::NotConnected);

    d = fig1_json();
    d["leader"] = json::array({d["leader"], d["leader"]});
    EXPECT_EQ(validation_of(d).first, Errc::MultipleLeaders);

    d = fig1_json();
    d["leader"]["a0"] = {{1, 0, 0}, {0, -2, 0}, {0, 0, 3}};
    EXPECT_EQ(validation_of(d), std::make_pair(Errc::NonPositiveDefiniteGain, std::string("leader.a0")));

    d = fig1_json();
    d["leader"]["a0"] = {{5, 1, 0}, {0, 8, 0}, {0, 0, 10}};
    EXPECT_EQ(validation_of(d).first, Errc::NotSymmetric);

    d = fig1_json();
    d["agents"][3]["inertia"] = {0.1, -0.1, 0.2};
    EXPECT_EQ(validation_of(d), std::make_pair(Errc::NonPositiveDefiniteInertia, std::string("agents[3].inertia")));

    d = fig1_json();
    d["gains"]["k_w"] = 0;
    EXPECT_EQ(validation_of(d).first, Errc::NonPositiveGain);

    d = fig1_json();
    d["agents"][6]["id"] = 9;
    EXPECT_EQ(validation_of(d).first, Errc::InvalidGraph);

    d = fig1_json();
    d["edges"][0]["j"] = 1;
    EXPECT_EQ(validation_of(d).first, Errc::InvalidGraph);

    d = fig1_json();
    d["edges"][1] = d["edges"][0];
    EXPECT_EQ(validation_of(d).first, Errc::DuplicateEdge);

    d = fig1_json();
    d["integration"]["h"] = 0.02;
    EXPECT_EQ(validation_of(d).second, "integration.h");

    d = fig1_json();
    d["leader"]["agent"] = 8;
    EXPECT_EQ(validation_of(d).second, "leader.agent");
}

TEST(Scenario, ValidationErrorCarriesParentCode) {
    json d = fig1_json();
    d["edges"][0]["a"] = {6, 6, 10};
    EXPECT_EQ(error_code_of(d.dump()), Errc::ValidationError);
    try {
        parse_scenario(d.dump());
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("edges[0].a"), std::string::npos) << e.what();
    }
}

TEST(Scenario, ParseErrorsReportLineAndColumn) {
    const std::string text = "{\n  \"agents\": [\n    {\"id\": 1,,}\n  ]\n}\n";
    try {
        parse_scenario(text);
        FAIL() << "accepted malformed text";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_EQ(e.column(), 14);
        EXPECT_EQ(e.code(), Errc::ParseError);
    }
    EXPECT_EQ(error_code_of(""), Errc::ParseError);
    EXPECT_EQ(error_code_of("[1, 2]"), Errc::ValidationError);
}

TEST(Scenario, StructuralErrors) {
    json d = fig1_json();
    d["extra"] = 1;
    EXPECT_NE(error_code_of(d.dump()), Errc::IoError);
    d = fig1_json();
    d.erase("gains");
    EXPECT_NE(error_code_of(d.dump()), Errc::IoError);
    d = fig1_json();
    d["angle_unit"] = "grad";
    EXPECT_NE(error_code_of(d.dump()), Errc::IoError);
    d = fig1_json();
    d["agents"][0]["attitude"]["axis"] = {0, 0, 0};
    EXPECT_NE(error_code_of(d.dump()), Errc::IoError);
    d = fig1_json();
    d["agents"][0]["omega"] = {1, 2};
    EXPECT_NE(error_code_of(d.dump()), Errc::IoError);
}

TEST(Scenario, KeyOrderAndUnitsDoNotMatter) {
    const Scenario deg = load_scenario(scenario_path("fig1.scenario"));
    json d = fig1_json();
    d["angle_unit"] = "rad";
    for (auto& a : d["agents"]) a["attitude"]["angle"] = a["attitude"]["angle"].get<double>() * kPi / 180.0;
    d["leader"]["r0"]["angle"] = 0.8 * kPi;
    std::reverse(d["agents"].begin(), d["agents"].end());
    const Scenario rad = parse_scenario(d.dump());
    ASSERT_EQ(rad.n_agents(), 7);
    const SystemState a = deg.initial_state();
    const SystemState b = rad.initial_state();
    for (std::size_t i = 0; i < 7; ++i) {
        EXPECT_LE((a.attitudes[i].matrix() - b.attitudes[i].matrix()).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Scenario, RoundTrip) {
    for (const char* name : {"fig1.scenario", "chain2.scenario", "chain3.scenario"}) {
        const Scenario s = load_scenario(scenario_path(name));
        const std::string text = serialize_scenario(s);
        const Scenario back = parse_scenario(text);
        EXPECT_TRUE(back == s) << name;
        EXPECT_EQ(serialize_scenario(back), text) << name;
    }
}

TEST(Scenario, RoundTripRandom) {
    Gen g(61);
    for (int trial = 0; trial < 100; ++trial) {
        const Network net = random_network(g, g.integer(2, 8), false);
        Scenario s;
        for (int i = 0; i < net.tree.n_agents(); ++i) {
            const AxisAngle aa = log_so3(net.state.attitudes[static_cast<std::size_t>(i)]);
            s.agents.push_back({i + 1, net.inertia[static_cast<std::size_t>(i)], aa, net.state.omegas[static_cast<std::size_t>(i)]});
        }
        for (int k = 0; k < net.tree.n_edges(); ++k) {
            const auto& e = net.tree.edge(k);
            s.edges.push_back({e.tail + 1, e.head + 1, net.gains.a_edge[static_cast<std::size_t>(k)]});
        }
        s.leader = {1, log_so3(net.r0), net.gains.a_leader};
        s.k_r0 = net.gains.k_r0;
        s.k_r = net.gains.k_r;
        s.k_w = net.gains.k_w;
        s.integration = {g.uniform(1e-4, 1e-2), g.uniform(0.0, 50.0), g.integer(1, 20)};
        const Scenario back = parse_scenario(serialize_scenario(s));
        EXPECT_TRUE(back == s);
        const ClosedLoop loop = back.closed_loop();
        EXPECT_NEAR(lyapunov_value(back.initial_state(), loop), lyapunov_value(s.initial_state(), s.closed_loop()), 0.0);
    }
}

TEST(Scenario, MissingFile) {
    try {
        load_scenario("/nonexistent/none.scenario");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IoError);
    }
}
