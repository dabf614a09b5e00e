#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "so3sync/dynamics.hpp"

namespace so3sync {

/// Malformed document; line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& what);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Well-formed document violating a named constraint at `key`.
class ValidationError : public Error {
public:
    ValidationError(Errc constraint, std::string key, const std::string& what);
    Errc constraint() const { return constraint_; }
    const std::string& key() const { return key_; }

private:
    Errc constraint_;
    std::string key_;
};

struct AgentSpec {
    int id = 0;  ///< 1-based
    Mat3 inertia = Mat3::Identity();
    AxisAngle initial_attitude{0.0, Vec3::UnitX()};
    Vec3 initial_omega = Vec3::Zero();
};

struct EdgeSpec {
    int i = 0;  ///< 1-based
    int j = 0;
    SymMatrix3 a;
};

struct LeaderSpec {
    int agent = 1;
    AxisAngle r0{0.0, Vec3::UnitX()};
    SymMatrix3 a0;
};

struct IntegrationSpec {
    double h = 1e-3;
    double tf = 30.0;
    int sample_every = 10;
};

/// A validated network description. Agents are stored sorted by id.
struct Scenario {
    std::vector<AgentSpec> agents;
    std::vector<EdgeSpec> edges;
    LeaderSpec leader;
    double k_r0 = 1.0;
    double k_r = 1.0;
    double k_w = 1.0;
    IntegrationSpec integration;

    int n_agents() const { return static_cast<int>(agents.size()); }
    Graph graph() const;
    ClosedLoop closed_loop() const;
    SystemState initial_state() const;
};

/// Parses and validates a scenario document (JSON text).
///
/// Top-level keys: angle_unit ("rad" | "deg", default "rad"), agents,
/// edges, leader, gains, integration. Matrices are either 3 diagonal
/// entries or a 3x3 nested array. Unknown keys are rejected.
Scenario parse_scenario(std::string_view text);

/// Throws Error(IoError) if the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical document in radians; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

bool operator==(const Scenario& a, const Scenario& b);

}  // namespace so3sync
