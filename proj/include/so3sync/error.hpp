#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace so3sync {

enum class Errc {
    NonSkewInput,
    NonUnitAxis,
    NotARotation,
    NotSymmetric,
    DegenerateMatrix,
    InvalidGraph,
    NotConnected,
    HasCycle,
    DuplicateEdge,
    MissingLeaderAttitude,
    UnknownNeighbor,
    MissingNeighbor,
    NonPositiveGain,
    NonPositiveDefiniteGain,
    RepeatedEigenvalue,
    NonPositiveDefiniteInertia,
    DimensionMismatch,
    InvalidArgument,
    IntegrationDiverged,
    EmptyPiSet,
    LeaderSlotNotPi,
    EigensolverFailure,
    ParseError,
    ValidationError,
    MultipleLeaders,
    IoError,
};

std::string_view to_string(Errc code);

/// Library-wide exception; `code()` names the violated contract.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace so3sync
