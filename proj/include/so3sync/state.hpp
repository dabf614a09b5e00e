#pragma once

#include <vector>

#include "so3sync/so3.hpp"

namespace so3sync {

/// Attitudes and body angular velocities (rad/s) of all agents at time t (s).
struct SystemState {
    std::vector<RotationMatrix> attitudes;
    std::vector<Vec3> omegas;
    double t = 0.0;

    int n_agents() const { return static_cast<int>(attitudes.size()); }

    Eigen::VectorXd stacked_omega() const {
        Eigen::VectorXd w(3 * static_cast<Eigen::Index>(omegas.size()));
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            w.segment<3>(3 * static_cast<Eigen::Index>(i)) = omegas[i];
        }
        return w;
    }
};

}  // namespace so3sync
