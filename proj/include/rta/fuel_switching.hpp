#pragma once

#include "rta/controllers.hpp"
#include "rta/types.hpp"

#include <limits>

namespace rta {

/// Tracking target on the nearest closed parking orbit: position is kept,
/// the in-plane velocities move onto the closed-orbit manifold, the
/// cross-track velocity is left alone (its free motion is already periodic).
Vec6 nearest_enmt_target(const DeputyState& state, const DynamicsParams& dyn);

/// Latch state of the fuel-limit filter for one deputy. The latch never
/// releases: once on the backup controller, the deputy stays there.
struct SwitchState {
    bool latched = false;
    double latch_time = std::numeric_limits<double>::quiet_NaN();
};

/// Fuel-limit switching filter for deputy i. While unlatched it simulates the
/// closed-loop backup trajectory over the lookahead horizon; if the predicted
/// delta-v stays inside the budget (minus a one-step guard band), u_des
/// passes through, otherwise the filter latches onto the backup controller.
/// The live backup integrator advances only while latched.
Vec3 switching_filter(const FleetState& fleet, int i, const Vec3& u_des_i,
                      BackupController& backup, SwitchState& state,
                      const ConstraintParams& params, double dt);

}  // namespace rta
