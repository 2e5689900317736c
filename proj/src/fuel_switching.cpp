#include "rta/fuel_switching.hpp"

#include "rta/orbital_dynamics.hpp"

#include <cmath>

namespace rta {

Vec6 nearest_enmt_target(const DeputyState& state, const DynamicsParams& dyn) {
    Vec6 xdes;
    xdes << state.p.x(), state.p.y(), state.p.z(), 0.5 * dyn.n * state.p.y(),
        -2.0 * dyn.n * state.p.x(), state.v.z();
    return xdes;
}

namespace {

// Closed-loop backup prediction from the current state: true if the fuel
// budget (minus the guard band) survives the whole lookahead horizon.
bool backup_keeps_budget(DeputyState dep, const BackupController& proto,
                         const ConstraintParams& cp, double dt) {
    const double guard = 3.0 * cp.u_max * dt / cp.dyn.m;
    const double budget = cp.delta_v_max - guard;
    if (dep.delta_v_used > budget) return false;

    BackupController sim = proto;
    sim.z.setZero();  // the live integrator also starts from zero at latch time

    const int steps = static_cast<int>(std::llround(cp.fft_horizon / dt));
    FleetState one;
    one.deputies.push_back(dep);
    for (int k = 0; k < steps; ++k) {
        const Vec3 u = sim.control(one.deputies[0], dt);
        if (!u.allFinite()) return false;  // diverged: latch conservatively
        ControlVector cv;
        cv.forces.push_back(u);
        one = step(one, cv, dt, cp.dyn, cp.u_max);
        if (!one.is_finite()) return false;
        if (one.deputies[0].delta_v_used > budget) return false;
    }
    return true;
}

}  // namespace

Vec3 switching_filter(const FleetState& fleet, int i, const Vec3& u_des_i,
                      BackupController& backup, SwitchState& state,
                      const ConstraintParams& params, double dt) {
    const DeputyState& dep = fleet.deputies[static_cast<size_t>(i)];
    if (!state.latched && !backup_keeps_budget(dep, backup, params, dt)) {
        state.latched = true;
        state.latch_time = fleet.t;
    }
    if (state.latched) return backup.control(dep, dt);
    return u_des_i;
}

}  // namespace rta
