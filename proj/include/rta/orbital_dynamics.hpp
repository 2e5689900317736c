#pragma once

#include "rta/types.hpp"

namespace rta {

// Clohessy-Wiltshire relative-motion model. The chief flies a circular orbit
// with mean motion n; deputy dynamics are linear and decoupled per deputy.

Mat6 cw_state_matrix(const DynamicsParams& params);
Mat63 cw_control_matrix(const DynamicsParams& params);

/// State derivative A*x + B*u at the given state and thrust command.
Vec6 cw_derivative(const DeputyState& state, const Vec3& u, const DynamicsParams& params);

/// Closed-form state transition matrix of the unforced dynamics over t seconds.
Mat6 cw_transition(double n, double t);

/// Unforced (free-flight) propagation by t seconds using the closed-form
/// solution; velocity comes from its analytic time derivative. delta_v_used
/// is untouched.
DeputyState propagate_fft(const DeputyState& state, double t, const DynamicsParams& params);

/// Unit vector pointing at the Sun for the given sun angle.
Vec3 sun_vector(double theta_s);

/// Sensor boresight: unit vector from the deputy toward the chief.
Vec3 boresight(const Vec3& p);

/// Advance the whole fleet by one RK4 step under zero-order-hold thrust.
/// Accumulates delta-v as total commanded thrust over mass, rotates the sun
/// angle by -n*dt, and advances the clock. Commands outside +-u_max are
/// rejected.
FleetState step(const FleetState& fleet, const ControlVector& u, double dt,
                const DynamicsParams& params, double u_max);

}  // namespace rta
