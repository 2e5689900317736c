#include "rta/orbital_dynamics.hpp"

#include <cmath>

namespace rta {

Mat6 cw_state_matrix(const DynamicsParams& params) {
    const double n = params.n;
    Mat6 A = Mat6::Zero();
    A(0, 3) = 1.0;
    A(1, 4) = 1.0;
    A(2, 5) = 1.0;
    A(3, 0) = 3.0 * n * n;
    A(3, 4) = 2.0 * n;
    A(4, 3) = -2.0 * n;
    A(5, 2) = -n * n;
    return A;
}

Mat63 cw_control_matrix(const DynamicsParams& params) {
    Mat63 B = Mat63::Zero();
    B(3, 0) = 1.0 / params.m;
    B(4, 1) = 1.0 / params.m;
    B(5, 2) = 1.0 / params.m;
    return B;
}

namespace {

// Derivative written out component-wise; called four times per RK4 step.
inline Vec6 deriv(const Vec6& x, const Vec3& u, double n, double m) {
    Vec6 dx;
    dx[0] = x[3];
    dx[1] = x[4];
    dx[2] = x[5];
    dx[3] = 3.0 * n * n * x[0] + 2.0 * n * x[4] + u[0] / m;
    dx[4] = -2.0 * n * x[3] + u[1] / m;
    dx[5] = -n * n * x[2] + u[2] / m;
    return dx;
}

inline Vec6 rk4(const Vec6& x, const Vec3& u, double dt, double n, double m) {
    const Vec6 k1 = deriv(x, u, n, m);
    const Vec6 k2 = deriv(x + 0.5 * dt * k1, u, n, m);
    const Vec6 k3 = deriv(x + 0.5 * dt * k2, u, n, m);
    const Vec6 k4 = deriv(x + dt * k3, u, n, m);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Vec6 cw_derivative(const DeputyState& state, const Vec3& u, const DynamicsParams& params) {
    if (!state.is_finite() || !u.allFinite())
        throw std::invalid_argument("cw_derivative: non-finite input");
    return deriv(state.state(), u, params.n, params.m);
}

Mat6 cw_transition(double n, double t) {
    const double nt = n * t;
    const double c = std::cos(nt);
    const double s = std::sin(nt);

    Mat6 phi = Mat6::Zero();
    phi(0, 0) = 4.0 - 3.0 * c;
    phi(0, 3) = s / n;
    phi(0, 4) = 2.0 * (1.0 - c) / n;
    phi(1, 0) = 6.0 * (s - nt);
    phi(1, 1) = 1.0;
    phi(1, 3) = -2.0 * (1.0 - c) / n;
    phi(1, 4) = (4.0 * s - 3.0 * nt) / n;
    phi(2, 2) = c;
    phi(2, 5) = s / n;
    phi(3, 0) = 3.0 * n * s;
    phi(3, 3) = c;
    phi(3, 4) = 2.0 * s;
    phi(4, 0) = 6.0 * n * (c - 1.0);
    phi(4, 3) = -2.0 * s;
    phi(4, 4) = 4.0 * c - 3.0;
    phi(5, 2) = -n * s;
    phi(5, 5) = c;
    return phi;
}

DeputyState propagate_fft(const DeputyState& state, double t, const DynamicsParams& params) {
    if (t < 0.0) throw std::invalid_argument("propagate_fft: negative horizon");
    const Vec6 x = cw_transition(params.n, t) * state.state();
    return DeputyState::from_state(x, state.delta_v_used);
}

Vec3 sun_vector(double theta_s) {
    return Vec3(std::cos(theta_s), std::sin(theta_s), 0.0);
}

Vec3 boresight(const Vec3& p) {
    const double r = p.norm();
    if (!(r > 0.0)) throw std::domain_error("boresight undefined at the origin");
    return -p / r;
}

FleetState step(const FleetState& fleet, const ControlVector& u, double dt,
                const DynamicsParams& params, double u_max) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (u.count() != fleet.count())
        throw std::invalid_argument("step: control size does not match fleet");
    if (!u.is_finite() || u.max_abs() > u_max * (1.0 + 1e-9) + 1e-12)
        throw std::invalid_argument("step: inadmissible control command");

    FleetState out = fleet;
    for (int i = 0; i < fleet.count(); ++i) {
        const auto idx = static_cast<size_t>(i);
        const Vec3& f = u.forces[idx];
        const Vec6 x = rk4(fleet.deputies[idx].state(), f, dt, params.n, params.m);
        out.deputies[idx].p = x.head<3>();
        out.deputies[idx].v = x.tail<3>();
        out.deputies[idx].delta_v_used += f.cwiseAbs().sum() / params.m * dt;
    }
    out.theta_s = fleet.theta_s - params.n * dt;
    out.t = fleet.t + dt;
    return out;
}

}  // namespace rta
