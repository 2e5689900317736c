#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rta {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// One deputy's translational state in Hill's frame (x radial, y along-track,
/// z cross-track, chief at the origin) plus its cumulative delta-v.
struct DeputyState {
    Vec3 p = Vec3::Zero();      // position [m]
    Vec3 v = Vec3::Zero();      // velocity [m/s]
    double delta_v_used = 0.0;  // cumulative delta-v [m/s], never decreases

    Vec6 state() const {
        Vec6 x;
        x << p, v;
        return x;
    }

    static DeputyState from_state(const Vec6& x, double delta_v = 0.0) {
        DeputyState d;
        d.p = x.head<3>();
        d.v = x.tail<3>();
        d.delta_v_used = delta_v;
        return d;
    }

    bool is_finite() const {
        return p.allFinite() && v.allFinite() && std::isfinite(delta_v_used) &&
               delta_v_used >= 0.0;
    }
};

/// All deputies plus the sun geometry and the mission clock.
struct FleetState {
    std::vector<DeputyState> deputies;
    double theta_s = 0.0;  // sun angle w.r.t. +x [rad]; advances at -n
    double t = 0.0;        // mission time [s]

    int count() const { return static_cast<int>(deputies.size()); }

    bool is_finite() const {
        if (!std::isfinite(theta_s) || !std::isfinite(t)) return false;
        for (const auto& d : deputies)
            if (!d.is_finite()) return false;
        return true;
    }
};

/// Per-deputy thrust commands [N], one 3-vector per deputy.
struct ControlVector {
    std::vector<Vec3> forces;

    static ControlVector zero(int n) {
        return ControlVector{std::vector<Vec3>(static_cast<size_t>(n), Vec3::Zero())};
    }

    int count() const { return static_cast<int>(forces.size()); }

    Eigen::VectorXd stacked() const {
        Eigen::VectorXd u(3 * count());
        for (int i = 0; i < count(); ++i) u.segment<3>(3 * i) = forces[static_cast<size_t>(i)];
        return u;
    }

    static ControlVector from_stacked(const Eigen::VectorXd& u) {
        if (u.size() % 3 != 0) throw std::invalid_argument("stacked control size must be a multiple of 3");
        ControlVector c;
        c.forces.resize(static_cast<size_t>(u.size() / 3));
        for (int i = 0; i < c.count(); ++i) c.forces[static_cast<size_t>(i)] = u.segment<3>(3 * i);
        return c;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& f : forces) m = std::max(m, f.cwiseAbs().maxCoeff());
        return m;
    }

    bool is_finite() const {
        for (const auto& f : forces)
            if (!f.allFinite()) return false;
        return true;
    }
};

struct DynamicsParams {
    double n = 0.001027;  // mean motion of the chief's orbit [rad/s]
    double m = 12.0;      // deputy mass [kg]

    void validate() const {
        if (!(n > 0.0) || !(m > 0.0)) throw std::invalid_argument("dynamics params must be positive");
    }
};

/// Constraint and filter tuning. Defaults are the nominal mission values for
/// a 6U CubeSat inspecting a chief in LEO.
struct ConstraintParams {
    DynamicsParams dyn;
    double r_d = 5.0;                    // deputy collision radius [m]
    double r_c = 5.0;                    // chief collision radius [m]
    double nu0 = 0.2;                    // minimum allowable docking speed [m/s]
    double nu1 = 2.0 * 0.001027;         // speed-gradient rate [rad/s]
    double delta_v_max = 20.0;           // fuel budget [m/s]
    double alpha_fov = deg2rad(60.0);    // sensor field of view [rad]
    double r_max = 1000.0;               // keep-in radius [m]
    double fft_horizon = 500.0;          // free-flight lookahead T [s]
    int fft_samples = 101;               // samples over [t0, t0+T]
    double v_max = 1.0;                  // per-axis velocity limit [m/s]
    double u_max = 1.0;                  // per-axis thrust limit [N]
    double a_max_range = 1000.0;         // range used for worst-case deceleration [m]
    double theta_s0 = 0.0;               // initial sun angle [rad]

    void validate() const {
        dyn.validate();
        auto pos = [](double x) { return x > 0.0 && std::isfinite(x); };
        if (!pos(r_d) || !pos(r_c) || !pos(nu0) || !pos(nu1) || !pos(delta_v_max) ||
            !pos(alpha_fov) || !pos(r_max) || !pos(fft_horizon) || !pos(v_max) ||
            !pos(u_max) || !(a_max_range >= 0.0) || fft_samples < 2 || !std::isfinite(theta_s0))
            throw std::invalid_argument("constraint params out of range");
    }
};

}  // namespace rta
