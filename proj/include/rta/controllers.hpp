#pragma once

#include "rta/types.hpp"

#include <Eigen/Dense>

namespace rta {

/// Stabilizing solution of A'P + PA - P B R^-1 B' P + Q = 0. Throws when the
/// iteration fails to converge or the implied loop is not stable.
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Backup tracking-controller design: LQR on the error dynamics augmented
/// with an integral of the velocity error (9 states, 3 controls).
struct BackupLqrConfig {
    Eigen::Matrix<double, 9, 1> q_diag =
        (Eigen::Matrix<double, 9, 1>() << 1, 1, 1, 10, 10, 10, 0.1, 0.1, 0.1).finished();
    Vec3 r_diag = Vec3::Constant(100.0);
    // Thrust snaps to zero once the parking-orbit velocity defects are inside
    // this band; the drift channel gets the tight threshold because it feeds
    // the other one.
    double deadband_defect = 5e-4;  // [m/s] on xdot - (n/2) y
    double deadband_drift = 2e-5;   // [m/s] on ydot + 2 n x
};

struct AggressiveLqrConfig {
    Vec6 q_diag = Vec6::Ones();
    Vec3 r_diag = Vec3::Constant(1e-2);
};

struct ControllerConfigs {
    BackupLqrConfig backup;
    AggressiveLqrConfig aggressive;
};

/// Gains of the backup tracking law u = -K1 e - K2 z, split from the
/// augmented-system LQR gain.
struct LqrGains {
    Eigen::Matrix<double, 3, 6> K1;
    Mat3 K2;
};

LqrGains design_backup_gains(const DynamicsParams& dyn, const BackupLqrConfig& cfg);

/// Tracking control toward the nearest closed parking orbit. Integrates the
/// velocity error into z and saturates the output to +-u_max per axis.
Vec3 backup_lqr(const DeputyState& state, const LqrGains& gains, const DynamicsParams& dyn,
                double u_max, double dt, Vec3& z, const BackupLqrConfig& cfg);

/// Stateful wrapper used by the switching filter: one instance per deputy.
struct BackupController {
    LqrGains gains;
    BackupLqrConfig cfg;
    DynamicsParams dyn;
    double u_max = 1.0;
    Vec3 z = Vec3::Zero();

    Vec3 control(const DeputyState& state, double dt) {
        return backup_lqr(state, gains, dyn, u_max, dt, z, cfg);
    }
};

/// Deliberately unsafe position regulator used to stress the safety filters.
/// Output is raw state feedback; saturation happens at the plant.
class AggressiveLqr {
public:
    AggressiveLqr(const DynamicsParams& dyn, const AggressiveLqrConfig& cfg);
    Vec3 control(const DeputyState& state, const Vec3& target) const;

private:
    Eigen::Matrix<double, 3, 6> K_;
};

}  // namespace rta
