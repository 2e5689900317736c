#include "rta/controllers.hpp"

#include "rta/fuel_switching.hpp"
#include "rta/orbital_dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace rta {

namespace {

bool is_stable(const Eigen::MatrixXd& M, double margin = 0.0) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    return es.eigenvalues().real().maxCoeff() < -margin;
}

// A' X + X A + W = 0 for stable A, solved through the Kronecker form
// (I (x) A' + A' (x) I) vec(X) = -vec(W). Sizes here are at most 9x9, so the
// dense 81x81 factorization is immediate.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W) {
    const int n = static_cast<int>(A.rows());
    const Eigen::MatrixXd At = A.transpose();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n * n, n * n);
    for (int blk = 0; blk < n; ++blk) M.block(blk * n, blk * n, n, n) += At;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            M.block(i * n, j * n, n, n) += At(i, j) * Eigen::MatrixXd::Identity(n, n);

    Eigen::VectorXd w(n * n);
    for (int col = 0; col < n; ++col) w.segment(col * n, n) = -W.col(col);
    const Eigen::VectorXd x = M.partialPivLu().solve(w);
    Eigen::MatrixXd X(n, n);
    for (int col = 0; col < n; ++col) X.col(col) = x.segment(col * n, n);
    return 0.5 * (X + X.transpose());
}

}  // namespace

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
        R.rows() != B.cols() || R.cols() != B.cols())
        throw std::invalid_argument("care: inconsistent dimensions");

    const Eigen::MatrixXd Rinv = R.inverse();
    const Eigen::MatrixXd S = B * Rinv * B.transpose();

    // Follow the Riccati flow until the implied gain stabilizes the loop,
    // then polish with Newton iterations on the algebraic equation.
    Eigen::MatrixXd P = Q;
    const double scale = A.cwiseAbs().maxCoeff() + S.cwiseAbs().maxCoeff() * Q.cwiseAbs().maxCoeff() + 1.0;
    const double h = 0.2 / scale;
    auto rhs = [&](const Eigen::MatrixXd& X) {
        return (A.transpose() * X + X * A - X * S * X + Q).eval();
    };

    // The flow only needs to reach a clearly stabilizing gain; Newton then
    // converges quadratically. A marginal gain would make the Lyapunov solve
    // ill-conditioned, hence the stability margin before switching over.
    auto flow_until_stable = [&](Eigen::MatrixXd X, int steps) {
        for (int it = 0; it < steps; ++it) {
            if (it % 64 == 0 && is_stable(A - S * X, 1e-7)) return std::pair{X, true};
            const Eigen::MatrixXd k1 = rhs(X);
            const Eigen::MatrixXd k2 = rhs(X + 0.5 * h * k1);
            const Eigen::MatrixXd k3 = rhs(X + 0.5 * h * k2);
            const Eigen::MatrixXd k4 = rhs(X + h * k3);
            X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            X = 0.5 * (X + X.transpose());
            if (!X.allFinite()) throw std::runtime_error("care: flow diverged");
        }
        return std::pair{X, is_stable(A - S * X, 1e-7)};
    };

    bool stabilized = false;
    std::tie(P, stabilized) = flow_until_stable(P, 400000);
    if (!stabilized) throw std::runtime_error("care: failed to reach a stabilizing gain");

    for (int round = 0; round < 5; ++round) {
        Eigen::MatrixXd K = Rinv * B.transpose() * P;
        bool ok = true;
        for (int it = 0; it < 100; ++it) {
            const Eigen::MatrixXd Acl = A - B * K;
            if (!is_stable(Acl)) {
                ok = false;
                break;
            }
            const Eigen::MatrixXd X = solve_lyapunov(Acl, Q + K.transpose() * R * K);
            const double delta = (X - P).cwiseAbs().maxCoeff();
            P = X;
            K = Rinv * B.transpose() * P;
            if (delta < 1e-12 * (1.0 + P.cwiseAbs().maxCoeff())) break;
        }
        const double resid = rhs(P).cwiseAbs().maxCoeff();
        if (ok && resid < 1e-6 * (1.0 + P.cwiseAbs().maxCoeff()) && is_stable(A - S * P)) return P;
        // Newton drifted: resume the flow from here and try again.
        std::tie(P, stabilized) = flow_until_stable(P, 100000);
        if (!stabilized) break;
    }
    throw std::runtime_error("care: residual check failed");
}

LqrGains design_backup_gains(const DynamicsParams& dyn, const BackupLqrConfig& cfg) {
    dyn.validate();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(9, 9);
    A.topLeftCorner<6, 6>() = cw_state_matrix(dyn);
    // Integral of the position error. Integrating the velocity error instead
    // would duplicate the position states and leave the pair unstabilizable.
    A.block<3, 3>(6, 0) = Mat3::Identity();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(9, 3);
    B.topRows<6>() = cw_control_matrix(dyn);

    const Eigen::MatrixXd Q = cfg.q_diag.asDiagonal();
    const Eigen::MatrixXd R = cfg.r_diag.asDiagonal();
    const Eigen::MatrixXd P = solve_care(A, B, Q, R);
    const Eigen::MatrixXd K = R.inverse() * B.transpose() * P;

    LqrGains g;
    g.K1 = K.leftCols<6>();
    g.K2 = K.rightCols<3>();
    if (!g.K1.allFinite() || !g.K2.allFinite()) throw std::runtime_error("backup gains not finite");
    return g;
}

Vec3 backup_lqr(const DeputyState& state, const LqrGains& gains, const DynamicsParams& dyn,
                double u_max, double dt, Vec3& z, const BackupLqrConfig& cfg) {
    const Vec6 xdes = nearest_enmt_target(state, dyn);
    const Vec6 e = state.state() - xdes;

    // Only the in-plane velocity defects are nonzero by construction; once
    // they are inside the deadband the deputy coasts with zero thrust.
    if (std::abs(e[3]) < cfg.deadband_defect && std::abs(e[4]) < cfg.deadband_drift)
        return Vec3::Zero();

    Vec3 u = -gains.K1 * e - gains.K2 * z;
    z += e.head<3>() * dt;
    for (int k = 0; k < 3; ++k) u[k] = std::clamp(u[k], -u_max, u_max);
    return u;
}

AggressiveLqr::AggressiveLqr(const DynamicsParams& dyn, const AggressiveLqrConfig& cfg) {
    const Eigen::MatrixXd A = cw_state_matrix(dyn);
    const Eigen::MatrixXd B = cw_control_matrix(dyn);
    const Eigen::MatrixXd Q = cfg.q_diag.asDiagonal();
    const Eigen::MatrixXd R = cfg.r_diag.asDiagonal();
    const Eigen::MatrixXd P = solve_care(A, B, Q, R);
    K_ = R.inverse() * B.transpose() * P;
}

Vec3 AggressiveLqr::control(const DeputyState& state, const Vec3& target) const {
    Vec6 e = state.state();
    e.head<3>() -= target;
    return -K_ * e;
}

}  // namespace rta
