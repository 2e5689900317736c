#include "rta/controllers.hpp"

#include "rta/fuel_switching.hpp"
#include "rta/orbital_dynamics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rta;

namespace {
const DynamicsParams kDyn{};
}

TEST_CASE("continuous riccati solution satisfies the algebraic equation") {
    Eigen::MatrixXd A = cw_state_matrix(kDyn);
    Eigen::MatrixXd B = cw_control_matrix(kDyn);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(6, 6);
    Eigen::MatrixXd R = 1e-2 * Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd P = solve_care(A, B, Q, R);

    const Eigen::MatrixXd resid =
        A.transpose() * P + P * A - P * B * R.inverse() * B.transpose() * P + Q;
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-6 * (1.0 + P.cwiseAbs().maxCoeff()));
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-9);

    // stabilizing: closed loop strictly in the left half plane
    const Eigen::MatrixXd Acl = A - B * R.inverse() * B.transpose() * P;
    Eigen::EigenSolver<Eigen::MatrixXd> es(Acl, false);
    CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
}

TEST_CASE("backup gain design is stable on the augmented system") {
    const BackupLqrConfig cfg;
    const LqrGains g = design_backup_gains(kDyn, cfg);
    CHECK(g.K1.allFinite());
    CHECK(g.K2.allFinite());

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(9, 9);
    A.topLeftCorner<6, 6>() = cw_state_matrix(kDyn);
    A.block<3, 3>(6, 0) = Mat3::Identity();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(9, 3);
    B.topRows<6>() = cw_control_matrix(kDyn);
    Eigen::MatrixXd K(3, 9);
    K << g.K1, g.K2;
    Eigen::EigenSolver<Eigen::MatrixXd> es(A - B * K, false);
    CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
}

TEST_CASE("aggressive regulator is quiet at its setpoint") {
    const AggressiveLqr agg(kDyn, AggressiveLqrConfig{});
    DeputyState d;
    d.p = Vec3(250, -80, 30);
    CHECK(agg.control(d, d.p).norm() == doctest::Approx(0.0));

    // far target: thrust points toward it, well beyond the actuator box
    const Vec3 u = agg.control(d, Vec3::Zero());
    CHECK(u.norm() > 10.0);
    CHECK(u.dot(-d.p) > 0.0);

    // outward target pushes outward
    const Vec3 out = agg.control(d, 4.0 * d.p);
    CHECK(out.dot(d.p) > 0.0);
}

TEST_CASE("backup controller is quiet on a parking orbit") {
    const BackupLqrConfig cfg;
    const LqrGains g = design_backup_gains(kDyn, cfg);
    DeputyState d;
    d.p = Vec3(100, 0, 0);
    d.v = Vec3(0, -2.0 * kDyn.n * 100.0, 0);  // exact closed-orbit velocity
    Vec3 z = Vec3::Zero();
    const Vec3 u = backup_lqr(d, g, kDyn, 1.0, 1.0, z, cfg);
    CHECK(u.norm() == 0.0);
    CHECK(z.norm() == 0.0);
}

TEST_CASE("parking-orbit target") {
    SUBCASE("closed-orbit states are fixed points") {
        DeputyState d;
        d.p = Vec3(100, 0, 0);
        d.v = Vec3(0, -0.2054, 0);
        const Vec6 t = nearest_enmt_target(d, kDyn);
        CHECK((t - d.state()).norm() < 1e-12);
    }
    SUBCASE("origin maps to origin") {
        CHECK(nearest_enmt_target(DeputyState{}, kDyn).norm() == 0.0);
    }
    SUBCASE("in-plane target velocity depends only on position") {
        DeputyState a, b;
        a.p = b.p = Vec3(40, -70, 25);
        a.v = Vec3(0.3, -0.1, 0.2);
        b.v = Vec3(-0.5, 0.4, -0.3);
        const Vec6 ta = nearest_enmt_target(a, kDyn);
        const Vec6 tb = nearest_enmt_target(b, kDyn);
        CHECK(ta[3] == tb[3]);
        CHECK(ta[4] == tb[4]);
        CHECK(ta[3] == doctest::Approx(0.5 * kDyn.n * a.p.y()));
        CHECK(ta[4] == doctest::Approx(-2.0 * kDyn.n * a.p.x()));
    }
}

TEST_CASE("backup closed loop reaches the parking orbit") {
    const BackupLqrConfig cfg;
    const LqrGains g = design_backup_gains(kDyn, cfg);

    DeputyState x0;
    x0.p = Vec3(100, 50, 10);
    FleetState fleet;
    fleet.deputies.push_back(x0);
    Vec3 z = Vec3::Zero();

    double conv_t = -1.0;
    for (int k = 0; k < 2000; ++k) {
        const Vec3 u = backup_lqr(fleet.deputies[0], g, kDyn, 1.0, 1.0, z, cfg);
        CHECK(u.allFinite());
        CHECK(u.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
        ControlVector cv;
        cv.forces.push_back(u);
        fleet = step(fleet, cv, 1.0, kDyn, 1.0);
        const Vec6 err = fleet.deputies[0].state() - nearest_enmt_target(fleet.deputies[0], kDyn);
        if (conv_t < 0.0 && err.norm() < 0.1) conv_t = fleet.t;
    }
    CHECK(conv_t > 0.0);
    CHECK(conv_t < 2000.0);
    CHECK(std::isfinite(fleet.deputies[0].delta_v_used));
    CHECK(fleet.deputies[0].delta_v_used > 0.0);

    // once inside the deadband the thrust is exactly zero
    const Vec3 u_end = backup_lqr(fleet.deputies[0], g, kDyn, 1.0, 1.0, z, cfg);
    CHECK(u_end.norm() == 0.0);
}

TEST_CASE("error norm decays in a time-averaged sense") {
    const BackupLqrConfig cfg;
    const LqrGains g = design_backup_gains(kDyn, cfg);
    std::mt19937_64 rng(3);
    auto u01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    for (int trial = 0; trial < 10; ++trial) {
        DeputyState x0;
        x0.p = Vec3(600.0 * (2.0 * u01() - 1.0), 600.0 * (2.0 * u01() - 1.0),
                    200.0 * (2.0 * u01() - 1.0));
        x0.v = Vec3(0.5 * (2.0 * u01() - 1.0), 0.5 * (2.0 * u01() - 1.0), 0.5 * (2.0 * u01() - 1.0));
        FleetState fleet;
        fleet.deputies.push_back(x0);
        Vec3 z = Vec3::Zero();

        auto err_norm = [&]() {
            return (fleet.deputies[0].state() - nearest_enmt_target(fleet.deputies[0], kDyn)).norm();
        };
        double early = 0.0, late = 0.0;
        for (int k = 0; k < 400; ++k) {
            if (k < 50) early += err_norm();
            if (k >= 350) late += err_norm();
            ControlVector cv;
            cv.forces.push_back(backup_lqr(fleet.deputies[0], g, kDyn, 1.0, 1.0, z, cfg));
            fleet = step(fleet, cv, 1.0, kDyn, 1.0);
        }
        CHECK(late / 50.0 < early / 50.0);
    }
}
