#include "rta/asif_filter.hpp"

#include "rta/orbital_dynamics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rta;

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * u01(rng); }

Vec3 random_unit(std::mt19937_64& rng) {
    const double c = uniform(rng, -1.0, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double az = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    return Vec3(s * std::cos(az), s * std::sin(az), c);
}

bool state_safe(const ConstraintEvaluator& eval, const FleetState& f) {
    for (const auto& pv : eval.phi_all(f, ConstraintSet::all_h(), false))
        if (pv.value < 0.0) return false;
    for (const auto& ev : eval.all_barriers(f, ConstraintSet::all_h()))
        if (ev.value < 0.0) return false;
    return true;
}

FleetState random_safe_fleet(std::mt19937_64& rng, const ConstraintEvaluator& eval, int n) {
    for (;;) {
        FleetState f;
        f.theta_s = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        for (int i = 0; i < n; ++i) {
            DeputyState d;
            d.p = uniform(rng, 80.0, 700.0) * random_unit(rng);
            d.v = Vec3(uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.6));
            f.deputies.push_back(d);
        }
        if (state_safe(eval, f)) return f;
    }
}

}  // namespace

TEST_CASE("barrier row assembly") {
    const ConstraintEvaluator eval(ConstraintParams{});
    const ConstraintParams& cp = eval.params();
    AlphaSpec alpha;

    FleetState f;
    f.deputies.push_back(DeputyState{Vec3(300, 0, 0), Vec3(0.5, 0, 0), 0.0});
    f.deputies.push_back(DeputyState{Vec3(0, 300, 0), Vec3::Zero(), 0.0});

    SUBCASE("plain linear strengthening without tightening") {
        AlphaSpec plain;
        plain.gamma = 0.05;
        plain.margin = 0.0;
        plain.margin_by_kind.clear();
        CHECK(plain(9, 2.0) == doctest::Approx(0.1));
    }

    SUBCASE("zero gradient keeps only the strengthening term") {
        BarrierEval ev;
        ev.id = {9, 0, -1};
        ev.value = 2.0;
        ev.grad = Eigen::VectorXd::Zero(12);
        const BarrierRow row = barrier_row(ev, f, cp, alpha);
        CHECK(row.coeffs.norm() == 0.0);
        CHECK(row.offset == doctest::Approx(alpha(9, 2.0)));
    }

    SUBCASE("velocity-box row has a single thrust entry") {
        const BarrierEval ev = eval.h_velocity_box(f, 0, 0);
        const BarrierRow row = barrier_row(ev, f, cp, alpha);
        CHECK(row.coeffs[0] == doctest::Approx(-2.0 * 0.5 / cp.dyn.m));
        for (int k = 1; k < 6; ++k) CHECK(row.coeffs[k] == 0.0);
    }

    SUBCASE("offset carries the drift and strengthening terms") {
        const BarrierEval ev = eval.h_velocity_box(f, 0, 0);
        const BarrierRow row = barrier_row(ev, f, cp, alpha);
        // d/dt (vmax^2 - xdot^2) under drift = -2 xdot (3 n^2 x + 2 n ydot)
        const double n = cp.dyn.n;
        const double drift = -2.0 * 0.5 * (3.0 * n * n * 300.0);
        CHECK(row.offset == doctest::Approx(drift + alpha(9, ev.value)).epsilon(1e-12));
    }
}

TEST_CASE("interior states pass through untouched") {
    const ConstraintEvaluator eval(ConstraintParams{});
    AsifConfig cfg;
    std::mt19937_64 rng(31);
    for (int t = 0; t < 20; ++t) {
        const FleetState f = random_safe_fleet(rng, eval, 2);
        const ControlVector zero = ControlVector::zero(2);
        const FilterOutcome fc = filter_centralized(f, zero, eval, cfg);
        // A zero command in the interior can still be nudged when a barrier
        // derivative condition binds; only assert the no-op when untouched.
        if (!fc.intervened) {
            CHECK(fc.u_act.stacked() == zero.stacked());
            CHECK(fc.status == QpStatus::optimal);
        }
    }
}

TEST_CASE("minimal invasiveness: compliant commands are returned bit-exact") {
    const ConstraintEvaluator eval(ConstraintParams{});
    AsifConfig cfg;
    std::mt19937_64 rng(37);
    int checked = 0;
    while (checked < 25) {
        const FleetState f = random_safe_fleet(rng, eval, 2);
        ControlVector u = ControlVector::zero(2);
        for (auto& fo : u.forces)
            fo = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
        // Keep the sample only if every barrier condition already holds at u,
        // both with full knowledge and per deputy with partners assumed
        // thrust-free (the decentralized rows are the restricted ones).
        bool central_ok = true, decentral_ok = true;
        for (const auto& ev : eval.all_barriers(f, cfg.enabled)) {
            const BarrierRow row = barrier_row(ev, f, eval.params(), cfg.alpha);
            if (row.coeffs.dot(u.stacked()) + row.offset < 1e-9) central_ok = false;
            for (int d = 0; d < 2; ++d) {
                if (ev.id.i != d && ev.id.j != d) continue;
                if (row.coeffs.segment<3>(3 * d).dot(u.forces[static_cast<size_t>(d)]) + row.offset <
                    1e-9)
                    decentral_ok = false;
            }
        }
        if (!central_ok || !decentral_ok) continue;
        ++checked;
        const FilterOutcome fc = filter_centralized(f, u, eval, cfg);
        CHECK(fc.u_act.stacked() == u.stacked());
        CHECK_FALSE(fc.intervened);
        const FilterOutcome fd = filter_decentralized(f, u, eval, cfg);
        CHECK(fd.u_act.stacked() == u.stacked());
    }
}

TEST_CASE("filtered control satisfies every assembled barrier condition") {
    const ConstraintEvaluator eval(ConstraintParams{});
    AsifConfig cfg;
    std::mt19937_64 rng(41);
    for (int t = 0; t < 40; ++t) {
        const FleetState f = random_safe_fleet(rng, eval, 2);
        ControlVector u = ControlVector::zero(2);
        for (auto& fo : u.forces)
            fo = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
        const FilterOutcome fc = filter_centralized(f, u, eval, cfg);
        if (fc.status != QpStatus::optimal) continue;
        for (const auto& ev : eval.all_barriers(f, cfg.enabled)) {
            const BarrierRow row = barrier_row(ev, f, eval.params(), cfg.alpha);
            CHECK(row.coeffs.dot(fc.u_act.stacked()) + row.offset >= -1e-7);
        }
        CHECK(fc.u_act.max_abs() <= eval.params().u_max + 1e-12);
    }
}

TEST_CASE("inward push at the separation boundary is redirected") {
    const ConstraintEvaluator eval(ConstraintParams{});
    AsifConfig cfg;
    FleetState f;
    f.deputies.push_back(DeputyState{Vec3(10.5, 0, 0), Vec3(-0.2, 0, 0), 0.0});
    f.theta_s = std::numbers::pi;  // sun behind the deputy, keep-out inactive

    ControlVector u = ControlVector::zero(1);
    u.forces[0] = Vec3(-1.0, 0, 0);  // full thrust toward the chief
    const FilterOutcome fo = filter_centralized(f, u, eval, cfg);
    REQUIRE(fo.status == QpStatus::optimal);
    CHECK(fo.intervened);

    const BarrierEval h1 = eval.h_chief_separation(f, 0);
    const BarrierRow row = barrier_row(h1, f, eval.params(), cfg.alpha);
    CHECK(row.coeffs.dot(fo.u_act.stacked()) + row.offset >= -1e-7);
}

TEST_CASE("single deputy: both modes produce identical bits") {
    const ConstraintEvaluator eval(ConstraintParams{});
    AsifConfig cfg;
    std::mt19937_64 rng(43);
    for (int t = 0; t < 30; ++t) {
        const FleetState f = random_safe_fleet(rng, eval, 1);
        ControlVector u = ControlVector::zero(1);
        u.forces[0] = Vec3(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2));
        const FilterOutcome a = filter_centralized(f, u, eval, cfg);
        const FilterOutcome b = filter_decentralized(f, u, eval, cfg);
        CHECK(a.u_act.stacked() == b.u_act.stacked());
        CHECK(a.status == b.status);
        CHECK(a.intervened == b.intervened);
    }
}

TEST_CASE("centralized filtering keeps random drifts inside the allowable set") {
    const ConstraintEvaluator eval(ConstraintParams{});
    const ConstraintParams& cp = eval.params();
    AsifConfig cfg;
    std::mt19937_64 rng(47);

    for (int trial = 0; trial < 30; ++trial) {
        FleetState f = random_safe_fleet(rng, eval, 2);
        for (int k = 0; k < 200; ++k) {
            ControlVector u_des = ControlVector::zero(2);
            for (auto& fo : u_des.forces)
                fo = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
            const FilterOutcome fo = filter_centralized(f, u_des, eval, cfg);
            f = step(f, fo.u_act, 1.0, cp.dyn, cp.u_max);
            for (const auto& pv : eval.phi_all(f, ConstraintSet::all_h(), false))
                CHECK(pv.value >= -1e-6);
        }
    }
}

TEST_CASE("active constraints are reported at the boundary") {
    const ConstraintEvaluator eval(ConstraintParams{});
    AsifConfig cfg;
    FleetState f;
    f.deputies.push_back(DeputyState{Vec3(10.5, 0, 0), Vec3(-0.2, 0, 0), 0.0});
    f.theta_s = std::numbers::pi;
    ControlVector u = ControlVector::zero(1);
    u.forces[0] = Vec3(-1.0, 0, 0);
    const FilterOutcome fo = filter_centralized(f, u, eval, cfg);
    REQUIRE(fo.status == QpStatus::optimal);
    bool found = false;
    for (const auto& id : fo.active)
        if (id.k == 1) found = true;
    CHECK(found);
}
