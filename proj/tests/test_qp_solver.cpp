#include "rta/qp_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rta;

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * u01(rng); }

// Independent projection oracle: Hildreth's dual coordinate ascent over all
// rows (box included). Converges to the exact projection for consistent
// systems; the caller asserts convergence.
struct OracleResult {
    Eigen::VectorXd u;
    bool converged = false;
};

OracleResult hildreth_project(const QpProblem& prob, int max_sweeps = 200000) {
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> offs;
    for (const auto& [a, b] : prob.ineq) {
        rows.push_back(a);
        offs.push_back(b);
    }
    for (int k = 0; k < prob.dim; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(prob.dim);
        e[k] = 1.0;
        rows.push_back(e);
        offs.push_back(-prob.lower[k]);
        rows.push_back(-e);
        offs.push_back(prob.upper[k]);
    }
    const int m = static_cast<int>(rows.size());
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd u = prob.u_des;

    OracleResult out;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (int i = 0; i < m; ++i) {
            const double denom = rows[static_cast<size_t>(i)].squaredNorm();
            if (denom < 1e-14) continue;
            const double resid = rows[static_cast<size_t>(i)].dot(u) + offs[static_cast<size_t>(i)];
            const double delta = std::max(-lambda[i], -resid / denom);
            if (delta != 0.0) {
                lambda[i] += delta;
                u += delta * rows[static_cast<size_t>(i)];
                change = std::max(change, std::abs(delta));
            }
        }
        if (change < 1e-13) {
            out.converged = true;
            break;
        }
    }
    out.u = u;
    return out;
}

QpProblem random_feasible_problem(std::mt19937_64& rng) {
    QpProblem p;
    p.dim = 1 + static_cast<int>(u01(rng) * 15.0);
    const double box = uniform(rng, 0.5, 2.0);
    p.lower = Eigen::VectorXd::Constant(p.dim, -box);
    p.upper = Eigen::VectorXd::Constant(p.dim, box);
    p.u_des.resize(p.dim);
    for (int k = 0; k < p.dim; ++k) p.u_des[k] = uniform(rng, -2.0 * box, 2.0 * box);

    // Interior point construction keeps the feasible set nonempty.
    Eigen::VectorXd interior(p.dim);
    for (int k = 0; k < p.dim; ++k) interior[k] = uniform(rng, -0.8 * box, 0.8 * box);

    const int rows = static_cast<int>(u01(rng) * 41.0);
    for (int r = 0; r < rows; ++r) {
        Eigen::VectorXd a(p.dim);
        for (int k = 0; k < p.dim; ++k) a[k] = uniform(rng, -1.0, 1.0);
        if (a.norm() < 1e-3) a[0] = 1.0;
        a.normalize();
        const double slack = uniform(rng, 0.0, 1.0);
        p.ineq.emplace_back(a, slack - a.dot(interior));
        // so a.u + b >= 0 holds at the interior point with margin `slack`
    }
    return p;
}

double violation(const QpProblem& p, const Eigen::VectorXd& u) {
    double worst = 0.0;
    for (const auto& [a, b] : p.ineq) worst = std::max(worst, -(a.dot(u) + b));
    for (int k = 0; k < p.dim; ++k)
        worst = std::max({worst, p.lower[k] - u[k], u[k] - p.upper[k]});
    return worst;
}

}  // namespace

TEST_CASE("basic projections") {
    SUBCASE("unconstrained interior point is returned untouched") {
        QpProblem p;
        p.dim = 3;
        p.u_des = Eigen::Vector3d(0.1, -0.2, 0.3);
        p.lower = Eigen::VectorXd::Constant(3, -1.0);
        p.upper = Eigen::VectorXd::Constant(3, 1.0);
        const QpSolution s = solve_qp(p);
        CHECK(s.status == QpStatus::optimal);
        CHECK(s.u_act == p.u_des);  // bit-exact
    }

    SUBCASE("box clamp in one dimension") {
        QpProblem p;
        p.dim = 1;
        p.u_des = Eigen::VectorXd::Constant(1, 2.0);
        p.lower = Eigen::VectorXd::Constant(1, -1.0);
        p.upper = Eigen::VectorXd::Constant(1, 1.0);
        const QpSolution s = solve_qp(p);
        CHECK(s.status == QpStatus::optimal);
        CHECK(s.u_act[0] == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("half-space projection") {
        QpProblem p;
        p.dim = 2;
        p.u_des = Eigen::Vector2d(-1.0, 0.5);
        p.lower = Eigen::VectorXd::Constant(2, -1.0);
        p.upper = Eigen::VectorXd::Constant(2, 1.0);
        p.ineq.emplace_back(Eigen::Vector2d(1.0, 0.0), 0.0);  // u0 >= 0
        const QpSolution s = solve_qp(p);
        CHECK(s.status == QpStatus::optimal);
        CHECK(s.u_act[0] == doctest::Approx(0.0));
        CHECK(s.u_act[1] == doctest::Approx(0.5));
    }

    SUBCASE("contradictory rows are infeasible") {
        QpProblem p;
        p.dim = 1;
        p.u_des = Eigen::VectorXd::Zero(1);
        p.lower = Eigen::VectorXd::Constant(1, -1.0);
        p.upper = Eigen::VectorXd::Constant(1, 1.0);
        p.ineq.emplace_back(Eigen::VectorXd::Constant(1, 1.0), -1.0);   // u >= 1
        p.ineq.emplace_back(Eigen::VectorXd::Constant(1, -1.0), -1.0);  // u <= -1
        const QpSolution s = solve_qp(p);
        CHECK(s.status == QpStatus::infeasible);
        CHECK(s.max_violation > 0.5);
        // best-effort point still honours the box
        CHECK(s.u_act[0] >= -1.0);
        CHECK(s.u_act[0] <= 1.0);
    }

    SUBCASE("zero row with negative offset is infeasible") {
        QpProblem p;
        p.dim = 2;
        p.u_des = Eigen::Vector2d(0.0, 0.0);
        p.lower = Eigen::VectorXd::Constant(2, -1.0);
        p.upper = Eigen::VectorXd::Constant(2, 1.0);
        p.ineq.emplace_back(Eigen::Vector2d(0.0, 0.0), -0.5);
        CHECK(solve_qp(p).status == QpStatus::infeasible);
    }

    SUBCASE("malformed problems are rejected") {
        QpProblem p;
        p.dim = 2;
        p.u_des = Eigen::VectorXd::Zero(1);  // wrong size
        p.lower = Eigen::VectorXd::Constant(2, -1.0);
        p.upper = Eigen::VectorXd::Constant(2, 1.0);
        CHECK_THROWS(solve_qp(p));
        p.u_des = Eigen::Vector2d(std::nan(""), 0.0);
        CHECK_THROWS(solve_qp(p));
    }
}

TEST_CASE("random problems match the dual-ascent oracle") {
    std::mt19937_64 rng(2024);
    int solved = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const QpProblem p = random_feasible_problem(rng);
        const QpSolution s = solve_qp(p);
        REQUIRE(s.status == QpStatus::optimal);
        CHECK(violation(p, s.u_act) < 1e-8);

        const OracleResult oracle = hildreth_project(p);
        REQUIRE(oracle.converged);
        const double mine = (s.u_act - p.u_des).squaredNorm();
        const double ref = (oracle.u - p.u_des).squaredNorm();
        CHECK(std::abs(mine - ref) < 1e-6 * std::max(1.0, ref));

        const QpKktResidual kkt = kkt_residual(p, s);
        CHECK(kkt.stationarity < 1e-7);
        CHECK(kkt.feasibility < 1e-8);
        CHECK(kkt.complementarity < 1e-6);
        ++solved;
    }
    CHECK(solved == 150);
}

TEST_CASE("feasible desired control passes through exactly") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        QpProblem p = random_feasible_problem(rng);
        // Make u_des itself the interior point so every row holds strictly.
        Eigen::VectorXd interior = Eigen::VectorXd::Zero(p.dim);
        bool ok = true;
        for (const auto& [a, b] : p.ineq)
            if (a.dot(interior) + b < 1e-6) ok = false;
        if (!ok) continue;
        p.u_des = interior;
        const QpSolution s = solve_qp(p);
        CHECK(s.status == QpStatus::optimal);
        CHECK(s.u_act == p.u_des);  // exact, not approximate
    }
}

TEST_CASE("determinism: identical problems produce identical bits") {
    std::mt19937_64 rng(5150);
    for (int trial = 0; trial < 25; ++trial) {
        const QpProblem p = random_feasible_problem(rng);
        const QpSolution a = solve_qp(p);
        const QpSolution b = solve_qp(p);
        REQUIRE(a.status == b.status);
        CHECK(a.u_act == b.u_act);
        CHECK(a.iterations == b.iterations);
    }
}
