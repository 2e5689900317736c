#include "rta/asif_filter.hpp"

#include <algorithm>
#include <cmath>

namespace rta {

namespace {

// Drift acceleration of one deputy (the velocity rows of A*x).
inline Vec3 drift_accel(const DeputyState& d, double n) {
    return Vec3(3.0 * n * n * d.p.x() + 2.0 * n * d.v.y(), -2.0 * n * d.v.x(),
                -n * n * d.p.z());
}

std::vector<BarrierEval> filtered(const std::vector<BarrierEval>& evals, const ConstraintSet& enabled) {
    std::vector<BarrierEval> out;
    out.reserve(evals.size());
    for (const auto& ev : evals)
        if (enabled.contains(ev.id.k)) out.push_back(ev);
    return out;
}

bool involves(const BarrierEval& ev, int deputy) {
    return ev.id.i == deputy || ev.id.j == deputy;
}

}  // namespace

BarrierRow barrier_row(const BarrierEval& ev, const FleetState& fleet,
                       const ConstraintParams& params, const AlphaSpec& alpha) {
    const int n = fleet.count();
    BarrierRow row;
    row.id = ev.id;
    row.coeffs = Eigen::VectorXd::Zero(3 * n);
    row.offset = ev.dh_dt + alpha(ev.id.k, ev.value);
    for (int d = 0; d < n; ++d) {
        const Vec3 gp = ev.grad.segment<3>(6 * d);
        const Vec3 gv = ev.grad.segment<3>(6 * d + 3);
        const auto& dep = fleet.deputies[static_cast<size_t>(d)];
        row.offset += gp.dot(dep.v) + gv.dot(drift_accel(dep, params.dyn.n));
        row.coeffs.segment<3>(3 * d) = gv / params.dyn.m;
    }
    return row;
}

FilterOutcome filter_centralized(const FleetState& fleet, const ControlVector& u_des,
                                 const std::vector<BarrierEval>& evals,
                                 const ConstraintEvaluator& eval, const AsifConfig& cfg) {
    const auto& cp = eval.params();
    const int n = fleet.count();
    const auto used = filtered(evals, cfg.enabled);

    std::vector<BarrierRow> rows;
    rows.reserve(used.size());
    for (const auto& ev : used) rows.push_back(barrier_row(ev, fleet, cp, cfg.alpha));

    QpProblem qp;
    qp.dim = 3 * n;
    qp.u_des = u_des.stacked();
    qp.lower = Eigen::VectorXd::Constant(qp.dim, -cp.u_max);
    qp.upper = Eigen::VectorXd::Constant(qp.dim, cp.u_max);
    for (const auto& r : rows) qp.ineq.emplace_back(r.coeffs, r.offset);

    const QpSolution sol = solve_qp(qp);

    FilterOutcome out;
    out.u_act = ControlVector::from_stacked(sol.u_act);
    out.status = sol.status == QpStatus::optimal ? QpStatus::optimal : sol.status;
    out.per_deputy.assign(1, sol.status);
    out.intervened = (sol.u_act - qp.u_des).lpNorm<Eigen::Infinity>() > cfg.intervention_tol;
    out.worst_violated.assign(static_cast<size_t>(n), ConstraintId{});
    out.violation.assign(static_cast<size_t>(n), 0.0);

    double worst = 0.0;
    ConstraintId worst_id{};
    for (size_t k = 0; k < rows.size(); ++k) {
        const double bc = rows[k].coeffs.dot(sol.u_act) + rows[k].offset;
        if (sol.status == QpStatus::optimal && std::abs(bc) <= cfg.active_tol * (1.0 + std::abs(rows[k].offset)))
            out.active.push_back(rows[k].id);
        if (-bc > worst) {
            worst = -bc;
            worst_id = rows[k].id;
        }
    }
    if (sol.status != QpStatus::optimal) {
        for (int d = 0; d < n; ++d) {
            out.worst_violated[static_cast<size_t>(d)] = worst_id;
            out.violation[static_cast<size_t>(d)] = worst;
        }
    }
    return out;
}

FilterOutcome filter_decentralized(const FleetState& fleet, const ControlVector& u_des,
                                   const std::vector<BarrierEval>& evals,
                                   const ConstraintEvaluator& eval, const AsifConfig& cfg) {
    const auto& cp = eval.params();
    const int n = fleet.count();
    const auto used = filtered(evals, cfg.enabled);

    FilterOutcome out;
    out.u_act = ControlVector::zero(n);
    out.per_deputy.assign(static_cast<size_t>(n), QpStatus::optimal);
    out.worst_violated.assign(static_cast<size_t>(n), ConstraintId{});
    out.violation.assign(static_cast<size_t>(n), 0.0);
    out.status = QpStatus::optimal;

    for (int d = 0; d < n; ++d) {
        // Each deputy solves over its own thrust only; partner deputies are
        // treated as thrust-free drift in the offset.
        std::vector<BarrierRow> rows;
        for (const auto& ev : used) {
            if (!involves(ev, d)) continue;
            const BarrierRow full = barrier_row(ev, fleet, cp, cfg.alpha);
            BarrierRow own;
            own.id = full.id;
            own.offset = full.offset;
            own.coeffs = full.coeffs.segment<3>(3 * d);
            rows.push_back(std::move(own));
        }

        QpProblem qp;
        qp.dim = 3;
        qp.u_des = u_des.forces[static_cast<size_t>(d)];
        qp.lower = Eigen::VectorXd::Constant(3, -cp.u_max);
        qp.upper = Eigen::VectorXd::Constant(3, cp.u_max);
        for (const auto& r : rows) qp.ineq.emplace_back(r.coeffs, r.offset);

        const QpSolution sol = solve_qp(qp);
        out.u_act.forces[static_cast<size_t>(d)] = sol.u_act;
        out.per_deputy[static_cast<size_t>(d)] = sol.status;
        if (sol.status != QpStatus::optimal) out.status = QpStatus::infeasible;

        double worst = 0.0;
        ConstraintId worst_id{};
        for (size_t k = 0; k < rows.size(); ++k) {
            const double bc = rows[k].coeffs.dot(sol.u_act) + rows[k].offset;
            if (sol.status == QpStatus::optimal &&
                std::abs(bc) <= cfg.active_tol * (1.0 + std::abs(rows[k].offset)))
                out.active.push_back(rows[k].id);
            if (-bc > worst) {
                worst = -bc;
                worst_id = rows[k].id;
            }
        }
        if (sol.status != QpStatus::optimal) {
            out.worst_violated[static_cast<size_t>(d)] = worst_id;
            out.violation[static_cast<size_t>(d)] = worst;
        }
    }

    out.intervened =
        (out.u_act.stacked() - u_des.stacked()).lpNorm<Eigen::Infinity>() > cfg.intervention_tol;
    return out;
}

FilterOutcome filter_centralized(const FleetState& fleet, const ControlVector& u_des,
                                 const ConstraintEvaluator& eval, const AsifConfig& cfg) {
    return filter_centralized(fleet, u_des, eval.all_barriers(fleet, cfg.enabled), eval, cfg);
}

FilterOutcome filter_decentralized(const FleetState& fleet, const ControlVector& u_des,
                                   const ConstraintEvaluator& eval, const AsifConfig& cfg) {
    return filter_decentralized(fleet, u_des, eval.all_barriers(fleet, cfg.enabled), eval, cfg);
}

FilterOutcome filter(const FleetState& fleet, const ControlVector& u_des,
                     const ConstraintEvaluator& eval, const AsifConfig& cfg) {
    return cfg.mode == AsifMode::centralized ? filter_centralized(fleet, u_des, eval, cfg)
                                             : filter_decentralized(fleet, u_des, eval, cfg);
}

}  // namespace rta
