#include "rta/sim_engine.hpp"

#include "rta/orbital_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rta {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void validate_scenario(const Scenario& sc) {
    if (!(sc.duration_s > 0.0)) throw std::invalid_argument("scenario duration must be positive");
    if (!(sc.dt_s > 0.0)) throw std::invalid_argument("scenario dt must be positive");
    if (sc.initial.count() < 1) throw std::invalid_argument("scenario needs at least one deputy");
    if (!sc.initial.is_finite()) throw std::invalid_argument("scenario initial state not finite");
    if (sc.primary.type == PrimarySpec::Type::aggressive_lqr && sc.primary.phases.empty())
        throw std::invalid_argument("aggressive primary needs at least one phase target");
}

// Trace rows carry every family; pairwise families store the minimum over
// this deputy's partners (phi5 is directional: i observing j).
void fill_constraint_columns(const ConstraintEvaluator& eval, const FleetState& fleet,
                             const std::vector<BarrierEval>& hev, StepRecord& rec) {
    const int n = fleet.count();
    for (int i = 0; i < n; ++i) {
        auto& dr = rec.deputies[static_cast<size_t>(i)];
        dr.phi.fill(kNan);
        dr.h.fill(kNan);
        for (int k : {1, 3, 4, 6, 7, 9, 10, 11})
            dr.phi[static_cast<size_t>(k - 1)] = eval.phi(k, fleet, i);
        dr.phi[11] = eval.phi(kFuelKind, fleet, i);
        for (int k : {2, 5, 8}) {
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j)
                if (j != i) best = std::min(best, eval.phi(k, fleet, i, j));
            if (n > 1) dr.phi[static_cast<size_t>(k - 1)] = best;
        }
    }
    for (const auto& ev : hev) {
        auto& di = rec.deputies[static_cast<size_t>(ev.id.i)];
        auto& slot = di.h[static_cast<size_t>(ev.id.k - 1)];
        slot = std::isnan(slot) ? ev.value : std::min(slot, ev.value);
        if (ev.id.j >= 0) {
            auto& dj = rec.deputies[static_cast<size_t>(ev.id.j)];
            auto& slot_j = dj.h[static_cast<size_t>(ev.id.k - 1)];
            slot_j = std::isnan(slot_j) ? ev.value : std::min(slot_j, ev.value);
        }
    }
}

}  // namespace

SimResult run_scenario(const Scenario& sc, const ConstraintParams& cp, const AsifConfig& asif_in,
                       const ControllerConfigs& ctl) {
    validate_scenario(sc);
    const ConstraintEvaluator eval(cp);

    // Reject scenarios that start outside the allowable set.
    for (const auto& pv : eval.phi_all(sc.initial, sc.enabled, sc.fuel_filter))
        if (pv.value < 0.0)
            throw std::invalid_argument("initial state violates " +
                                        kind_name(pv.id.k) + " (" + pv.id.label() + ")");

    AsifConfig asif = asif_in;
    asif.enabled = sc.enabled;
    asif.mode = sc.rta == RtaSelection::asif_decentralized ? AsifMode::decentralized
                                                           : AsifMode::centralized;

    const int n = sc.initial.count();
    std::optional<AggressiveLqr> aggressive;
    if (sc.primary.type == PrimarySpec::Type::aggressive_lqr)
        aggressive.emplace(cp.dyn, ctl.aggressive);

    std::vector<BackupController> backups;
    std::vector<SwitchState> switches(static_cast<size_t>(n));
    if (sc.fuel_filter) {
        const LqrGains gains = design_backup_gains(cp.dyn, ctl.backup);
        for (int i = 0; i < n; ++i)
            backups.push_back(BackupController{gains, ctl.backup, cp.dyn, cp.u_max, Vec3::Zero()});
    }

    const int steps = static_cast<int>(std::llround(sc.duration_s / sc.dt_s));

    SimResult result;
    result.trace.dt = sc.dt_s;
    result.trace.n_deputies = n;
    result.trace.steps.reserve(static_cast<size_t>(steps) + 1);

    FleetState fleet = sc.initial;
    for (int k = 0; k <= steps; ++k) {
        ControlVector u_des = ControlVector::zero(n);
        if (aggressive) {
            const Vec3 target = sc.primary.target_at(fleet.t);
            for (int i = 0; i < n; ++i)
                u_des.forces[static_cast<size_t>(i)] =
                    aggressive->control(fleet.deputies[static_cast<size_t>(i)], target);
        }

        const std::vector<BarrierEval> hev = eval.all_barriers(fleet, ConstraintSet::all_h());

        FilterOutcome fo;
        if (sc.rta == RtaSelection::off) {
            fo.u_act = u_des;
            fo.per_deputy.assign(static_cast<size_t>(n), QpStatus::optimal);
            fo.worst_violated.assign(static_cast<size_t>(n), ConstraintId{});
            fo.violation.assign(static_cast<size_t>(n), 0.0);
        } else if (sc.rta == RtaSelection::asif_centralized) {
            fo = filter_centralized(fleet, u_des, hev, eval, asif);
        } else {
            fo = filter_decentralized(fleet, u_des, hev, eval, asif);
        }

        ControlVector u_act = fo.u_act;
        if (sc.fuel_filter)
            for (int i = 0; i < n; ++i) {
                const auto idx = static_cast<size_t>(i);
                u_act.forces[idx] = switching_filter(fleet, i, u_act.forces[idx], backups[idx],
                                                     switches[idx], cp, sc.dt_s);
            }

        // Plant-side saturation is always the last stage.
        for (auto& f : u_act.forces)
            for (int a = 0; a < 3; ++a) f[a] = std::clamp(f[a], -cp.u_max, cp.u_max);

        StepRecord rec;
        rec.t = fleet.t;
        rec.theta_s = fleet.theta_s;
        rec.deputies.resize(static_cast<size_t>(n));
        const bool central_qp = sc.rta == RtaSelection::asif_centralized;
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<size_t>(i);
            auto& dr = rec.deputies[idx];
            dr.p = fleet.deputies[idx].p;
            dr.v = fleet.deputies[idx].v;
            dr.delta_v = fleet.deputies[idx].delta_v_used;
            dr.u_des = u_des.forces[idx];
            dr.u_act = u_act.forces[idx];
            dr.intervened = (dr.u_act - dr.u_des).cwiseAbs().maxCoeff() > asif.intervention_tol;
            dr.latched = sc.fuel_filter && switches[idx].latched;
            const QpStatus st = central_qp ? fo.per_deputy[0] : fo.per_deputy[idx];
            dr.qp_ok = st == QpStatus::optimal;
            if (!dr.qp_ok) {
                dr.qp_worst_kind = fo.worst_violated[idx].k;
                dr.qp_violation = fo.violation[idx];
            }
        }
        fill_constraint_columns(eval, fleet, hev, rec);
        result.trace.steps.push_back(std::move(rec));

        if (k < steps) fleet = step(fleet, u_act, sc.dt_s, cp.dyn, cp.u_max);
    }

    result.audit = audit_trace(result.trace, sc.audited, sc.fuel_filter);
    return result;
}

SafetyAudit audit_trace(const SimTrace& trace, const ConstraintSet& audited, bool fuel_audited,
                        double tolerance) {
    SafetyAudit audit;
    audit.tolerance = tolerance;
    audit.phi_min.fill(kNan);

    std::vector<int> kinds = audited.kinds();
    if (fuel_audited) kinds.push_back(kFuelKind);

    for (const auto& rec : trace.steps) {
        for (const auto& dr : rec.deputies) {
            for (int k : kinds) {
                const double v = dr.phi[static_cast<size_t>(k - 1)];
                if (std::isnan(v)) continue;
                auto& slot = audit.phi_min[static_cast<size_t>(k - 1)];
                if (std::isnan(slot) || v < slot) slot = v;
                if (v < -tolerance && !audit.first_violation)
                    audit.first_violation = {k, rec.t};
            }
            if (!dr.qp_ok && !audit.first_infeasible)
                audit.first_infeasible = {dr.qp_worst_kind, rec.t};
        }
        for (const auto& dr : rec.deputies)
            if (!dr.qp_ok) {
                ++audit.qp_infeasible_count;
                break;  // one per step
            }
    }

    audit.pass = !audit.first_violation && audit.qp_infeasible_count == 0;
    if (!audit.pass) {
        // Earliest event names the cause; an actual breach wins a same-time tie.
        int kind = 0;
        if (audit.first_violation &&
            (!audit.first_infeasible || audit.first_violation->second <= audit.first_infeasible->second))
            kind = audit.first_violation->first;
        else if (audit.first_infeasible)
            kind = audit.first_infeasible->first;
        audit.failure_cause = kind >= 1 ? kind_name(kind) : "qp_infeasible";
    }
    return audit;
}

}  // namespace rta
