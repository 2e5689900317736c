#pragma once

#include "rta/qp_solver.hpp"
#include "rta/safety_constraints.hpp"
#include "rta/types.hpp"

#include <map>

namespace rta {

enum class AsifMode { centralized, decentralized };

/// Class-kappa strengthening function applied to each barrier value. The
/// margin enforces the barrier on a slightly tightened set (h >= margin): a
/// zero-order-hold step can dip about (1/2) h'' dt^2 past a tangent boundary,
/// and the tightening keeps that excursion on the safe side of h = 0.
struct AlphaSpec {
    enum class Family { linear, cubic };
    Family family = Family::linear;
    double gamma = 0.5;                   // [1/s]
    std::map<int, double> gamma_by_kind;  // optional per-family override
    // The free-flight families get meters of enforcement margin: their
    // sampled branches move by up to hundreds of meters per control step, and
    // a crowded fleet needs slack between the enforced envelopes to keep the
    // joint program feasible.
    double margin = 0.05;
    std::map<int, double> margin_by_kind = {{7, 5.0}, {8, 25.0}};

    double operator()(int kind, double h) const {
        double g = gamma;
        if (auto it = gamma_by_kind.find(kind); it != gamma_by_kind.end()) g = it->second;
        double m = margin;
        if (auto it = margin_by_kind.find(kind); it != margin_by_kind.end()) m = it->second;
        const double shifted = h - m;
        switch (family) {
            case Family::cubic: return g * shifted * shifted * shifted;
            case Family::linear:
            default: return g * shifted;
        }
    }
};

struct AsifConfig {
    AsifMode mode = AsifMode::centralized;
    AlphaSpec alpha;
    ConstraintSet enabled = ConstraintSet::all_h();
    double intervention_tol = 1e-9;
    double active_tol = 1e-7;
};

/// One barrier constraint linearized in the control: coeffs.u + offset >= 0
/// over the stacked fleet control (3 entries per deputy).
struct BarrierRow {
    ConstraintId id;
    Eigen::VectorXd coeffs;
    double offset = 0.0;
};

BarrierRow barrier_row(const BarrierEval& ev, const FleetState& fleet,
                       const ConstraintParams& params, const AlphaSpec& alpha);

struct FilterOutcome {
    ControlVector u_act;
    bool intervened = false;
    std::vector<ConstraintId> active;
    QpStatus status = QpStatus::optimal;
    std::vector<QpStatus> per_deputy;       // one entry per deputy QP (centralized: one total)
    std::vector<ConstraintId> worst_violated;  // per deputy; kind 0 when feasible
    std::vector<double> violation;          // per deputy; worst barrier-row violation at u_act
};

FilterOutcome filter_centralized(const FleetState& fleet, const ControlVector& u_des,
                                 const ConstraintEvaluator& eval, const AsifConfig& cfg);
FilterOutcome filter_decentralized(const FleetState& fleet, const ControlVector& u_des,
                                   const ConstraintEvaluator& eval, const AsifConfig& cfg);

/// Dispatch on cfg.mode.
FilterOutcome filter(const FleetState& fleet, const ControlVector& u_des,
                     const ConstraintEvaluator& eval, const AsifConfig& cfg);

/// Variants reusing barrier evaluations the caller already has (the sim loop
/// records them anyway). The evals must come from the same fleet state.
FilterOutcome filter_centralized(const FleetState& fleet, const ControlVector& u_des,
                                 const std::vector<BarrierEval>& evals,
                                 const ConstraintEvaluator& eval, const AsifConfig& cfg);
FilterOutcome filter_decentralized(const FleetState& fleet, const ControlVector& u_des,
                                   const std::vector<BarrierEval>& evals,
                                   const ConstraintEvaluator& eval, const AsifConfig& cfg);

}  // namespace rta
