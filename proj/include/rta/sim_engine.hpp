#pragma once

#include "rta/asif_filter.hpp"
#include "rta/controllers.hpp"
#include "rta/fuel_switching.hpp"
#include "rta/safety_constraints.hpp"
#include "rta/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rta {

struct PhaseTarget {
    double until_s = 0.0;
    Vec3 target_m = Vec3::Zero();
};

struct PrimarySpec {
    enum class Type { none, aggressive_lqr };
    Type type = Type::none;
    std::vector<PhaseTarget> phases;  // the last phase covers the remainder

    Vec3 target_at(double t) const {
        for (const auto& ph : phases)
            if (t < ph.until_s) return ph.target_m;
        return phases.empty() ? Vec3::Zero() : phases.back().target_m;
    }
};

enum class RtaSelection { off, asif_centralized, asif_decentralized };

struct Scenario {
    FleetState initial;
    double duration_s = 0.0;
    double dt_s = 1.0;
    PrimarySpec primary;
    RtaSelection rta = RtaSelection::asif_centralized;
    bool fuel_filter = false;
    ConstraintSet enabled = ConstraintSet::all_h();  // enforced by the filter
    ConstraintSet audited = ConstraintSet::all_h();  // judged by the audit
    std::uint64_t seed = 0;
};

/// Per-deputy slice of one trace row. Pairwise constraint values are the
/// minimum over this deputy's partners.
struct DeputyRecord {
    Vec3 p, v;
    double delta_v = 0.0;
    Vec3 u_des, u_act;
    bool intervened = false;
    bool latched = false;
    bool qp_ok = true;
    int qp_worst_kind = 0;      // binding family when the QP failed
    double qp_violation = 0.0;  // its violation magnitude
    std::array<double, 12> phi{};  // phi1..phi12 (index k-1)
    std::array<double, 11> h{};    // h1..h11
};

struct StepRecord {
    double t = 0.0;
    double theta_s = 0.0;
    std::vector<DeputyRecord> deputies;
};

struct SimTrace {
    double dt = 1.0;
    int n_deputies = 0;
    std::vector<StepRecord> steps;
};

struct SafetyAudit {
    bool pass = false;
    std::array<double, 12> phi_min{};  // NaN for families outside the audit set
    std::optional<std::pair<int, double>> first_violation;   // family, time
    std::optional<std::pair<int, double>> first_infeasible;  // family, time
    int qp_infeasible_count = 0;
    std::string failure_cause;  // family name, empty on pass
    double tolerance = 1e-6;
};

struct SimResult {
    SimTrace trace;
    SafetyAudit audit;
};

/// Closed-loop run: primary controller -> ASIF -> fuel switching filter ->
/// plant saturation, with every step recorded. Deterministic for a given
/// scenario. Throws if the initial state violates an enabled constraint.
SimResult run_scenario(const Scenario& scenario, const ConstraintParams& params,
                       const AsifConfig& asif, const ControllerConfigs& controllers);

/// Pass/fail judgement over a finished trace: pass means no audited phi
/// dipped below -tolerance and no QP failure occurred.
SafetyAudit audit_trace(const SimTrace& trace, const ConstraintSet& audited, bool fuel_audited,
                        double tolerance = 1e-6);

}  // namespace rta
