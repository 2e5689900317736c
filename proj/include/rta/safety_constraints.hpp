#pragma once

#include "rta/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

namespace rta {

// Constraint families. 1..11 have control-invariant barrier forms; 12 (fuel)
// is handled by the switching filter instead.
inline constexpr int kNumConstraintKinds = 12;
inline constexpr int kFuelKind = 12;

/// Short token ("h5") and descriptive name ("multi_agent_koz") per family.
std::string kind_token(int k);
std::string kind_name(int k);
/// Accepts "h5", "phi5", "5" or the descriptive name. Throws on unknown input.
int parse_kind(const std::string& token);

/// Set of enabled constraint families (1..11; the fuel limit is tracked
/// separately by the switching filter).
class ConstraintSet {
public:
    static ConstraintSet all_h();
    static ConstraintSet none();

    bool contains(int k) const { return k >= 1 && k <= kNumConstraintKinds && on_[static_cast<size_t>(k)]; }
    void insert(int k);
    void erase(int k);
    std::vector<int> kinds() const;
    bool operator==(const ConstraintSet&) const = default;

private:
    std::array<bool, kNumConstraintKinds + 1> on_{};
};

/// Identifies one constraint instance: family plus the deputy (and partner
/// for pairwise families).
struct ConstraintId {
    int k = 0;   // family 1..12
    int i = 0;   // deputy index
    int j = -1;  // partner index for pairwise families, else -1

    std::string label() const;
    bool operator==(const ConstraintId&) const = default;
};

/// Value and gradient of one control-invariant constraint h(x) over the
/// stacked fleet state (6 entries per deputy: position then velocity).
/// dh_dt carries the explicit time dependence of the rotating keep-out cone;
/// it is zero for every other family.
struct BarrierEval {
    ConstraintId id;
    double value = 0.0;
    Eigen::VectorXd grad;
    double dh_dt = 0.0;
    bool already_unsafe = false;
};

struct PhiEval {
    ConstraintId id;
    double value = 0.0;
};

/// Worst-case deceleration available against natural motion at range r_H.
/// Throws if the configuration leaves no deceleration authority.
double compute_a_max(const ConstraintParams& params, double r_H);

/// Closest point on the cone surface (vertex at the origin, given axis and
/// half angle) to p. Points on the axis are nudged by 1e-9 in a fixed
/// orthogonal direction first; queries behind the vertex map to the vertex.
Vec3 cone_projection(const Vec3& p, const Vec3& axis, double half_angle);

struct ActuationCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

/// Feasibility report for the thrust-limit inequalities that make the speed
/// and velocity-box constraints control invariant.
struct ActuationReport {
    std::vector<ActuationCheck> checks;
    double a_max = 0.0;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

ActuationReport check_actuation_limits(const ConstraintParams& params);

/// Evaluates the allowable-set constraints (phi) and the control-invariant
/// constraints (h) with analytic gradients. Immutable after construction and
/// safe to share across threads.
class ConstraintEvaluator {
public:
    explicit ConstraintEvaluator(ConstraintParams params);

    const ConstraintParams& params() const { return params_; }
    double a_max() const { return a_max_; }
    double cone_half_angle() const { return half_angle_; }

    BarrierEval h_chief_separation(const FleetState& fleet, int i) const;      // h1
    BarrierEval h_deputy_separation(const FleetState& fleet, int i, int j) const;  // h2
    BarrierEval h_speed(const FleetState& fleet, int i) const;                 // h3
    BarrierEval h_sun_koz(const FleetState& fleet, int i) const;               // h4
    BarrierEval h_multi_agent_koz(const FleetState& fleet, int i, int j) const;  // h5
    BarrierEval h_keep_in(const FleetState& fleet, int i) const;               // h6
    BarrierEval h_fft_chief(const FleetState& fleet, int i) const;             // h7
    BarrierEval h_fft_deputy(const FleetState& fleet, int i, int j) const;     // h8
    BarrierEval h_velocity_box(const FleetState& fleet, int i, int axis) const;  // h9..h11

    BarrierEval h_by_kind(int k, const FleetState& fleet, int i, int j = -1) const;

    /// All enabled barrier instances in canonical order: per deputy the
    /// single-agent families ascending, then per pair (i<j) the pairwise
    /// families ascending. The free-flight families expand into one row per
    /// sample close enough to its boundary to cross it within one control
    /// step; a single minimum-branch row would leave the other samples free
    /// to dive straight through.
    std::vector<BarrierEval> all_barriers(const FleetState& fleet, const ConstraintSet& enabled) const;

    /// Allowable-set constraint value for one instance. Pairwise families
    /// need the partner index; phi5 is directional (i observing j).
    double phi(int k, const FleetState& fleet, int i, int j = -1) const;

    /// All enabled phi instances (phi5 over ordered pairs). include_fuel adds
    /// the per-deputy fuel margin.
    std::vector<PhiEval> phi_all(const FleetState& fleet, const ConstraintSet& enabled,
                                 bool include_fuel) const;

private:
    struct FftMin {
        double value = 0.0;
        int index = 0;
        Vec3 unit = Vec3::Zero();
    };
    FftMin fft_min(const Vec3& p, const Vec3& v, double clearance) const;
    void append_fft_rows(const FleetState& fleet, int kind, int i, int j,
                         std::vector<BarrierEval>& out) const;

    ConstraintParams params_;
    double a_max_ = 0.0;
    double half_angle_ = 0.0;
    std::vector<double> fft_times_;
    std::vector<Mat3> stm_pp_;
    std::vector<Mat3> stm_pv_;
    std::vector<double> fft_reach_;  // per-sample one-step position authority [m]
};

}  // namespace rta
