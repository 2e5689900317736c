#include "rta/safety_constraints.hpp"

#include "rta/orbital_dynamics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace rta {

namespace {

const char* kKindNames[kNumConstraintKinds + 1] = {
    "",
    "chief_separation",   // 1
    "deputy_separation",  // 2
    "dynamic_speed",      // 3
    "sun_koz",            // 4
    "multi_agent_koz",    // 5
    "keep_in",            // 6
    "passive_chief",      // 7
    "passive_deputy",     // 8
    "velocity_x",         // 9
    "velocity_y",         // 10
    "velocity_z",         // 11
    "fuel",               // 12
};

bool is_pairwise(int k) { return k == 2 || k == 5 || k == 8; }

// sgn(margin)*sqrt(coeff*|margin|) with derivative w.r.t. margin. The sign
// extension keeps a restoring gradient for states already past a boundary.
double braking_sqrt(double coeff, double margin, double* deriv) {
    const double mag = std::sqrt(coeff * std::abs(margin));
    if (deriv) *deriv = coeff / (2.0 * std::max(mag, 1e-9));
    return margin >= 0.0 ? mag : -mag;
}

struct ConeFrame {
    double a = 0.0;  // component of p along the axis
    double b = 0.0;  // distance of p from the axis
    Vec3 e1;         // unit vector from the axis toward p
    Vec3 e2;         // azimuthal unit vector (axis x e1)
};

ConeFrame cone_frame(const Vec3& p, const Vec3& axis) {
    ConeFrame f;
    f.a = p.dot(axis);
    const Vec3 perp = p - f.a * axis;
    f.b = perp.norm();
    if (f.b < 1e-9) {
        // On-axis query: nudge sideways in a fixed orthogonal direction.
        const Vec3 ref = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        f.e1 = axis.cross(ref).normalized();
        f.b = 1e-9;
    } else {
        f.e1 = perp / f.b;
    }
    f.e2 = axis.cross(f.e1);
    return f;
}

struct KozEval {
    double value = 0.0;
    Vec3 grad_p = Vec3::Zero();
    Vec3 grad_v = Vec3::Zero();
    double dh_dt = 0.0;
    bool inside = false;
};

// Braking-distance barrier against a cone that rotates rigidly about z at
// omega_z. The approach speed is measured against the contact point riding
// on the cone, and the explicit time dependence comes from the rotational
// transport of the whole geometry.
KozEval koz_kernel(const Vec3& p, const Vec3& v, const Vec3& axis, double half_angle,
                   double a_max, double omega_z) {
    KozEval out;
    const ConeFrame f = cone_frame(p, axis);
    const double ct = std::cos(half_angle);
    const double st = std::sin(half_angle);
    const double s = f.a * ct + f.b * st;  // arclength of the projection along the generator

    if (s <= 0.0) {
        // Projection falls behind the vertex: the vertex itself is closest,
        // and it does not move under the rotation.
        const double r = std::max(p.norm(), 1e-9);
        const Vec3 phat = p / r;
        double dsq = 0.0;
        const double sq = braking_sqrt(2.0 * a_max, r, &dsq);
        const double vpr = v.dot(phat);
        out.value = sq + vpr;
        out.grad_p = dsq * phat + (v - vpr * phat) / r;
        out.grad_v = phat;
        out.inside = false;
    } else {
        const double d = f.b * ct - f.a * st;  // signed distance to the surface, >0 outside
        const Vec3 nhat = ct * f.e1 - st * axis;
        const Vec3 dhat = ct * axis + st * f.e1;
        const double we2 = omega_z * f.e2.z();
        double dsq = 0.0;
        const double sq = braking_sqrt(2.0 * a_max, d, &dsq);
        out.value = sq + v.dot(nhat) - s * we2;
        out.grad_v = nhat;
        out.grad_p = dsq * nhat + (ct * f.e2.dot(v) / f.b) * f.e2 - we2 * dhat +
                     (s * omega_z * f.e1.z() / f.b) * f.e2;
        out.inside = d <= 0.0;
    }

    const Vec3 omega(0.0, 0.0, omega_z);
    out.dh_dt = -(out.grad_p.dot(omega.cross(p)) + out.grad_v.dot(omega.cross(v)));
    return out;
}

double angle_to_sun(const Vec3& dir, double theta_s) {
    const double r = dir.norm();
    if (!(r > 0.0)) throw std::domain_error("degenerate geometry: coincident positions");
    const double c = std::clamp(dir.dot(sun_vector(theta_s)) / r, -1.0, 1.0);
    return std::acos(c);
}

}  // namespace

std::string kind_token(int k) {
    if (k < 1 || k > kNumConstraintKinds) throw std::invalid_argument("unknown constraint kind");
    return "h" + std::to_string(k);
}

std::string kind_name(int k) {
    if (k < 1 || k > kNumConstraintKinds) throw std::invalid_argument("unknown constraint kind");
    return kKindNames[k];
}

int parse_kind(const std::string& token) {
    std::string t;
    for (char c : token) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    std::string digits = t;
    if (t.rfind("phi", 0) == 0) digits = t.substr(3);
    else if (t.rfind("h", 0) == 0) digits = t.substr(1);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        const int k = std::stoi(digits);
        if (k >= 1 && k <= kNumConstraintKinds) return k;
    }
    for (int k = 1; k <= kNumConstraintKinds; ++k)
        if (t == kKindNames[k]) return k;
    throw std::invalid_argument("unknown constraint identifier: " + token);
}

ConstraintSet ConstraintSet::all_h() {
    ConstraintSet s;
    for (int k = 1; k <= 11; ++k) s.on_[static_cast<size_t>(k)] = true;
    return s;
}

ConstraintSet ConstraintSet::none() { return ConstraintSet{}; }

void ConstraintSet::insert(int k) {
    if (k < 1 || k > kNumConstraintKinds) throw std::invalid_argument("unknown constraint kind");
    on_[static_cast<size_t>(k)] = true;
}

void ConstraintSet::erase(int k) {
    if (k < 1 || k > kNumConstraintKinds) throw std::invalid_argument("unknown constraint kind");
    on_[static_cast<size_t>(k)] = false;
}

std::vector<int> ConstraintSet::kinds() const {
    std::vector<int> out;
    for (int k = 1; k <= kNumConstraintKinds; ++k)
        if (on_[static_cast<size_t>(k)]) out.push_back(k);
    return out;
}

std::string ConstraintId::label() const {
    std::string s = kind_token(k) + "[" + std::to_string(i);
    if (j >= 0) s += "," + std::to_string(j);
    s += "]";
    return s;
}

double compute_a_max(const ConstraintParams& params, double r_H) {
    if (!(r_H >= 0.0)) throw std::invalid_argument("a_max range must be nonnegative");
    const double n = params.dyn.n;
    const double a = params.u_max / params.dyn.m - 3.0 * n * n * r_H - 2.0 * n * params.v_max;
    if (!(a > 0.0))
        throw std::domain_error("configuration infeasible: natural motion exceeds thrust authority");
    return a;
}

Vec3 cone_projection(const Vec3& p, const Vec3& axis_in, double half_angle) {
    if (!(p.norm() > 0.0)) throw std::domain_error("cone projection undefined at the vertex");
    const Vec3 axis = axis_in.normalized();
    const ConeFrame f = cone_frame(p, axis);
    const double ct = std::cos(half_angle);
    const double st = std::sin(half_angle);
    const double s = f.a * ct + f.b * st;
    if (s <= 0.0) return Vec3::Zero();
    return s * (ct * axis + st * f.e1);
}

ActuationReport check_actuation_limits(const ConstraintParams& params) {
    params.validate();
    const double n = params.dyn.n;
    const double v = params.v_max;
    const double ua = params.u_max / params.dyn.m;
    const double s3v = std::sqrt(3.0) * v;

    ActuationReport rep;
    rep.a_max = ua - 3.0 * n * n * params.a_max_range - 2.0 * n * v;

    auto add = [&](const std::string& name, double lhs) {
        rep.checks.push_back({name, lhs, ua, lhs <= ua});
    };
    add("dynamic_speed", params.nu1 * s3v + 3.0 * n * n * (s3v - params.nu0) / params.nu1 + 2.0 * n * v);
    add("velocity_x", 3.0 * n * n * params.r_max + 2.0 * n * v);
    add("velocity_y", 2.0 * n * v);
    add("velocity_z", n * n * params.r_max);
    return rep;
}

ConstraintEvaluator::ConstraintEvaluator(ConstraintParams params) : params_(std::move(params)) {
    params_.validate();
    a_max_ = compute_a_max(params_, params_.a_max_range);
    half_angle_ = 0.5 * params_.alpha_fov;

    // Uniform grid over the horizon plus a dense ramp near the window start.
    // A minimum hiding between coarse samples right after t0 would otherwise
    // look like a clear future while the pair is still closing, exactly where
    // thrust has no leverage on the sampled position yet.
    const int samples = params_.fft_samples;
    const double spacing = params_.fft_horizon / static_cast<double>(samples - 1);
    std::vector<double> times;
    for (int k = 0; k < samples; ++k) times.push_back(spacing * static_cast<double>(k));
    for (double t = 1.0; t < spacing; t += 1.0) times.push_back(t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    fft_times_ = times;
    stm_pp_.resize(times.size());
    stm_pv_.resize(times.size());
    fft_reach_.resize(times.size());
    for (size_t k = 0; k < times.size(); ++k) {
        const Mat6 phi = cw_transition(params_.dyn.n, times[k]);
        stm_pp_[k] = phi.topLeftCorner<3, 3>();
        stm_pv_[k] = phi.topRightCorner<3, 3>();
        // How far one second of opposed pairwise thrust can move this sample:
        // the operator norm of the velocity block times the relative delta-v
        // of a single step, padded for the drift contribution.
        const double opnorm = stm_pv_[k].cwiseAbs().rowwise().sum().maxCoeff();
        const double dv_step = 2.0 * std::sqrt(3.0) * params_.u_max / params_.dyn.m;
        fft_reach_[k] = 1.3 * opnorm * dv_step + 2.0;
    }
}

ConstraintEvaluator::FftMin ConstraintEvaluator::fft_min(const Vec3& p, const Vec3& v,
                                                         double clearance) const {
    FftMin best;
    best.value = std::numeric_limits<double>::infinity();
    for (int k = 0; k < static_cast<int>(fft_times_.size()); ++k) {
        const auto ks = static_cast<size_t>(k);
        const double r = (stm_pp_[ks] * p + stm_pv_[ks] * v).norm();
        if (r - clearance < best.value) {
            best.value = r - clearance;
            best.index = k;
        }
    }
    const auto ks = static_cast<size_t>(best.index);
    const Vec3 pk = stm_pp_[ks] * p + stm_pv_[ks] * v;
    const double r = pk.norm();
    best.unit = r > 1e-12 ? Vec3(pk / r) : Vec3(Vec3::Zero());
    return best;
}

BarrierEval ConstraintEvaluator::h_chief_separation(const FleetState& fleet, int i) const {
    const auto& d = fleet.deputies[static_cast<size_t>(i)];
    const double r = std::max(d.p.norm(), 1e-9);
    const Vec3 phat = d.p / r;
    double dsq = 0.0;
    const double margin = r - (params_.r_d + params_.r_c);
    const double sq = braking_sqrt(2.0 * a_max_, margin, &dsq);
    const double vpr = d.v.dot(phat);

    BarrierEval ev;
    ev.id = {1, i, -1};
    ev.value = sq + vpr;
    ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
    ev.grad.segment<3>(6 * i) = dsq * phat + (d.v - vpr * phat) / r;
    ev.grad.segment<3>(6 * i + 3) = phat;
    ev.already_unsafe = margin < 0.0;
    return ev;
}

BarrierEval ConstraintEvaluator::h_deputy_separation(const FleetState& fleet, int i, int j) const {
    const Vec3 pr = fleet.deputies[static_cast<size_t>(i)].p - fleet.deputies[static_cast<size_t>(j)].p;
    const Vec3 vr = fleet.deputies[static_cast<size_t>(i)].v - fleet.deputies[static_cast<size_t>(j)].v;
    const double r = std::max(pr.norm(), 1e-9);
    const Vec3 phat = pr / r;
    double dsq = 0.0;
    const double margin = r - 2.0 * params_.r_d;
    const double sq = braking_sqrt(4.0 * a_max_, margin, &dsq);
    const double vpr = vr.dot(phat);

    BarrierEval ev;
    ev.id = {2, i, j};
    ev.value = sq + vpr;
    ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
    const Vec3 gp = dsq * phat + (vr - vpr * phat) / r;
    ev.grad.segment<3>(6 * i) = gp;
    ev.grad.segment<3>(6 * i + 3) = phat;
    ev.grad.segment<3>(6 * j) = -gp;
    ev.grad.segment<3>(6 * j + 3) = -phat;
    ev.already_unsafe = margin < 0.0;
    return ev;
}

BarrierEval ConstraintEvaluator::h_speed(const FleetState& fleet, int i) const {
    const auto& d = fleet.deputies[static_cast<size_t>(i)];
    const double r = d.p.norm();
    const double speed = d.v.norm();

    BarrierEval ev;
    ev.id = {3, i, -1};
    ev.value = params_.nu0 + params_.nu1 * r - speed;
    ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
    if (r > 1e-9) ev.grad.segment<3>(6 * i) = params_.nu1 * (d.p / r);
    // ||v|| is not differentiable at v = 0; the constraint is strictly
    // positive there, so a zero block is a valid choice.
    if (speed > 1e-9) ev.grad.segment<3>(6 * i + 3) = -(d.v / speed);
    ev.already_unsafe = ev.value < 0.0;
    return ev;
}

BarrierEval ConstraintEvaluator::h_sun_koz(const FleetState& fleet, int i) const {
    const auto& d = fleet.deputies[static_cast<size_t>(i)];
    const Vec3 axis = -sun_vector(fleet.theta_s);
    const KozEval kz = koz_kernel(d.p, d.v, axis, half_angle_, a_max_, -params_.dyn.n);

    BarrierEval ev;
    ev.id = {4, i, -1};
    ev.value = kz.value;
    ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
    ev.grad.segment<3>(6 * i) = kz.grad_p;
    ev.grad.segment<3>(6 * i + 3) = kz.grad_v;
    ev.dh_dt = kz.dh_dt;
    ev.already_unsafe = kz.inside;
    return ev;
}

BarrierEval ConstraintEvaluator::h_multi_agent_koz(const FleetState& fleet, int i, int j) const {
    const Vec3 rel = fleet.deputies[static_cast<size_t>(i)].p - fleet.deputies[static_cast<size_t>(j)].p;
    const double theta_bd = angle_to_sun(rel, fleet.theta_s);
    // Pick the side of the pair whose boresight could sweep the Sun.
    const double sign = theta_bd > 0.5 * std::numbers::pi ? 1.0 : -1.0;
    const Vec3 pr = sign * rel;
    const Vec3 vr = sign * (fleet.deputies[static_cast<size_t>(i)].v - fleet.deputies[static_cast<size_t>(j)].v);
    const Vec3 axis = -sun_vector(fleet.theta_s);
    const KozEval kz = koz_kernel(pr, vr, axis, half_angle_, a_max_, -params_.dyn.n);

    BarrierEval ev;
    ev.id = {5, i, j};
    ev.value = kz.value;
    ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
    ev.grad.segment<3>(6 * i) = sign * kz.grad_p;
    ev.grad.segment<3>(6 * i + 3) = sign * kz.grad_v;
    ev.grad.segment<3>(6 * j) = -sign * kz.grad_p;
    ev.grad.segment<3>(6 * j + 3) = -sign * kz.grad_v;
    ev.dh_dt = kz.dh_dt;
    ev.already_unsafe = kz.inside;
    return ev;
}

BarrierEval ConstraintEvaluator::h_keep_in(const FleetState& fleet, int i) const {
    const auto& d = fleet.deputies[static_cast<size_t>(i)];
    const double r = std::max(d.p.norm(), 1e-9);
    const Vec3 phat = d.p / r;
    double dsq = 0.0;
    const double margin = params_.r_max - r;
    const double sq = braking_sqrt(2.0 * a_max_, margin, &dsq);
    const double vpr = d.v.dot(phat);

    BarrierEval ev;
    ev.id = {6, i, -1};
    ev.value = sq - vpr;
    ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
    ev.grad.segment<3>(6 * i) = -dsq * phat - (d.v - vpr * phat) / r;
    ev.grad.segment<3>(6 * i + 3) = -phat;
    ev.already_unsafe = margin < 0.0;
    return ev;
}

BarrierEval ConstraintEvaluator::h_fft_chief(const FleetState& fleet, int i) const {
    const auto& d = fleet.deputies[static_cast<size_t>(i)];
    const FftMin fm = fft_min(d.p, d.v, params_.r_d + params_.r_c);
    const auto ks = static_cast<size_t>(fm.index);

    BarrierEval ev;
    ev.id = {7, i, -1};
    ev.value = fm.value;
    ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
    ev.grad.segment<3>(6 * i) = stm_pp_[ks].transpose() * fm.unit;
    ev.grad.segment<3>(6 * i + 3) = stm_pv_[ks].transpose() * fm.unit;
    ev.already_unsafe = fm.value < 0.0;
    return ev;
}

BarrierEval ConstraintEvaluator::h_fft_deputy(const FleetState& fleet, int i, int j) const {
    const Vec3 pr = fleet.deputies[static_cast<size_t>(i)].p - fleet.deputies[static_cast<size_t>(j)].p;
    const Vec3 vr = fleet.deputies[static_cast<size_t>(i)].v - fleet.deputies[static_cast<size_t>(j)].v;
    const FftMin fm = fft_min(pr, vr, 2.0 * params_.r_d);
    const auto ks = static_cast<size_t>(fm.index);

    BarrierEval ev;
    ev.id = {8, i, j};
    ev.value = fm.value;
    ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
    const Vec3 gp = stm_pp_[ks].transpose() * fm.unit;
    const Vec3 gv = stm_pv_[ks].transpose() * fm.unit;
    ev.grad.segment<3>(6 * i) = gp;
    ev.grad.segment<3>(6 * i + 3) = gv;
    ev.grad.segment<3>(6 * j) = -gp;
    ev.grad.segment<3>(6 * j + 3) = -gv;
    ev.already_unsafe = fm.value < 0.0;
    return ev;
}

BarrierEval ConstraintEvaluator::h_velocity_box(const FleetState& fleet, int i, int axis) const {
    if (axis < 0 || axis > 2) throw std::invalid_argument("velocity axis must be 0..2");
    const double vk = fleet.deputies[static_cast<size_t>(i)].v[axis];

    BarrierEval ev;
    ev.id = {9 + axis, i, -1};
    ev.value = params_.v_max * params_.v_max - vk * vk;
    ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
    ev.grad[6 * i + 3 + axis] = -2.0 * vk;
    ev.already_unsafe = ev.value < 0.0;
    return ev;
}

BarrierEval ConstraintEvaluator::h_by_kind(int k, const FleetState& fleet, int i, int j) const {
    switch (k) {
        case 1: return h_chief_separation(fleet, i);
        case 2: return h_deputy_separation(fleet, i, j);
        case 3: return h_speed(fleet, i);
        case 4: return h_sun_koz(fleet, i);
        case 5: return h_multi_agent_koz(fleet, i, j);
        case 6: return h_keep_in(fleet, i);
        case 7: return h_fft_chief(fleet, i);
        case 8: return h_fft_deputy(fleet, i, j);
        case 9:
        case 10:
        case 11: return h_velocity_box(fleet, i, k - 9);
        default: throw std::invalid_argument("no barrier form for kind " + std::to_string(k));
    }
}

void ConstraintEvaluator::append_fft_rows(const FleetState& fleet, int kind, int i, int j,
                                          std::vector<BarrierEval>& out) const {
    const bool pair = kind == 8;
    const Vec3 p = pair ? Vec3(fleet.deputies[static_cast<size_t>(i)].p -
                               fleet.deputies[static_cast<size_t>(j)].p)
                        : fleet.deputies[static_cast<size_t>(i)].p;
    const Vec3 v = pair ? Vec3(fleet.deputies[static_cast<size_t>(i)].v -
                               fleet.deputies[static_cast<size_t>(j)].v)
                        : fleet.deputies[static_cast<size_t>(i)].v;
    const double clearance = pair ? 2.0 * params_.r_d : params_.r_d + params_.r_c;

    // Values of every sample first, to know the minimizer.
    const size_t m = fft_times_.size();
    std::vector<double> values(m);
    size_t best = 0;
    for (size_t k = 0; k < m; ++k) {
        values[k] = (stm_pp_[k] * p + stm_pv_[k] * v).norm() - clearance;
        if (values[k] < values[best]) best = k;
    }

    for (size_t k = 0; k < m; ++k) {
        if (k != best && values[k] > fft_reach_[k]) continue;
        const Vec3 pk = stm_pp_[k] * p + stm_pv_[k] * v;
        const double r = pk.norm();
        const Vec3 unit = r > 1e-12 ? Vec3(pk / r) : Vec3(Vec3::Zero());

        BarrierEval ev;
        ev.id = {kind, i, pair ? j : -1};
        ev.value = values[k];
        ev.grad = Eigen::VectorXd::Zero(6 * fleet.count());
        const Vec3 gp = stm_pp_[k].transpose() * unit;
        const Vec3 gv = stm_pv_[k].transpose() * unit;
        ev.grad.segment<3>(6 * i) = gp;
        ev.grad.segment<3>(6 * i + 3) = gv;
        if (pair) {
            ev.grad.segment<3>(6 * j) = -gp;
            ev.grad.segment<3>(6 * j + 3) = -gv;
        }
        ev.already_unsafe = values[k] < 0.0;
        out.push_back(std::move(ev));
    }
}

std::vector<BarrierEval> ConstraintEvaluator::all_barriers(const FleetState& fleet,
                                                           const ConstraintSet& enabled) const {
    static constexpr int kSingle[] = {1, 3, 4, 6, 7, 9, 10, 11};
    static constexpr int kPair[] = {2, 5, 8};

    std::vector<BarrierEval> out;
    const int n = fleet.count();
    for (int i = 0; i < n; ++i)
        for (int k : kSingle) {
            if (!enabled.contains(k)) continue;
            if (k == 7) append_fft_rows(fleet, 7, i, -1, out);
            else out.push_back(h_by_kind(k, fleet, i));
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k : kPair) {
                if (!enabled.contains(k)) continue;
                if (k == 8) append_fft_rows(fleet, 8, i, j, out);
                else out.push_back(h_by_kind(k, fleet, i, j));
            }
    return out;
}

double ConstraintEvaluator::phi(int k, const FleetState& fleet, int i, int j) const {
    const auto& dep = fleet.deputies[static_cast<size_t>(i)];
    switch (k) {
        case 1: return dep.p.norm() - (params_.r_d + params_.r_c);
        case 2: return (dep.p - fleet.deputies[static_cast<size_t>(j)].p).norm() - 2.0 * params_.r_d;
        case 3: return params_.nu0 + params_.nu1 * dep.p.norm() - dep.v.norm();
        case 4: return angle_to_sun(-dep.p, fleet.theta_s) - half_angle_;
        case 5: return angle_to_sun(dep.p - fleet.deputies[static_cast<size_t>(j)].p, fleet.theta_s) - half_angle_;
        case 6: return params_.r_max - dep.p.norm();
        case 7: return fft_min(dep.p, dep.v, params_.r_d + params_.r_c).value;
        case 8: {
            const auto& other = fleet.deputies[static_cast<size_t>(j)];
            return fft_min(dep.p - other.p, dep.v - other.v, 2.0 * params_.r_d).value;
        }
        case 9:
        case 10:
        case 11: {
            const double vk = dep.v[k - 9];
            return params_.v_max * params_.v_max - vk * vk;
        }
        case 12: return params_.delta_v_max - dep.delta_v_used;
        default: throw std::invalid_argument("unknown constraint kind " + std::to_string(k));
    }
}

std::vector<PhiEval> ConstraintEvaluator::phi_all(const FleetState& fleet,
                                                  const ConstraintSet& enabled,
                                                  bool include_fuel) const {
    std::vector<PhiEval> out;
    const int n = fleet.count();
    for (int k = 1; k <= 11; ++k) {
        if (!enabled.contains(k)) continue;
        if (!is_pairwise(k)) {
            for (int i = 0; i < n; ++i) out.push_back({{k, i, -1}, phi(k, fleet, i)});
        } else if (k == 5) {
            // Directional: deputy i observing deputy j.
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j) out.push_back({{k, i, j}, phi(k, fleet, i, j)});
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) out.push_back({{k, i, j}, phi(k, fleet, i, j)});
        }
    }
    if (include_fuel)
        for (int i = 0; i < n; ++i) out.push_back({{kFuelKind, i, -1}, phi(kFuelKind, fleet, i)});
    return out;
}

}  // namespace rta
