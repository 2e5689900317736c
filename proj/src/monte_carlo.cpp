#include "rta/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace rta {

namespace {

// Uniform double in [0,1) from the raw generator; avoids the
// implementation-defined std::uniform_real_distribution.
double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t bounded(std::mt19937_64& rng, size_t n) {
    return static_cast<size_t>(u01(rng) * static_cast<double>(n)) % n;
}

struct Dim {
    double lo, hi;
};

FleetState build_fleet(const std::vector<double>& x, int deputies, double theta_s0) {
    FleetState fleet;
    fleet.theta_s = theta_s0;
    fleet.t = 0.0;
    for (int i = 0; i < deputies; ++i) {
        const size_t base = static_cast<size_t>(6 * i);
        const double r = x[base + 0];
        const double cpol = x[base + 1];
        const double az = x[base + 2];
        const double spol = std::sqrt(std::max(0.0, 1.0 - cpol * cpol));
        DeputyState d;
        d.p = Vec3(r * spol * std::cos(az), r * spol * std::sin(az), r * cpol);
        d.v = Vec3(x[base + 3], x[base + 4], x[base + 5]);
        fleet.deputies.push_back(d);
    }
    return fleet;
}

// Most negative constraint value, used to name the binding constraint when
// sampling gives up.
std::pair<int, double> worst_constraint(const ConstraintEvaluator& eval, const FleetState& fleet) {
    int kind = 0;
    double worst = 0.0;
    for (const auto& pv : eval.phi_all(fleet, ConstraintSet::all_h(), false))
        if (pv.value < worst) {
            worst = pv.value;
            kind = pv.id.k;
        }
    for (const auto& ev : eval.all_barriers(fleet, ConstraintSet::all_h()))
        if (ev.value < worst) {
            worst = ev.value;
            kind = ev.id.k;
        }
    return {kind, worst};
}

bool state_valid(const ConstraintEvaluator& eval, const FleetState& fleet) {
    for (const auto& pv : eval.phi_all(fleet, ConstraintSet::all_h(), false))
        if (pv.value < 0.0) return false;
    for (const auto& ev : eval.all_barriers(fleet, ConstraintSet::all_h()))
        if (ev.value < 0.0) return false;
    return true;
}

void validate_config(const McConfig& cfg, const ConstraintParams& cp) {
    if (cfg.num_runs <= 0) throw std::invalid_argument("monte carlo needs num_runs > 0");
    if (cfg.num_deputies < 1) throw std::invalid_argument("monte carlo needs at least one deputy");
    if (!(cfg.duration_s > 0.0) || !(cfg.dt_s > 0.0))
        throw std::invalid_argument("monte carlo duration/dt must be positive");
    if (!(cfg.shell_min_r > cp.r_d + cp.r_c) || !(cfg.shell_max_r <= cp.r_max) ||
        !(cfg.shell_min_r < cfg.shell_max_r))
        throw std::invalid_argument("sampling shell must sit inside the keep-in zone");
    if (!(cfg.velocity_box > 0.0) || cfg.velocity_box > cp.v_max)
        throw std::invalid_argument("velocity box must sit inside the velocity limit");
    if (cfg.modes.empty()) throw std::invalid_argument("monte carlo needs at least one mode");
}

}  // namespace

std::string McMode::label() const {
    std::string s = rta == RtaSelection::asif_centralized ? "centralized"
                    : rta == RtaSelection::asif_decentralized ? "decentralized"
                                                              : "off";
    for (int k : removed) s += "-no_" + kind_token(k);
    return s;
}

std::vector<FleetState> sample_initial_conditions(const McConfig& cfg, const ConstraintParams& cp) {
    validate_config(cfg, cp);
    const ConstraintEvaluator eval(cp);
    const int runs = cfg.num_runs;
    const int dims = 6 * cfg.num_deputies;

    std::vector<Dim> box(static_cast<size_t>(dims));
    for (int i = 0; i < cfg.num_deputies; ++i) {
        const size_t base = static_cast<size_t>(6 * i);
        box[base + 0] = {cfg.shell_min_r, cfg.shell_max_r};
        box[base + 1] = {-1.0, 1.0};
        box[base + 2] = {0.0, 2.0 * std::numbers::pi};
        for (int a = 0; a < 3; ++a) box[base + 3 + static_cast<size_t>(a)] = {-cfg.velocity_box, cfg.velocity_box};
    }

    std::mt19937_64 rng(cfg.seed);

    // One stratification permutation per scalar dimension.
    std::vector<std::vector<int>> perm(static_cast<size_t>(dims));
    for (auto& p : perm) {
        p.resize(static_cast<size_t>(runs));
        for (int k = 0; k < runs; ++k) p[static_cast<size_t>(k)] = k;
        for (size_t k = p.size(); k > 1; --k) std::swap(p[k - 1], p[bounded(rng, k)]);
    }

    std::vector<FleetState> out;
    out.reserve(static_cast<size_t>(runs));
    std::vector<double> x(static_cast<size_t>(dims));
    int worst_kind = 0;

    for (int run = 0; run < runs; ++run) {
        bool accepted = false;
        for (int attempt = 0; attempt < cfg.max_stratum_retries && !accepted; ++attempt) {
            for (int dj = 0; dj < dims; ++dj) {
                const auto js = static_cast<size_t>(dj);
                const double width = (box[js].hi - box[js].lo) / static_cast<double>(runs);
                const int bin = perm[js][static_cast<size_t>(run)];
                x[js] = box[js].lo + (static_cast<double>(bin) + u01(rng)) * width;
            }
            const FleetState fleet = build_fleet(x, cfg.num_deputies, cp.theta_s0);
            if (state_valid(eval, fleet)) {
                out.push_back(fleet);
                accepted = true;
            } else if (attempt == cfg.max_stratum_retries - 1) {
                worst_kind = worst_constraint(eval, fleet).first;
            }
        }
        // Stratum exhausted: fall back to unstratified draws over the box.
        for (int attempt = 0; attempt < cfg.max_global_retries && !accepted; ++attempt) {
            for (int dj = 0; dj < dims; ++dj) {
                const auto js = static_cast<size_t>(dj);
                x[js] = box[js].lo + u01(rng) * (box[js].hi - box[js].lo);
            }
            const FleetState fleet = build_fleet(x, cfg.num_deputies, cp.theta_s0);
            if (state_valid(eval, fleet)) {
                out.push_back(fleet);
                accepted = true;
            } else if (attempt == cfg.max_global_retries - 1) {
                worst_kind = worst_constraint(eval, fleet).first;
            }
        }
        if (!accepted)
            throw std::runtime_error("initial-condition sampling infeasible; binding constraint: " +
                                     (worst_kind >= 1 ? kind_name(worst_kind) : std::string("unknown")));
    }
    return out;
}

std::string fleet_list_hash(const std::vector<FleetState>& fleets) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the raw doubles
    auto mix = [&h](double v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (const auto& f : fleets) {
        mix(f.theta_s);
        for (const auto& d : f.deputies) {
            for (int k = 0; k < 3; ++k) mix(d.p[k]);
            for (int k = 0; k < 3; ++k) mix(d.v[k]);
            mix(d.delta_v_used);
        }
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

McReport run_batch(const McConfig& cfg, const ConstraintParams& cp, const AsifConfig& asif,
                   int workers) {
    validate_config(cfg, cp);
    const std::vector<FleetState> ics = sample_initial_conditions(cfg, cp);

    McReport report;
    report.config = cfg;
    report.ic_hash = fleet_list_hash(ics);

    const ControllerConfigs ctl;  // no primary control in these batches
    for (const auto& mode : cfg.modes) {
        ConstraintSet enabled = ConstraintSet::all_h();
        for (int k : mode.removed) enabled.erase(k);

        McModeReport mr;
        mr.mode = mode;
        mr.runs.resize(static_cast<size_t>(cfg.num_runs));

        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int run = next.fetch_add(1);
                if (run >= cfg.num_runs) return;
                Scenario sc;
                sc.initial = ics[static_cast<size_t>(run)];
                sc.duration_s = cfg.duration_s;
                sc.dt_s = cfg.dt_s;
                sc.primary.type = PrimarySpec::Type::none;
                sc.rta = mode.rta;
                sc.fuel_filter = false;
                sc.enabled = enabled;
                sc.audited = enabled;
                sc.seed = cfg.seed;

                const SimResult res = run_scenario(sc, cp, asif, ctl);
                RunOutcome& oc = mr.runs[static_cast<size_t>(run)];
                oc.run = run;
                oc.success = res.audit.pass;
                double worst = std::numeric_limits<double>::infinity();
                for (double v : res.audit.phi_min)
                    if (!std::isnan(v)) worst = std::min(worst, v);
                oc.min_phi = worst;
                if (!oc.success) {
                    oc.cause = res.audit.failure_cause;
                    const auto& fv = res.audit.first_violation;
                    const auto& fi = res.audit.first_infeasible;
                    oc.t_first = fv && (!fi || fv->second <= fi->second) ? fv->second : fi->second;
                }
            }
        };

        const int nw = std::max(1, workers);
        std::vector<std::thread> pool;
        for (int w = 0; w < nw - 1; ++w) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();

        for (const auto& oc : mr.runs) {
            if (oc.success) ++mr.successes;
            else {
                ++mr.failures;
                ++mr.causes[oc.cause];
            }
        }
        report.per_mode.push_back(std::move(mr));
    }
    return report;
}

}  // namespace rta
