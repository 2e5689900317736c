#pragma once

#include "rta/sim_engine.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rta {

/// One batch variant: which filter runs and which constraint families are
/// removed from both enforcement and audit.
struct McMode {
    RtaSelection rta = RtaSelection::asif_centralized;
    std::vector<int> removed;  // constraint families taken out

    std::string label() const;
};

struct McConfig {
    int num_runs = 200;
    int num_deputies = 5;
    double duration_s = 500.0;
    double dt_s = 1.0;
    double shell_min_r = 50.0;   // position shell [m]
    double shell_max_r = 800.0;
    double velocity_box = 1.0;   // per-axis bound [m/s]
    std::uint64_t seed = 0;
    std::vector<McMode> modes;
    int max_stratum_retries = 200;
    int max_global_retries = 2000;
};

struct RunOutcome {
    int run = 0;
    bool success = true;
    std::string cause;       // family name on failure
    double t_first = 0.0;    // time of the first failure event
    double min_phi = 0.0;    // worst audited phi over the run
};

struct McModeReport {
    McMode mode;
    int successes = 0;
    int failures = 0;
    std::map<std::string, int> causes;
    std::vector<RunOutcome> runs;  // ordered by run index
};

struct McReport {
    McConfig config;
    std::string ic_hash;  // fingerprint of the shared initial-condition set
    std::vector<McModeReport> per_mode;
};

/// Latin hypercube draw of num_runs fleet states (per deputy: shell radius,
/// polar cosine, azimuth, three velocity components), rejecting states that
/// violate any phi or h constraint. Rejected points are first redrawn inside
/// their strata, then unstratified, and the binding constraint is named if
/// the caps run out.
std::vector<FleetState> sample_initial_conditions(const McConfig& cfg, const ConstraintParams& params);

/// Run every mode over the same initial-condition set with zero desired
/// control and classify each run via the audit. Runs execute on `workers`
/// threads; the report is identical regardless of the worker count.
McReport run_batch(const McConfig& cfg, const ConstraintParams& params, const AsifConfig& asif,
                   int workers = 1);

std::string fleet_list_hash(const std::vector<FleetState>& fleets);

}  // namespace rta
