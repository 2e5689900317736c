#pragma once

#include "rta/asif_filter.hpp"
#include "rta/monte_carlo.hpp"
#include "rta/sim_engine.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace rta {

struct OutputPaths {
    std::string trace_csv = "trace.csv";
    std::string audit_json = "audit.json";
    std::string report_json = "report.json";
    std::string runs_csv = "runs.csv";
};

/// Full configuration document: constraint values, filter tuning, controller
/// weights, and exactly the experiment to run (a scenario or a batch).
struct RunConfig {
    ConstraintParams params;
    AsifConfig asif;
    ControllerConfigs controllers;
    std::optional<Scenario> scenario;
    std::optional<McConfig> monte_carlo;
    OutputPaths output;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strict parse: unknown keys are rejected, units are part of the key names.
/// `origin` seeds the location prefix of error messages.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "config");
RunConfig load_run_config(const std::string& path);

/// Canonical serialization; parse -> dump -> parse is the identity.
std::string dump_run_config(const RunConfig& cfg);

}  // namespace rta
