#pragma once

#include "rta/monte_carlo.hpp"
#include "rta/sim_engine.hpp"

#include <string>

namespace rta {

/// Stable trace schema: one row per step per deputy, column order documented
/// in the README and kept fixed.
extern const char* kTraceHeader;

void write_trace_csv(const SimTrace& trace, const std::string& path);
SimTrace read_trace_csv(const std::string& path);

void write_audit_json(const SafetyAudit& audit, const SimTrace& trace, const std::string& path);

void write_mc_report_json(const McReport& report, const std::string& path);
void write_mc_runs_csv(const McReport& report, const std::string& path);

/// Tidy per-panel series: speed-vs-range, pairwise-separation, koz-angles,
/// fft-fan, control, deltav. Throws on unknown kinds.
void write_plotdata(const SimTrace& trace, const ConstraintParams& params, const std::string& kind,
                    const std::string& path, int stride);

}  // namespace rta
