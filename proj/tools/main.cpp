#include "rta/config.hpp"
#include "rta/monte_carlo.hpp"
#include "rta/sim_engine.hpp"
#include "rta/trace_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace rta;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSafety = 2;

int default_workers() {
    if (const char* env = std::getenv("RTA_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string joined(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void apply_rta_override(Scenario& sc, const std::string& rta) {
    if (rta == "off") sc.rta = RtaSelection::off;
    else if (rta == "centralized") sc.rta = RtaSelection::asif_centralized;
    else if (rta == "decentralized") sc.rta = RtaSelection::asif_decentralized;
    else throw ConfigError("--rta must be off|centralized|decentralized");
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::string& rta, bool have_seed, std::uint64_t seed) {
    RunConfig cfg = load_run_config(config_path);
    if (!cfg.scenario) throw ConfigError(config_path + ": simulate needs a scenario section");
    if (!rta.empty()) apply_rta_override(*cfg.scenario, rta);
    if (have_seed) cfg.scenario->seed = seed;

    const SimResult res = run_scenario(*cfg.scenario, cfg.params, cfg.asif, cfg.controllers);

    fs::create_directories(out_dir);
    const std::string trace_path = joined(out_dir, cfg.output.trace_csv);
    const std::string audit_path = joined(out_dir, cfg.output.audit_json);
    write_trace_csv(res.trace, trace_path);
    write_audit_json(res.audit, res.trace, audit_path);

    std::cout << "trace: " << trace_path << "\naudit: " << audit_path << "\n"
              << (res.audit.pass ? "audit PASS" : "audit FAIL (" + res.audit.failure_cause + ")")
              << "\n";
    return res.audit.pass ? kExitOk : kExitSafety;
}

int cmd_montecarlo(const std::string& config_path, const std::string& out_dir,
                   const std::string& modes, const std::vector<std::string>& removed,
                   bool have_seed, std::uint64_t seed, int workers) {
    RunConfig cfg = load_run_config(config_path);
    if (!cfg.monte_carlo) throw ConfigError(config_path + ": montecarlo needs a monte_carlo section");
    McConfig mc = *cfg.monte_carlo;
    if (have_seed) mc.seed = seed;

    if (!modes.empty()) {
        mc.modes.clear();
        std::stringstream ss(modes);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            McMode mode;
            if (tok == "centralized") mode.rta = RtaSelection::asif_centralized;
            else if (tok == "decentralized") mode.rta = RtaSelection::asif_decentralized;
            else throw ConfigError("--modes entries must be centralized|decentralized");
            mc.modes.push_back(mode);
        }
        if (mc.modes.empty()) throw ConfigError("--modes given but empty");
    }
    if (!removed.empty()) {
        // Add one variant per listed mode with the named constraints taken out.
        std::vector<int> kinds;
        for (const auto& r : removed) kinds.push_back(parse_kind(r));
        const std::vector<McMode> base = mc.modes;
        for (const auto& mode : base) {
            McMode variant = mode;
            for (int k : kinds)
                if (std::find(variant.removed.begin(), variant.removed.end(), k) == variant.removed.end())
                    variant.removed.push_back(k);
            if (variant.removed != mode.removed) mc.modes.push_back(variant);
        }
    }

    const McReport report = run_batch(mc, cfg.params, cfg.asif, workers);

    fs::create_directories(out_dir);
    const std::string report_path = joined(out_dir, cfg.output.report_json);
    const std::string runs_path = joined(out_dir, cfg.output.runs_csv);
    write_mc_report_json(report, report_path);
    write_mc_runs_csv(report, runs_path);

    std::cout << "ic_hash: " << report.ic_hash << "\n";
    for (const auto& mr : report.per_mode)
        std::cout << mr.mode.label() << ": " << mr.successes << "/" << report.config.num_runs
                  << " safe\n";
    std::cout << "report: " << report_path << "\nruns: " << runs_path << "\n";
    return kExitOk;
}

int cmd_check(const std::string& config_path) {
    const RunConfig cfg = load_run_config(config_path);
    const ActuationReport rep = check_actuation_limits(cfg.params);
    std::cout << "a_max: " << rep.a_max << " m/s^2\n";
    for (const auto& c : rep.checks)
        std::cout << c.name << ": lhs " << c.lhs << " <= rhs " << c.rhs << "  margin "
                  << c.rhs - c.lhs << "  " << (c.pass ? "PASS" : "FAIL") << "\n";
    if (!(rep.a_max > 0.0)) std::cout << "a_max nonpositive: braking constraints are vacuous\n";
    return rep.all_pass() && rep.a_max > 0.0 ? kExitOk : kExitSafety;
}

int cmd_plotdata(const std::string& trace_path, const std::string& kind, const std::string& out,
                 const std::string& config_path, int stride) {
    ConstraintParams params;
    if (!config_path.empty()) params = load_run_config(config_path).params;
    const SimTrace trace = read_trace_csv(trace_path);
    const std::string out_path = out.empty() ? kind + ".csv" : out;
    write_plotdata(trace, params, kind, out_path, stride);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Run time assurance toolkit for multi-agent spacecraft inspection"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", rta_override, modes, trace_path, kind, plot_out,
                plot_config;
    std::vector<std::string> removed;
    std::uint64_t seed = 0;
    bool have_seed = false;
    int workers = default_workers();
    int stride = 100;

    auto* sim = app.add_subcommand("simulate", "Run one closed-loop scenario");
    sim->add_option("--config", config_path, "Config file")->required();
    sim->add_option("--out", out_dir, "Output directory");
    sim->add_option("--rta", rta_override, "Override the scenario RTA mode (off|centralized|decentralized)");
    sim->add_option("--seed", seed, "Override the scenario seed")->each([&](const std::string&) { have_seed = true; });

    auto* mc = app.add_subcommand("montecarlo", "Run a batch over sampled initial conditions");
    mc->add_option("--config", config_path, "Config file")->required();
    mc->add_option("--out", out_dir, "Output directory");
    mc->add_option("--modes", modes, "Comma-separated RTA modes to compare");
    mc->add_option("--remove-constraint", removed, "Add variants with this constraint removed");
    mc->add_option("--seed", seed, "Override the batch seed")->each([&](const std::string&) { have_seed = true; });
    mc->add_option("--workers", workers, "Worker threads (default: RTA_WORKERS or hardware)");

    auto* chk = app.add_subcommand("check", "Verify the actuation-limit inequalities");
    chk->add_option("--config", config_path, "Config file")->required();

    auto* plot = app.add_subcommand("plotdata", "Emit tidy plot series from a trace");
    plot->add_option("trace", trace_path, "Trace CSV produced by simulate")->required();
    plot->add_option("--kind", kind,
                     "speed-vs-range|pairwise-separation|koz-angles|fft-fan|control|deltav")
        ->required();
    plot->add_option("--out", plot_out, "Output CSV (default: <kind>.csv)");
    plot->add_option("--config", plot_config, "Config file for constraint values");
    plot->add_option("--stride", stride, "Step stride for fft-fan");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) != 0 ? kExitUsage : kExitOk;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir, rta_override, have_seed, seed);
        if (mc->parsed()) return cmd_montecarlo(config_path, out_dir, modes, removed, have_seed, seed, workers);
        if (chk->parsed()) return cmd_check(config_path);
        if (plot->parsed()) return cmd_plotdata(trace_path, kind, plot_out, plot_config, stride);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
