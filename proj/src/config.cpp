#include "rta/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace rta {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void expect_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) fail(where, "unknown key '" + it.key() + "'");
    }
}

double get_num(const json& j, const std::string& where, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(where + "." + key, "expected a number");
    return j[key].get<double>();
}

int get_int(const json& j, const std::string& where, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) fail(where + "." + key, "expected an integer");
    return j[key].get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& where, const char* key, std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_unsigned() && !j[key].is_number_integer())
        fail(where + "." + key, "expected an integer");
    return j[key].get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& where, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean()) fail(where + "." + key, "expected a boolean");
    return j[key].get<bool>();
}

std::string get_str(const json& j, const std::string& where, const char* key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) fail(where + "." + key, "expected a string");
    return j[key].get<std::string>();
}

Vec3 get_vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
        fail(where, "expected an array of three numbers");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

ConstraintSet get_constraint_set(const json& j, const std::string& where, const char* key,
                                 const ConstraintSet& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_array()) fail(where + "." + key, "expected an array of constraint names");
    ConstraintSet s = ConstraintSet::none();
    for (const auto& item : j[key]) {
        if (!item.is_string()) fail(where + "." + key, "expected strings");
        try {
            s.insert(parse_kind(item.get<std::string>()));
        } catch (const std::exception& e) {
            fail(where + "." + key, e.what());
        }
    }
    return s;
}

RtaSelection parse_rta(const std::string& s, const std::string& where) {
    if (s == "off") return RtaSelection::off;
    if (s == "centralized") return RtaSelection::asif_centralized;
    if (s == "decentralized") return RtaSelection::asif_decentralized;
    fail(where, "rta must be off|centralized|decentralized, got '" + s + "'");
}

std::string rta_str(RtaSelection r) {
    switch (r) {
        case RtaSelection::off: return "off";
        case RtaSelection::asif_centralized: return "centralized";
        default: return "decentralized";
    }
}

ConstraintParams parse_params(const json& j) {
    ConstraintParams p;
    if (j.is_null()) return p;
    const std::string w = "params";
    expect_keys(j, w,
                {"mean_motion_rad_s", "mass_kg", "deputy_radius_m", "chief_radius_m", "nu0_m_s",
                 "nu1_rad_s", "delta_v_max_m_s", "alpha_fov_deg", "r_max_m", "fft_horizon_s",
                 "fft_samples", "v_max_m_s", "u_max_n", "a_max_range_m", "theta_s0_rad"});
    p.dyn.n = get_num(j, w, "mean_motion_rad_s", p.dyn.n);
    p.dyn.m = get_num(j, w, "mass_kg", p.dyn.m);
    p.r_d = get_num(j, w, "deputy_radius_m", p.r_d);
    p.r_c = get_num(j, w, "chief_radius_m", p.r_c);
    p.nu0 = get_num(j, w, "nu0_m_s", p.nu0);
    p.nu1 = get_num(j, w, "nu1_rad_s", p.nu1);
    p.delta_v_max = get_num(j, w, "delta_v_max_m_s", p.delta_v_max);
    p.alpha_fov = deg2rad(get_num(j, w, "alpha_fov_deg", rad2deg(p.alpha_fov)));
    p.r_max = get_num(j, w, "r_max_m", p.r_max);
    p.fft_horizon = get_num(j, w, "fft_horizon_s", p.fft_horizon);
    p.fft_samples = get_int(j, w, "fft_samples", p.fft_samples);
    p.v_max = get_num(j, w, "v_max_m_s", p.v_max);
    p.u_max = get_num(j, w, "u_max_n", p.u_max);
    p.a_max_range = get_num(j, w, "a_max_range_m", p.a_max_range);
    p.theta_s0 = get_num(j, w, "theta_s0_rad", p.theta_s0);
    try {
        p.validate();
    } catch (const std::exception& e) {
        fail(w, e.what());
    }
    return p;
}

AsifConfig parse_asif(const json& j) {
    AsifConfig a;
    if (j.is_null()) return a;
    const std::string w = "asif";
    expect_keys(j, w, {"mode", "alpha", "enabled_constraints", "intervention_tol", "active_tol"});
    const std::string mode = get_str(j, w, "mode", "centralized");
    if (mode == "centralized") a.mode = AsifMode::centralized;
    else if (mode == "decentralized") a.mode = AsifMode::decentralized;
    else fail(w + ".mode", "must be centralized|decentralized");
    if (j.contains("alpha")) {
        const json& ja = j["alpha"];
        expect_keys(ja, w + ".alpha",
                    {"family", "gamma_per_s", "overrides", "margin", "margin_overrides"});
        const std::string fam = get_str(ja, w + ".alpha", "family", "linear");
        if (fam == "linear") a.alpha.family = AlphaSpec::Family::linear;
        else if (fam == "cubic") a.alpha.family = AlphaSpec::Family::cubic;
        else fail(w + ".alpha.family", "must be linear|cubic");
        a.alpha.gamma = get_num(ja, w + ".alpha", "gamma_per_s", a.alpha.gamma);
        if (!(a.alpha.gamma > 0.0)) fail(w + ".alpha.gamma_per_s", "must be positive");
        a.alpha.margin = get_num(ja, w + ".alpha", "margin", a.alpha.margin);
        auto read_map = [&](const char* key, std::map<int, double>& target) {
            if (!ja.contains(key)) return;
            if (!ja[key].is_object()) fail(w + ".alpha." + key, "expected an object");
            target.clear();
            for (auto it = ja[key].begin(); it != ja[key].end(); ++it) {
                if (!it.value().is_number()) fail(w + ".alpha." + key, "expected numbers");
                try {
                    target[parse_kind(it.key())] = it.value().get<double>();
                } catch (const std::exception& e) {
                    fail(w + ".alpha." + key, e.what());
                }
            }
        };
        read_map("overrides", a.alpha.gamma_by_kind);
        read_map("margin_overrides", a.alpha.margin_by_kind);
    }
    a.enabled = get_constraint_set(j, w, "enabled_constraints", ConstraintSet::all_h());
    a.intervention_tol = get_num(j, w, "intervention_tol", a.intervention_tol);
    a.active_tol = get_num(j, w, "active_tol", a.active_tol);
    return a;
}

ControllerConfigs parse_controllers(const json& j) {
    ControllerConfigs c;
    if (j.is_null()) return c;
    const std::string w = "controllers";
    expect_keys(j, w, {"backup", "aggressive"});
    if (j.contains("backup")) {
        const json& jb = j["backup"];
        expect_keys(jb, w + ".backup", {"q_diag", "r_diag", "deadband_defect_m_s", "deadband_drift_m_s"});
        if (jb.contains("q_diag")) {
            if (!jb["q_diag"].is_array() || jb["q_diag"].size() != 9)
                fail(w + ".backup.q_diag", "expected 9 numbers");
            for (int k = 0; k < 9; ++k) c.backup.q_diag[k] = jb["q_diag"][static_cast<size_t>(k)].get<double>();
        }
        if (jb.contains("r_diag")) {
            if (!jb["r_diag"].is_array() || jb["r_diag"].size() != 3)
                fail(w + ".backup.r_diag", "expected 3 numbers");
            for (int k = 0; k < 3; ++k) c.backup.r_diag[k] = jb["r_diag"][static_cast<size_t>(k)].get<double>();
        }
        c.backup.deadband_defect = get_num(jb, w + ".backup", "deadband_defect_m_s", c.backup.deadband_defect);
        c.backup.deadband_drift = get_num(jb, w + ".backup", "deadband_drift_m_s", c.backup.deadband_drift);
    }
    if (j.contains("aggressive")) {
        const json& ja = j["aggressive"];
        expect_keys(ja, w + ".aggressive", {"q_diag", "r_diag"});
        if (ja.contains("q_diag")) {
            if (!ja["q_diag"].is_array() || ja["q_diag"].size() != 6)
                fail(w + ".aggressive.q_diag", "expected 6 numbers");
            for (int k = 0; k < 6; ++k) c.aggressive.q_diag[k] = ja["q_diag"][static_cast<size_t>(k)].get<double>();
        }
        if (ja.contains("r_diag")) {
            if (!ja["r_diag"].is_array() || ja["r_diag"].size() != 3)
                fail(w + ".aggressive.r_diag", "expected 3 numbers");
            for (int k = 0; k < 3; ++k) c.aggressive.r_diag[k] = ja["r_diag"][static_cast<size_t>(k)].get<double>();
        }
    }
    return c;
}

Scenario parse_scenario(const json& j, const ConstraintParams& params) {
    const std::string w = "scenario";
    expect_keys(j, w,
                {"duration_s", "dt_s", "deputies", "primary", "rta", "fuel_filter",
                 "enabled_constraints", "audited_constraints", "seed"});
    Scenario sc;
    if (!j.contains("duration_s")) fail(w, "missing duration_s");
    sc.duration_s = get_num(j, w, "duration_s", 0.0);
    sc.dt_s = get_num(j, w, "dt_s", 1.0);
    if (!j.contains("deputies") || !j["deputies"].is_array() || j["deputies"].empty())
        fail(w + ".deputies", "expected a non-empty array");
    for (size_t i = 0; i < j["deputies"].size(); ++i) {
        const json& jd = j["deputies"][i];
        const std::string wd = w + ".deputies[" + std::to_string(i) + "]";
        expect_keys(jd, wd, {"p_m", "v_m_s", "delta_v_used_m_s"});
        DeputyState d;
        if (!jd.contains("p_m")) fail(wd, "missing p_m");
        d.p = get_vec3(jd["p_m"], wd + ".p_m");
        if (jd.contains("v_m_s")) d.v = get_vec3(jd["v_m_s"], wd + ".v_m_s");
        d.delta_v_used = get_num(jd, wd, "delta_v_used_m_s", 0.0);
        sc.initial.deputies.push_back(d);
    }
    sc.initial.theta_s = params.theta_s0;
    sc.initial.t = 0.0;
    if (j.contains("primary")) {
        const json& jp = j["primary"];
        expect_keys(jp, w + ".primary", {"type", "phases"});
        const std::string type = get_str(jp, w + ".primary", "type", "none");
        if (type == "none") sc.primary.type = PrimarySpec::Type::none;
        else if (type == "aggressive_lqr") sc.primary.type = PrimarySpec::Type::aggressive_lqr;
        else fail(w + ".primary.type", "must be none|aggressive_lqr");
        if (jp.contains("phases")) {
            if (!jp["phases"].is_array()) fail(w + ".primary.phases", "expected an array");
            for (size_t i = 0; i < jp["phases"].size(); ++i) {
                const json& jf = jp["phases"][i];
                const std::string wf = w + ".primary.phases[" + std::to_string(i) + "]";
                expect_keys(jf, wf, {"until_s", "target_m"});
                PhaseTarget ph;
                if (!jf.contains("until_s") || !jf.contains("target_m")) fail(wf, "needs until_s and target_m");
                ph.until_s = jf["until_s"].get<double>();
                ph.target_m = get_vec3(jf["target_m"], wf + ".target_m");
                sc.primary.phases.push_back(ph);
            }
        }
    }
    if (!j.contains("rta")) fail(w, "missing rta");
    sc.rta = parse_rta(get_str(j, w, "rta", ""), w + ".rta");
    sc.fuel_filter = get_bool(j, w, "fuel_filter", false);
    sc.enabled = get_constraint_set(j, w, "enabled_constraints", ConstraintSet::all_h());
    sc.audited = get_constraint_set(j, w, "audited_constraints", sc.enabled);
    sc.seed = get_u64(j, w, "seed", 0);
    return sc;
}

McConfig parse_mc(const json& j) {
    const std::string w = "monte_carlo";
    expect_keys(j, w,
                {"num_runs", "num_deputies", "duration_s", "dt_s", "position_shell_m",
                 "velocity_box_m_s", "seed", "modes", "max_stratum_retries", "max_global_retries"});
    McConfig mc;
    mc.num_runs = get_int(j, w, "num_runs", mc.num_runs);
    mc.num_deputies = get_int(j, w, "num_deputies", mc.num_deputies);
    mc.duration_s = get_num(j, w, "duration_s", mc.duration_s);
    mc.dt_s = get_num(j, w, "dt_s", mc.dt_s);
    if (j.contains("position_shell_m")) {
        const json& js = j["position_shell_m"];
        if (!js.is_array() || js.size() != 2) fail(w + ".position_shell_m", "expected [min, max]");
        mc.shell_min_r = js[0].get<double>();
        mc.shell_max_r = js[1].get<double>();
    }
    mc.velocity_box = get_num(j, w, "velocity_box_m_s", mc.velocity_box);
    mc.seed = get_u64(j, w, "seed", mc.seed);
    if (j.contains("modes")) {
        if (!j["modes"].is_array()) fail(w + ".modes", "expected an array");
        for (size_t i = 0; i < j["modes"].size(); ++i) {
            const json& jm = j["modes"][i];
            const std::string wm = w + ".modes[" + std::to_string(i) + "]";
            McMode mode;
            if (jm.is_string()) {
                mode.rta = parse_rta(jm.get<std::string>(), wm);
            } else {
                expect_keys(jm, wm, {"rta", "remove_constraints"});
                mode.rta = parse_rta(get_str(jm, wm, "rta", ""), wm + ".rta");
                if (jm.contains("remove_constraints")) {
                    if (!jm["remove_constraints"].is_array()) fail(wm + ".remove_constraints", "expected an array");
                    for (const auto& t : jm["remove_constraints"]) {
                        try {
                            mode.removed.push_back(parse_kind(t.get<std::string>()));
                        } catch (const std::exception& e) {
                            fail(wm + ".remove_constraints", e.what());
                        }
                    }
                }
            }
            mc.modes.push_back(std::move(mode));
        }
    }
    if (mc.modes.empty())
        mc.modes = {McMode{RtaSelection::asif_centralized, {}}, McMode{RtaSelection::asif_decentralized, {}}};
    mc.max_stratum_retries = get_int(j, w, "max_stratum_retries", mc.max_stratum_retries);
    mc.max_global_retries = get_int(j, w, "max_global_retries", mc.max_global_retries);
    return mc;
}

OutputPaths parse_output(const json& j) {
    OutputPaths o;
    if (j.is_null()) return o;
    expect_keys(j, "output", {"trace_csv", "audit_json", "report_json", "runs_csv"});
    o.trace_csv = get_str(j, "output", "trace_csv", o.trace_csv);
    o.audit_json = get_str(j, "output", "audit_json", o.audit_json);
    o.report_json = get_str(j, "output", "report_json", o.report_json);
    o.runs_csv = get_str(j, "output", "runs_csv", o.runs_csv);
    return o;
}

json set_to_json(const ConstraintSet& s) {
    json arr = json::array();
    for (int k : s.kinds()) arr.push_back(kind_token(k));
    return arr;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Map the byte offset onto line:column so the message points at the problem.
        size_t line = 1, col = 1;
        for (size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                          e.what());
    }

    expect_keys(doc, origin, {"params", "asif", "controllers", "scenario", "monte_carlo", "output"});
    RunConfig cfg;
    cfg.params = parse_params(doc.contains("params") ? doc["params"] : json());
    cfg.asif = parse_asif(doc.contains("asif") ? doc["asif"] : json());
    cfg.controllers = parse_controllers(doc.contains("controllers") ? doc["controllers"] : json());
    if (doc.contains("scenario")) cfg.scenario = parse_scenario(doc["scenario"], cfg.params);
    if (doc.contains("monte_carlo")) cfg.monte_carlo = parse_mc(doc["monte_carlo"]);
    if (cfg.scenario && cfg.monte_carlo)
        throw ConfigError(origin + ": give either scenario or monte_carlo, not both");
    cfg.output = parse_output(doc.contains("output") ? doc["output"] : json());
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path);
}

std::string dump_run_config(const RunConfig& cfg) {
    json doc;
    json& p = doc["params"];
    p["mean_motion_rad_s"] = cfg.params.dyn.n;
    p["mass_kg"] = cfg.params.dyn.m;
    p["deputy_radius_m"] = cfg.params.r_d;
    p["chief_radius_m"] = cfg.params.r_c;
    p["nu0_m_s"] = cfg.params.nu0;
    p["nu1_rad_s"] = cfg.params.nu1;
    p["delta_v_max_m_s"] = cfg.params.delta_v_max;
    p["alpha_fov_deg"] = rad2deg(cfg.params.alpha_fov);
    p["r_max_m"] = cfg.params.r_max;
    p["fft_horizon_s"] = cfg.params.fft_horizon;
    p["fft_samples"] = cfg.params.fft_samples;
    p["v_max_m_s"] = cfg.params.v_max;
    p["u_max_n"] = cfg.params.u_max;
    p["a_max_range_m"] = cfg.params.a_max_range;
    p["theta_s0_rad"] = cfg.params.theta_s0;

    json& a = doc["asif"];
    a["mode"] = cfg.asif.mode == AsifMode::centralized ? "centralized" : "decentralized";
    a["alpha"]["family"] = cfg.asif.alpha.family == AlphaSpec::Family::linear ? "linear" : "cubic";
    a["alpha"]["gamma_per_s"] = cfg.asif.alpha.gamma;
    a["alpha"]["margin"] = cfg.asif.alpha.margin;
    if (!cfg.asif.alpha.gamma_by_kind.empty()) {
        json ov;
        for (const auto& [k, g] : cfg.asif.alpha.gamma_by_kind) ov[kind_token(k)] = g;
        a["alpha"]["overrides"] = ov;
    }
    {
        json mv;
        for (const auto& [k, m] : cfg.asif.alpha.margin_by_kind) mv[kind_token(k)] = m;
        a["alpha"]["margin_overrides"] = mv;
    }
    a["enabled_constraints"] = set_to_json(cfg.asif.enabled);
    a["intervention_tol"] = cfg.asif.intervention_tol;
    a["active_tol"] = cfg.asif.active_tol;

    json& c = doc["controllers"];
    for (int k = 0; k < 9; ++k) c["backup"]["q_diag"].push_back(cfg.controllers.backup.q_diag[k]);
    for (int k = 0; k < 3; ++k) c["backup"]["r_diag"].push_back(cfg.controllers.backup.r_diag[k]);
    c["backup"]["deadband_defect_m_s"] = cfg.controllers.backup.deadband_defect;
    c["backup"]["deadband_drift_m_s"] = cfg.controllers.backup.deadband_drift;
    for (int k = 0; k < 6; ++k) c["aggressive"]["q_diag"].push_back(cfg.controllers.aggressive.q_diag[k]);
    for (int k = 0; k < 3; ++k) c["aggressive"]["r_diag"].push_back(cfg.controllers.aggressive.r_diag[k]);

    if (cfg.scenario) {
        const Scenario& sc = *cfg.scenario;
        json& s = doc["scenario"];
        s["duration_s"] = sc.duration_s;
        s["dt_s"] = sc.dt_s;
        s["deputies"] = json::array();
        for (const auto& d : sc.initial.deputies) {
            json jd;
            jd["p_m"] = {d.p.x(), d.p.y(), d.p.z()};
            jd["v_m_s"] = {d.v.x(), d.v.y(), d.v.z()};
            jd["delta_v_used_m_s"] = d.delta_v_used;
            s["deputies"].push_back(jd);
        }
        s["primary"]["type"] =
            sc.primary.type == PrimarySpec::Type::none ? "none" : "aggressive_lqr";
        s["primary"]["phases"] = json::array();
        for (const auto& ph : sc.primary.phases) {
            json jf;
            jf["until_s"] = ph.until_s;
            jf["target_m"] = {ph.target_m.x(), ph.target_m.y(), ph.target_m.z()};
            s["primary"]["phases"].push_back(jf);
        }
        s["rta"] = rta_str(sc.rta);
        s["fuel_filter"] = sc.fuel_filter;
        s["enabled_constraints"] = set_to_json(sc.enabled);
        s["audited_constraints"] = set_to_json(sc.audited);
        s["seed"] = sc.seed;
    }

    if (cfg.monte_carlo) {
        const McConfig& mc = *cfg.monte_carlo;
        json& m = doc["monte_carlo"];
        m["num_runs"] = mc.num_runs;
        m["num_deputies"] = mc.num_deputies;
        m["duration_s"] = mc.duration_s;
        m["dt_s"] = mc.dt_s;
        m["position_shell_m"] = {mc.shell_min_r, mc.shell_max_r};
        m["velocity_box_m_s"] = mc.velocity_box;
        m["seed"] = mc.seed;
        m["modes"] = json::array();
        for (const auto& mode : mc.modes) {
            json jm;
            jm["rta"] = rta_str(mode.rta);
            if (!mode.removed.empty()) {
                jm["remove_constraints"] = json::array();
                for (int k : mode.removed) jm["remove_constraints"].push_back(kind_token(k));
            }
            m["modes"].push_back(jm);
        }
        m["max_stratum_retries"] = mc.max_stratum_retries;
        m["max_global_retries"] = mc.max_global_retries;
    }

    json& o = doc["output"];
    o["trace_csv"] = cfg.output.trace_csv;
    o["audit_json"] = cfg.output.audit_json;
    o["report_json"] = cfg.output.report_json;
    o["runs_csv"] = cfg.output.runs_csv;

    return doc.dump(2) + "\n";
}

}  // namespace rta
