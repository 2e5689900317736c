#include "rta/trace_io.hpp"

#include "rta/orbital_dynamics.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rta {

using json = nlohmann::ordered_json;

const char* kTraceHeader =
    "t_s,deputy,theta_s_rad,px_m,py_m,pz_m,vx_mps,vy_mps,vz_mps,delta_v_mps,"
    "udes_x_N,udes_y_N,udes_z_N,uact_x_N,uact_y_N,uact_z_N,intervened,latched,qp_ok,"
    "phi1,phi2,phi3,phi4,phi5,phi6,phi7,phi8,phi9,phi10,phi11,phi12,"
    "h1,h2,h3,h4,h5,h6,h7,h8,h9,h10,h11";

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_trace_csv(const SimTrace& trace, const std::string& path) {
    std::ofstream out = open_out(path);
    out << kTraceHeader << "\n";
    for (const auto& rec : trace.steps) {
        for (int i = 0; i < static_cast<int>(rec.deputies.size()); ++i) {
            const auto& d = rec.deputies[static_cast<size_t>(i)];
            out << fmt(rec.t) << ',' << i << ',' << fmt(rec.theta_s);
            for (int k = 0; k < 3; ++k) out << ',' << fmt(d.p[k]);
            for (int k = 0; k < 3; ++k) out << ',' << fmt(d.v[k]);
            out << ',' << fmt(d.delta_v);
            for (int k = 0; k < 3; ++k) out << ',' << fmt(d.u_des[k]);
            for (int k = 0; k < 3; ++k) out << ',' << fmt(d.u_act[k]);
            out << ',' << (d.intervened ? 1 : 0) << ',' << (d.latched ? 1 : 0) << ','
                << (d.qp_ok ? 1 : 0);
            for (double v : d.phi) out << ',' << fmt(v);
            for (double v : d.h) out << ',' << fmt(v);
            out << '\n';
        }
    }
}

SimTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw std::runtime_error(path + ": unexpected trace header");

    SimTrace trace;
    StepRecord rec;
    bool have_rec = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 42) throw std::runtime_error(path + ": malformed trace row");
        size_t c = 0;
        const double t = std::stod(f[c++]);
        const int dep = std::stoi(f[c++]);
        const double theta = std::stod(f[c++]);
        if (!have_rec || dep == 0) {
            if (have_rec) trace.steps.push_back(std::move(rec));
            rec = StepRecord{};
            rec.t = t;
            rec.theta_s = theta;
            have_rec = true;
        }
        DeputyRecord d;
        for (int k = 0; k < 3; ++k) d.p[k] = std::stod(f[c++]);
        for (int k = 0; k < 3; ++k) d.v[k] = std::stod(f[c++]);
        d.delta_v = std::stod(f[c++]);
        for (int k = 0; k < 3; ++k) d.u_des[k] = std::stod(f[c++]);
        for (int k = 0; k < 3; ++k) d.u_act[k] = std::stod(f[c++]);
        d.intervened = f[c++] == "1";
        d.latched = f[c++] == "1";
        d.qp_ok = f[c++] == "1";
        for (double& v : d.phi) v = std::stod(f[c++]);
        for (double& v : d.h) v = std::stod(f[c++]);
        rec.deputies.push_back(d);
    }
    if (have_rec) trace.steps.push_back(std::move(rec));
    if (trace.steps.empty()) throw std::runtime_error(path + ": empty trace");
    trace.n_deputies = static_cast<int>(trace.steps.front().deputies.size());
    trace.dt = trace.steps.size() > 1 ? trace.steps[1].t - trace.steps[0].t : 1.0;
    return trace;
}

void write_audit_json(const SafetyAudit& audit, const SimTrace& trace, const std::string& path) {
    json doc;
    doc["pass"] = audit.pass;
    doc["failure_cause"] = audit.failure_cause;
    doc["qp_infeasible_count"] = audit.qp_infeasible_count;
    doc["tolerance"] = audit.tolerance;
    if (audit.first_violation) {
        doc["first_violation"]["constraint"] = kind_name(audit.first_violation->first);
        doc["first_violation"]["t_s"] = audit.first_violation->second;
    } else {
        doc["first_violation"] = nullptr;
    }
    if (audit.first_infeasible) {
        doc["first_infeasible"]["constraint"] =
            audit.first_infeasible->first >= 1 ? kind_name(audit.first_infeasible->first) : "unknown";
        doc["first_infeasible"]["t_s"] = audit.first_infeasible->second;
    } else {
        doc["first_infeasible"] = nullptr;
    }
    json mins;
    for (int k = 1; k <= 12; ++k) {
        const double v = audit.phi_min[static_cast<size_t>(k - 1)];
        if (!std::isnan(v)) mins["phi" + std::to_string(k)] = v;
    }
    doc["phi_min"] = mins;

    doc["n_deputies"] = trace.n_deputies;
    doc["dt_s"] = trace.dt;
    if (!trace.steps.empty()) {
        doc["duration_s"] = trace.steps.back().t;
        json dv = json::array(), latched = json::array();
        for (const auto& d : trace.steps.back().deputies) {
            dv.push_back(d.delta_v);
            latched.push_back(d.latched);
        }
        doc["final_delta_v_mps"] = dv;
        doc["latched"] = latched;
    }
    open_out(path) << doc.dump(2) << "\n";
}

void write_mc_report_json(const McReport& report, const std::string& path) {
    json doc;
    doc["num_runs"] = report.config.num_runs;
    doc["num_deputies"] = report.config.num_deputies;
    doc["duration_s"] = report.config.duration_s;
    doc["dt_s"] = report.config.dt_s;
    doc["seed"] = report.config.seed;
    doc["position_shell_m"] = {report.config.shell_min_r, report.config.shell_max_r};
    doc["velocity_box_m_s"] = report.config.velocity_box;
    doc["ic_hash"] = report.ic_hash;
    doc["modes"] = json::array();
    for (const auto& mr : report.per_mode) {
        json jm;
        jm["label"] = mr.mode.label();
        jm["successes"] = mr.successes;
        jm["failures"] = mr.failures;
        jm["success_rate"] =
            static_cast<double>(mr.successes) / static_cast<double>(report.config.num_runs);
        json causes;
        for (const auto& [cause, count] : mr.causes) causes[cause] = count;
        jm["causes"] = causes;
        json failed = json::array();
        for (const auto& oc : mr.runs)
            if (!oc.success) {
                json jr;
                jr["run"] = oc.run;
                jr["cause"] = oc.cause;
                jr["t_first_s"] = oc.t_first;
                jr["min_phi"] = oc.min_phi;
                failed.push_back(jr);
            }
        jm["failed_runs"] = failed;
        doc["modes"].push_back(jm);
    }
    open_out(path) << doc.dump(2) << "\n";
}

void write_mc_runs_csv(const McReport& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "mode,run,success,cause,t_first_s,min_phi\n";
    for (const auto& mr : report.per_mode)
        for (const auto& oc : mr.runs)
            out << mr.mode.label() << ',' << oc.run << ',' << (oc.success ? 1 : 0) << ','
                << oc.cause << ',' << fmt(oc.t_first) << ',' << fmt(oc.min_phi) << '\n';
}

void write_plotdata(const SimTrace& trace, const ConstraintParams& cp, const std::string& kind,
                    const std::string& path, int stride) {
    if (stride < 1) stride = 1;
    std::ofstream out = open_out(path);
    const int n = trace.n_deputies;

    if (kind == "speed-vs-range") {
        out << "t_s,deputy,range_m,speed_mps,limit_mps\n";
        for (const auto& rec : trace.steps)
            for (int i = 0; i < n; ++i) {
                const auto& d = rec.deputies[static_cast<size_t>(i)];
                const double r = d.p.norm();
                out << fmt(rec.t) << ',' << i << ',' << fmt(r) << ',' << fmt(d.v.norm()) << ','
                    << fmt(cp.nu0 + cp.nu1 * r) << '\n';
            }
    } else if (kind == "pairwise-separation") {
        out << "t_s,pair,separation_m,limit_m\n";
        for (const auto& rec : trace.steps)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    out << fmt(rec.t) << ',' << i << '-' << j << ','
                        << fmt((rec.deputies[static_cast<size_t>(i)].p -
                                rec.deputies[static_cast<size_t>(j)].p)
                                   .norm())
                        << ',' << fmt(2.0 * cp.r_d) << '\n';
    } else if (kind == "koz-angles") {
        out << "t_s,kind,id,angle_deg,limit_deg\n";
        const double limit = rad2deg(0.5 * cp.alpha_fov);
        for (const auto& rec : trace.steps) {
            const Vec3 sun = sun_vector(rec.theta_s);
            for (int i = 0; i < n; ++i) {
                const auto& d = rec.deputies[static_cast<size_t>(i)];
                if (d.p.norm() > 0.0) {
                    const double ang = std::acos(std::clamp(boresight(d.p).dot(sun), -1.0, 1.0));
                    out << fmt(rec.t) << ",chief," << i << ',' << fmt(rad2deg(ang)) << ','
                        << fmt(limit) << '\n';
                }
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const Vec3 rel = rec.deputies[static_cast<size_t>(i)].p -
                                     rec.deputies[static_cast<size_t>(j)].p;
                    if (rel.norm() > 0.0) {
                        const double ang =
                            std::acos(std::clamp(rel.normalized().dot(sun), -1.0, 1.0));
                        out << fmt(rec.t) << ",pair," << i << '-' << j << ','
                            << fmt(rad2deg(ang)) << ',' << fmt(limit) << '\n';
                    }
                }
        }
    } else if (kind == "fft-fan") {
        out << "t0_s,deputy,tau_s,x_m,y_m,z_m\n";
        for (size_t s = 0; s < trace.steps.size(); s += static_cast<size_t>(stride)) {
            const auto& rec = trace.steps[s];
            for (int i = 0; i < n; ++i) {
                const auto& d = rec.deputies[static_cast<size_t>(i)];
                DeputyState ds;
                ds.p = d.p;
                ds.v = d.v;
                for (int k = 0; k < cp.fft_samples; ++k) {
                    const double tau =
                        cp.fft_horizon * static_cast<double>(k) / static_cast<double>(cp.fft_samples - 1);
                    const DeputyState fut = propagate_fft(ds, tau, cp.dyn);
                    out << fmt(rec.t) << ',' << i << ',' << fmt(tau) << ',' << fmt(fut.p.x()) << ','
                        << fmt(fut.p.y()) << ',' << fmt(fut.p.z()) << '\n';
                }
            }
        }
    } else if (kind == "control") {
        out << "t_s,deputy,axis,udes_N,uact_N,limit_N\n";
        const char axes[] = {'x', 'y', 'z'};
        for (const auto& rec : trace.steps)
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < 3; ++a)
                    out << fmt(rec.t) << ',' << i << ',' << axes[a] << ','
                        << fmt(rec.deputies[static_cast<size_t>(i)].u_des[a]) << ','
                        << fmt(rec.deputies[static_cast<size_t>(i)].u_act[a]) << ','
                        << fmt(cp.u_max) << '\n';
    } else if (kind == "deltav") {
        out << "t_s,deputy,delta_v_mps,delta_v_max_mps\n";
        for (const auto& rec : trace.steps)
            for (int i = 0; i < n; ++i)
                out << fmt(rec.t) << ',' << i << ','
                    << fmt(rec.deputies[static_cast<size_t>(i)].delta_v) << ','
                    << fmt(cp.delta_v_max) << '\n';
    } else {
        throw std::invalid_argument("unknown plotdata kind: " + kind);
    }
}

}  // namespace rta
