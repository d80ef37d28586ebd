#include "hypgraph/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace hypgraph {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

Json skipped() { return Json{{"skipped", true}}; }

Json vec(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json c0_json(const C0Check& c) {
    Json j;
    j["eps"] = c.eps;
    j["u_min"] = c.u_min;
    j["u_max"] = c.u_max;
    j["barrier"] = c.barrier;
    j["tolerance"] = c.tolerance;
    j["above_eps"] = c.above_eps;
    j["below_barrier"] = c.below_barrier;
    Json rows = Json::array();
    for (const InteriorLowerBound& s : c.interior)
        rows.push_back({{"node", s.node}, {"u", s.u}, {"bound", s.bound}, {"dist", s.dist},
                        {"pass", s.pass}});
    j["interior"] = rows;
    j["pass"] = c.pass;
    return j;
}

Json gradient_json(const GradientCheck& c) {
    Json j;
    j["omega_sup"] = c.omega_sup;
    j["inv_sigma"] = c.inv_sigma;
    j["limit"] = c.limit;
    j["omega_pass"] = c.omega_pass;
    j["ring_sup"] = c.ring_sup;
    j["ring_inf"] = c.ring_inf;
    j["c1"] = c.c1;
    j["ring_pass"] = c.ring_pass;
    j["c2"] = c.c2 ? Json(*c.c2) : skipped();
    j["nu_w_identity"] = c.nu_w_identity;
    j["identity_pass"] = c.identity_pass;
    j["nu_w_max"] = c.nu_w_max;
    j["geodesic_graph"] = c.geodesic_graph;
    j["argmin"] = {{"node", c.argmin_node},
                   {"depth", c.argmin_depth},
                   {"grad_norm", c.argmin_grad},
                   {"pass", c.argmin_pass}};
    j["pass"] = c.pass;
    return j;
}

Json second_order_json(const SecondOrderCheck& c) {
    Json j;
    Json rows = Json::array();
    for (const EpsilonEntry& e : c.entries)
        rows.push_back({{"eps", e.eps},
                        {"sinu_d2u_sup", e.sinu_d2u_sup},
                        {"sinu_d2u_ring_sup", e.sinu_d2u_ring_sup},
                        {"kappa_min", e.kappa_min},
                        {"kappa_max", e.kappa_max},
                        {"boundary_omega_min", e.boundary_omega_min},
                        {"boundary_omega_max", e.boundary_omega_max},
                        {"ring_omega_min", e.ring_omega_min},
                        {"ring_omega_max", e.ring_omega_max}});
    j["entries"] = rows;
    j["kappa_positive"] = c.kappa_positive;
    if (c.stability_skipped) {
        j["stability"] = skipped();
    } else {
        j["stability"] = {{"d2u_ratio", c.d2u_ratio},
                          {"kappa_ratio", c.kappa_ratio},
                          {"limit", 1.5},
                          {"pass", c.stability_pass}};
        j["boundary_omega"] = {{"target", c.omega_target},
                               {"boundary_deviation", c.boundary_omega_deviation},
                               {"ring_deviation", c.ring_omega_deviation},
                               {"limit", 0.1},
                               {"pass", c.boundary_omega_pass}};
    }
    j["pass"] = c.pass;
    return j;
}

Json identity_json(const IdentityCheck& c) {
    Json j;
    j["step"] = c.step;
    j["tolerance"] = c.tolerance;
    j["sign_tolerance"] = c.sign_tolerance;
    j["max_cotu"] = c.max_cotu;
    j["max_g"] = c.max_g;
    j["max_hessian"] = c.max_hessian;
    j["max_gradient"] = c.max_gradient;
    j["min_max_principle"] = c.min_max_principle;
    j["excluded"] = c.excluded;
    Json rows = Json::array();
    for (const IdentitySample& s : c.samples)
        rows.push_back({{"node", s.node},
                        {"y", vec(s.y)},
                        {"cotu", s.cotu_residual},
                        {"g", s.g_residual},
                        {"hessian", s.hessian_residual},
                        {"gradient", s.gradient_residual},
                        {"max_principle", s.max_principle},
                        {"max_principle_scale", s.max_principle_scale},
                        {"monotone", s.refinement_monotone},
                        {"excluded", s.excluded}});
    j["samples"] = rows;
    j["warnings"] = c.warnings;
    j["identities_pass"] = c.identities_pass;
    j["sign_pass"] = c.sign_pass;
    j["pass"] = c.pass;
    return j;
}

// Flattens a JSON object into "path = value" lines.
void flatten(const Json& j, const std::string& prefix, std::ostringstream& os) {
    if (j.is_object()) {
        if (j.empty()) os << prefix << " = {}\n";
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
    } else if (j.is_array()) {
        if (j.empty()) os << prefix << " = []\n";
        for (std::size_t i = 0; i < j.size(); ++i)
            flatten(j[i], prefix + "[" + std::to_string(i) + "]", os);
    } else if (j.is_number_float()) {
        os << prefix << " = " << format_double(j.get<double>()) << "\n";
    } else if (j.is_null()) {
        os << prefix << " = null\n";
    } else {
        os << prefix << " = " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
    }
}

std::string render(const Json& j, ReportFormat format) {
    if (format == ReportFormat::Structured) return j.dump(2) + "\n";
    std::ostringstream os;
    flatten(j, "", os);
    return os.str();
}

const char* stage_name(StageKind k) { return k == StageKind::Homotopy ? "homotopy" : "eps"; }

}  // namespace

Json metrics_to_json(const StateMetrics& m) {
    return {{"u_min", m.u_min},
            {"u_max", m.u_max},
            {"omega_sup", m.omega_sup},
            {"omega_zn_sup", m.omega_zn_sup},
            {"sinu_d2u_sup", m.sinu_d2u_sup},
            {"sinu_d2u_ring_sup", m.sinu_d2u_ring_sup},
            {"kappa_min", m.kappa_min},
            {"kappa_max", m.kappa_max},
            {"nu_w_max", m.nu_w_max},
            {"nu_w_identity", m.nu_w_identity},
            {"boundary_omega_min", m.boundary_omega_min},
            {"boundary_omega_max", m.boundary_omega_max},
            {"ring_omega_min", m.ring_omega_min},
            {"ring_omega_max", m.ring_omega_max},
            {"tan_u_max", m.tan_u_max},
            {"neg_nuw_over_cos_min", m.neg_nuw_over_cos_min},
            {"neg_nuw_over_cos_max", m.neg_nuw_over_cos_max}};
}

Json report_to_json(const DiagnosticsReport& r) {
    Json j;
    j["label"] = r.label;
    j["c0"] = r.c0 ? c0_json(*r.c0) : skipped();
    j["gradient"] = r.gradient ? gradient_json(*r.gradient) : skipped();
    j["second_order"] = r.second_order ? second_order_json(*r.second_order) : skipped();
    j["identities"] = r.identities ? identity_json(*r.identities) : skipped();
    if (r.kernels.empty()) {
        j["kernels"] = skipped();
    } else {
        Json rows = Json::array();
        for (const KernelEntry& k : r.kernels)
            rows.push_back({{"kernel", k.kernel.describe()},
                            {"residual", k.residual.value},
                            {"scale", k.residual.scale},
                            {"nodes", k.residual.nodes},
                            {"flagged", k.residual.flagged}});
        j["kernels"] = rows;
    }
    if (r.hypotheses)
        j["hypotheses"] = {{"tan_u_max", r.hypotheses->tan_u_max},
                           {"neg_nuw_over_cos_min", r.hypotheses->neg_nuw_over_cos_min},
                           {"neg_nuw_over_cos_max", r.hypotheses->neg_nuw_over_cos_max}};
    else
        j["hypotheses"] = skipped();
    j["curvature"] = r.has_curvature ? Json{{"kappa_min", r.kappa_min}, {"kappa_max", r.kappa_max}}
                                     : skipped();
    j["all_pass"] = r.all_pass();
    return j;
}

Json trace_to_json(const ContinuationTrace& t) {
    Json j;
    j["completed"] = t.completed;
    j["failure"] = t.failure;
    Json rows = Json::array();
    for (const TraceRecord& r : t.records) {
        Json row;
        row["stage"] = stage_name(r.stage);
        row["parameter"] = r.parameter;
        row["sigma_target"] = r.sigma_target;
        row["converged"] = r.converged;
        row["iterations"] = r.iterations;
        row["residual_sup"] = r.residual_sup;
        row["min_lambda"] = r.min_lambda;
        row["rejected_steps"] = r.rejected_steps;
        row["metrics"] = r.metrics ? metrics_to_json(*r.metrics) : skipped();
        rows.push_back(row);
    }
    j["records"] = rows;
    return j;
}

std::string emit_report(const DiagnosticsReport& report, ReportFormat format) {
    return render(report_to_json(report), format);
}

std::string emit_trace(const ContinuationTrace& trace, ReportFormat format) {
    return render(trace_to_json(trace), format);
}

}  // namespace hypgraph
