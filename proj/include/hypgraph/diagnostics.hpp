#ifndef HYPGRAPH_DIAGNOSTICS_HPP
#define HYPGRAPH_DIAGNOSTICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypgraph/solver.hpp"

namespace hypgraph {

struct InteriorLowerBound {
    long node = 0;
    double u = 0.0;
    double bound = 0.0;
    double dist = 0.0;  // distance to the boundary
    bool pass = false;
};

// u stays between eps and the barrier cap; sampled interior lower bounds.
struct C0Check {
    double eps = 0.0;
    double u_min = 0.0, u_max = 0.0;
    double barrier = 0.0;    // u-bar from the enclosing ball
    double tolerance = 0.0;  // h
    bool above_eps = false;  // eps < u at every interior node
    bool below_barrier = false;
    std::vector<InteriorLowerBound> interior;
    bool pass = false;
};

struct GradientCheck {
    double omega_sup = 0.0;
    double inv_sigma = 0.0;
    double limit = 0.0;  // (1/sigma)(1 + 5h)
    bool omega_pass = false;

    // sigma cot u + nu.W / sin u over the boundary ring
    double ring_sup = 0.0;
    double ring_inf = 0.0;
    double c1 = 0.0;
    bool ring_pass = false;
    std::optional<double> c2;  // interior-sphere bound, reported only

    double nu_w_identity = 0.0;  // max |nu.W + 1/omega| over all nodes
    bool identity_pass = false;
    double nu_w_max = 0.0;  // must stay negative
    bool geodesic_graph = false;

    // Location of the interior minimum of -nu.W / sin u.
    long argmin_node = -1;
    int argmin_depth = 0;
    double argmin_grad = 0.0;
    bool argmin_pass = false;

    bool pass = false;
};

struct EpsilonEntry {
    double eps = 0.0;
    double sinu_d2u_sup = 0.0;
    double sinu_d2u_ring_sup = 0.0;
    double kappa_min = 0.0, kappa_max = 0.0;
    double boundary_omega_min = 0.0, boundary_omega_max = 0.0;
    double ring_omega_min = 0.0, ring_omega_max = 0.0;
};

struct SecondOrderCheck {
    std::vector<EpsilonEntry> entries;  // in schedule order
    bool kappa_positive = false;
    bool stability_skipped = true;
    double d2u_ratio = 0.0;    // finest / coarsest
    double kappa_ratio = 0.0;
    bool stability_pass = false;
    // Boundary omega at the finest eps against 1/sigma (10% band).
    double omega_target = 0.0;
    double boundary_omega_deviation = 0.0;
    double ring_omega_deviation = 0.0;
    bool boundary_omega_pass = false;
    bool pass = false;
};

struct IdentitySample {
    long node = 0;
    Eigen::VectorXd y;
    double cotu_residual = 0.0;   // F^ij cot u_ij against g sigma + cot u sum f_i
    double g_residual = 0.0;      // F^ij g_ij against -sigma cot u - g sum f_i k_i^2
    double hessian_residual = 0.0;  // cot u_ij against g h_ij + cot u delta_ij
    double gradient_residual = 0.0; // g_i against -k_i (cot u)_i
    double max_principle = 0.0;   // F^ij (sigma cot u + g)_ij
    double max_principle_scale = 0.0;
    bool refinement_monotone = false;
    bool excluded = false;
};

struct IdentityCheck {
    double step = 0.0;
    std::vector<IdentitySample> samples;
    long excluded = 0;
    double max_cotu = 0.0, max_g = 0.0, max_hessian = 0.0, max_gradient = 0.0;
    double min_max_principle = 0.0;  // min of contraction / scale
    bool identities_pass = false;    // all maxima < tolerance
    bool sign_pass = false;
    double tolerance = 5e-2;
    double sign_tolerance = 1e-3;
    std::vector<std::string> warnings;
    bool pass = false;
};

struct KernelEntry {
    KernelSpec kernel;
    KernelResidual residual;
};

// Quantities entering the hypotheses of the curvature bound near the
// boundary; measured, not compared.
struct HypothesisCheck {
    double tan_u_max = 0.0;
    double neg_nuw_over_cos_min = 0.0, neg_nuw_over_cos_max = 0.0;
};

struct DiagnosticsReport {
    std::string label;
    std::optional<C0Check> c0;
    std::optional<GradientCheck> gradient;
    std::optional<SecondOrderCheck> second_order;
    std::optional<IdentityCheck> identities;
    std::vector<KernelEntry> kernels;
    std::optional<HypothesisCheck> hypotheses;
    double kappa_min = 0.0, kappa_max = 0.0;
    bool has_curvature = false;

    // Every present section passes.
    bool all_pass() const;
};

struct DiagnosticsOptions {
    int lower_bound_samples = 16;
    int identity_samples = 20;
    double identity_step = 1e-3;
    std::uint64_t seed = 7;
    double argmin_grad_factor = 10.0;  // |grad u| <= factor * h at an interior argmin
    std::vector<KernelSpec> kernels;   // empty: translations and one rotation
};

C0Check verify_c0(const SolveResult& result, const DomainSpec& domain, const SolveConfig& config,
                  const DiagnosticsOptions& options = {});
GradientCheck verify_gradient(const SolveResult& result, const SolveConfig& config,
                              const DiagnosticsOptions& options = {});
SecondOrderCheck verify_second_order(const std::vector<EpsilonEntry>& entries, double sigma);
SecondOrderCheck verify_second_order(const EpsilonOutcome& outcome, double sigma);
IdentityCheck verify_identities(const SolveResult& result, const SolveConfig& config,
                                const DiagnosticsOptions& options = {});
std::vector<KernelEntry> verify_kernels(const SolveResult& result, const SolveConfig& config,
                                        const DiagnosticsOptions& options = {});
HypothesisCheck measure_hypotheses(const SolveResult& result, const SolveConfig& config);

// Every single-state section for a converged result.
DiagnosticsReport diagnose(const SolveResult& result, const SolveConfig& config,
                           const DiagnosticsOptions& options = {});

EpsilonEntry epsilon_entry(double eps, const StateMetrics& m);

// Degree-4 least-squares fit of the field around y0 (nodes within a few
// cells), returned as a smooth local graph.
LocalGraph local_interpolant(const GraphField& field, const Eigen::VectorXd& y0);

std::vector<KernelSpec> default_kernels(const Grid& grid);

enum class ReportFormat { Structured, Table };
std::string emit_report(const DiagnosticsReport& report, ReportFormat format);

}  // namespace hypgraph

#endif
