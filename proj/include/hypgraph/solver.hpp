#ifndef HYPGRAPH_SOLVER_HPP
#define HYPGRAPH_SOLVER_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypgraph/grid.hpp"
#include "hypgraph/symfunc.hpp"

namespace hypgraph {

struct DampingOptions {
    double factor = 0.5;    // backtracking factor in (0,1)
    int max_halvings = 30;  // smallest step is factor^max_halvings
};

struct HomotopyOptions {
    double initial_step = 0.1;
    double min_step = 1e-4;
    double max_step = 0.25;
    int fast_iterations = 3;  // grow the step after solves this quick
};

struct SolveConfig {
    SymmetricFunctionSpec spec;
    double sigma = 0.5;
    double eps = 0.1;
    HomotopyOptions homotopy;
    double newton_tol = 1e-9;
    int max_newton_iters = 30;
    DampingOptions damping;
    double admissibility_margin = 0.1;

    // Target problem check: 0 < sigma < cos(eps) < 1.
    void validate() const;
};

// Per-node coefficients of the linearized operator
//   L v = G^{st} v_st + G^s v_s + G_u v
// (zero on boundary nodes).
struct LinearizedCoefficients {
    std::vector<Eigen::MatrixXd> gst;
    Eigen::MatrixXd gs;  // dim x size
    Eigen::VectorXd gu;
};

struct AdmissibilitySummary {
    double min_lambda = 0.0;  // min over interior nodes of lambda_min(A[u])
    double min_margin = 0.0;  // min over nodes of lambda_min / lambda_min(initial iterate)
};

struct SolveResult {
    GraphField field;
    double sigma = 0.0;  // target the field was solved for
    double residual_sup = 0.0;
    int iterations = 0;
    AdmissibilitySummary admissibility;
    bool converged = false;
    std::vector<double> history;  // residual sup-norm per iterate
    std::string failure;
};

// Pointwise quantities of a state used by the monitors and the reports.
struct StateMetrics {
    double u_min = 0.0, u_max = 0.0;  // interior nodes
    double omega_sup = 0.0;
    double omega_zn_sup = 0.0;
    double sinu_d2u_sup = 0.0;
    double sinu_d2u_ring_sup = 0.0;
    double kappa_min = 0.0, kappa_max = 0.0;
    double nu_w_max = 0.0;        // max of nu.W (negative for geodesic graphs)
    double nu_w_identity = 0.0;   // max |nu.W + 1/omega|
    double boundary_omega_min = 0.0, boundary_omega_max = 0.0;  // boundary nodes
    double ring_omega_min = 0.0, ring_omega_max = 0.0;          // boundary ring
    double tan_u_max = 0.0;
    double neg_nuw_over_cos_min = 0.0, neg_nuw_over_cos_max = 0.0;
};

enum class StageKind { Homotopy, Epsilon };

struct TraceRecord {
    StageKind stage = StageKind::Homotopy;
    double parameter = 0.0;  // t or eps
    double sigma_target = 0.0;
    bool converged = false;
    int iterations = 0;
    double residual_sup = 0.0;
    double min_lambda = 0.0;
    int rejected_steps = 0;
    std::optional<StateMetrics> metrics;
};

struct ContinuationTrace {
    std::vector<TraceRecord> records;
    bool completed = false;
    std::string failure;
};

struct HomotopyOutcome {
    SolveResult result;
    ContinuationTrace trace;
};

struct EpsilonStage {
    double eps = 0.0;
    std::shared_ptr<const Grid> grid;
    HomotopyOutcome outcome;
    StateMetrics metrics;
};

struct EpsilonOutcome {
    ContinuationTrace trace;
    std::vector<EpsilonStage> stages;
};

using GridBuilder = std::function<std::shared_ptr<const Grid>(double eps)>;

// F(A[u]) at every node (boundary nodes included).
Eigen::VectorXd curvature_values(const GraphField& field, const SymmetricFunctionSpec& spec);
// F(A[u]) - sigma at interior nodes, 0 on the boundary; no boundary check.
Eigen::VectorXd curvature_residual(const GraphField& field, const SymmetricFunctionSpec& spec,
                                   double sigma);
// Same, after checking that the boundary carries eps.
Eigen::VectorXd residual(const GraphField& field, const SolveConfig& config);

LinearizedCoefficients linearize(const GraphField& field, const SolveConfig& config);
// Discrete linearized operator (interior rows; boundary rows empty).
SparseOp linearized_operator(const Grid& grid, const LinearizedCoefficients& coeffs);
// Same operator applied to v, with derivatives in difference form.
Eigen::VectorXd apply_linearized(const Grid& grid, const LinearizedCoefficients& coeffs,
                                 const Eigen::VectorXd& v);

SolveResult newton_solve(const GraphField& initial, const SolveConfig& config);
HomotopyOutcome homotopy_solve(const SolveConfig& config, std::shared_ptr<const Grid> grid);
EpsilonOutcome epsilon_continuation(const SolveConfig& config, const GridBuilder& grid_builder,
                                    const std::vector<double>& eps_schedule);

StateMetrics measure_state(const GraphField& field, const SymmetricFunctionSpec& spec);

// Functions v with L v = 0 on solutions, generated by isometries that
// preserve infinity: horizontal translations, rotations about vertical
// axes, and dilations about the origin.
enum class KernelKind { Translation, Rotation, Dilation };

struct KernelSpec {
    KernelKind kind = KernelKind::Translation;
    int k = 0;
    int l = 0;
    Eigen::VectorXd p;  // rotation axis foot point (horizontal), defaults to 0

    static KernelSpec translation(int k) { return {KernelKind::Translation, k, k, {}}; }
    static KernelSpec rotation(int k, int l, Eigen::VectorXd p) {
        return {KernelKind::Rotation, k, l, std::move(p)};
    }
    static KernelSpec dilation() { return {KernelKind::Dilation, 0, 0, {}}; }
    std::string describe() const;
};

struct KernelResidual {
    double value = 0.0;   // sup |L v| over interior nodes at least 3 cells from the boundary
    double scale = 0.0;   // sup |v|
    bool flagged = false; // field is not a solution to 10 newton_tol
    long nodes = 0;
};

Eigen::VectorXd kernel_field(const GraphField& field, const FieldDerivatives& der,
                             const KernelSpec& kernel);
KernelResidual kernel_residual(const GraphField& field, const SolveConfig& config,
                               const KernelSpec& kernel);

}  // namespace hypgraph

#endif
