#include "hypgraph/diagnostics.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace hypgraph {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Up to count distinct entries of pool, chosen by a seeded partial shuffle.
std::vector<long> sample_nodes(std::vector<long> pool, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t m = std::min<std::size_t>(pool.size(), std::max(count, 0));
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng() % (pool.size() - k));
        std::swap(pool[k], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<long> nodes_with_depth(const Grid& g, int min_depth) {
    std::vector<long> out;
    for (long i = 0; i < g.size(); ++i)
        if (!g.is_boundary(i) && g.depth[i] >= min_depth) out.push_back(i);
    return out;
}

double cot(double u) { return std::cos(u) / std::sin(u); }

// Multi-indices of total degree <= deg in n variables.
std::vector<std::vector<int>> monomials(int n, int deg) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(n, 0);
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == n) {
            out.push_back(a);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            a[k] = e;
            rec(k + 1, left - e);
        }
        a[k] = 0;
    };
    rec(0, deg);
    return out;
}

double ipow(double x, int e) {
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= x;
    return r;
}

}  // namespace

bool DiagnosticsReport::all_pass() const {
    if (c0 && !c0->pass) return false;
    if (gradient && !gradient->pass) return false;
    if (second_order && !second_order->pass) return false;
    if (identities && !identities->pass) return false;
    return true;
}

EpsilonEntry epsilon_entry(double eps, const StateMetrics& m) {
    EpsilonEntry e;
    e.eps = eps;
    e.sinu_d2u_sup = m.sinu_d2u_sup;
    e.sinu_d2u_ring_sup = m.sinu_d2u_ring_sup;
    e.kappa_min = m.kappa_min;
    e.kappa_max = m.kappa_max;
    e.boundary_omega_min = m.boundary_omega_min;
    e.boundary_omega_max = m.boundary_omega_max;
    e.ring_omega_min = m.ring_omega_min;
    e.ring_omega_max = m.ring_omega_max;
    return e;
}

C0Check verify_c0(const SolveResult& result, const DomainSpec& domain, const SolveConfig& config,
                  const DiagnosticsOptions& options) {
    const Grid& g = *result.field.grid;
    const Eigen::VectorXd& u = result.field.values;
    C0Check c;
    c.eps = config.eps;
    c.tolerance = g.h;
    c.u_min = kInf;
    c.u_max = -kInf;
    for (long i = 0; i < g.size(); ++i) {
        if (g.is_boundary(i)) continue;
        c.u_min = std::min(c.u_min, u(i));
        c.u_max = std::max(c.u_max, u(i));
    }
    const DomainSpec::Ball ball = domain.enclosing_ball();
    const int n = domain.dim();
    c.barrier = barrier_upper_bound(ball.center(n - 1), 2.0 * ball.radius, config.eps, config.sigma);
    c.above_eps = c.u_min > config.eps;
    c.below_barrier = c.u_max <= c.barrier + c.tolerance;

    bool interior_ok = true;
    for (long i : sample_nodes(nodes_with_depth(g, 1), options.lower_bound_samples, options.seed)) {
        InteriorLowerBound s;
        s.node = i;
        s.u = u(i);
        const Eigen::VectorXd y = g.nodes.col(i);
        s.dist = domain.distance_to_boundary(y);
        s.bound = barrier_lower_bound(y(n - 1), s.dist, config.eps, config.sigma);
        s.pass = s.u >= s.bound - c.tolerance;
        interior_ok = interior_ok && s.pass;
        c.interior.push_back(s);
    }
    c.pass = c.above_eps && c.below_barrier && interior_ok;
    return c;
}

GradientCheck verify_gradient(const SolveResult& result, const SolveConfig& config,
                              const DiagnosticsOptions& options) {
    const GraphField& field = result.field;
    const Grid& g = *field.grid;
    const DomainSpec& dom = g.domain;
    const int n = g.dim();
    const double sigma = config.sigma;
    const FieldDerivatives der = fd_derivatives(field);

    GradientCheck c;
    c.inv_sigma = 1.0 / sigma;
    c.limit = c.inv_sigma * (1.0 + 5.0 * g.h);
    c.ring_sup = -kInf;
    c.ring_inf = kInf;
    c.nu_w_max = -kInf;
    double zn_max = 0.0;
    double c2 = kInf;
    const double r1 = dom.interior_radius();
    double argmin_value = kInf;
    for (long i = 0; i < g.size(); ++i) {
        const GraphSample<double> s = node_sample(field, der, i);
        const ShapeSample<double> sh = shape_at(s);
        const double nuw = sh.normal.dot(angle_vector_W(sh.position));
        c.omega_sup = std::max(c.omega_sup, sh.omega);
        c.nu_w_identity = std::max(c.nu_w_identity, std::abs(nuw + 1.0 / sh.omega));
        c.nu_w_max = std::max(c.nu_w_max, nuw);
        if (g.depth[i] <= 2) {
            const double q = sigma * cot(s.u) + nuw / std::sin(s.u);
            c.ring_sup = std::max(c.ring_sup, q);
            c.ring_inf = std::min(c.ring_inf, q);
        }
        if (g.is_boundary(i)) {
            zn_max = std::max(zn_max, s.y(n - 1) * std::cos(config.eps));
            const Eigen::VectorXd q = s.y + r1 * g.normals.col(i);
            const double height = q(n - 1) * std::sin(config.eps);
            try {
                c2 = std::min(c2, boundary_gradient_lower(height, r1, config.eps, sigma));
            } catch (const std::exception&) {
            }
        } else {
            const double m = -nuw / std::sin(s.u);
            if (m < argmin_value) {
                argmin_value = m;
                c.argmin_node = i;
            }
        }
    }
    c.omega_pass = c.omega_sup <= c.limit;
    try {
        c.c1 = boundary_gradient_upper(zn_max, dom.exterior_radius(), config.eps, sigma);
        c.ring_pass = c.ring_sup <= c.c1;
    } catch (const std::exception&) {
        c.c1 = kInf;
        c.ring_pass = false;
    }
    if (std::isfinite(c2)) c.c2 = c2;
    c.identity_pass = c.nu_w_identity < 1e-12;
    c.geodesic_graph = c.nu_w_max < 0.0;
    if (c.argmin_node >= 0) {
        c.argmin_depth = g.depth[c.argmin_node];
        c.argmin_grad = der.gradient(c.argmin_node).norm();
        c.argmin_pass = c.argmin_depth <= 2 || c.argmin_grad <= options.argmin_grad_factor * g.h;
    }
    c.pass = c.omega_pass && c.ring_pass && c.identity_pass && c.geodesic_graph && c.argmin_pass;
    return c;
}

SecondOrderCheck verify_second_order(const std::vector<EpsilonEntry>& entries, double sigma) {
    SecondOrderCheck c;
    c.entries = entries;
    c.omega_target = 1.0 / sigma;
    if (entries.empty()) {
        c.kappa_positive = false;
        return c;
    }
    c.kappa_positive = std::all_of(entries.begin(), entries.end(),
                                   [](const EpsilonEntry& e) { return e.kappa_min > 0.0; });
    const EpsilonEntry& coarse = entries.front();
    const EpsilonEntry& fine = entries.back();
    auto dev = [&](double lo, double hi) {
        return std::max(std::abs(lo - c.omega_target), std::abs(hi - c.omega_target)) /
               c.omega_target;
    };
    c.boundary_omega_deviation = dev(fine.boundary_omega_min, fine.boundary_omega_max);
    c.ring_omega_deviation = dev(fine.ring_omega_min, fine.ring_omega_max);
    if (entries.size() < 2) {
        c.stability_skipped = true;
        c.pass = c.kappa_positive;
        return c;
    }
    c.stability_skipped = false;
    c.d2u_ratio = fine.sinu_d2u_sup / coarse.sinu_d2u_sup;
    c.kappa_ratio = fine.kappa_max / coarse.kappa_max;
    c.stability_pass = c.d2u_ratio <= 1.5 && c.kappa_ratio <= 1.5;
    c.boundary_omega_pass = c.ring_omega_deviation <= 0.1;
    c.pass = c.kappa_positive && c.stability_pass && c.boundary_omega_pass;
    return c;
}

SecondOrderCheck verify_second_order(const EpsilonOutcome& outcome, double sigma) {
    std::vector<EpsilonEntry> entries;
    for (const EpsilonStage& s : outcome.stages)
        if (s.outcome.trace.completed) entries.push_back(epsilon_entry(s.eps, s.metrics));
    return verify_second_order(entries, sigma);
}

LocalGraph local_interpolant(const GraphField& field, const Eigen::VectorXd& y0) {
    const Grid& g = *field.grid;
    const int n = g.dim();
    const auto terms = monomials(n, 4);
    const std::size_t need = 2 * terms.size();
    double radius = 2.5 * g.h;
    std::vector<long> near;
    for (int grow = 0; grow < 8; ++grow, radius *= 1.25) {
        near.clear();
        for (long i = 0; i < g.size(); ++i)
            if ((g.nodes.col(i) - y0).norm() <= radius) near.push_back(i);
        if (near.size() >= need) break;
    }
    if (near.size() < terms.size()) throw ContractError("local_interpolant: too few nodes");

    const double s = radius;
    Eigen::MatrixXd V(near.size(), terms.size());
    Eigen::VectorXd b(near.size());
    for (std::size_t r = 0; r < near.size(); ++r) {
        const Eigen::VectorXd t = (g.nodes.col(near[r]) - y0) / s;
        for (std::size_t c = 0; c < terms.size(); ++c) {
            double m = 1.0;
            for (int k = 0; k < n; ++k) m *= ipow(t(k), terms[c][k]);
            V(r, c) = m;
        }
        b(r) = field.values(near[r]);
    }
    const Eigen::VectorXd coef = V.colPivHouseholderQr().solve(b);

    return [terms, coef, y0, s, n](const Eigen::VectorXd& y) {
        const Eigen::VectorXd t = (y - y0) / s;
        GraphSample<double> out;
        out.y = y;
        out.u = 0.0;
        out.du = Eigen::VectorXd::Zero(n);
        out.d2u = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t c = 0; c < terms.size(); ++c) {
            const std::vector<int>& a = terms[c];
            auto term = [&](int da, int db) {
                // derivative of prod t_k^{a_k} w.r.t. t_da and then t_db (-1 for none)
                double m = coef(c);
                for (int k = 0; k < n; ++k) {
                    int e = a[k];
                    double f = 1.0;
                    for (int d : {da, db})
                        if (d == k) {
                            f *= e;
                            --e;
                        }
                    if (f == 0.0) return 0.0;
                    m *= f * ipow(t(k), e);
                }
                return m;
            };
            out.u += term(-1, -1);
            for (int i = 0; i < n; ++i) {
                out.du(i) += term(i, -1) / s;
                for (int j = 0; j < n; ++j) out.d2u(i, j) += term(i, j) / (s * s);
            }
        }
        return out;
    };
}

namespace {

struct IdentityValues {
    double cotu = 0.0, g = 0.0, hessian = 0.0, gradient = 0.0;
    double max_principle = 0.0, max_principle_scale = 0.0;
    double worst() const { return std::max({cotu, g, hessian, gradient}); }
};

IdentityValues identity_values(const LocalGraph& graph, const Eigen::VectorXd& y0,
                               const SymmetricFunctionSpec& spec, double sigma, double step) {
    const GraphSample<double> s0 = graph(y0);
    const ShapeSample<double> sh = shape_at(s0);
    const SpectralEval<double> ev = eval_F(spec, sh.a_matrix);
    const int n = s0.dim();
    const Eigen::MatrixXd& F = ev.fij_matrix;
    const double ct = cot(s0.u);
    const double g = sh.nu_n() - sh.nu_last() * ct;
    const double sum_f = ev.gradient.sum();
    const double sum_fk2 = (ev.gradient.array() * ev.eigenvalues.array().square()).sum();

    auto cot_fn = [](const GraphSample<double>& s) { return cot(s.u); };
    auto g_fn = [](const GraphSample<double>& s) {
        const ShapeSample<double> q = shape_at(s);
        return q.nu_n() - q.nu_last() * cot(s.u);
    };
    const CovariantDerivatives dc = covariant_derivatives(graph, cot_fn, y0, step);
    const CovariantDerivatives dg = covariant_derivatives(graph, g_fn, y0, step);

    IdentityValues v;
    const double lhs1 = (F * dc.hessian).trace();
    const double a1 = g * ev.value, b1 = ct * sum_f;
    v.cotu = std::abs(lhs1 - a1 - b1) / (std::abs(lhs1) + std::abs(a1) + std::abs(b1));

    const double lhs2 = (F * dg.hessian).trace();
    const double a2 = -sigma * ct, b2 = -g * sum_fk2;
    v.g = std::abs(lhs2 - a2 - b2) / (std::abs(lhs2) + std::abs(a2) + std::abs(b2));

    const Eigen::MatrixXd rhs = g * sh.a_matrix + ct * Eigen::MatrixXd::Identity(n, n);
    v.hessian = (dc.hessian - rhs).cwiseAbs().maxCoeff() /
                (dc.hessian.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff());

    const Eigen::VectorXd gp = ev.eigenvectors.transpose() * dg.gradient;
    const Eigen::VectorXd cp = ev.eigenvectors.transpose() * dc.gradient;
    const Eigen::VectorXd kc = ev.eigenvalues.cwiseProduct(cp);
    const double gscale = gp.cwiseAbs().maxCoeff() + kc.cwiseAbs().maxCoeff();
    v.gradient = gscale > 0.0 ? (gp + kc).cwiseAbs().maxCoeff() / gscale : 0.0;

    v.max_principle = sigma * lhs1 + lhs2;
    v.max_principle_scale = sigma * std::abs(lhs1) + std::abs(lhs2);
    return v;
}

}  // namespace

IdentityCheck verify_identities(const SolveResult& result, const SolveConfig& config,
                                const DiagnosticsOptions& options) {
    const GraphField& field = result.field;
    const Grid& g = *field.grid;
    IdentityCheck c;
    c.step = options.identity_step;
    c.min_max_principle = kInf;
    long used = 0;
    for (long i : sample_nodes(nodes_with_depth(g, 4), options.identity_samples, options.seed)) {
        IdentitySample s;
        s.node = i;
        s.y = g.nodes.col(i);
        const LocalGraph graph = local_interpolant(field, s.y);
        const IdentityValues coarse =
            identity_values(graph, s.y, config.spec, config.sigma, c.step);
        const IdentityValues fine =
            identity_values(graph, s.y, config.spec, config.sigma, 0.5 * c.step);
        s.cotu_residual = coarse.cotu;
        s.g_residual = coarse.g;
        s.hessian_residual = coarse.hessian;
        s.gradient_residual = coarse.gradient;
        s.max_principle = coarse.max_principle;
        s.max_principle_scale = coarse.max_principle_scale;
        // Halving the step must not make the worst residual grow beyond
        // roundoff-level jitter.
        s.refinement_monotone = fine.worst() <= 1.05 * coarse.worst() + 1e-10;
        s.excluded = !s.refinement_monotone;
        if (s.excluded) {
            ++c.excluded;
            std::ostringstream os;
            os << "node " << i << ": residual grows under step refinement (" << coarse.worst()
               << " -> " << fine.worst() << "), sample excluded";
            c.warnings.push_back(os.str());
        } else {
            ++used;
            c.max_cotu = std::max(c.max_cotu, s.cotu_residual);
            c.max_g = std::max(c.max_g, s.g_residual);
            c.max_hessian = std::max(c.max_hessian, s.hessian_residual);
            c.max_gradient = std::max(c.max_gradient, s.gradient_residual);
            const double ratio =
                s.max_principle_scale > 0.0 ? s.max_principle / s.max_principle_scale : 0.0;
            c.min_max_principle = std::min(c.min_max_principle, ratio);
        }
        c.samples.push_back(std::move(s));
    }
    if (used == 0) {
        c.min_max_principle = 0.0;
        c.warnings.push_back("no usable identity samples");
    }
    c.identities_pass = used > 0 && c.max_cotu < c.tolerance && c.max_g < c.tolerance &&
                        c.max_hessian < c.tolerance && c.max_gradient < c.tolerance;
    c.sign_pass = used > 0 && c.min_max_principle >= -c.sign_tolerance;
    c.pass = c.identities_pass && c.sign_pass;
    return c;
}

std::vector<KernelSpec> default_kernels(const Grid& grid) {
    const int n = grid.dim();
    std::vector<KernelSpec> out;
    for (int k = 0; k < n; ++k) out.push_back(KernelSpec::translation(k));
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) out.push_back(KernelSpec::rotation(k, l, p));
    out.push_back(KernelSpec::dilation());
    return out;
}

std::vector<KernelEntry> verify_kernels(const SolveResult& result, const SolveConfig& config,
                                        const DiagnosticsOptions& options) {
    const std::vector<KernelSpec> kernels =
        options.kernels.empty() ? default_kernels(*result.field.grid) : options.kernels;
    std::vector<KernelEntry> out;
    for (const KernelSpec& k : kernels) out.push_back({k, kernel_residual(result.field, config, k)});
    return out;
}

HypothesisCheck measure_hypotheses(const SolveResult& result, const SolveConfig& config) {
    const StateMetrics m = measure_state(result.field, config.spec);
    return {m.tan_u_max, m.neg_nuw_over_cos_min, m.neg_nuw_over_cos_max};
}

DiagnosticsReport diagnose(const SolveResult& result, const SolveConfig& config,
                           const DiagnosticsOptions& options) {
    DiagnosticsReport r;
    const Grid& g = *result.field.grid;
    r.label = g.domain.describe();
    r.c0 = verify_c0(result, g.domain, config, options);
    r.gradient = verify_gradient(result, config, options);
    const StateMetrics m = measure_state(result.field, config.spec);
    r.second_order = verify_second_order({epsilon_entry(config.eps, m)}, config.sigma);
    r.identities = verify_identities(result, config, options);
    r.kernels = verify_kernels(result, config, options);
    r.hypotheses = HypothesisCheck{m.tan_u_max, m.neg_nuw_over_cos_min, m.neg_nuw_over_cos_max};
    r.kappa_min = m.kappa_min;
    r.kappa_max = m.kappa_max;
    r.has_curvature = true;
    return r;
}

}  // namespace hypgraph
