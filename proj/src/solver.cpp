#include "hypgraph/solver.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <sstream>

namespace hypgraph {

void SolveConfig::validate() const {
    spec.validate();
    if (!(eps > 0.0 && eps < M_PI / 2)) throw DomainError("eps must lie in (0, pi/2)");
    if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("sigma must lie in (0,1)");
    if (!(sigma < std::cos(eps)))
        throw InfeasibleError("sigma must be smaller than cos(eps) = " + std::to_string(std::cos(eps)));
    if (!(newton_tol > 0.0)) throw DomainError("newton_tol must be positive");
    if (max_newton_iters < 1) throw DomainError("max_newton_iters must be >= 1");
    if (!(damping.factor > 0.0 && damping.factor < 1.0))
        throw DomainError("damping factor must lie in (0,1)");
    if (damping.max_halvings < 0) throw DomainError("max_halvings must be >= 0");
    if (!(admissibility_margin > 0.0 && admissibility_margin < 1.0))
        throw DomainError("admissibility_margin must lie in (0,1)");
    if (!(homotopy.min_step > 0.0 && homotopy.min_step <= homotopy.initial_step &&
          homotopy.initial_step <= homotopy.max_step && homotopy.max_step <= 1.0))
        throw DomainError("homotopy steps must satisfy 0 < min <= initial <= max <= 1");
}

namespace {

struct StateEval {
    Eigen::VectorXd values;      // F(A[u]) (interior, NaN where inadmissible)
    Eigen::VectorXd lambda_min;  // per node
    std::vector<long> bad;       // interior nodes outside the cone
};

StateEval evaluate_state(const GraphField& field, const SymmetricFunctionSpec& spec) {
    const Grid& g = *field.grid;
    const FieldDerivatives der = fd_derivatives(field);
    StateEval ev;
    ev.values = Eigen::VectorXd::Zero(g.size());
    ev.lambda_min = Eigen::VectorXd::Zero(g.size());
    for (long i = 0; i < g.size(); ++i) {
        const GraphSample<double> s = node_sample(field, der, i);
        if (!(s.u > 0.0 && s.u < M_PI / 2)) {
            ev.lambda_min(i) = -std::numeric_limits<double>::infinity();
            if (!g.is_boundary(i)) ev.bad.push_back(i);
            ev.values(i) = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const ShapeSample<double> sh = shape_at(s);
        ev.lambda_min(i) = sh.kappa(0);
        if (g.is_boundary(i)) continue;
        if (!(sh.kappa(0) > 0.0)) {
            ev.bad.push_back(i);
            ev.values(i) = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        ev.values(i) = eval_f(spec, sh.kappa);
    }
    return ev;
}

[[noreturn]] void throw_inadmissible(const StateEval& ev) {
    double lo = std::numeric_limits<double>::infinity();
    for (long i : ev.bad) lo = std::min(lo, ev.lambda_min(i));
    std::ostringstream os;
    os << "inadmissible state at " << ev.bad.size() << " node(s), first " << ev.bad.front()
       << ", lambda_min " << lo;
    throw AdmissibilityError(os.str(), lo, ev.bad);
}

double interior_sup(const Grid& g, const Eigen::VectorXd& r) {
    double m = 0.0;
    for (long i = 0; i < g.size(); ++i)
        if (!g.is_boundary(i)) m = std::max(m, std::abs(r(i)));
    return m;
}

double interior_min(const Grid& g, const Eigen::VectorXd& v) {
    double m = std::numeric_limits<double>::infinity();
    for (long i = 0; i < g.size(); ++i)
        if (!g.is_boundary(i)) m = std::min(m, v(i));
    return m;
}

void check_boundary(const GraphField& field, double eps) {
    const Grid& g = *field.grid;
    for (long i = 0; i < g.size(); ++i)
        if (g.is_boundary(i) && std::abs(field.values(i) - eps) > 1e-14)
            throw ContractError("field boundary values differ from eps");
}

Eigen::VectorXd masked_residual(const Grid& g, const StateEval& ev, double sigma) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(g.size());
    for (long i = 0; i < g.size(); ++i)
        if (!g.is_boundary(i)) r(i) = ev.values(i) - sigma;
    return r;
}

}  // namespace

Eigen::VectorXd curvature_values(const GraphField& field, const SymmetricFunctionSpec& spec) {
    const FieldDerivatives der = fd_derivatives(field);
    Eigen::VectorXd out(field.grid->size());
    for (long i = 0; i < field.grid->size(); ++i)
        out(i) = eval_F(spec, shape_at(node_sample(field, der, i)).a_matrix).value;
    return out;
}

Eigen::VectorXd curvature_residual(const GraphField& field, const SymmetricFunctionSpec& spec,
                                   double sigma) {
    const StateEval ev = evaluate_state(field, spec);
    if (!ev.bad.empty()) throw_inadmissible(ev);
    return masked_residual(*field.grid, ev, sigma);
}

Eigen::VectorXd residual(const GraphField& field, const SolveConfig& config) {
    check_boundary(field, config.eps);
    return curvature_residual(field, config.spec, config.sigma);
}

LinearizedCoefficients linearize(const GraphField& field, const SolveConfig& config) {
    const Grid& g = *field.grid;
    const int n = g.dim();
    const FieldDerivatives der = fd_derivatives(field);
    LinearizedCoefficients c;
    c.gst.assign(g.size(), Eigen::MatrixXd::Zero(n, n));
    c.gs = Eigen::MatrixXd::Zero(n, g.size());
    c.gu = Eigen::VectorXd::Zero(g.size());
    std::vector<long> bad;
    double lo = std::numeric_limits<double>::infinity();
    for (long i = 0; i < g.size(); ++i) {
        if (g.is_boundary(i)) continue;
        const GraphSample<double> s = node_sample(field, der, i);
        const ShapeSample<double> sh = shape_at(s);
        if (!(sh.kappa(0) > 0.0)) {
            bad.push_back(i);
            lo = std::min(lo, sh.kappa(0));
            continue;
        }
        const SpectralEval<double> F = eval_F(config.spec, sh.a_matrix);
        const CurvatureJet<double> jet = curvature_jet(s, sh);
        c.gst[i] = jet.hess_factor * sh.gamma_inv * F.fij_matrix * sh.gamma_inv;
        for (int t = 0; t < n; ++t) c.gs(t, i) = (F.fij_matrix.cwiseProduct(jet.d_p[t])).sum();
        c.gu(i) = (F.fij_matrix.cwiseProduct(jet.d_u)).sum();
    }
    if (!bad.empty()) throw AdmissibilityError("linearize: inadmissible state", lo, bad);
    return c;
}

SparseOp linearized_operator(const Grid& g, const LinearizedCoefficients& c) {
    const int n = g.dim();
    const long N = g.size();
    SparseOp L(N, N);
    for (int s = 0; s < n; ++s)
        for (int t = s; t < n; ++t) {
            Eigen::VectorXd w(N);
            for (long i = 0; i < N; ++i) w(i) = (s == t ? 1.0 : 2.0) * c.gst[i](s, t);
            L += SparseOp(w.asDiagonal() * g.dd(s, t));
        }
    for (int s = 0; s < n; ++s) {
        const Eigen::VectorXd w = c.gs.row(s).transpose();
        L += SparseOp(w.asDiagonal() * g.d(s));
    }
    SparseOp diag(N, N);
    std::vector<Eigen::Triplet<double>> trip;
    for (long i = 0; i < N; ++i)
        if (!g.is_boundary(i)) trip.emplace_back(i, i, c.gu(i));
    diag.setFromTriplets(trip.begin(), trip.end());
    L += diag;
    Eigen::VectorXd mask(N);
    for (long i = 0; i < N; ++i) mask(i) = g.is_boundary(i) ? 0.0 : 1.0;
    L = SparseOp(mask.asDiagonal() * L);
    L.prune(0.0);
    return L;
}

Eigen::VectorXd apply_linearized(const Grid& g, const LinearizedCoefficients& c,
                                 const Eigen::VectorXd& v) {
    const int n = g.dim();
    Eigen::VectorXd out = c.gu.cwiseProduct(v);
    for (int s = 0; s < n; ++s) {
        out += c.gs.row(s).transpose().cwiseProduct(apply_derivative(g.d(s), v));
        for (int t = s; t < n; ++t) {
            const Eigen::VectorXd dv = apply_derivative(g.dd(s, t), v);
            for (long i = 0; i < g.size(); ++i) out(i) += (s == t ? 1.0 : 2.0) * c.gst[i](s, t) * dv(i);
        }
    }
    for (long i = 0; i < g.size(); ++i)
        if (g.is_boundary(i)) out(i) = 0.0;
    return out;
}

SolveResult newton_solve(const GraphField& initial, const SolveConfig& config) {
    const double ce = std::cos(config.eps);
    if (!(config.sigma > 0.0) || config.sigma > ce)
        throw InfeasibleError("newton_solve: sigma must lie in (0, cos(eps)]");
    check_boundary(initial, config.eps);
    const Grid& g = *initial.grid;

    StateEval ev = evaluate_state(initial, config.spec);
    if (!ev.bad.empty()) throw_inadmissible(ev);
    const Eigen::VectorXd lambda0 = ev.lambda_min;

    SolveResult res;
    res.field = initial;
    res.sigma = config.sigma;
    Eigen::VectorXd r = masked_residual(g, ev, config.sigma);
    res.residual_sup = interior_sup(g, r);
    res.history.push_back(res.residual_sup);

    Eigen::VectorXd pin(g.size());
    for (long i = 0; i < g.size(); ++i) pin(i) = g.is_boundary(i) ? 1.0 : 0.0;

    while (res.residual_sup > config.newton_tol) {
        if (res.iterations >= config.max_newton_iters) {
            res.failure = "maximum Newton iterations reached";
            break;
        }
        const LinearizedCoefficients coeffs = linearize(res.field, config);
        Eigen::SparseMatrix<double> J = linearized_operator(g, coeffs);
        Eigen::SparseMatrix<double> P(g.size(), g.size());
        P.setIdentity();
        J += Eigen::SparseMatrix<double>(pin.asDiagonal() * P);
        J.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) {
            res.failure = "sparse factorization failed";
            break;
        }
        Eigen::VectorXd delta = lu.solve(-r);
        if (lu.info() != Eigen::Success || !delta.allFinite()) {
            res.failure = "linear solve failed";
            break;
        }
        delta = delta.cwiseProduct(Eigen::VectorXd::Ones(g.size()) - pin);

        double alpha = 1.0;
        bool accepted = false;
        for (int k = 0; k <= config.damping.max_halvings; ++k, alpha *= config.damping.factor) {
            GraphField cand(initial.grid, res.field.values + alpha * delta);
            StateEval cev = evaluate_state(cand, config.spec);
            if (!cev.bad.empty()) continue;
            bool keeps_margin = true;
            for (long i = 0; i < g.size() && keeps_margin; ++i)
                if (!g.is_boundary(i) &&
                    cev.lambda_min(i) < config.admissibility_margin * ev.lambda_min(i))
                    keeps_margin = false;
            if (!keeps_margin) continue;
            const Eigen::VectorXd cr = masked_residual(g, cev, config.sigma);
            const double sup = interior_sup(g, cr);
            if (!(sup < res.residual_sup)) continue;
            res.field = std::move(cand);
            ev = std::move(cev);
            r = cr;
            res.residual_sup = sup;
            accepted = true;
            break;
        }
        if (!accepted) {
            res.failure = "line search reached its floor";
            break;
        }
        ++res.iterations;
        res.history.push_back(res.residual_sup);
    }

    res.admissibility.min_lambda = interior_min(g, ev.lambda_min);
    double margin = std::numeric_limits<double>::infinity();
    for (long i = 0; i < g.size(); ++i)
        if (!g.is_boundary(i)) margin = std::min(margin, ev.lambda_min(i) / lambda0(i));
    res.admissibility.min_margin = margin;
    res.converged = res.residual_sup <= config.newton_tol && res.admissibility.min_lambda > 0.0;
    return res;
}

HomotopyOutcome homotopy_solve(const SolveConfig& config, std::shared_ptr<const Grid> grid) {
    config.validate();
    HomotopyOutcome out;
    const double s0 = std::cos(config.eps);
    auto sigma_at = [&](double t) { return t * config.sigma + (1.0 - t) * s0; };
    auto record = [&](double t, const SolveResult& r, int rejected) {
        TraceRecord rec;
        rec.stage = StageKind::Homotopy;
        rec.parameter = t;
        rec.sigma_target = r.sigma;
        rec.converged = r.converged;
        rec.iterations = r.iterations;
        rec.residual_sup = r.residual_sup;
        rec.min_lambda = r.admissibility.min_lambda;
        rec.rejected_steps = rejected;
        out.trace.records.push_back(rec);
    };

    SolveConfig cfg = config;
    cfg.sigma = s0;
    SolveResult current = newton_solve(GraphField::constant(grid, config.eps), cfg);
    record(0.0, current, 0);
    if (!current.converged) {
        out.trace.failure = "base state did not converge: " + current.failure;
        out.result = current;
        return out;
    }

    double t = 0.0, dt = config.homotopy.initial_step;
    int rejected = 0;
    while (t < 1.0) {
        const double t_try = std::min(1.0, t + dt);
        cfg.sigma = (t_try == 1.0) ? config.sigma : sigma_at(t_try);
        SolveResult attempt;
        try {
            attempt = newton_solve(current.field, cfg);
        } catch (const AdmissibilityError& e) {
            attempt.failure = e.what();
        }
        if (attempt.converged) {
            t = t_try;
            current = std::move(attempt);
            record(t, current, rejected);
            rejected = 0;
            if (current.iterations <= config.homotopy.fast_iterations)
                dt = std::min(config.homotopy.max_step, 2.0 * dt);
            continue;
        }
        ++rejected;
        dt *= 0.5;
        if (dt < config.homotopy.min_step) {
            attempt.sigma = cfg.sigma;
            if (attempt.field.grid == nullptr) attempt.field = current.field;
            record(t_try, attempt, rejected);
            std::ostringstream os;
            os << "homotopy step underflow at t = " << t << " (" << attempt.failure << ")";
            out.trace.failure = os.str();
            out.result = attempt;
            return out;
        }
    }
    out.trace.completed = true;
    out.result = current;
    return out;
}

EpsilonOutcome epsilon_continuation(const SolveConfig& config, const GridBuilder& grid_builder,
                                    const std::vector<double>& eps_schedule) {
    if (eps_schedule.empty()) throw DomainError("epsilon schedule is empty");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        SolveConfig c = config;
        c.eps = eps_schedule[i];
        c.validate();
        if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
            throw DomainError("epsilon schedule must be strictly decreasing");
    }
    EpsilonOutcome out;
    out.trace.completed = true;
    for (double eps : eps_schedule) {
        SolveConfig c = config;
        c.eps = eps;
        EpsilonStage stage;
        stage.eps = eps;
        stage.grid = grid_builder(eps);
        stage.outcome = homotopy_solve(c, stage.grid);
        const SolveResult& r = stage.outcome.result;
        TraceRecord rec;
        rec.stage = StageKind::Epsilon;
        rec.parameter = eps;
        rec.sigma_target = config.sigma;
        rec.converged = r.converged && stage.outcome.trace.completed;
        rec.iterations = 0;
        for (const auto& h : stage.outcome.trace.records) rec.iterations += h.iterations;
        rec.residual_sup = r.residual_sup;
        rec.min_lambda = r.admissibility.min_lambda;
        if (rec.converged) {
            stage.metrics = measure_state(r.field, config.spec);
            rec.metrics = stage.metrics;
        } else {
            out.trace.completed = false;
            if (out.trace.failure.empty())
                out.trace.failure = "eps = " + std::to_string(eps) + ": " + stage.outcome.trace.failure;
        }
        out.trace.records.push_back(rec);
        out.stages.push_back(std::move(stage));
    }
    return out;
}

StateMetrics measure_state(const GraphField& field, const SymmetricFunctionSpec& spec) {
    (void)spec;
    const Grid& g = *field.grid;
    const FieldDerivatives der = fd_derivatives(field);
    const double inf = std::numeric_limits<double>::infinity();
    StateMetrics m;
    m.u_min = inf;
    m.u_max = -inf;
    m.kappa_min = inf;
    m.kappa_max = -inf;
    m.nu_w_max = -inf;
    m.boundary_omega_min = m.ring_omega_min = inf;
    m.boundary_omega_max = m.ring_omega_max = -inf;
    m.neg_nuw_over_cos_min = inf;
    m.neg_nuw_over_cos_max = -inf;
    for (long i = 0; i < g.size(); ++i) {
        const GraphSample<double> s = node_sample(field, der, i);
        const ShapeSample<double> sh = shape_at(s);
        const double nuw = sh.normal.dot(angle_vector_W(sh.position));
        m.omega_sup = std::max(m.omega_sup, sh.omega);
        m.omega_zn_sup = std::max(m.omega_zn_sup, sh.omega_zn);
        m.kappa_min = std::min(m.kappa_min, sh.kappa(0));
        m.kappa_max = std::max(m.kappa_max, sh.kappa(sh.kappa.size() - 1));
        m.nu_w_max = std::max(m.nu_w_max, nuw);
        m.nu_w_identity = std::max(m.nu_w_identity, std::abs(nuw + 1.0 / sh.omega));
        m.tan_u_max = std::max(m.tan_u_max, std::tan(s.u));
        m.neg_nuw_over_cos_min = std::min(m.neg_nuw_over_cos_min, -nuw / std::cos(s.u));
        m.neg_nuw_over_cos_max = std::max(m.neg_nuw_over_cos_max, -nuw / std::cos(s.u));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.d2u, Eigen::EigenvaluesOnly);
        const double d2 = std::sin(s.u) * es.eigenvalues().cwiseAbs().maxCoeff();
        m.sinu_d2u_sup = std::max(m.sinu_d2u_sup, d2);
        if (g.depth[i] <= 2) {
            m.sinu_d2u_ring_sup = std::max(m.sinu_d2u_ring_sup, d2);
            m.ring_omega_min = std::min(m.ring_omega_min, sh.omega);
            m.ring_omega_max = std::max(m.ring_omega_max, sh.omega);
        }
        if (g.is_boundary(i)) {
            m.boundary_omega_min = std::min(m.boundary_omega_min, sh.omega);
            m.boundary_omega_max = std::max(m.boundary_omega_max, sh.omega);
        } else {
            m.u_min = std::min(m.u_min, s.u);
            m.u_max = std::max(m.u_max, s.u);
        }
    }
    return m;
}

std::string KernelSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case KernelKind::Translation: os << "translation(k=" << k << ")"; break;
        case KernelKind::Rotation: os << "rotation(k=" << k << ",l=" << l << ")"; break;
        case KernelKind::Dilation: os << "dilation"; break;
    }
    return os.str();
}

Eigen::VectorXd kernel_field(const GraphField& field, const FieldDerivatives& der,
                             const KernelSpec& kernel) {
    const Grid& g = *field.grid;
    const int n = g.dim();
    if (kernel.kind != KernelKind::Dilation &&
        (kernel.k < 0 || kernel.k >= n || kernel.l < 0 || kernel.l >= n))
        throw DomainError("kernel index out of range");
    Eigen::VectorXd p = kernel.p.size() == n ? kernel.p : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v(g.size());
    for (long i = 0; i < g.size(); ++i) {
        const Eigen::VectorXd y = g.nodes.col(i);
        const double u = field.values(i);
        const Eigen::VectorXd du = der.gradient(i);
        if (kernel.kind == KernelKind::Dilation) {
            v(i) = y.dot(du);
            continue;
        }
        // Horizontal Killing field X evaluated at the surface point.
        Eigen::VectorXd zh = y;
        zh(n - 1) = y(n - 1) * std::cos(u);
        Eigen::VectorXd X = Eigen::VectorXd::Zero(n);
        if (kernel.kind == KernelKind::Translation) {
            X(kernel.k) = 1.0;
        } else {
            const Eigen::VectorXd d = zh - p;
            X(kernel.k) += d(kernel.l);
            X(kernel.l) -= d(kernel.k);
        }
        double val = X.head(n - 1).dot(du.head(n - 1));
        val += X(n - 1) * (std::cos(u) * du(n - 1) + std::sin(u) / y(n - 1));
        v(i) = val;
    }
    return v;
}

KernelResidual kernel_residual(const GraphField& field, const SolveConfig& config,
                               const KernelSpec& kernel) {
    const Grid& g = *field.grid;
    KernelResidual out;
    const Eigen::VectorXd r = curvature_residual(field, config.spec, config.sigma);
    out.flagged = interior_sup(g, r) > 10.0 * config.newton_tol;
    const FieldDerivatives der = fd_derivatives(field);
    const Eigen::VectorXd v = kernel_field(field, der, kernel);
    out.scale = v.cwiseAbs().maxCoeff();
    const Eigen::VectorXd Lv = apply_linearized(g, linearize(field, config), v);
    for (long i = 0; i < g.size(); ++i)
        if (g.depth[i] > 2) {
            out.value = std::max(out.value, std::abs(Lv(i)));
            ++out.nodes;
        }
    return out;
}

}  // namespace hypgraph
