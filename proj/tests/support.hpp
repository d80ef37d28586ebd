#ifndef HYPGRAPH_TEST_SUPPORT_HPP
#define HYPGRAPH_TEST_SUPPORT_HPP

#include <cmath>
#include <random>

#include "hypgraph/solver.hpp"

namespace hypgraph::test {

// Node coordinates centered on the domain and scaled to about [-1, 1].
inline Eigen::MatrixXd scaled_nodes(const Grid& g) {
    const Eigen::VectorXd lo = g.nodes.rowwise().minCoeff(), hi = g.nodes.rowwise().maxCoeff();
    const Eigen::VectorXd mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    Eigen::MatrixXd x = g.nodes.colwise() - mid;
    for (int k = 0; k < g.dim(); ++k) x.row(k) /= half(k);
    return x;
}

// Random combination of monomials of degree <= 4 and a few trigonometric
// modes, normalized to sup 1.
inline Eigen::VectorXd smooth_direction(const Grid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    const Eigen::MatrixXd x = scaled_nodes(g);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.size());
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; a + b <= 4; ++b) {
            const double c = N(rng);
            for (long i = 0; i < g.size(); ++i) v(i) += c * std::pow(x(0, i), a) * std::pow(x(1, i), b);
        }
    for (int k = 1; k <= 2; ++k) {
        const double c = N(rng), s = N(rng);
        for (long i = 0; i < g.size(); ++i)
            v(i) += c * std::cos(k * M_PI * x(0, i)) * std::sin(k * M_PI * 0.5 * (x(1, i) + 1)) +
                    s * std::sin(k * M_PI * x(0, i)) * std::cos(k * M_PI * 0.5 * x(1, i));
    }
    return v / v.cwiseAbs().maxCoeff();
}

// Strictly convex state: a bowl around a random base angle plus a small
// smooth perturbation; redrawn until every node is admissible.
inline GraphField smooth_state(std::shared_ptr<const Grid> g, const SymmetricFunctionSpec& spec,
                               std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Eigen::MatrixXd x = scaled_nodes(*g);
    for (;;) {
        const double base = 0.2 + 0.6 * U(rng), bowl = 0.02 + 0.1 * U(rng), tilt = 0.05 * (U(rng) - 0.5);
        Eigen::VectorXd u(g->size());
        for (long i = 0; i < g->size(); ++i)
            u(i) = base + bowl * x.col(i).squaredNorm() + tilt * x(0, i);
        u += 0.01 * smooth_direction(*g, rng);
        GraphField f(g, u);
        try {
            const Eigen::VectorXd vals = curvature_values(f, spec);
            if (vals.minCoeff() > 0.0) return f;
        } catch (const AdmissibilityError&) {
        }
    }
}

// Sup-norm relative error between the analytic linearization and centered
// differences of the interior residual in direction v.
inline double jacobian_relative_error(const GraphField& f, const SolveConfig& cfg, const Eigen::VectorXd& v,
                                      double h) {
    const LinearizedCoefficients co = linearize(f, cfg);
    const Eigen::VectorXd an = apply_linearized(*f.grid, co, v);
    const GraphField fp(f.grid, f.values + h * v), fm(f.grid, f.values - h * v);
    const Eigen::VectorXd fd =
        (curvature_residual(fp, cfg.spec, cfg.sigma) - curvature_residual(fm, cfg.spec, cfg.sigma)) / (2 * h);
    return (fd - an).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff();
}

}  // namespace hypgraph::test

#endif
