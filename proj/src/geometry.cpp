#include "hypgraph/geometry.hpp"

#include <cmath>

namespace hypgraph {

BarrierBall BarrierBall::make(const Eigen::VectorXd& a_prime, double a_n, double sigma,
                              double radius, BallOrientation orientation) {
    if (!(radius >= 0.0)) throw DomainError("BarrierBall: negative radius");
    if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("BarrierBall: sigma must lie in (0,1)");
    BarrierBall b;
    b.center_prime = a_prime;
    b.center_n = a_n;
    b.radius = radius;
    b.orientation = orientation;
    b.center_last = (orientation == BallOrientation::Lower ? -1.0 : 1.0) * sigma * radius;
    return b;
}

namespace {

void require_barrier_params(double ell, double d, double eps, double sigma) {
    if (!(eps > 0.0 && eps < M_PI / 2)) throw DomainError("barrier: eps must lie in (0, pi/2)");
    if (!(sigma > 0.0)) throw DomainError("barrier: sigma must be positive");
    if (!(sigma < std::cos(eps))) throw InfeasibleError("barrier: requires sigma < cos(eps)");
    if (!(ell > 0.0)) throw DomainError("barrier: ell must be positive");
    if (!(d > 0.0)) throw DomainError("barrier: diameter must be positive");
}

}  // namespace

double barrier_ball_radius(double ell, double diam, double eps, double sigma) {
    require_barrier_params(ell, diam, eps, sigma);
    const double c = std::cos(eps), s = std::sin(eps);
    const double k = c * c - sigma * sigma;
    const double b = sigma * ell * s;
    return (b + std::sqrt(b * b + k * (ell * ell * s * s + diam * diam * c * c / 4.0))) / k;
}

std::pair<double, double> barrier_radius_bracket(double ell, double diam, double eps,
                                                 double sigma) {
    require_barrier_params(ell, diam, eps, sigma);
    const double c = std::cos(eps), s = std::sin(eps);
    const double k = c * c - sigma * sigma;
    const double tail = diam * c / (2.0 * std::sqrt(k));
    return {sigma * ell * s / k + tail, ell * s / (c - sigma) + tail};
}

BarrierBall enclosing_barrier_ball(const Eigen::VectorXd& center_prime, double ell, double diam,
                                   double eps, double sigma) {
    const double R = barrier_ball_radius(ell, diam, eps, sigma);
    const double a_n = ell / std::cos(eps) + sigma * R * std::tan(eps);
    return BarrierBall::make(center_prime, a_n, sigma, R, BallOrientation::Lower);
}

// Highest angle reached by the sphere above the eps-hyperplane.  In the
// 2-plane spanned by the axis direction and the vertical the sphere is a
// circle of radius R whose center sits at distance D below the hyperplane,
// straight under the trace center at distance ell from the axis.
double barrier_upper_bound(double ell, double diam, double eps, double sigma) {
    const double R = barrier_ball_radius(ell, diam, eps, sigma);
    const double D = ell * std::tan(eps) + sigma * R / std::cos(eps);
    const double beta = std::asin(std::min(1.0, R / std::hypot(ell, D))) - std::atan2(D, ell);
    return eps + beta;
}

double barrier_lower_bound(double ell_z, double dist_z, double eps, double sigma) {
    const double R = barrier_ball_radius(ell_z, dist_z, eps, sigma);
    return eps + std::atan(R / ell_z * (1.0 - sigma / std::cos(eps)) - std::tan(eps));
}

double boundary_gradient_upper(double z_n, double r2, double eps0, double sigma) {
    if (!(r2 > 0.0)) throw DomainError("boundary_gradient_upper: r2 must be positive");
    if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("boundary_gradient_upper: sigma in (0,1)");
    const double se = std::sin(eps0);
    if (std::isinf(r2)) return std::sqrt(1.0 - sigma * sigma);
    const double denom = r2 * r2 - 2.0 * z_n * r2 * se * se;
    if (!(denom > 0.0))
        throw InfeasibleError("boundary_gradient_upper: exterior sphere too small for this height");
    return (z_n + r2) * (z_n * (sigma / std::cos(eps0) + 1.0) + r2 * std::sqrt(1.0 - sigma * sigma)) /
           denom;
}

double boundary_gradient_lower(double center_height, double r1, double eps, double sigma) {
    if (!(r1 > 0.0)) throw DomainError("boundary_gradient_lower: r1 must be positive");
    if (!(eps > 0.0 && eps < M_PI / 2)) throw DomainError("boundary_gradient_lower: eps range");
    const double c = std::cos(eps), s = std::sin(eps);
    if (!(sigma > 0.0 && sigma < c)) throw InfeasibleError("boundary_gradient_lower: sigma < cos(eps)");
    const double h = center_height;
    const double k = c * c - sigma * sigma;
    const double R = (h * sigma + std::sqrt(h * h * sigma * sigma + k * (h * h + r1 * r1 * c * c))) / k;
    return sigma * c / s - (h + sigma * R) / (R * c * s);
}

// ---------------------------------------------------------------------------

namespace {

struct RawJet {
    Eigen::VectorXd x;
    Eigen::MatrixXd xa;                // (n+1) x n
    std::vector<Eigen::VectorXd> xab;  // n*n entries
    double f = 0.0;
    Eigen::VectorXd fa;
    Eigen::MatrixXd fab;
};

RawJet raw_jet(const LocalGraph& graph, const SampleFunction& phi, const Eigen::VectorXd& y0,
               double h) {
    const int n = static_cast<int>(y0.size());
    auto X = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return embed(y, graph(y).u); };
    auto F = [&](const Eigen::VectorXd& y) { return phi(graph(y)); };
    auto e = [&](int a) { return Eigen::VectorXd::Unit(n, a); };

    RawJet j;
    j.x = X(y0);
    j.f = F(y0);
    j.xa.resize(n + 1, n);
    j.fa.resize(n);
    j.fab.resize(n, n);
    j.xab.assign(n * n, Eigen::VectorXd::Zero(n + 1));
    for (int a = 0; a < n; ++a) {
        const Eigen::VectorXd yp = y0 + h * e(a), ym = y0 - h * e(a);
        const Eigen::VectorXd Xp = X(yp), Xm = X(ym);
        const double Fp = F(yp), Fm = F(ym);
        j.xa.col(a) = (Xp - Xm) / (2 * h);
        j.fa(a) = (Fp - Fm) / (2 * h);
        j.xab[a * n + a] = (Xp - 2 * j.x + Xm) / (h * h);
        j.fab(a, a) = (Fp - 2 * j.f + Fm) / (h * h);
        for (int b = a + 1; b < n; ++b) {
            const Eigen::VectorXd d1 = h * e(a), d2 = h * e(b);
            const Eigen::VectorXd xm = (X(y0 + d1 + d2) - X(y0 + d1 - d2) - X(y0 - d1 + d2) +
                                        X(y0 - d1 - d2)) / (4 * h * h);
            const double fm = (F(y0 + d1 + d2) - F(y0 + d1 - d2) - F(y0 - d1 + d2) +
                               F(y0 - d1 - d2)) / (4 * h * h);
            j.xab[a * n + b] = j.xab[b * n + a] = xm;
            j.fab(a, b) = j.fab(b, a) = fm;
        }
    }
    return j;
}

RawJet richardson(const RawJet& coarse, const RawJet& fine) {
    RawJet r = fine;
    r.xa = (4 * fine.xa - coarse.xa) / 3;
    r.fa = (4 * fine.fa - coarse.fa) / 3;
    r.fab = (4 * fine.fab - coarse.fab) / 3;
    for (std::size_t i = 0; i < r.xab.size(); ++i) r.xab[i] = (4 * fine.xab[i] - coarse.xab[i]) / 3;
    return r;
}

}  // namespace

CovariantDerivatives covariant_derivatives(const LocalGraph& graph, const SampleFunction& phi,
                                           const Eigen::VectorXd& y0, double step) {
    if (!(step > 0.0)) throw DomainError("covariant_derivatives: step must be positive");
    const int n = static_cast<int>(y0.size());
    const RawJet j = richardson(raw_jet(graph, phi, y0, step), raw_jet(graph, phi, y0, step / 2));

    const Eigen::MatrixXd gE = j.xa.transpose() * j.xa;
    const Eigen::MatrixXd gE_inv = gE.inverse();
    Eigen::MatrixXd hessE(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Eigen::VectorXd gamma = gE_inv * (j.xa.transpose() * j.xab[a * n + b]);
            hessE(a, b) = j.fab(a, b) - gamma.dot(j.fa);
        }

    const double z = j.x(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gE);
    const Eigen::MatrixXd frame = z * es.operatorInverseSqrt();

    const Eigen::VectorXd fi = frame.transpose() * j.fa;
    const Eigen::VectorXd zi = frame.transpose() * j.xa.row(n).transpose();
    CovariantDerivatives out;
    out.gradient = fi;
    out.hessian = frame.transpose() * hessE * frame +
                  (zi * fi.transpose() + fi * zi.transpose() -
                   zi.dot(fi) * Eigen::MatrixXd::Identity(n, n)) / z;
    out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
    return out;
}

Eigen::MatrixXd covariant_hessian_cotu(const LocalGraph& graph, const Eigen::VectorXd& y0,
                                       double step) {
    auto cotu = [](const GraphSample<double>& s) { return std::cos(s.u) / std::sin(s.u); };
    return covariant_derivatives(graph, cotu, y0, step).hessian;
}

Eigen::MatrixXd cotu_hessian_identity_rhs(const GraphSample<double>& sample) {
    const ShapeSample<double> sh = shape_at(sample);
    const double cot = std::cos(sample.u) / std::sin(sample.u);
    const double g = sh.nu_n() - sh.nu_last() * cot;
    const int n = sample.dim();
    return g * sh.a_matrix + cot * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace hypgraph
