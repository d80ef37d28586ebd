#ifndef HYPGRAPH_GEOMETRY_HPP
#define HYPGRAPH_GEOMETRY_HPP

// Geodesic graphs X(y) = (y_1, ..., y_{n-1}, y_n cos u, y_n sin u) in the
// upper half-space model.  Index conventions are 0-based: the last domain
// coordinate y_n is y(n-1), the ambient height z_{n+1} is z(n).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "hypgraph/errors.hpp"
#include "hypgraph/symfunc.hpp"

namespace hypgraph {

template <typename Scalar>
struct GraphSample {
    VectorX<Scalar> y;
    Scalar u{};
    VectorX<Scalar> du;
    MatrixX<Scalar> d2u;

    int dim() const { return static_cast<int>(y.size()); }
};

template <typename Scalar>
struct ShapeSample {
    VectorX<Scalar> position;  // z, n+1 entries
    VectorX<Scalar> normal;    // Euclidean unit normal, n+1 entries
    Scalar omega{};            // sqrt(1 + y_n^2 |Du|^2)
    Scalar omega_zn{};         // sqrt(1 + z_n^2 |Du|^2)
    MatrixX<Scalar> gamma;
    MatrixX<Scalar> gamma_inv;
    MatrixX<Scalar> h_euclid;  // second fundamental form in y-coordinates
    MatrixX<Scalar> a_matrix;
    VectorX<Scalar> kappa;     // ascending

    Scalar nu_n() const { return normal(normal.size() - 2); }
    Scalar nu_last() const { return normal(normal.size() - 1); }
    Scalar height() const { return position(position.size() - 1); }
};

// Derivatives of A[u] with respect to u, Du and D^2u at one sample.
template <typename Scalar>
struct CurvatureJet {
    MatrixX<Scalar> d_u;                 // dA/du
    std::vector<MatrixX<Scalar>> d_p;    // dA/du_s
    Scalar hess_factor{};                // dA/du_st = hess_factor * gamma_inv E_st gamma_inv
};

struct ThetaHyperplane {
    double theta = 0.0;
    double curvature() const { return std::cos(theta); }
};

enum class BallOrientation { Lower, Upper };

// Euclidean ball centered at (a', a_n, -+sigma R).  Lower balls have their
// center below infinity; the part of the sphere in the half-space has
// curvature sigma with respect to the outward normal.  Upper balls are seen
// from inside.
struct BarrierBall {
    Eigen::VectorXd center_prime;
    double center_n = 0.0;
    double center_last = 0.0;
    double radius = 0.0;
    BallOrientation orientation = BallOrientation::Lower;

    static BarrierBall make(const Eigen::VectorXd& a_prime, double a_n, double sigma, double radius,
                            BallOrientation orientation);
    double sigma() const { return radius > 0 ? std::abs(center_last) / radius : 0.0; }
    int dim() const { return static_cast<int>(center_prime.size()) + 1; }
};

template <typename Derived>
VectorX<typename Derived::Scalar> embed(const Eigen::MatrixBase<Derived>& y,
                                        typename Derived::Scalar u) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = y.size();
    if (n < 1 || !(y(n - 1) > Scalar(0))) throw DomainError("embed: requires y_n > 0");
    if (!(u > Scalar(0)) || !(u < Scalar(M_PI / 2) + Scalar(1e-15)))
        throw DomainError("embed: angle outside (0, pi/2)");
    VectorX<Scalar> z(n + 1);
    z.head(n - 1) = y.head(n - 1);
    z(n - 1) = y(n - 1) * std::cos(u);
    z(n) = y(n - 1) * std::sin(u);
    return z;
}

template <typename Derived>
VectorX<typename Derived::Scalar> angle_vector_W(const Eigen::MatrixBase<Derived>& z) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index m = z.size();
    if (m < 2) throw ContractError("angle_vector_W: needs at least two coordinates");
    const Scalar zn = z(m - 2), zl = z(m - 1);
    if (zn == Scalar(0) && zl == Scalar(0)) throw DomainError("angle_vector_W: undefined on the axis");
    const Scalar theta = std::atan2(zl, zn);
    VectorX<Scalar> w = VectorX<Scalar>::Zero(m);
    w(m - 2) = std::sin(theta);
    w(m - 1) = -std::cos(theta);
    return w;
}

template <typename Scalar>
ShapeSample<Scalar> shape_at(const GraphSample<Scalar>& s) {
    const int n = s.dim();
    if (s.du.size() != n || s.d2u.rows() != n || s.d2u.cols() != n)
        throw ContractError("shape_at: inconsistent sample dimensions");
    const Scalar yn = s.y(n - 1);
    const Scalar su = std::sin(s.u), cu = std::cos(s.u);
    const VectorX<Scalar>& p = s.du;
    const Scalar pn = p(n - 1);

    ShapeSample<Scalar> out;
    out.position = embed(s.y, s.u);
    out.omega = std::sqrt(Scalar(1) + yn * yn * p.squaredNorm());
    out.omega_zn = std::sqrt(Scalar(1) + yn * yn * cu * cu * p.squaredNorm());
    const Scalar w = out.omega;

    out.normal.resize(n + 1);
    out.normal.head(n - 1) = -yn * p.head(n - 1) / w;
    out.normal(n - 1) = (-su - yn * pn * cu) / w;
    out.normal(n) = (cu - yn * pn * su) / w;

    const MatrixX<Scalar> I = MatrixX<Scalar>::Identity(n, n);
    const MatrixX<Scalar> ppt = p * p.transpose();
    out.gamma = I + yn * yn * ppt / (Scalar(1) + w);
    out.gamma_inv = I - yn * yn * ppt / (w * (Scalar(1) + w));

    MatrixX<Scalar> en_p = MatrixX<Scalar>::Zero(n, n);
    en_p.row(n - 1) = p.transpose();
    out.h_euclid = (en_p + en_p.transpose() + yn * yn * pn * ppt + yn * s.d2u) / w;

    const Scalar z = out.position(n);
    out.a_matrix = z * out.gamma_inv * out.h_euclid * out.gamma_inv + out.nu_last() * I;
    out.a_matrix = Scalar(0.5) * (out.a_matrix + out.a_matrix.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(out.a_matrix, Eigen::EigenvaluesOnly);
    out.kappa = es.eigenvalues();
    return out;
}

template <typename Scalar>
CurvatureJet<Scalar> curvature_jet(const GraphSample<Scalar>& s, const ShapeSample<Scalar>& sh) {
    const int n = s.dim();
    const Scalar yn = s.y(n - 1);
    const Scalar su = std::sin(s.u), cu = std::cos(s.u);
    const VectorX<Scalar>& p = s.du;
    const Scalar pn = p(n - 1);
    const Scalar w = sh.omega;
    const Scalar z = sh.height();
    const MatrixX<Scalar> I = MatrixX<Scalar>::Identity(n, n);
    const MatrixX<Scalar>& gi = sh.gamma_inv;
    const MatrixX<Scalar>& hE = sh.h_euclid;
    const MatrixX<Scalar> ppt = p * p.transpose();

    CurvatureJet<Scalar> jet;
    jet.d_u = (yn * cu) * gi * hE * gi + sh.nu_n() * I;
    jet.hess_factor = yn * z / w;
    jet.d_p.reserve(n);
    const Scalar w1 = w * (Scalar(1) + w);
    for (int s_idx = 0; s_idx < n; ++s_idx) {
        MatrixX<Scalar> qpt = MatrixX<Scalar>::Zero(n, n);
        qpt.row(s_idx) = p.transpose();
        const MatrixX<Scalar> sym = qpt + qpt.transpose();
        const Scalar dw = yn * yn * p(s_idx) / w;
        const MatrixX<Scalar> dgi = -yn * yn * sym / w1 +
                                    yn * yn * ppt * dw * (Scalar(1) + Scalar(2) * w) / (w1 * w1);
        MatrixX<Scalar> ens = MatrixX<Scalar>::Zero(n, n);
        ens(n - 1, s_idx) += Scalar(1);
        ens(s_idx, n - 1) += Scalar(1);
        MatrixX<Scalar> dh = ens + yn * yn * pn * sym;
        if (s_idx == n - 1) dh += yn * yn * ppt;
        dh = dh / w - hE * (dw / w);
        Scalar dnu = -sh.nu_last() * dw / w;
        if (s_idx == n - 1) dnu -= yn * su / w;
        MatrixX<Scalar> dA = z * (dgi * hE * gi + gi * dh * gi + gi * hE * dgi) + dnu * I;
        jet.d_p.push_back(Scalar(0.5) * (dA + dA.transpose()));
    }
    return jet;
}

// Intersection of the geodesic half-circle over y with the ball's sphere.
template <typename Derived>
std::optional<GraphSample<typename Derived::Scalar>> sphere_as_graph(
    const BarrierBall& ball, const Eigen::MatrixBase<Derived>& y_in) {
    using Scalar = typename Derived::Scalar;
    const VectorX<Scalar> y = y_in;
    const int n = static_cast<int>(y.size());
    if (n != ball.dim()) throw ContractError("sphere_as_graph: dimension mismatch");
    if (!(ball.radius > 0.0) || !(y(n - 1) > Scalar(0))) return std::nullopt;
    const Scalar yn = y(n - 1);
    const Scalar an = Scalar(ball.center_n), c = Scalar(ball.center_last), R = Scalar(ball.radius);
    Scalar dprime2(0);
    for (int i = 0; i < n - 1; ++i) {
        const Scalar d = y(i) - Scalar(ball.center_prime(i));
        dprime2 += d * d;
    }
    const Scalar K = (dprime2 + yn * yn + an * an + c * c - R * R) / (Scalar(2) * yn);
    const Scalar rho = std::hypot(an, c);
    if (!(rho > Scalar(0)) || std::abs(K) >= rho) return std::nullopt;
    const Scalar phi = std::atan2(c, an);
    const Scalar delta = std::acos(K / rho);
    const Scalar u = ball.orientation == BallOrientation::Lower ? phi + delta : phi - delta;
    if (!(u > Scalar(0)) || !(u < Scalar(M_PI / 2))) return std::nullopt;

    const Scalar su = std::sin(u), cu = std::cos(u);
    const Scalar phi_u = Scalar(2) * yn * (an * su - c * cu);
    if (std::abs(phi_u) < Scalar(1e-14) * R * yn) return std::nullopt;
    const Scalar phi_uu = Scalar(2) * yn * (an * cu + c * su);

    VectorX<Scalar> phi_y(n), phi_uy = VectorX<Scalar>::Zero(n);
    for (int i = 0; i < n - 1; ++i) phi_y(i) = Scalar(2) * (y(i) - Scalar(ball.center_prime(i)));
    phi_y(n - 1) = Scalar(2) * yn - Scalar(2) * (an * cu + c * su);
    phi_uy(n - 1) = Scalar(2) * (an * su - c * cu);

    GraphSample<Scalar> g;
    g.y = y;
    g.u = u;
    g.du = -phi_y / phi_u;
    g.d2u = -(Scalar(2) * MatrixX<Scalar>::Identity(n, n) + phi_uy * g.du.transpose() +
              g.du * phi_uy.transpose() + phi_uu * g.du * g.du.transpose()) /
            phi_u;
    return g;
}

// ---------------------------------------------------------------------------
// Closed-form barrier quantities (double precision).

// Exact positive root R of (l tan e + sigma R / cos e)^2 + (d/2)^2 = R^2.
double barrier_ball_radius(double ell, double diam, double eps, double sigma);
// Closed-form bracket [lower, upper] for that root.
std::pair<double, double> barrier_radius_bracket(double ell, double diam, double eps, double sigma);
// The lower sigma-ball whose trace on the eps-hyperplane is the n-ball of
// radius diam/2 centered at (center_prime, ell).
BarrierBall enclosing_barrier_ball(const Eigen::VectorXd& center_prime, double ell, double diam,
                                   double eps, double sigma);

double barrier_upper_bound(double ell, double diam, double eps, double sigma);
double barrier_lower_bound(double ell_z, double dist_z, double eps, double sigma);
double boundary_gradient_upper(double z_n, double r2, double eps0, double sigma);
// Interior-sphere counterpart: lower bound for sigma cot u + nu.W / sin u on
// the boundary, given the height of the interior ball center in the
// eps-hyperplane and the interior radius r1.
double boundary_gradient_lower(double center_height, double r1, double eps, double sigma);

// ---------------------------------------------------------------------------
// Covariant derivatives along a graph, by finite differences.

using LocalGraph = std::function<GraphSample<double>(const Eigen::VectorXd&)>;
using SampleFunction = std::function<double(const GraphSample<double>&)>;

struct CovariantDerivatives {
    Eigen::VectorXd gradient;  // in the hyperbolic orthonormal frame z gamma^{-1}
    Eigen::MatrixXd hessian;
};

// Hyperbolic gradient and Hessian of phi(graph(y)) at y0.  Euclidean
// surface derivatives come from centered differences with one Richardson
// step (h, h/2); the conformal change to the hyperbolic metric is applied
// afterwards.
CovariantDerivatives covariant_derivatives(const LocalGraph& graph, const SampleFunction& phi,
                                           const Eigen::VectorXd& y0, double step);

Eigen::MatrixXd covariant_hessian_cotu(const LocalGraph& graph, const Eigen::VectorXd& y0,
                                       double step);

// Right side g A + cot u I of the pointwise Hessian identity for cot u.
Eigen::MatrixXd cotu_hessian_identity_rhs(const GraphSample<double>& sample);

}  // namespace hypgraph

#endif
