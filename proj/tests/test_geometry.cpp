#include <doctest.h>

#include <random>

#include "hypgraph/geometry.hpp"

using namespace hypgraph;

namespace {

// Quadratic graph u(y) = c + b.(y - y0) + (y - y0)^T M (y - y0) / 2 in n = 2.
struct QuadraticGraph {
    Eigen::Vector2d y0;
    double c = 0.5;
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    Eigen::Matrix2d M = Eigen::Matrix2d::Zero();

    GraphSample<double> operator()(const Eigen::VectorXd& y) const {
        const Eigen::Vector2d d = y - y0;
        GraphSample<double> s;
        s.y = y;
        s.u = c + b.dot(d) + 0.5 * d.dot(M * d);
        s.du = b + M * d;
        s.d2u = M;
        return s;
    }
};

// Euclidean shape operator of X(y) = (y1, y2 cos u, y2 sin u) from the two
// fundamental forms, with X derivatives by the chain rule.
struct TwoFormShape {
    Eigen::Vector3d normal;
    Eigen::Vector2d kappa_euclid;
};

TwoFormShape two_form_shape(const GraphSample<double>& s) {
    const double y2 = s.y(1), su = std::sin(s.u), cu = std::cos(s.u);
    const Eigen::Vector2d p = s.du;
    Eigen::Matrix<double, 3, 2> Xa;
    for (int a = 0; a < 2; ++a) {
        const double da2 = a == 1 ? 1.0 : 0.0;
        Xa(0, a) = a == 0 ? 1.0 : 0.0;
        Xa(1, a) = da2 * cu - y2 * su * p(a);
        Xa(2, a) = da2 * su + y2 * cu * p(a);
    }
    Eigen::Vector3d Xab[2][2];
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double da2 = a == 1 ? 1.0 : 0.0, db2 = b == 1 ? 1.0 : 0.0;
            Xab[a][b](0) = 0.0;
            Xab[a][b](1) = -da2 * su * p(b) - db2 * su * p(a) - y2 * cu * p(a) * p(b) -
                           y2 * su * s.d2u(a, b);
            Xab[a][b](2) = da2 * cu * p(b) + db2 * cu * p(a) - y2 * su * p(a) * p(b) +
                           y2 * cu * s.d2u(a, b);
        }
    Eigen::Vector3d N = Xa.col(0).cross(Xa.col(1)).normalized();
    // Orientation: the normal of a geodesic graph points against W.
    const Eigen::Vector3d z = embed(s.y, s.u);
    if (N.dot(angle_vector_W(z)) > 0) N = -N;
    Eigen::Matrix2d I = Xa.transpose() * Xa, II;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) II(a, b) = Xab[a][b].dot(N);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(II, I);
    return {N, es.eigenvalues()};
}

GraphSample<double> random_sample(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    GraphSample<double> s;
    s.y = Eigen::Vector2d(U(rng), 1.5 + 0.5 * U(rng));
    s.u = 0.6 + 0.4 * U(rng);
    s.du = Eigen::Vector2d(0.4 * U(rng), 0.4 * U(rng));
    Eigen::Matrix2d M;
    M << U(rng), U(rng), 0, U(rng);
    M(1, 0) = M(0, 1);
    s.d2u = M;
    return s;
}

}  // namespace

TEST_SUITE("geometry") {
    TEST_CASE("embed examples") {
        const Eigen::VectorXd a = embed(Eigen::Vector2d(0, 1), M_PI / 2);
        CHECK(std::abs(a(0)) < 1e-15);
        CHECK(std::abs(a(1)) < 1e-15);
        CHECK(a(2) == doctest::Approx(1.0).epsilon(1e-15));
        const Eigen::VectorXd b = embed(Eigen::Vector2d(3, 2), M_PI / 6);
        CHECK(b(0) == 3.0);
        CHECK(b(1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
        CHECK(b(2) == doctest::Approx(1.0).epsilon(1e-15));
        const Eigen::VectorXd c = embed(Eigen::Vector3d(1, 1, 1), 0.7);
        CHECK(c(0) == 1.0);
        CHECK(c(1) == 1.0);
        CHECK(c(2) == std::cos(0.7));
        CHECK(c(3) == std::sin(0.7));
        CHECK_THROWS_AS(embed(Eigen::Vector2d(0, -1), 0.5), DomainError);
        CHECK_THROWS_AS(embed(Eigen::Vector2d(0, 1), 0.0), DomainError);
        CHECK_THROWS_AS(embed(Eigen::Vector2d(0, 1), 2.0), DomainError);
    }

    TEST_CASE("angle vector examples") {
        const Eigen::VectorXd a = angle_vector_W(Eigen::Vector3d(5, 1, 1));
        CHECK(a(0) == 0.0);
        CHECK(a(1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
        CHECK(a(2) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-15));
        const Eigen::VectorXd b = angle_vector_W(Eigen::Vector3d(2, 1, 0));
        CHECK(b(1) == 0.0);
        CHECK(b(2) == -1.0);
        const Eigen::VectorXd c = angle_vector_W(Eigen::Vector3d(2, 0, 1));
        CHECK(c(1) == 1.0);
        CHECK(std::abs(c(2)) < 1e-16);
        CHECK_THROWS_AS(angle_vector_W(Eigen::Vector3d(1, 0, 0)), DomainError);
    }

    TEST_CASE("umbilic constant angle") {
        for (int n = 1; n <= 3; ++n)
            for (double theta : {0.1, 0.5, 1.0, M_PI / 3}) {
                GraphSample<double> s;
                s.y = Eigen::VectorXd::Constant(n, 0.3);
                s.y(n - 1) = 1.7;
                s.u = theta;
                s.du = Eigen::VectorXd::Zero(n);
                s.d2u = Eigen::MatrixXd::Zero(n, n);
                const ShapeSample<double> sh = shape_at(s);
                CHECK((sh.a_matrix - std::cos(theta) * Eigen::MatrixXd::Identity(n, n))
                          .cwiseAbs()
                          .maxCoeff() < 1e-15);
                for (int i = 0; i < n; ++i) CHECK(std::abs(sh.kappa(i) - std::cos(theta)) < 1e-15);
                CHECK(sh.omega == 1.0);
                CHECK(std::abs(sh.nu_n() + std::sin(theta)) < 1e-15);
                CHECK(std::abs(sh.nu_last() - std::cos(theta)) < 1e-15);
                CHECK(std::abs(sh.normal.dot(angle_vector_W(sh.position)) + 1.0) < 1e-15);
            }
    }

    TEST_CASE("principal curvatures against the fundamental forms") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 200; ++trial) {
            const GraphSample<double> s = random_sample(rng);
            const ShapeSample<double> sh = shape_at(s);
            const TwoFormShape oracle = two_form_shape(s);
            CHECK((sh.normal - oracle.normal).cwiseAbs().maxCoeff() < 1e-13);
            const double z = sh.height();
            for (int i = 0; i < 2; ++i) {
                const double k = z * oracle.kappa_euclid(i) + oracle.normal(2);
                CHECK(std::abs(sh.kappa(i) - k) < 1e-12 * (1.0 + std::abs(k)));
            }
        }
    }

    TEST_CASE("frame and normal identities") {
        std::mt19937_64 rng(4);
        for (int trial = 0; trial < 100; ++trial) {
            const GraphSample<double> s = random_sample(rng);
            const ShapeSample<double> sh = shape_at(s);
            const double yn = s.y(1);
            const Eigen::Matrix2d g = Eigen::Matrix2d::Identity() + yn * yn * s.du * s.du.transpose();
            CHECK((sh.gamma * sh.gamma - g).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((sh.gamma * sh.gamma_inv - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
            CHECK(std::abs(sh.normal.norm() - 1.0) < 1e-14);
            const double nuw = sh.normal.dot(angle_vector_W(sh.position));
            CHECK(std::abs(nuw + 1.0 / sh.omega) < 1e-14);
            const double cu = std::cos(s.u);
            CHECK(std::abs(sh.omega_zn - std::sqrt(1 + yn * yn * cu * cu * s.du.squaredNorm())) < 1e-14);
            // g = nu_n - nu_{n+1} cot u = -1 / (omega sin u)
            const double gval = sh.nu_n() - sh.nu_last() * cu / std::sin(s.u);
            CHECK(std::abs(gval + 1.0 / (sh.omega * std::sin(s.u))) < 1e-13);
        }
    }

    TEST_CASE("curvature jet against finite differences") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 20; ++trial) {
            const GraphSample<double> s = random_sample(rng);
            const ShapeSample<double> sh = shape_at(s);
            const CurvatureJet<double> jet = curvature_jet(s, sh);
            const double h = 1e-6;
            auto A = [](GraphSample<double> t) { return shape_at(t).a_matrix; };
            GraphSample<double> p = s, m = s;
            p.u += h;
            m.u -= h;
            CHECK(((A(p) - A(m)) / (2 * h) - jet.d_u).cwiseAbs().maxCoeff() < 1e-7);
            for (int k = 0; k < 2; ++k) {
                GraphSample<double> pk = s, mk = s;
                pk.du(k) += h;
                mk.du(k) -= h;
                CHECK(((A(pk) - A(mk)) / (2 * h) - jet.d_p[k]).cwiseAbs().maxCoeff() < 1e-7);
            }
            GraphSample<double> ph = s, mh = s;
            ph.d2u(0, 1) += h;
            ph.d2u(1, 0) += h;
            mh.d2u(0, 1) -= h;
            mh.d2u(1, 0) -= h;
            Eigen::Matrix2d E;
            E << 0, 1, 1, 0;
            const Eigen::Matrix2d expect = jet.hess_factor * sh.gamma_inv * E * sh.gamma_inv;
            CHECK(((A(ph) - A(mh)) / (2 * h) - expect).cwiseAbs().maxCoeff() < 1e-7);
        }
    }

    TEST_CASE("sphere as graph has constant curvature sigma") {
        const BarrierBall ball =
            BarrierBall::make(Eigen::VectorXd::Constant(1, 0.0), 2.0, 0.5, 1.0, BallOrientation::Lower);
        CHECK(ball.center_last == -0.5);
        CHECK(ball.sigma() == doctest::Approx(0.5));
        const auto axis = sphere_as_graph(ball, Eigen::Vector2d(0.0, 2.0));
        REQUIRE(axis.has_value());
        const ShapeSample<double> sh = shape_at(*axis);
        CHECK(std::abs(sh.kappa(0) - 0.5) < 1e-8);
        CHECK(std::abs(sh.kappa(1) - 0.5) < 1e-8);
        // The point lies on the sphere.
        const Eigen::VectorXd z = sh.position;
        CHECK(std::abs(std::hypot(z(0), std::hypot(z(1) - 2.0, z(2) + 0.5)) - 1.0) < 1e-13);

        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        int hits = 0;
        for (int trial = 0; trial < 200; ++trial) {
            for (double sigma : {0.3, 0.7}) {
                const BarrierBall b = BarrierBall::make(Eigen::VectorXd::Constant(1, 0.2), 2.0, sigma,
                                                        1.2, BallOrientation::Lower);
                const auto g = sphere_as_graph(b, Eigen::Vector2d(0.2 + 0.8 * U(rng), 2.0 + 0.8 * U(rng)));
                if (!g) continue;
                ++hits;
                const ShapeSample<double> shg = shape_at(*g);
                CHECK(std::abs(shg.kappa(0) - sigma) < 1e-8);
                CHECK(std::abs(shg.kappa(1) - sigma) < 1e-8);
            }
        }
        CHECK(hits > 100);
        CHECK_FALSE(sphere_as_graph(ball, Eigen::Vector2d(10.0, 2.0)).has_value());
        const BarrierBall tiny =
            BarrierBall::make(Eigen::VectorXd::Constant(1, 0.0), 2.0, 0.5, 0.0, BallOrientation::Lower);
        CHECK_FALSE(sphere_as_graph(tiny, Eigen::Vector2d(0.0, 2.0)).has_value());
        CHECK_FALSE(sphere_as_graph(tiny, Eigen::Vector2d(0.0, 1.0)).has_value());
    }

    TEST_CASE("cot u Hessian identity on constant graphs") {
        for (double theta : {0.3, 0.8, 1.2}) {
            QuadraticGraph q;
            q.y0 = Eigen::Vector2d(0.1, 1.8);
            q.c = theta;
            const Eigen::MatrixXd lhs = covariant_hessian_cotu(q, q.y0, 1e-3);
            const Eigen::MatrixXd rhs = cotu_hessian_identity_rhs(q(q.y0));
            // both sides vanish: g A = -cot u I
            CHECK(rhs.cwiseAbs().maxCoeff() < 1e-14);
            CHECK(lhs.cwiseAbs().maxCoeff() < 1e-8);
        }
    }

    TEST_CASE("cot u Hessian identity at random admissible samples") {
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        int accepted = 0;
        while (accepted < 20) {
            QuadraticGraph q;
            q.y0 = Eigen::Vector2d(U(rng), 1.5 + 0.5 * U(rng));
            q.c = 0.6 + 0.4 * U(rng);
            q.b = Eigen::Vector2d(0.3 * U(rng), 0.3 * U(rng));
            q.M << U(rng), 0.3 * U(rng), 0, U(rng);
            q.M(1, 0) = q.M(0, 1);
            const GraphSample<double> s = q(q.y0);
            if (shape_at(s).kappa(0) <= 0.05) continue;
            ++accepted;
            const Eigen::MatrixXd lhs = covariant_hessian_cotu(q, q.y0, 1e-3);
            const Eigen::MatrixXd rhs = cotu_hessian_identity_rhs(s);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-3 * rhs.cwiseAbs().maxCoeff());
        }
    }

    TEST_CASE("cot u Hessian identity residual shrinks with the step") {
        QuadraticGraph q;
        q.y0 = Eigen::Vector2d(0.0, 1.6);
        q.c = 0.7;
        q.b = Eigen::Vector2d(0.2, -0.25);
        q.M << 0.8, 0.1, 0.1, 0.5;
        const Eigen::MatrixXd rhs = cotu_hessian_identity_rhs(q(q.y0));
        double prev = 0.0;
        for (double step : {0.2, 0.1, 0.05}) {
            const double r = (covariant_hessian_cotu(q, q.y0, step) - rhs).cwiseAbs().maxCoeff();
            if (prev > 0.0) CHECK(std::log2(prev / r) >= 1.0);
            prev = r;
        }
    }
}
