#include <doctest.h>

#include <random>

#include "hypgraph/symfunc.hpp"

using namespace hypgraph;

namespace {

// e_k by explicit enumeration of k-subsets.
double subset_oracle(const Eigen::VectorXd& lam, int k) {
    const int n = static_cast<int>(lam.size());
    double sum = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double p = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) p *= lam(i);
        sum += p;
    }
    return sum / binomial(n, k);
}

std::vector<SymmetricFunctionSpec> all_specs(int n) {
    std::vector<SymmetricFunctionSpec> out{SymmetricFunctionSpec::mean(n)};
    for (int l = 0; l < n; ++l) out.push_back(SymmetricFunctionSpec::quotient(n, l));
    for (int k = 1; k <= n; ++k) out.push_back(SymmetricFunctionSpec::root(n, k));
    return out;
}

Eigen::VectorXd cone_point(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = std::exp(U(rng));
    return v;
}

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = N(rng);
    return Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ();
}

}  // namespace

TEST_SUITE("symfunc") {
    TEST_CASE("elementary symmetric examples") {
        CHECK(elementary_symmetric(Eigen::Vector3d(1, 1, 1), 2) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(elementary_symmetric(Eigen::Vector2d(1, 4), 2) == doctest::Approx(4.0).epsilon(1e-15));
        const Eigen::Vector3d lam(0.5, 2.0, 3.0);
        CHECK(elementary_symmetric(lam, 1) == doctest::Approx((0.5 + 2.0 + 3.0) / 3.0).epsilon(1e-15));
        CHECK(elementary_symmetric(lam, 0) == 1.0);
        CHECK_THROWS_AS(elementary_symmetric(lam, 4), DomainError);
        CHECK_THROWS_AS(elementary_symmetric(lam, -1), DomainError);
    }

    TEST_CASE("elementary symmetric against subset enumeration") {
        std::mt19937_64 rng(11);
        for (int n = 2; n <= 6; ++n)
            for (int trial = 0; trial < 5; ++trial) {
                const Eigen::VectorXd lam = cone_point(rng, n);
                for (int k = 0; k <= n; ++k)
                    CHECK(elementary_symmetric(lam, k) ==
                          doctest::Approx(subset_oracle(lam, k)).epsilon(1e-13));
            }
    }

    TEST_CASE("eval_f examples") {
        CHECK(eval_f(SymmetricFunctionSpec::quotient(2, 0), Eigen::Vector2d(1, 4)) ==
              doctest::Approx(2.0).epsilon(1e-15));
        CHECK(eval_f(SymmetricFunctionSpec::mean(3), Eigen::Vector3d(3, 3, 3)) ==
              doctest::Approx(3.0).epsilon(1e-15));
        // (H_3/H_1)^(1/2) with H_3 = 6, H_1 = 2
        const Eigen::Vector3d lam(1, 2, 3);
        const double direct = std::sqrt((1.0 * 2.0 * 3.0) / ((1.0 + 2.0 + 3.0) / 3.0));
        CHECK(eval_f(SymmetricFunctionSpec::quotient(3, 1), lam) ==
              doctest::Approx(direct).epsilon(1e-14));
        CHECK(direct == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    }

    TEST_CASE("eval_f cone boundary and outside") {
        for (const auto& s : all_specs(3)) {
            if (s.kind == CurvatureKind::Mean) continue;
            if (s.kind == CurvatureKind::Root && s.index < 3) continue;
            CHECK(eval_f(s, Eigen::Vector3d(0.0, 1.0, 2.0)) == 0.0);
        }
        CHECK_THROWS_AS(eval_f(SymmetricFunctionSpec::quotient(2, 0), Eigen::Vector2d(-0.1, 1)),
                        AdmissibilityError);
    }

    TEST_CASE("grad_f examples and finite differences") {
        const Eigen::Vector3d lam(0.7, 1.3, 2.9);
        const Eigen::VectorXd gm = grad_f(SymmetricFunctionSpec::mean(3), lam);
        for (int i = 0; i < 3; ++i) CHECK(gm(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        const Eigen::VectorXd g2 = grad_f(SymmetricFunctionSpec::quotient(2, 0), Eigen::Vector2d(1, 1));
        CHECK(g2(0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(g2(1) == doctest::Approx(0.5).epsilon(1e-15));

        const auto spec = SymmetricFunctionSpec::quotient(3, 1);
        const Eigen::Vector3d x(1, 2, 3);
        const Eigen::VectorXd g = grad_f(spec, x);
        for (int i = 0; i < 3; ++i) {
            const double h = 1e-6;
            Eigen::Vector3d p = x, m = x;
            p(i) += h;
            m(i) -= h;
            const double fd = (eval_f(spec, p) - eval_f(spec, m)) / (2 * h);
            CHECK(std::abs(g(i) - fd) <= 1e-6 * std::abs(fd));
        }
        CHECK_THROWS_AS(grad_f(SymmetricFunctionSpec::quotient(2, 0), Eigen::Vector2d(0, 1)),
                        SingularGradientError);
    }

    TEST_CASE("Euler relation, homogeneity and bound chain at random cone points") {
        std::mt19937_64 rng(5);
        for (int n = 2; n <= 4; ++n)
            for (const auto& s : all_specs(n))
                for (int trial = 0; trial < 30; ++trial) {
                    const Eigen::VectorXd lam = cone_point(rng, n);
                    const double f = eval_f(s, lam);
                    const Eigen::VectorXd g = grad_f(s, lam);
                    CHECK(std::abs(lam.dot(g) - f) <= 1e-12 * std::max(1.0, std::abs(f)));
                    CHECK(g.minCoeff() > 0.0);
                    for (double t : {0.5, 2.0, 10.0})
                        CHECK(std::abs(eval_f(s, Eigen::VectorXd(t * lam)) - t * f) <= 1e-12 * t * f);
                    CHECK(f <= lam.mean() * (1 + 1e-14));
                    CHECK(g.sum() >= 1.0 - 1e-12);
                }
    }

    TEST_CASE("eval_F isotropic and diagonal cases") {
        for (const auto& s : all_specs(3)) {
            const double c = 1.7;
            const SpectralEval<double> e = eval_F(s, Eigen::MatrixXd(c * Eigen::Matrix3d::Identity()));
            CHECK(e.value == doctest::Approx(c).epsilon(1e-14));
            const double sf = grad_f(s, Eigen::Vector3d::Constant(c)).sum();
            CHECK((e.fij_matrix - sf / 3.0 * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
            CHECK((e.fij_matrix.cwiseProduct(c * Eigen::Matrix3d::Identity())).sum() ==
                  doctest::Approx(c).epsilon(1e-14));

            const Eigen::Vector3d d(0.4, 1.1, 2.5);
            const SpectralEval<double> ed = eval_F(s, Eigen::MatrixXd(d.asDiagonal()));
            const Eigen::VectorXd gd = grad_f(s, d);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    CHECK(std::abs(ed.fij_matrix(i, j) - (i == j ? gd(i) : 0.0)) < 1e-14);
        }
    }

    TEST_CASE("eval_F errors") {
        Eigen::Matrix2d A;
        A << 1.0, 0.2, 0.3, 1.0;
        CHECK_THROWS_AS(eval_F(SymmetricFunctionSpec::quotient(2, 0), A), ContractError);
        Eigen::Matrix2d B;
        B << 1.0, 0.0, 0.0, -0.25;
        try {
            eval_F(SymmetricFunctionSpec::quotient(2, 0), B);
            CHECK(false);
        } catch (const AdmissibilityError& e) {
            CHECK(e.lambda_min() == doctest::Approx(-0.25));
        }
    }

    TEST_CASE("spectral consistency and basis invariance") {
        std::mt19937_64 rng(17);
        for (int n = 2; n <= 4; ++n)
            for (const auto& s : all_specs(n))
                for (int trial = 0; trial < 10; ++trial) {
                    const Eigen::VectorXd lam = cone_point(rng, n);
                    const Eigen::MatrixXd Q = random_orthogonal(rng, n);
                    const Eigen::MatrixXd A = Q * lam.asDiagonal() * Q.transpose();
                    const Eigen::MatrixXd As = 0.5 * (A + A.transpose());
                    const SpectralEval<double> e = eval_F(s, As);
                    Eigen::VectorXd fij_eigs =
                        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e.fij_matrix).eigenvalues();
                    Eigen::VectorXd g = grad_f(s, e.eigenvalues);
                    std::sort(g.data(), g.data() + n);
                    for (int i = 0; i < n; ++i)
                        CHECK(std::abs(fij_eigs(i) - g(i)) <= 1e-10 * g.cwiseAbs().maxCoeff());
                    CHECK(std::abs(e.fij_matrix.cwiseProduct(As).sum() - e.value) <= 1e-12 * e.value);
                    const Eigen::MatrixXd R = random_orthogonal(rng, n);
                    Eigen::MatrixXd B = R * As * R.transpose();
                    B = 0.5 * (B + B.transpose()).eval();
                    CHECK(std::abs(eval_F(s, B).value - e.value) <= 1e-12 * e.value);
                }
    }

    TEST_CASE("F^ij against entry-wise finite differences") {
        std::mt19937_64 rng(23);
        auto check_matrix = [&](const SymmetricFunctionSpec& s, const Eigen::MatrixXd& A) {
            const SpectralEval<double> e = eval_F(s, A);
            const int n = static_cast<int>(A.rows());
            const double h = 1e-6;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    // symmetric perturbation E_ij + E_ji (or E_ii)
                    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
                    E(i, j) += 1.0;
                    if (i != j) E(j, i) += 1.0;
                    const double fd =
                        (eval_F(s, Eigen::MatrixXd(A + h * E)).value -
                         eval_F(s, Eigen::MatrixXd(A - h * E)).value) / (2 * h);
                    const double an = (i == j) ? e.fij_matrix(i, i) : 2.0 * e.fij_matrix(i, j);
                    const double scale = e.fij_matrix.cwiseAbs().maxCoeff();
                    CHECK(std::abs(an - fd) <= 1e-6 * scale);
                }
        };
        for (int n : {2, 3})
            for (int trial = 0; trial < 10; ++trial) {
                const Eigen::VectorXd lam = cone_point(rng, n);
                const Eigen::MatrixXd Q = random_orthogonal(rng, n);
                Eigen::MatrixXd A = Q * lam.asDiagonal() * Q.transpose();
                A = 0.5 * (A + A.transpose()).eval();
                check_matrix(SymmetricFunctionSpec::quotient(n, n - 1), A);
                check_matrix(SymmetricFunctionSpec::quotient(n, 0), A);
            }
        // Nearly repeated eigenvalues.
        const Eigen::MatrixXd Q = random_orthogonal(rng, 3);
        const Eigen::Vector3d lam(1.0, 1.0 + 5e-10, 2.0);
        Eigen::MatrixXd A = Q * lam.asDiagonal() * Q.transpose();
        A = 0.5 * (A + A.transpose()).eval();
        check_matrix(SymmetricFunctionSpec::quotient(3, 1), A);
    }

    TEST_CASE("class membership") {
        const ClassReport q = check_class_membership(SymmetricFunctionSpec::quotient(2, 0), 200, 3);
        CHECK(q.all_pass());
        const ClassReport m = check_class_membership(SymmetricFunctionSpec::mean(3), 200, 3);
        CHECK(m.all_pass());
        CHECK(m.growth.min_value_at_rmax >= m.growth.r_max / 3.0);

        // Smoothed maximum: symmetric, homogeneous, convex rather than concave.
        auto smooth_max = [](const Eigen::VectorXd& x) {
            const double p = 8.0;
            return std::pow(x.array().pow(p).mean(), 1.0 / p);
        };
        const ClassReport bad = check_class_membership(smooth_max, 3, 200, 3);
        CHECK_FALSE(bad.concavity.pass);
        CHECK(bad.concavity.worst < -1e-12);
    }

    TEST_CASE("spec parsing round trip") {
        for (int n = 2; n <= 4; ++n)
            for (const auto& s : all_specs(n)) CHECK(SymmetricFunctionSpec::parse(s.describe()) == s);
        CHECK_THROWS(SymmetricFunctionSpec::parse("quotient(n=2,l=2)"));
        CHECK_THROWS(SymmetricFunctionSpec::parse("cubic(n=2)"));
    }
}
