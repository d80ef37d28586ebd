#ifndef HYPGRAPH_SYMFUNC_HPP
#define HYPGRAPH_SYMFUNC_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include "hypgraph/errors.hpp"

namespace hypgraph {

enum class CurvatureKind { Quotient, Mean, Root };

// Which normalized curvature function f the run uses.
//   Quotient(l): f = (H_n / H_l)^(1/(n-l)), 0 <= l < n
//   Mean:        f = H_1
//   Root(k):     f = H_k^(1/k), 1 <= k <= n
struct SymmetricFunctionSpec {
    int n = 2;
    CurvatureKind kind = CurvatureKind::Quotient;
    int index = 0;

    static SymmetricFunctionSpec quotient(int n, int l) { return {n, CurvatureKind::Quotient, l}; }
    static SymmetricFunctionSpec mean(int n) { return {n, CurvatureKind::Mean, 1}; }
    static SymmetricFunctionSpec root(int n, int k) { return {n, CurvatureKind::Root, k}; }

    void validate() const;
    std::string describe() const;
    // Inverse of describe(): "quotient(n=2,l=0)", "mean(n=3)", "root(n=3,k=2)".
    static SymmetricFunctionSpec parse(const std::string& text);
};

inline bool operator==(const SymmetricFunctionSpec& a, const SymmetricFunctionSpec& b) {
    return a.n == b.n && a.kind == b.kind && (a.kind == CurvatureKind::Mean || a.index == b.index);
}

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct SpectralEval {
    Scalar value{};
    VectorX<Scalar> gradient;     // f_i at the sorted eigenvalues
    VectorX<Scalar> eigenvalues;  // ascending
    MatrixX<Scalar> fij_matrix;   // F^{ij} in the basis of the input matrix
    MatrixX<Scalar> eigenvectors;
};

double binomial(int n, int k);

namespace detail {

// Unnormalized e_0..e_m of the entries of lambda, skipping entry `skip` (or none).
template <typename Derived>
VectorX<typename Derived::Scalar> raw_elementary(const Eigen::MatrixBase<Derived>& lambda,
                                                 Eigen::Index skip = -1) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = lambda.size();
    VectorX<Scalar> e = VectorX<Scalar>::Zero(n + 1);
    e(0) = Scalar(1);
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i == skip) continue;
        ++count;
        for (Eigen::Index k = count; k >= 1; --k) e(k) += lambda(i) * e(k - 1);
    }
    return e;
}

template <typename Scalar>
void require_closed_cone(const VectorX<Scalar>& lambda) {
    const Scalar lo = lambda.minCoeff();
    if (lo < Scalar(0))
        throw AdmissibilityError("eigenvalue tuple leaves the closed positive cone",
                                 static_cast<double>(lo));
}

}  // namespace detail

// Normalized elementary symmetric polynomial H_k = e_k / C(n, k).
template <typename Derived>
typename Derived::Scalar elementary_symmetric(const Eigen::MatrixBase<Derived>& lambda, int k) {
    using Scalar = typename Derived::Scalar;
    const int n = static_cast<int>(lambda.size());
    if (k < 0 || k > n) throw DomainError("elementary_symmetric: k out of range");
    if (k == 0) return Scalar(1);
    return detail::raw_elementary(lambda)(k) / Scalar(binomial(n, k));
}

template <typename Derived>
typename Derived::Scalar eval_f(const SymmetricFunctionSpec& spec,
                                const Eigen::MatrixBase<Derived>& lambda_in) {
    using Scalar = typename Derived::Scalar;
    spec.validate();
    if (lambda_in.size() != spec.n) throw ContractError("eval_f: dimension mismatch");
    const VectorX<Scalar> lambda = lambda_in;
    detail::require_closed_cone(lambda);
    const int n = spec.n;
    switch (spec.kind) {
        case CurvatureKind::Mean:
            return lambda.sum() / Scalar(n);
        case CurvatureKind::Root: {
            const Scalar hk = elementary_symmetric(lambda, spec.index);
            return std::pow(std::max(hk, Scalar(0)), Scalar(1) / Scalar(spec.index));
        }
        case CurvatureKind::Quotient: {
            const int l = spec.index;
            const Scalar hn = elementary_symmetric(lambda, n);
            const Scalar hl = elementary_symmetric(lambda, l);
            if (hn <= Scalar(0) || hl <= Scalar(0)) return Scalar(0);
            return std::pow(hn / hl, Scalar(1) / Scalar(n - l));
        }
    }
    return Scalar(0);
}

template <typename Derived>
VectorX<typename Derived::Scalar> grad_f(const SymmetricFunctionSpec& spec,
                                         const Eigen::MatrixBase<Derived>& lambda_in) {
    using Scalar = typename Derived::Scalar;
    spec.validate();
    if (lambda_in.size() != spec.n) throw ContractError("grad_f: dimension mismatch");
    const VectorX<Scalar> lambda = lambda_in;
    detail::require_closed_cone(lambda);
    const int n = spec.n;
    VectorX<Scalar> g(n);
    if (spec.kind == CurvatureKind::Mean) {
        g.setConstant(Scalar(1) / Scalar(n));
        return g;
    }
    if (spec.kind == CurvatureKind::Quotient && lambda.minCoeff() <= Scalar(0))
        throw SingularGradientError("grad_f: quotient gradient is singular on the cone boundary");

    const VectorX<Scalar> e = detail::raw_elementary(lambda);
    const Scalar f = eval_f(spec, lambda);
    if (spec.kind == CurvatureKind::Root) {
        const int k = spec.index;
        if (e(k) <= Scalar(0)) throw SingularGradientError("grad_f: H_k vanishes");
        for (int i = 0; i < n; ++i) {
            const Scalar dek = detail::raw_elementary(lambda, i)(k - 1);
            g(i) = f / Scalar(k) * dek / e(k);
        }
        return g;
    }
    const int l = spec.index;
    for (int i = 0; i < n; ++i) {
        const VectorX<Scalar> ei = detail::raw_elementary(lambda, i);
        Scalar t = ei(n - 1) / e(n);
        if (l > 0) t -= ei(l - 1) / e(l);
        g(i) = f / Scalar(n - l) * t;
    }
    return g;
}

// F(A) = f(lambda(A)) with its first derivative F^{ij}.  Within clusters of
// eigenvalues closer than 1e-9 max|lambda| the f_i are averaged, which is the
// limit of the divided differences and makes F^{ij} independent of the
// eigenvector choice inside the cluster.
template <typename Derived>
SpectralEval<typename Derived::Scalar> eval_F(const SymmetricFunctionSpec& spec,
                                              const Eigen::MatrixBase<Derived>& A_in) {
    using Scalar = typename Derived::Scalar;
    using std::abs;
    const int n = spec.n;
    if (A_in.rows() != n || A_in.cols() != n) throw ContractError("eval_F: dimension mismatch");
    const MatrixX<Scalar> A = A_in;
    const Scalar scale = std::max(Scalar(1), A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
        throw ContractError("eval_F: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(Scalar(0.5) * (A + A.transpose()));
    SpectralEval<Scalar> out;
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    if (out.eigenvalues(0) <= Scalar(0))
        throw AdmissibilityError("eval_F: spectrum outside the open positive cone",
                                 static_cast<double>(out.eigenvalues(0)));
    out.value = eval_f(spec, out.eigenvalues);
    out.gradient = grad_f(spec, out.eigenvalues);

    const Scalar tol = Scalar(1e-9) * out.eigenvalues.cwiseAbs().maxCoeff();
    VectorX<Scalar> fi = out.gradient;
    for (int start = 0; start < n;) {
        int stop = start + 1;
        while (stop < n && out.eigenvalues(stop) - out.eigenvalues(stop - 1) < tol) ++stop;
        if (stop - start > 1) fi.segment(start, stop - start).setConstant(
                                  fi.segment(start, stop - start).mean());
        start = stop;
    }
    out.gradient = fi;
    out.fij_matrix = out.eigenvectors * fi.asDiagonal() * out.eigenvectors.transpose();
    out.fij_matrix = Scalar(0.5) * (out.fij_matrix + out.fij_matrix.transpose()).eval();
    return out;
}

struct ConditionVerdict {
    bool pass = true;
    double worst = 0.0;  // worst measured quantity for the condition
    int samples = 0;
};

// Growth of f(lambda', lambda_n + R) in R near (1,...,1).
struct GrowthTrend {
    bool monotone = true;
    double r_max = 0.0;
    double min_value_at_rmax = 0.0;
};

struct ClassReport {
    ConditionVerdict positivity;     // min f_i
    ConditionVerdict concavity;      // min of f(mid) - (f(a)+f(b))/2
    ConditionVerdict homogeneity;    // max relative deviation
    ConditionVerdict normalization;  // |f(1,...,1) - 1|
    GrowthTrend growth;

    bool all_pass() const {
        return positivity.pass && concavity.pass && homogeneity.pass && normalization.pass &&
               growth.monotone;
    }
};

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

ClassReport check_class_membership(const SymmetricFunctionSpec& spec, int sample_count,
                                   std::uint64_t seed);
// Same checks for an arbitrary function of n arguments; positivity uses central differences.
ClassReport check_class_membership(const ScalarFunction& f, int n, int sample_count,
                                   std::uint64_t seed);

}  // namespace hypgraph

#endif
