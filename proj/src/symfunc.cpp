#include "hypgraph/symfunc.hpp"

#include <limits>
#include <random>
#include <sstream>

namespace hypgraph {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

void SymmetricFunctionSpec::validate() const {
    if (n < 2) throw DomainError("curvature function needs n >= 2");
    switch (kind) {
        case CurvatureKind::Quotient:
            if (index < 0 || index >= n) throw DomainError("quotient index must satisfy 0 <= l < n");
            break;
        case CurvatureKind::Root:
            if (index < 1 || index > n) throw DomainError("root index must satisfy 1 <= k <= n");
            break;
        case CurvatureKind::Mean:
            break;
    }
}

std::string SymmetricFunctionSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case CurvatureKind::Quotient: os << "quotient(n=" << n << ",l=" << index << ")"; break;
        case CurvatureKind::Mean: os << "mean(n=" << n << ")"; break;
        case CurvatureKind::Root: os << "root(n=" << n << ",k=" << index << ")"; break;
    }
    return os.str();
}

SymmetricFunctionSpec SymmetricFunctionSpec::parse(const std::string& text) {
    auto field = [&](const std::string& key) -> int {
        const auto pos = text.find(key + "=");
        if (pos == std::string::npos) throw DomainError("curvature spec missing '" + key + "': " + text);
        return std::stoi(text.substr(pos + key.size() + 1));
    };
    SymmetricFunctionSpec s;
    if (text.rfind("quotient", 0) == 0) {
        s = quotient(field("n"), field("l"));
    } else if (text.rfind("mean", 0) == 0) {
        s = mean(field("n"));
    } else if (text.rfind("root", 0) == 0) {
        s = root(field("n"), field("k"));
    } else {
        throw DomainError("unknown curvature spec: " + text);
    }
    s.validate();
    return s;
}

namespace {

Eigen::VectorXd random_cone_point(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> logu(-2.0, 2.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = std::exp(logu(rng));
    return v;
}

using GradientFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

ClassReport run_checks(const ScalarFunction& f, const GradientFunction& grad, int n,
                       int sample_count, std::uint64_t seed) {
    if (sample_count < 1) throw DomainError("check_class_membership: sample_count must be >= 1");
    std::mt19937_64 rng(seed);
    ClassReport rep;

    rep.positivity.worst = std::numeric_limits<double>::infinity();
    rep.concavity.worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_count; ++s) {
        const Eigen::VectorXd a = random_cone_point(n, rng);
        const Eigen::VectorXd b = random_cone_point(n, rng);

        const double gmin = grad(a).minCoeff();
        rep.positivity.worst = std::min(rep.positivity.worst, gmin);
        ++rep.positivity.samples;

        const double gap = f(0.5 * (a + b)) - 0.5 * (f(a) + f(b));
        rep.concavity.worst = std::min(rep.concavity.worst, gap);
        ++rep.concavity.samples;

        const double fa = f(a);
        for (double t : {0.5, 2.0, 10.0}) {
            const double dev = std::abs(f(t * a) - t * fa) / std::max(1.0, std::abs(t * fa));
            rep.homogeneity.worst = std::max(rep.homogeneity.worst, dev);
            ++rep.homogeneity.samples;
        }
    }
    rep.positivity.pass = rep.positivity.worst > 0.0;
    rep.concavity.pass = rep.concavity.worst >= -1e-12;
    rep.homogeneity.pass = rep.homogeneity.worst <= 1e-12;

    rep.normalization.worst = std::abs(f(Eigen::VectorXd::Ones(n)) - 1.0);
    rep.normalization.samples = 1;
    rep.normalization.pass = rep.normalization.worst <= 1e-12;

    // Trend of f(lambda', lambda_n + R) for lambda in a small ball around (1,...,1).
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    rep.growth.r_max = 1e6;
    rep.growth.min_value_at_rmax = std::numeric_limits<double>::infinity();
    const int trend_samples = std::max(1, std::min(sample_count, 32));
    for (int s = 0; s < trend_samples; ++s) {
        Eigen::VectorXd base = Eigen::VectorXd::Ones(n);
        for (int i = 0; i < n; ++i) base(i) += jitter(rng) / std::sqrt(double(n));
        double prev = -std::numeric_limits<double>::infinity();
        for (double r = 0.0; r <= rep.growth.r_max; r = (r == 0.0 ? 1e-3 : r * 10.0)) {
            Eigen::VectorXd lam = base;
            lam(n - 1) += r;
            const double v = f(lam);
            if (v < prev * (1.0 - 1e-13)) rep.growth.monotone = false;
            prev = v;
        }
        rep.growth.min_value_at_rmax = std::min(rep.growth.min_value_at_rmax, prev);
    }
    return rep;
}

}  // namespace

ClassReport check_class_membership(const SymmetricFunctionSpec& spec, int sample_count,
                                   std::uint64_t seed) {
    spec.validate();
    auto f = [&](const Eigen::VectorXd& l) { return eval_f(spec, l); };
    auto g = [&](const Eigen::VectorXd& l) { return Eigen::VectorXd(grad_f(spec, l)); };
    return run_checks(f, g, spec.n, sample_count, seed);
}

ClassReport check_class_membership(const ScalarFunction& f, int n, int sample_count,
                                   std::uint64_t seed) {
    auto g = [&](const Eigen::VectorXd& l) {
        Eigen::VectorXd out(n);
        for (int i = 0; i < n; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(l(i)));
            Eigen::VectorXd p = l, m = l;
            p(i) += h;
            m(i) -= h;
            out(i) = (f(p) - f(m)) / (2 * h);
        }
        return out;
    };
    return run_checks(f, g, n, sample_count, seed);
}

}  // namespace hypgraph
