#include <doctest.h>

#include "hypgraph/diagnostics.hpp"
#include "hypgraph/report.hpp"
#include "support.hpp"

using namespace hypgraph;

namespace {

SolveConfig disk_config() {
    SolveConfig c;
    c.spec = SymmetricFunctionSpec::quotient(2, 0);
    c.sigma = 0.5;
    c.eps = 0.1;
    return c;
}

std::shared_ptr<const Grid> disk_grid(int res) {
    return std::make_shared<const Grid>(build_grid(DomainSpec::disk(Eigen::Vector2d(0, 2), 0.5), res));
}

const SolveResult& solved_disk() {
    static const SolveResult r = homotopy_solve(disk_config(), disk_grid(33)).result;
    return r;
}

SolveResult with_values(const SolveResult& base, const Eigen::VectorXd& u) {
    SolveResult r = base;
    r.field = GraphField(base.field.grid, u);
    return r;
}

EpsilonEntry entry(double eps, double d2u, double kmax, double omega) {
    EpsilonEntry e;
    e.eps = eps;
    e.sinu_d2u_sup = d2u;
    e.kappa_min = 0.3;
    e.kappa_max = kmax;
    e.boundary_omega_min = e.boundary_omega_max = omega;
    e.ring_omega_min = e.ring_omega_max = omega;
    return e;
}

}  // namespace

TEST_SUITE("diagnostics") {
    TEST_CASE("solved state passes every check") {
        const SolveResult& r = solved_disk();
        REQUIRE(r.converged);
        const DiagnosticsReport rep = diagnose(r, disk_config());
        REQUIRE(rep.c0);
        CHECK(rep.c0->pass);
        CHECK(rep.c0->above_eps);
        CHECK(rep.c0->below_barrier);
        CHECK(rep.c0->interior.size() == 16);
        REQUIRE(rep.gradient);
        CHECK(rep.gradient->omega_pass);
        CHECK(rep.gradient->identity_pass);
        CHECK(rep.gradient->geodesic_graph);
        CHECK(rep.gradient->ring_pass);
        CHECK(rep.gradient->argmin_pass);
        REQUIRE(rep.identities);
        CHECK(rep.identities->identities_pass);
        CHECK(rep.identities->sign_pass);
        REQUIRE(rep.second_order);
        CHECK(rep.second_order->stability_skipped);
        CHECK(rep.kappa_min > 0.0);
        CHECK_FALSE(rep.kernels.empty());
        CHECK(rep.all_pass());
    }

    TEST_CASE("c0 negative controls") {
        const SolveResult& r = solved_disk();
        const Grid& g = *r.field.grid;
        Eigen::VectorXd high = r.field.values, low = r.field.values;
        for (long i : g.interior_indices()) {
            high(i) = 1.4;
            low(i) = 0.05;
        }
        const C0Check ch = verify_c0(with_values(r, high), g.domain, disk_config());
        CHECK_FALSE(ch.below_barrier);
        CHECK_FALSE(ch.pass);
        const C0Check cl = verify_c0(with_values(r, low), g.domain, disk_config());
        CHECK_FALSE(cl.above_eps);
        CHECK_FALSE(cl.pass);
    }

    TEST_CASE("gradient negative control") {
        const SolveResult& r = solved_disk();
        const Grid& g = *r.field.grid;
        Eigen::VectorXd steep(g.size());
        // u in (0.07, 1.53); |Du| = 1.45 gives omega up to 3.8 against 1/sigma = 2
        for (long i = 0; i < g.size(); ++i) steep(i) = 0.8 + 1.45 * g.nodes(0, i);
        const GradientCheck c = verify_gradient(with_values(r, steep), disk_config());
        CHECK(c.omega_sup > 3.0);
        CHECK_FALSE(c.omega_pass);
        CHECK_FALSE(c.pass);
        CHECK(c.identity_pass);
        CHECK(c.geodesic_graph);
    }

    TEST_CASE("identity negative control") {
        std::mt19937_64 rng(2);
        auto g = disk_grid(33);
        SolveResult fake;
        fake.field = test::smooth_state(g, disk_config().spec, rng);
        fake.sigma = 0.5;
        const IdentityCheck c = verify_identities(fake, disk_config());
        CHECK_FALSE(c.identities_pass);
        CHECK_FALSE(c.pass);
    }

    TEST_CASE("constant state at the base curvature") {
        auto g = disk_grid(17);
        SolveConfig c = disk_config();
        c.sigma = std::cos(c.eps);
        const SolveResult r = newton_solve(GraphField::constant(g, c.eps), c);
        REQUIRE(r.converged);
        const GradientCheck gc = verify_gradient(r, c);
        CHECK(gc.omega_sup == 1.0);
        CHECK(gc.omega_pass);
        CHECK(gc.nu_w_identity < 1e-15);
        // the barrier needs sigma < cos eps strictly
        CHECK_THROWS_AS(verify_c0(r, g->domain, c), InfeasibleError);
    }

    TEST_CASE("second-order stability and boundary omega") {
        const SecondOrderCheck good =
            verify_second_order({entry(0.2, 1.0, 1.0, 2.0), entry(0.05, 1.2, 1.1, 1.95)}, 0.5);
        CHECK_FALSE(good.stability_skipped);
        CHECK(good.d2u_ratio == doctest::Approx(1.2));
        CHECK(good.stability_pass);
        CHECK(good.boundary_omega_pass);
        CHECK(good.pass);
        const SecondOrderCheck blowup =
            verify_second_order({entry(0.2, 1.0, 1.0, 2.0), entry(0.05, 1.6, 1.1, 2.0)}, 0.5);
        CHECK_FALSE(blowup.stability_pass);
        CHECK_FALSE(blowup.pass);
        const SecondOrderCheck far =
            verify_second_order({entry(0.2, 1.0, 1.0, 1.5), entry(0.05, 1.0, 1.0, 1.7)}, 0.5);
        CHECK(far.ring_omega_deviation == doctest::Approx(0.15));
        CHECK_FALSE(far.boundary_omega_pass);
        CHECK_FALSE(far.pass);
        const SecondOrderCheck single = verify_second_order({entry(0.1, 1.0, 1.0, 1.5)}, 0.5);
        CHECK(single.stability_skipped);
        CHECK(single.pass);
    }

    TEST_CASE("skipped sections are marked") {
        DiagnosticsReport empty;
        empty.label = "none";
        const Json j = Json::parse(emit_report(empty, ReportFormat::Structured));
        for (const char* key : {"c0", "gradient", "second_order", "identities", "kernels", "hypotheses", "curvature"})
            CHECK(j.at(key).at("skipped").get<bool>());
        CHECK(j.at("all_pass").get<bool>());
        const std::string table = emit_report(empty, ReportFormat::Table);
        CHECK(table.find("c0.skipped = true") != std::string::npos);
        CHECK(table.find("label = none") != std::string::npos);
    }

    TEST_CASE("structured report round trip and determinism") {
        const SolveResult& r = solved_disk();
        const DiagnosticsReport a = diagnose(r, disk_config());
        const DiagnosticsReport b = diagnose(r, disk_config());
        const std::string sa = emit_report(a, ReportFormat::Structured);
        CHECK(sa == emit_report(b, ReportFormat::Structured));
        CHECK(emit_report(a, ReportFormat::Table) == emit_report(b, ReportFormat::Table));
        const Json j = Json::parse(sa);
        CHECK(j["c0"]["u_max"].get<double>() == a.c0->u_max);
        CHECK(j["c0"]["barrier"].get<double>() == a.c0->barrier);
        CHECK(j["gradient"]["omega_sup"].get<double>() == a.gradient->omega_sup);
        CHECK(j["identities"]["max_hessian"].get<double>() == a.identities->max_hessian);
        CHECK(j["curvature"]["kappa_max"].get<double>() == a.kappa_max);
        CHECK(j["all_pass"].get<bool>() == a.all_pass());
        // pass flags agree with their inequalities
        CHECK(j["gradient"]["omega_pass"].get<bool>() ==
              (j["gradient"]["omega_sup"].get<double>() <= j["gradient"]["limit"].get<double>()));
        CHECK(j["c0"]["below_barrier"].get<bool>() ==
              (j["c0"]["u_max"].get<double>() <= j["c0"]["barrier"].get<double>() + j["c0"]["tolerance"].get<double>()));
        // a different seed samples different nodes
        DiagnosticsOptions other;
        other.seed = 99;
        const C0Check c = verify_c0(r, r.field.grid->domain, disk_config(), other);
        bool differs = false;
        for (std::size_t k = 0; k < c.interior.size(); ++k)
            differs = differs || c.interior[k].node != a.c0->interior[k].node;
        CHECK(differs);
    }

    TEST_CASE("local interpolant reproduces quartic fields") {
        auto g = disk_grid(33);
        Eigen::VectorXd u(g->size());
        auto poly = [](double a, double b) { return 0.4 + 0.1 * a * a * b - 0.05 * std::pow(b - 2.0, 4) + 0.02 * a; };
        for (long i = 0; i < g->size(); ++i) u(i) = poly(g->nodes(0, i), g->nodes(1, i));
        const GraphField f(g, u);
        const Eigen::Vector2d y0(0.05, 2.1);
        const GraphSample<double> s = local_interpolant(f, y0)(y0);
        CHECK(std::abs(s.u - poly(0.05, 2.1)) < 1e-10);
        CHECK(std::abs(s.du(0) - (0.2 * 0.05 * 2.1 + 0.02)) < 1e-9);
        CHECK(std::abs(s.d2u(0, 0) - 0.2 * 2.1) < 1e-7);
    }
}
