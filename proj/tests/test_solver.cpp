#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fracvar/catalog.hpp"
#include "fracvar/rng.hpp"
#include "fracvar/solver.hpp"

using namespace fracvar;

TEST_CASE("discrete gradient of the linear constraint is the weight field") {
    const Grid2D g = make_grid(0, 1, 0, 1, 9, 9);
    const FractionalOrder alpha(0.5);
    const auto p = make_dirichlet_quadratic_problem(g, alpha);
    const QuadratureWeights qw(g, alpha);
    const double a2 = alpha.value() * alpha.value();

    const Field2D u = sample([](double x, double y) { return std::sin(3 * x) + y; }, g);
    const Field2D grad = discrete_gradient(p, Functional::constraint, u);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            CHECK(grad(i, j) ==
                  Catch::Approx(a2 * qw.wx[static_cast<std::size_t>(i)] *
                                qw.wy[static_cast<std::size_t>(j)]).epsilon(1e-14));
}

TEST_CASE("discrete gradient of a state-independent objective vanishes") {
    const Grid2D g = make_grid(0, 1, 0, 1, 9, 9);
    IsoperimetricProblem p{g, FractionalOrder(0.4), integrand_one(), integrand_zero(), 0.0,
                           std::nullopt};
    const Field2D grad =
        discrete_gradient(p, Functional::objective, sample([](double x, double y) { return x * y; }, g));
    for (double v : grad.values()) CHECK(v == 0.0);
}

TEST_CASE("discrete gradient passes directional finite-difference checks", "[property]") {
    const Grid2D g = make_grid(0, 1, 0, 1, 13, 13);
    const FractionalOrder alpha(0.5);
    detail::Rng rng(2718);
    int checked = 0;
    for (const char* name : {"dirichlet-quadratic", "manufactured", "linear-g"}) {
        const auto p = make_catalog_problem(name, g, alpha);
        for (int draw = 0; draw < 20; ++draw) {
            std::vector<double> uv(g.size()), ev(g.size());
            for (auto& v : uv) v = rng.uniform(-1, 1);
            for (auto& v : ev) v = rng.uniform(-1, 1);
            const Field2D u(g, uv), eta(g, ev);
            for (Functional which : {Functional::objective, Functional::constraint}) {
                const Field2D grad = discrete_gradient(p, which, u);
                double pairing = 0.0;
                for (std::size_t k = 0; k < g.size(); ++k)
                    pairing += grad.values()[k] * eta.values()[k];
                const double fd = gateaux_derivative(p, which, u, eta);
                const double tol = std::max(1e-6, 1e-4 * std::abs(fd));
                CAPTURE(name, draw);
                CHECK(std::abs(pairing - fd) <= tol);
                ++checked;
            }
        }
    }
    CHECK(checked == 120);
}

TEST_CASE("manufactured fixed-boundary solve recovers the reference solution") {
    const Grid2D g = make_grid(0, 1, 0, 1, 33, 33);
    const auto p = make_manufactured_problem(g, FractionalOrder(0.5));
    const SolveReport rep = solve_fixed_boundary(p, SolveOptions{});

    CHECK(rep.status == SolveStatus::converged);
    CHECK(rep.objective <= 1e-6);
    CHECK(rep.constraint_violation <= 1e-8);
    CHECK(rep.el_residual_max <= 1e-3);
    CHECK(std::isnan(rep.nat_bc_residual_max));
    CHECK(max_abs(rep.u - manufactured_reference(g)) <= 1e-2);
    CHECK(rep.multipliers.lambda0 == 1.0);
    CHECK(std::abs(rep.multipliers.lambda) <= 1e-6);
}

TEST_CASE("inactive constraint (g identically zero, K = 0) reduces to least squares") {
    const Grid2D g = make_grid(0, 1, 0, 1, 17, 17);
    const FractionalOrder alpha(0.5);
    auto base = make_manufactured_problem(g, alpha);
    IsoperimetricProblem p{g, alpha, base.f, integrand_zero(), 0.0, base.psi};
    const SolveReport rep = solve_fixed_boundary(p, SolveOptions{});
    CHECK(rep.status == SolveStatus::converged);
    CHECK(rep.multipliers.lambda == 0.0);
    CHECK(max_abs(rep.u - manufactured_reference(g)) <= 1e-2);
}

TEST_CASE("unreachable constraint level within a tight budget reports Infeasible") {
    const Grid2D g = make_grid(0, 1, 0, 1, 9, 9);
    const auto p = make_dirichlet_quadratic_problem(g, FractionalOrder(0.5), 1e6);
    SolveOptions opts;
    opts.max_outer_iters = 3;
    opts.max_inner_iters = 30;
    const SolveReport rep = solve_fixed_boundary(p, opts);
    CHECK(rep.status == SolveStatus::infeasible);
}

TEST_CASE("degenerate constraint gradient with unreachable K reports Abnormal") {
    const Grid2D g = make_grid(0, 1, 0, 1, 9, 9);
    IsoperimetricProblem p{g, FractionalOrder(0.5), integrand_grad_quadratic(), integrand_zero(),
                           1.0, BoundaryTrace::from_function([](double, double) { return 0.0; }, g)};
    const SolveReport rep = solve_fixed_boundary(p, SolveOptions{});
    CHECK(rep.status == SolveStatus::abnormal);
    CHECK(rep.multipliers.lambda0 == 0.0);
    CHECK(rep.multipliers.lambda == 1.0);
}

TEST_CASE("free-boundary quadratic without constraint settles at u = 1") {
    const Grid2D g = make_grid(0, 1, 0, 1, 17, 17);
    IsoperimetricProblem p{g, FractionalOrder(0.5), integrand_shifted_quadratic(),
                           integrand_zero(), 0.0, std::nullopt};
    const SolveReport rep = solve_free_boundary(p, SolveOptions{});
    CHECK(rep.status == SolveStatus::converged);
    CHECK(rep.objective <= 1e-10);
    CHECK(max_abs(rep.u - Field2D::constant(g, 1.0)) <= 1e-4);
    CHECK(rep.nat_bc_residual_max <= 1e-4);
}

TEST_CASE("inactive linear constraint at the free unconstrained optimum keeps lambda near zero") {
    // g = u with K chosen as the constraint value at the unconstrained
    // optimum u == 1, so the multiplier has nothing to do
    const Grid2D g = make_grid(0, 1, 0, 1, 17, 17);
    const FractionalOrder alpha(0.5);
    IsoperimetricProblem p{g, alpha, integrand_shifted_quadratic(), integrand_u(), 0.0,
                           std::nullopt};
    p.K = eval_constraint(p, Field2D::constant(g, 1.0));
    const SolveReport rep = solve_free_boundary(p, SolveOptions{});
    CHECK(rep.status == SolveStatus::converged);
    CHECK(max_abs(rep.u - Field2D::constant(g, 1.0)) <= 1e-4);
    CHECK(std::abs(rep.multipliers.lambda) <= 1e-5);
}

TEST_CASE("free-boundary linear-g problem hits the closed-form optimum") {
    // exact discrete solution u == 1 with multiplier -2
    const Grid2D g = make_grid(0, 1, 0, 1, 17, 17);
    const auto p = make_linear_g_problem(g, FractionalOrder(0.5));
    const SolveReport rep = solve_free_boundary(p, SolveOptions{});
    CHECK(rep.status == SolveStatus::converged);
    CHECK(max_abs(rep.u - Field2D::constant(g, 1.0)) <= 1e-5);
    CHECK(rep.multipliers.lambda == Catch::Approx(-2.0).margin(1e-5));
    CHECK(rep.nat_bc_residual_max <= 1e-4);
    CHECK(rep.el_residual_max <= 1e-4);
    CHECK(rep.constraint_violation <= 1e-8);
}

TEST_CASE("stationarity identity at convergence") {
    const Grid2D g = make_grid(0, 1, 0, 1, 17, 17);
    const auto p = make_dirichlet_quadratic_problem(g, FractionalOrder(0.5), 0.25);
    SolveOptions opts;
    const SolveReport rep = solve_fixed_boundary(p, opts);
    REQUIRE(rep.status == SolveStatus::converged);

    const Field2D gj = discrete_gradient(p, Functional::objective, rep.u);
    const Field2D gg = discrete_gradient(p, Functional::constraint, rep.u);
    double worst = 0.0;
    for (int i = 1; i + 1 < g.nx(); ++i)
        for (int j = 1; j + 1 < g.ny(); ++j)
            worst = std::max(worst, std::abs(gj(i, j) + rep.multipliers.lambda * gg(i, j)));
    CHECK(worst <= 10.0 * opts.grad_tol);
}

TEST_CASE("inner minimizer decreases the merit value monotonically") {
    // quadratic bowl with a long axis; every accepted step must not increase
    std::vector<double> trace;
    const auto quad = [](const std::vector<double>& x, std::vector<double>& grad) {
        double v = 0.0;
        grad.resize(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double scale = 1.0 + 9.0 * static_cast<double>(k) / static_cast<double>(x.size());
            v += 0.5 * scale * x[k] * x[k];
            grad[k] = scale * x[k];
        }
        return v;
    };
    std::vector<double> x0(40);
    detail::Rng rng(11);
    for (auto& v : x0) v = rng.uniform(-5, 5);
    const auto res = detail::lbfgs_minimize(quad, x0, 200, 1e-10, &trace);
    CHECK(res.reached_grad_tol);
    REQUIRE(trace.size() >= 2);
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] + 1e-15);
}

TEST_CASE("identical inputs give bit-identical reports") {
    const Grid2D g = make_grid(0, 1, 0, 1, 13, 13);
    const auto p = make_dirichlet_quadratic_problem(g, FractionalOrder(0.5), 0.5);
    const SolveReport r1 = solve_fixed_boundary(p, SolveOptions{});
    const SolveReport r2 = solve_fixed_boundary(p, SolveOptions{});
    CHECK(r1.status == r2.status);
    CHECK(r1.objective == r2.objective);
    CHECK(r1.multipliers.lambda == r2.multipliers.lambda);
    CHECK(r1.iterations == r2.iterations);
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(r1.u.values()[k] == r2.u.values()[k]);
}

TEST_CASE("feasible perturbations stay feasible and never beat the optimum") {
    const Grid2D g = make_grid(0, 1, 0, 1, 17, 17);
    const auto p = make_manufactured_problem(g, FractionalOrder(0.5));
    const SolveReport rep = solve_fixed_boundary(p, SolveOptions{});
    REQUIRE(rep.status == SolveStatus::converged);

    const auto perturbed = feasible_perturbations(p, rep.u, 20, 12345);
    CHECK(perturbed.size() == 20);
    for (const Field2D& cand : perturbed) {
        CHECK(std::abs(eval_constraint(p, cand) - p.K) <= 1e-9);
        CHECK(eval_objective(p, cand) >= rep.objective - 1e-6);
    }
}

TEST_CASE("fixed-boundary solve with no interior nodes") {
    // every node is pinned by psi, so the constraint gradient over the (empty)
    // unknown set is degenerate: satisfied K converges, unreachable K is Abnormal
    const Grid2D g = make_grid(0, 1, 0, 1, 2, 2);
    const FractionalOrder alpha(0.5);
    IsoperimetricProblem p{g, alpha, integrand_grad_quadratic(), integrand_u(), 0.0,
                           BoundaryTrace::from_function([](double, double) { return 1.0; }, g)};
    p.K = eval_constraint(p, Field2D::constant(g, 1.0));
    CHECK(solve_fixed_boundary(p, SolveOptions{}).status == SolveStatus::converged);

    p.K += 5.0;
    CHECK(solve_fixed_boundary(p, SolveOptions{}).status == SolveStatus::abnormal);
}

TEST_CASE("boundary-mode mismatches are rejected") {
    const Grid2D g = make_grid(0, 1, 0, 1, 9, 9);
    const auto fixed = make_dirichlet_quadratic_problem(g, FractionalOrder(0.5));
    const auto free = make_linear_g_problem(g, FractionalOrder(0.5));
    CHECK_THROWS_AS(solve_free_boundary(fixed, SolveOptions{}), std::invalid_argument);
    CHECK_THROWS_AS(solve_fixed_boundary(free, SolveOptions{}), std::invalid_argument);
}

TEST_CASE("solve options are validated") {
    SolveOptions opts;
    opts.penalty_growth = 1.0;
    const Grid2D g = make_grid(0, 1, 0, 1, 5, 5);
    CHECK_THROWS_AS(solve_fixed_boundary(make_dirichlet_quadratic_problem(g, FractionalOrder(0.5)), opts),
                    std::invalid_argument);
}
