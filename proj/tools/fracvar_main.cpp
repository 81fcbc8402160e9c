// fracvar: command-line front end for the fractional variational toolkit.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure
// (Infeasible/MaxIters/non-finite result).

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "fracvar/catalog.hpp"
#include "fracvar/expression.hpp"
#include "fracvar/fields.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/io.hpp"
#include "fracvar/solver.hpp"
#include "fracvar/variational.hpp"

namespace {

using namespace fracvar;

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridFlags {
    double a = 0.0, b = 1.0, c = 0.0, d = 1.0;
    int nx = 33, ny = 33;

    void attach(CLI::App* cmd) {
        cmd->add_option("--a", a, "left x bound");
        cmd->add_option("--b", b, "right x bound");
        cmd->add_option("--c", c, "lower y bound");
        cmd->add_option("--d", d, "upper y bound");
        cmd->add_option("--nx", nx, "node count in x");
        cmd->add_option("--ny", ny, "node count in y");
    }
    Grid2D grid() const { return make_grid(a, b, c, d, nx, ny); }
};

struct ProblemFlags {
    std::string problem;
    std::string spec_path;
    double K = std::numeric_limits<double>::quiet_NaN();

    void attach(CLI::App* cmd) {
        auto* po = cmd->add_option("--problem", problem,
                                   "catalog problem: dirichlet-quadratic | manufactured | linear-g");
        auto* so = cmd->add_option("--spec", spec_path, "problem spec JSON file");
        cmd->add_option("--K", K, "override the constraint level K");
        po->excludes(so);
    }

    IsoperimetricProblem build(const Grid2D& grid, FractionalOrder order) const {
        if (!spec_path.empty()) {
            IsoperimetricProblem p = problem_from_spec_file(spec_path, grid, order);
            if (!std::isnan(K)) p.K = K;
            return p;
        }
        if (problem.empty())
            throw std::invalid_argument("one of --problem or --spec is required");
        return make_catalog_problem(problem, grid, order, K);
    }
};

struct SolveFlags {
    SolveOptions opts;

    void attach(CLI::App* cmd) {
        cmd->add_option("--max-outer", opts.max_outer_iters, "outer iteration budget");
        cmd->add_option("--max-inner", opts.max_inner_iters, "inner iteration budget");
        cmd->add_option("--grad-tol", opts.grad_tol, "inner gradient tolerance (inf norm)");
        cmd->add_option("--constraint-tol", opts.constraint_tol, "constraint tolerance");
        cmd->add_option("--penalty-init", opts.penalty_init, "initial penalty parameter");
        cmd->add_option("--penalty-growth", opts.penalty_growth, "penalty growth factor");
        cmd->add_option("--seed", opts.seed, "seed for randomized diagnostics");
    }
};

Field2D sample_expression(const std::string& text, const Grid2D& grid) {
    const Expression e = Expression::parse(text);
    return sample([&e](double x, double y) { return e.eval(x, y); }, grid);
}

void print_kv(const char* key, double value) {
    std::printf("%s=%s\n", key, format_g17(value).c_str());
}

void run_solve(const IsoperimetricProblem& p, const SolveOptions& opts, bool free_boundary,
               const std::string& out_path, const std::string& report_path) {
    const SolveReport report =
        free_boundary ? solve_free_boundary(p, opts) : solve_fixed_boundary(p, opts);
    write_field(report.u, out_path);
    const std::string rendered = report_to_json(report, out_path).dump(2) + "\n";
    if (report_path.empty())
        std::fputs(rendered.c_str(), stdout);
    else
        write_text_file(report_path, rendered);
    std::printf("status=%s\n", to_string(report.status));
    print_kv("objective", report.objective);
    if (report.status != SolveStatus::converged)
        throw NumericalFailure(std::string("solve finished with status ") +
                               to_string(report.status));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracvar: modified Riemann-Liouville fractional calculus and isoperimetric "
                 "variational problems on rectangles"};
    app.set_config("--config", "", "config file (same keys as flags; flags win)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    double alpha = 0.5;

    // ---- fracdiff ----------------------------------------------------------
    auto* fracdiff = app.add_subcommand("fracdiff", "Jumarie derivative of an expression on [a,b]");
    struct { double a = 0, b = 1; int n = 129; std::string fn, out; } fd;
    fracdiff->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    fracdiff->add_option("--fn", fd.fn, "expression in x")->required();
    fracdiff->add_option("--a", fd.a, "left bound");
    fracdiff->add_option("--b", fd.b, "right bound");
    fracdiff->add_option("--n", fd.n, "node count");
    fracdiff->add_option("--out", fd.out, "output CSV path (x,value)")->required();
    fracdiff->callback([&] {
        const FractionalOrder order(alpha);
        const Expression e = Expression::parse(fd.fn);
        const Field1D f = sample_line([&e](double x) { return e.eval(x, 0.0); }, fd.a, fd.b, fd.n);
        write_text_file(fd.out, field_to_csv(jumarie_derivative(f, order)));
    });

    // ---- partial -----------------------------------------------------------
    auto* partial = app.add_subcommand("partial", "fractional partial derivative of an expression");
    auto pt_grid = std::make_shared<GridFlags>();
    struct { std::string fn, axis = "x", out; } pt;
    partial->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    partial->add_option("--fn", pt.fn, "expression in x, y")->required();
    partial->add_option("--axis", pt.axis, "x or y")->check(CLI::IsMember({"x", "y"}));
    pt_grid->attach(partial);
    partial->add_option("--out", pt.out, "output field path (.csv or .json)")->required();
    partial->callback([&, pt_grid] {
        const FractionalOrder order(alpha);
        const Field2D u = sample_expression(pt.fn, pt_grid->grid());
        write_field(partial_frac(u, pt.axis == "x" ? Axis::X : Axis::Y, order), pt.out);
    });

    // ---- integrate ---------------------------------------------------------
    auto* integrate = app.add_subcommand("integrate", "fractional volume integral of an expression");
    auto ig_grid = std::make_shared<GridFlags>();
    struct { std::string fn; } ig;
    integrate->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    integrate->add_option("--fn", ig.fn, "expression in x, y")->required();
    ig_grid->attach(integrate);
    integrate->callback([&, ig_grid] {
        const FractionalOrder order(alpha);
        print_kv("integral", volume_integral(sample_expression(ig.fn, ig_grid->grid()), order));
    });

    // ---- line-integrate ----------------------------------------------------
    auto* lineint = app.add_subcommand("line-integrate",
                                       "fractional line integral of an expression on the boundary");
    auto li_grid = std::make_shared<GridFlags>();
    struct { std::string fn; } li;
    lineint->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    lineint->add_option("--fn", li.fn, "expression in x, y")->required();
    li_grid->attach(lineint);
    lineint->callback([&, li_grid] {
        const FractionalOrder order(alpha);
        print_kv("line_integral", line_integral(sample_expression(li.fn, li_grid->grid()), order));
    });

    // ---- green-check -------------------------------------------------------
    auto* green = app.add_subcommand("green-check", "evaluate both sides of the Green identity");
    auto gr_grid = std::make_shared<GridFlags>();
    struct { std::string the_case = "poly"; } gr;
    green->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    green->add_option("--case", gr.the_case, "poly | constant | bump")
        ->check(CLI::IsMember({"poly", "constant", "bump"}));
    gr_grid->attach(green);
    green->callback([&, gr_grid] {
        const FractionalOrder order(alpha);
        const Grid2D grid = gr_grid->grid();
        Field2D h = Field2D::constant(grid, 1.0);
        Field2D k = Field2D::constant(grid, 1.0);
        Field2D eta = Field2D::constant(grid, 1.0);
        const auto bump = [&grid](double x, double y) {
            const double sx = (x - grid.a()) / (grid.b() - grid.a());
            const double sy = (y - grid.c()) / (grid.d() - grid.c());
            return sx * (1 - sx) * sy * (1 - sy);
        };
        if (gr.the_case == "poly") {
            h = sample([](double x, double) { return x; }, grid);
            k = sample([](double, double y) { return y * y; }, grid);
            eta = sample(bump, grid);
        } else if (gr.the_case == "bump") {
            eta = sample(bump, grid);
        }
        const GreenReport rep = green_residual(h, k, eta, order);
        print_kv("lhs", rep.lhs);
        print_kv("rhs_volume", rep.rhs_volume);
        print_kv("rhs_boundary", rep.rhs_boundary);
        print_kv("residual", rep.residual);
    });

    // ---- el-residual -------------------------------------------------------
    auto* elres = app.add_subcommand("el-residual",
                                     "Euler-Lagrange residual field of a problem at a given u");
    auto el_grid = std::make_shared<GridFlags>();
    auto el_prob = std::make_shared<ProblemFlags>();
    struct { std::string u_fn, out; double lambda0 = 1.0, lambda = 0.0; } el;
    elres->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    el_grid->attach(elres);
    el_prob->attach(elres);
    elres->add_option("--u-fn", el.u_fn, "expression for u(x,y)")->required();
    elres->add_option("--lambda0", el.lambda0, "multiplier on f");
    elres->add_option("--lambda", el.lambda, "multiplier on g");
    elres->add_option("--out", el.out, "optional output field path");
    elres->callback([&, el_grid, el_prob] {
        const FractionalOrder order(alpha);
        const Grid2D grid = el_grid->grid();
        const IsoperimetricProblem p = el_prob->build(grid, order);
        const Field2D u = sample_expression(el.u_fn, grid);
        const Field2D r = euler_lagrange_residual(p, u, MultiplierPair(el.lambda0, el.lambda));
        if (!el.out.empty()) write_field(r, el.out);
        print_kv("el_residual_max", max_abs(r));
    });

    // ---- natbc-check -------------------------------------------------------
    auto* natbc = app.add_subcommand("natbc-check",
                                     "natural boundary condition residuals of a problem at u");
    auto nb_grid = std::make_shared<GridFlags>();
    auto nb_prob = std::make_shared<ProblemFlags>();
    struct { std::string u_fn; double lambda0 = 1.0, lambda = 0.0; } nb;
    natbc->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    nb_grid->attach(natbc);
    nb_prob->attach(natbc);
    natbc->add_option("--u-fn", nb.u_fn, "expression for u(x,y)")->required();
    natbc->add_option("--lambda0", nb.lambda0, "multiplier on f");
    natbc->add_option("--lambda", nb.lambda, "multiplier on g");
    natbc->callback([&, nb_grid, nb_prob] {
        const FractionalOrder order(alpha);
        const Grid2D grid = nb_grid->grid();
        const IsoperimetricProblem p = nb_prob->build(grid, order);
        const Field2D u = sample_expression(nb.u_fn, grid);
        const EdgeResiduals r = natural_boundary_residuals(p, u, MultiplierPair(nb.lambda0, nb.lambda));
        print_kv("max_at_x_a", max_abs(std::span<const double>(r.at_x_a)));
        print_kv("max_at_x_b", max_abs(std::span<const double>(r.at_x_b)));
        print_kv("max_at_y_c", max_abs(std::span<const double>(r.at_y_c)));
        print_kv("max_at_y_d", max_abs(std::span<const double>(r.at_y_d)));
        print_kv("natbc_max", r.max_abs());
    });

    // ---- gateaux-check -----------------------------------------------------
    auto* gateaux = app.add_subcommand("gateaux-check",
                                       "central-difference Gateaux derivative of J or G");
    auto gx_grid = std::make_shared<GridFlags>();
    auto gx_prob = std::make_shared<ProblemFlags>();
    struct {
        std::string which = "J", u_fn, eta_fn;
        double eps = 0.0;
    } gx;
    gateaux->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    gx_grid->attach(gateaux);
    gx_prob->attach(gateaux);
    gateaux->add_option("--which", gx.which, "J (objective) or G (constraint)")
        ->check(CLI::IsMember({"J", "G"}));
    gateaux->add_option("--u-fn", gx.u_fn, "expression for u(x,y)")->required();
    gateaux->add_option("--eta-fn", gx.eta_fn, "expression for the direction eta(x,y)")->required();
    gateaux->add_option("--eps", gx.eps, "step (default 1e-5*(1+max|u|))");
    gateaux->callback([&, gx_grid, gx_prob] {
        const FractionalOrder order(alpha);
        const Grid2D grid = gx_grid->grid();
        const IsoperimetricProblem p = gx_prob->build(grid, order);
        const Field2D u = sample_expression(gx.u_fn, grid);
        const Field2D eta = sample_expression(gx.eta_fn, grid);
        const Functional which = gx.which == "J" ? Functional::objective : Functional::constraint;
        const double eps = gx.eps > 0.0 ? gx.eps : gateaux_default_eps(u);
        const double der = gateaux_derivative(p, which, u, eta, eps);
        print_kv("gateaux", der);
        if (which == Functional::objective) {
            const Field2D el = euler_lagrange_residual(p, u, MultiplierPair(1.0, 0.0));
            const double pairing = volume_integral(hadamard(el, eta), order);
            print_kv("pairing", pairing);
            print_kv("difference", der - pairing);
        }
    });

    // ---- convexity ---------------------------------------------------------
    auto* convexity = app.add_subcommand("convexity",
                                         "sampled convexity probe of H = lambda0*f + lambda*g");
    auto cv_grid = std::make_shared<GridFlags>();
    auto cv_prob = std::make_shared<ProblemFlags>();
    struct {
        int samples = 200;
        std::uint64_t seed = 0;
        double lambda0 = 1.0, lambda = 0.0, radius = 10.0;
    } cv;
    convexity->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    cv_grid->attach(convexity);
    cv_prob->attach(convexity);
    convexity->add_option("--samples", cv.samples, "number of sample points");
    convexity->add_option("--seed", cv.seed, "generator seed");
    convexity->add_option("--lambda0", cv.lambda0, "multiplier on f");
    convexity->add_option("--lambda", cv.lambda, "multiplier on g");
    convexity->add_option("--radius", cv.radius, "half-width of the (u,v,w) sample box");
    convexity->callback([&, cv_grid, cv_prob] {
        const FractionalOrder order(alpha);
        const Grid2D grid = cv_grid->grid();
        const IsoperimetricProblem p = cv_prob->build(grid, order);
        const ConvexityVerdict v = convexity_probe(p, MultiplierPair(cv.lambda0, cv.lambda),
                                                   cv.samples, cv.seed, cv.radius);
        if (v.convex_on_samples) {
            std::printf("verdict=ConvexOnSamples\n");
        } else {
            std::printf("verdict=NotConvex\n");
            const ConvexityWitness& w = *v.witness;
            std::printf("witness=(%s,%s,%s,%s,%s)\n", format_g17(w.x).c_str(),
                        format_g17(w.y).c_str(), format_g17(w.u).c_str(), format_g17(w.v).c_str(),
                        format_g17(w.w).c_str());
            print_kv("min_eigenvalue", w.min_eigenvalue);
        }
    });

    // ---- solve / solve-free --------------------------------------------------
    auto* solve = app.add_subcommand("solve", "fixed-boundary isoperimetric solve");
    auto sv_grid = std::make_shared<GridFlags>();
    auto sv_prob = std::make_shared<ProblemFlags>();
    auto sv_opts = std::make_shared<SolveFlags>();
    struct { std::string out, report; } sv;
    solve->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    sv_grid->attach(solve);
    sv_prob->attach(solve);
    sv_opts->attach(solve);
    solve->add_option("--out", sv.out, "solution field path (.csv or .json)")->required();
    solve->add_option("--report", sv.report, "report JSON path (stdout when absent)");
    solve->callback([&, sv_grid, sv_prob, sv_opts] {
        const FractionalOrder order(alpha);
        const IsoperimetricProblem p = sv_prob->build(sv_grid->grid(), order);
        if (!p.psi)
            throw std::invalid_argument(
                "solve needs a problem with a boundary trace (try solve-free)");
        run_solve(p, sv_opts->opts, /*free_boundary=*/false, sv.out, sv.report);
    });

    auto* solve_free = app.add_subcommand("solve-free", "free-boundary isoperimetric solve");
    auto sf_grid = std::make_shared<GridFlags>();
    auto sf_prob = std::make_shared<ProblemFlags>();
    auto sf_opts = std::make_shared<SolveFlags>();
    struct { std::string out, report; } sf;
    solve_free->add_option("--alpha", alpha, "fractional order in (0,1)")->required();
    sf_grid->attach(solve_free);
    sf_prob->attach(solve_free);
    sf_opts->attach(solve_free);
    solve_free->add_option("--out", sf.out, "solution field path (.csv or .json)")->required();
    solve_free->add_option("--report", sf.report, "report JSON path (stdout when absent)");
    solve_free->callback([&, sf_grid, sf_prob, sf_opts] {
        const FractionalOrder order(alpha);
        const IsoperimetricProblem p = sf_prob->build(sf_grid->grid(), order);
        if (p.psi)
            throw std::invalid_argument(
                "solve-free needs a problem without a boundary trace (try solve)");
        run_solve(p, sf_opts->opts, /*free_boundary=*/true, sf.out, sf.report);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const NumericalFailure& e) {
        std::cerr << "fracvar: " << e.what() << "\n";
        return 2;
    } catch (const ExprError& e) {
        std::cerr << "fracvar: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "fracvar: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "fracvar: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fracvar: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
