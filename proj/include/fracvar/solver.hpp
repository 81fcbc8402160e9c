#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracvar/fields.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/rng.hpp"
#include "fracvar/variational.hpp"

namespace fracvar {

struct SolveOptions {
    int max_outer_iters = 50;
    int max_inner_iters = 500;
    double grad_tol = 1e-8;
    double constraint_tol = 1e-8;
    double penalty_init = 10.0;
    double penalty_growth = 10.0;
    /// Core solves are deterministic and draw no randomness; the seed feeds
    /// randomized diagnostics (feasible_perturbations) built on a report.
    std::uint64_t seed = 0;

    void validate() const {
        if (max_outer_iters < 1 || max_inner_iters < 1)
            throw std::invalid_argument("SolveOptions: iteration budgets must be >= 1");
        if (!(grad_tol > 0.0) || !(constraint_tol > 0.0) || !(penalty_init > 0.0))
            throw std::invalid_argument("SolveOptions: tolerances and penalty must be > 0");
        if (!(penalty_growth > 1.0))
            throw std::invalid_argument("SolveOptions: penalty_growth must be > 1");
    }
};

enum class SolveStatus { converged, max_iters, abnormal, infeasible };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "Converged";
        case SolveStatus::max_iters: return "MaxIters";
        case SolveStatus::abnormal: return "Abnormal";
        case SolveStatus::infeasible: return "Infeasible";
    }
    return "Unknown";
}

struct SolveReport {
    Field2D u;
    MultiplierPair multipliers;
    double objective = 0.0;
    double constraint_violation = 0.0;
    double el_residual_max = 0.0;
    /// max |natural boundary residual| for free-boundary solves; NaN for
    /// fixed-boundary ones.
    double nat_bc_residual_max = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;        ///< outer iterations performed
    int inner_iterations = 0;  ///< accepted quasi-Newton steps, all inner solves
    SolveStatus status = SolveStatus::max_iters;
};

/// Exact gradient of the discretized objective or constraint with respect to
/// the nodal values of u: quadrature-weighted d3 term plus the algebraic
/// transposes of the derivative maps applied to the weighted d4/d5 terms.
inline Field2D discrete_gradient(const IsoperimetricProblem& p, Functional which,
                                 const Field2D& u) {
    if (!(u.grid() == p.grid))
        throw std::invalid_argument("discrete_gradient: u not on problem grid");
    const LagrangianSpec& spec = which == Functional::objective ? p.f : p.g;
    const auto s = detail::fractional_state(p, u);
    const QuadratureWeights qw(p.grid, p.order);
    const double a2 = p.order.value() * p.order.value();

    const Grid2D& g = p.grid;
    std::vector<double> g3(g.size()), g4(g.size()), g5(g.size());
    std::size_t idx = 0;
    for (int i = 0; i < g.nx(); ++i) {
        const double x = g.x(i);
        const double wxi = a2 * qw.wx[static_cast<std::size_t>(i)];
        for (int j = 0; j < g.ny(); ++j, ++idx) {
            const double pw = wxi * qw.wy[static_cast<std::size_t>(j)];
            const double y = g.y(j);
            const double uu = u(i, j), vv = s.v(i, j), ww = s.w(i, j);
            g3[idx] = pw * spec.d3(x, y, uu, vv, ww);
            g4[idx] = pw * spec.d4(x, y, uu, vv, ww);
            g5[idx] = pw * spec.d5(x, y, uu, vv, ww);
        }
    }
    Field2D grad(g, std::move(g3));
    grad = grad + partial_frac_adjoint(Field2D(g, std::move(g4)), Axis::X, p.order);
    grad = grad + partial_frac_adjoint(Field2D(g, std::move(g5)), Axis::Y, p.order);
    return grad;
}

namespace detail {

struct LbfgsResult {
    std::vector<double> x;
    double value = 0.0;
    double grad_inf = 0.0;
    int accepted_steps = 0;
    bool reached_grad_tol = false;
};

/// Limited-memory BFGS with backtracking line search (sufficient decrease
/// 1e-4, halving, first acceptable step). Deterministic for fixed inputs.
/// value_trace, when given, records the value after every accepted step.
inline LbfgsResult lbfgs_minimize(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& value_and_grad,
    std::vector<double> x, int max_iters, double grad_tol,
    std::vector<double>* value_trace = nullptr) {
    constexpr int memory = 10;
    constexpr double armijo = 1e-4;
    const std::size_t n = x.size();

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> grad(n), new_x(n), new_grad(n), dir(n);

    double value = value_and_grad(x, grad);
    if (!std::isfinite(value)) throw std::runtime_error("lbfgs: non-finite objective at start");
    if (value_trace) value_trace->push_back(value);

    LbfgsResult res;
    res.accepted_steps = 0;
    for (int iter = 0; iter < max_iters; ++iter) {
        const double ginf = max_abs(std::span<const double>(grad));
        if (ginf <= grad_tol) {
            res.reached_grad_tol = true;
            break;
        }

        // two-loop recursion
        dir = grad;
        std::vector<double> alpha_hist(s_hist.size());
        for (std::size_t h = s_hist.size(); h-- > 0;) {
            double dot_sd = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot_sd += s_hist[h][k] * dir[k];
            const double a = rho_hist[h] * dot_sd;
            alpha_hist[h] = a;
            for (std::size_t k = 0; k < n; ++k) dir[k] -= a * y_hist[h][k];
        }
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            const auto& sb = s_hist.back();
            const auto& yb = y_hist.back();
            for (std::size_t k = 0; k < n; ++k) {
                sy += sb[k] * yb[k];
                yy += yb[k] * yb[k];
            }
            const double gamma = yy > 0.0 ? sy / yy : 1.0;
            for (double& d : dir) d *= gamma;
        }
        for (std::size_t h = 0; h < s_hist.size(); ++h) {
            double dot_yd = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot_yd += y_hist[h][k] * dir[k];
            const double beta = rho_hist[h] * dot_yd;
            for (std::size_t k = 0; k < n; ++k) dir[k] += s_hist[h][k] * (alpha_hist[h] - beta);
        }
        for (double& d : dir) d = -d;

        double slope = 0.0;
        for (std::size_t k = 0; k < n; ++k) slope += dir[k] * grad[k];
        if (!(slope < 0.0)) {  // not a descent direction; restart from steepest descent
            s_hist.clear(); y_hist.clear(); rho_hist.clear();
            slope = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                dir[k] = -grad[k];
                slope -= grad[k] * grad[k];
            }
        }

        double step = 1.0;
        if (iter == 0 && s_hist.empty()) {
            double gnorm2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) gnorm2 += grad[k] * grad[k];
            const double gnorm = std::sqrt(gnorm2);
            if (gnorm > 1.0) step = 1.0 / gnorm;
        }

        bool accepted = false;
        double new_value = value;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t k = 0; k < n; ++k) new_x[k] = x[k] + step * dir[k];
            new_value = value_and_grad(new_x, new_grad);
            if (!std::isfinite(new_value))
                throw std::runtime_error("lbfgs: non-finite objective during line search");
            if (new_value <= value + armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // step underflow: stalled at a flat spot

        double sy = 0.0, snorm2 = 0.0, ynorm2 = 0.0;
        std::vector<double> s_vec(n), y_vec(n);
        for (std::size_t k = 0; k < n; ++k) {
            s_vec[k] = new_x[k] - x[k];
            y_vec[k] = new_grad[k] - grad[k];
            sy += s_vec[k] * y_vec[k];
            snorm2 += s_vec[k] * s_vec[k];
            ynorm2 += y_vec[k] * y_vec[k];
        }
        if (sy > 1e-12 * std::sqrt(snorm2 * ynorm2)) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x.swap(new_x);
        grad.swap(new_grad);
        value = new_value;
        ++res.accepted_steps;
        if (value_trace) value_trace->push_back(value);
    }

    res.x = std::move(x);
    res.value = value;
    res.grad_inf = max_abs(std::span<const double>(grad));
    return res;
}

/// Boundary-blended (Coons) interpolant of a boundary trace: reproduces any
/// bilinear function from its trace, giving a deterministic feasible-leaning
/// start for fixed-boundary solves.
inline Field2D coons_interpolant(const BoundaryTrace& psi, const Grid2D& g) {
    std::vector<double> v(g.size());
    const double psi_ac = psi.at_y_c.front(), psi_bc = psi.at_y_c.back();
    const double psi_ad = psi.at_y_d.front(), psi_bd = psi.at_y_d.back();
    std::size_t idx = 0;
    for (int i = 0; i < g.nx(); ++i) {
        const double sx = static_cast<double>(i) / (g.nx() - 1);
        for (int j = 0; j < g.ny(); ++j, ++idx) {
            const double sy = static_cast<double>(j) / (g.ny() - 1);
            const double blend =
                (1 - sx) * psi.at_x_a[static_cast<std::size_t>(j)] +
                sx * psi.at_x_b[static_cast<std::size_t>(j)] +
                (1 - sy) * psi.at_y_c[static_cast<std::size_t>(i)] +
                sy * psi.at_y_d[static_cast<std::size_t>(i)] -
                ((1 - sx) * (1 - sy) * psi_ac + sx * (1 - sy) * psi_bc +
                 (1 - sx) * sy * psi_ad + sx * sy * psi_bd);
            v[idx] = blend;
        }
    }
    return Field2D(g, std::move(v));
}

/// Index bookkeeping between the unknown vector and the full nodal field.
struct UnknownMap {
    const Grid2D& grid;
    bool boundary_fixed;
    std::vector<double> base;  ///< full field values; boundary entries authoritative when fixed

    std::size_t count() const {
        if (!boundary_fixed) return grid.size();
        const std::size_t interior_x = static_cast<std::size_t>(grid.nx() > 2 ? grid.nx() - 2 : 0);
        const std::size_t interior_y = static_cast<std::size_t>(grid.ny() > 2 ? grid.ny() - 2 : 0);
        return interior_x * interior_y;
    }

    Field2D to_field(const std::vector<double>& z) const {
        if (!boundary_fixed) return Field2D(grid, z);
        std::vector<double> full = base;
        std::size_t zi = 0;
        for (int i = 1; i + 1 < grid.nx(); ++i)
            for (int j = 1; j + 1 < grid.ny(); ++j)
                full[static_cast<std::size_t>(i) * grid.ny() + j] = z[zi++];
        return Field2D(grid, std::move(full));
    }

    std::vector<double> from_field(const Field2D& u) const {
        if (!boundary_fixed) return std::vector<double>(u.values().begin(), u.values().end());
        std::vector<double> z(count());
        std::size_t zi = 0;
        for (int i = 1; i + 1 < grid.nx(); ++i)
            for (int j = 1; j + 1 < grid.ny(); ++j) z[zi++] = u(i, j);
        return z;
    }
};

inline SolveReport solve_impl(const IsoperimetricProblem& p, const SolveOptions& opts,
                              bool boundary_fixed) {
    p.validate();
    opts.validate();
    const Grid2D& grid = p.grid;

    Field2D u0 = boundary_fixed ? coons_interpolant(*p.psi, grid) : Field2D::zeros(grid);
    UnknownMap map{grid, boundary_fixed,
                   std::vector<double>(u0.values().begin(), u0.values().end())};

    double lambda = 0.0;
    double rho = opts.penalty_init;
    constexpr double rho_cap = 1e14;
    constexpr double degenerate_grad_tol = 1e-10;

    std::vector<double> z = map.from_field(u0);
    SolveStatus status = SolveStatus::max_iters;
    MultiplierPair multipliers(1.0, 0.0);
    int outer_done = 0, inner_total = 0;
    double violation = std::numeric_limits<double>::infinity();
    double prev_violation = std::numeric_limits<double>::infinity();
    Field2D u = map.to_field(z);
    bool inner_converged = false;

    for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
        outer_done = outer + 1;
        const double lam_snapshot = lambda, rho_snapshot = rho;
        auto value_and_grad = [&](const std::vector<double>& zz, std::vector<double>& gout) {
            const Field2D cand = map.to_field(zz);
            const double cviol = eval_constraint(p, cand) - p.K;
            const double val = eval_objective(p, cand) + lam_snapshot * cviol +
                               0.5 * rho_snapshot * cviol * cviol;
            const Field2D gj = discrete_gradient(p, Functional::objective, cand);
            const Field2D gg = discrete_gradient(p, Functional::constraint, cand);
            const Field2D total = gj + (lam_snapshot + rho_snapshot * cviol) * gg;
            gout = map.from_field(total);
            return val;
        };

        LbfgsResult inner =
            lbfgs_minimize(value_and_grad, std::move(z), opts.max_inner_iters, opts.grad_tol);
        z = std::move(inner.x);
        inner_total += inner.accepted_steps;
        inner_converged = inner.reached_grad_tol;

        u = map.to_field(z);
        const double c = eval_constraint(p, u) - p.K;
        violation = std::abs(c);

        const Field2D ggrad = discrete_gradient(p, Functional::constraint, u);
        const double ggrad_inf = max_abs(std::span<const double>(map.from_field(ggrad)));
        if (ggrad_inf <= degenerate_grad_tol) {
            // Constraint gradient vanishes at the candidate. If the constraint
            // is also satisfied this is an inactive/trivial constraint and the
            // plain minimization verdict stands; otherwise only the abnormal
            // multiplier pair (0, 1) can satisfy the stationarity identity.
            if (violation <= opts.constraint_tol && inner_converged) {
                status = SolveStatus::converged;
                multipliers = MultiplierPair(1.0, lambda);
            } else if (violation > opts.constraint_tol) {
                status = SolveStatus::abnormal;
                multipliers = MultiplierPair(0.0, 1.0);
            } else {
                continue;  // feasible but gradient tolerance unmet: keep iterating
            }
            break;
        }

        lambda += rho * c;
        if (violation <= opts.constraint_tol && inner_converged) {
            status = SolveStatus::converged;
            multipliers = MultiplierPair(1.0, lambda);
            break;
        }
        if (violation > prev_violation / 4.0) rho = std::min(rho * opts.penalty_growth, rho_cap);
        prev_violation = violation;
    }

    if (status == SolveStatus::max_iters) {
        multipliers = MultiplierPair(1.0, lambda);
        if (violation > opts.constraint_tol) status = SolveStatus::infeasible;
    }

    SolveReport report{u, multipliers};
    report.status = status;
    report.iterations = outer_done;
    report.inner_iterations = inner_total;
    report.objective = eval_objective(p, u);
    report.constraint_violation = violation;

    // a posteriori residuals over interior nodes
    const MultiplierPair el_pair = status == SolveStatus::abnormal
                                       ? multipliers
                                       : MultiplierPair(1.0, multipliers.lambda);
    const Field2D el = euler_lagrange_residual(p, u, el_pair);
    double el_max = 0.0;
    for (int i = 1; i + 1 < grid.nx(); ++i)
        for (int j = 1; j + 1 < grid.ny(); ++j) el_max = std::max(el_max, std::abs(el(i, j)));
    report.el_residual_max = el_max;
    if (!boundary_fixed)
        report.nat_bc_residual_max = natural_boundary_residuals(p, u, el_pair).max_abs();
    return report;
}

} // namespace detail

/// Fixed-boundary solve: boundary nodes pinned to psi, interior nodes
/// optimized by an augmented-Lagrangian outer loop (multiplier update
/// lambda += rho*(G(u)-K), penalty grown when the violation fails to shrink
/// by a factor of 4) with an L-BFGS inner minimizer. Deterministic.
inline SolveReport solve_fixed_boundary(const IsoperimetricProblem& p, const SolveOptions& opts) {
    if (!p.psi)
        throw std::invalid_argument("solve_fixed_boundary: problem has no boundary trace psi");
    return detail::solve_impl(p, opts, /*boundary_fixed=*/true);
}

/// Free-boundary solve: every node is an unknown; the report additionally
/// carries the maximum natural-boundary-condition residual.
inline SolveReport solve_free_boundary(const IsoperimetricProblem& p, const SolveOptions& opts) {
    if (p.psi)
        throw std::invalid_argument("solve_free_boundary: problem prescribes psi; boundary is not free");
    return detail::solve_impl(p, opts, /*boundary_fixed=*/false);
}

/// Random feasible perturbations of a solved field: smooth interior bumps
/// (sine modes, zero on the boundary) re-projected onto G(u) = K along a
/// fixed bump direction by a secant iteration. Used by the sufficiency echo.
/// Returns the perturbed fields; draws that fail to project are skipped.
inline std::vector<Field2D> feasible_perturbations(const IsoperimetricProblem& p, const Field2D& u,
                                                   int count, std::uint64_t seed,
                                                   double magnitude = 0.1,
                                                   double feas_tol = 1e-10) {
    detail::Rng rng(seed);
    const Grid2D& g = p.grid;
    const double pi = 3.141592653589793238462643383279502884;
    const Field2D bump = sample(
        [&](double x, double y) {
            const double sx = (x - g.a()) / (g.b() - g.a());
            const double sy = (y - g.c()) / (g.d() - g.c());
            return sx * (1.0 - sx) * sy * (1.0 - sy);
        },
        g);

    std::vector<Field2D> out;
    for (int s = 0; s < count; ++s) {
        std::vector<double> coeff(9);
        for (double& c : coeff) c = rng.uniform(-magnitude, magnitude);
        const Field2D eta = sample(
            [&](double x, double y) {
                const double sx = (x - g.a()) / (g.b() - g.a());
                const double sy = (y - g.c()) / (g.d() - g.c());
                double acc = 0.0;
                for (int kx = 1; kx <= 3; ++kx)
                    for (int ky = 1; ky <= 3; ++ky)
                        acc += coeff[static_cast<std::size_t>((kx - 1) * 3 + (ky - 1))] *
                               std::sin(kx * pi * sx) * std::sin(ky * pi * sy);
                return acc;
            },
            g);

        const Field2D base = u + eta;
        // secant iteration on t for G(base + t*bump) = K
        double t0 = 0.0, t1 = 1.0;
        double r0 = eval_constraint(p, base) - p.K;
        double r1 = eval_constraint(p, base + t1 * bump) - p.K;
        bool ok = std::abs(r0) <= feas_tol;
        double t = t0;
        for (int it = 0; it < 60 && !ok; ++it) {
            if (r1 == r0) break;
            t = t1 - r1 * (t1 - t0) / (r1 - r0);
            if (!std::isfinite(t)) break;
            const double rt = eval_constraint(p, base + t * bump) - p.K;
            t0 = t1; r0 = r1; t1 = t; r1 = rt;
            ok = std::abs(rt) <= feas_tol;
        }
        if (ok) out.push_back(base + t * bump);
    }
    return out;
}

} // namespace fracvar
