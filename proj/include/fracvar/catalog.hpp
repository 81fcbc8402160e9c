#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracvar/fields.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/variational.hpp"

namespace fracvar {

// ---------------------------------------------------------------------------
// Named integrands. Each carries exact partials.
// ---------------------------------------------------------------------------

inline LagrangianSpec integrand_zero() {
    auto z = [](double, double, double, double, double) { return 0.0; };
    return LagrangianSpec{z, z, z, z};
}

inline LagrangianSpec integrand_one() {
    return LagrangianSpec{[](double, double, double, double, double) { return 1.0; },
                          [](double, double, double, double, double) { return 0.0; },
                          [](double, double, double, double, double) { return 0.0; },
                          [](double, double, double, double, double) { return 0.0; }};
}

inline LagrangianSpec integrand_u() {
    return LagrangianSpec{[](double, double, double u, double, double) { return u; },
                          [](double, double, double, double, double) { return 1.0; },
                          [](double, double, double, double, double) { return 0.0; },
                          [](double, double, double, double, double) { return 0.0; }};
}

/// v^2 + w^2
inline LagrangianSpec integrand_grad_quadratic() {
    return LagrangianSpec{
        [](double, double, double, double v, double w) { return v * v + w * w; },
        [](double, double, double, double, double) { return 0.0; },
        [](double, double, double, double v, double) { return 2.0 * v; },
        [](double, double, double, double, double w) { return 2.0 * w; }};
}

/// u^2 + v^2 + w^2
inline LagrangianSpec integrand_full_quadratic() {
    return LagrangianSpec{
        [](double, double, double u, double v, double w) { return u * u + v * v + w * w; },
        [](double, double, double u, double, double) { return 2.0 * u; },
        [](double, double, double, double v, double) { return 2.0 * v; },
        [](double, double, double, double, double w) { return 2.0 * w; }};
}

/// (u-1)^2 + v^2 + w^2
inline LagrangianSpec integrand_shifted_quadratic() {
    return LagrangianSpec{
        [](double, double, double u, double v, double w) {
            return (u - 1.0) * (u - 1.0) + v * v + w * w;
        },
        [](double, double, double u, double, double) { return 2.0 * (u - 1.0); },
        [](double, double, double, double v, double) { return 2.0 * v; },
        [](double, double, double, double, double w) { return 2.0 * w; }};
}

/// -u^2 (concave in u; convexity_probe reports a witness)
inline LagrangianSpec integrand_neg_u_squared() {
    auto zero = [](double, double, double, double, double) { return 0.0; };
    return LagrangianSpec{[](double, double, double u, double, double) { return -u * u; },
                          [](double, double, double u, double, double) { return -2.0 * u; }, zero,
                          zero};
}

/// u*v (indefinite cross term)
inline LagrangianSpec integrand_cross_uv() {
    auto zero = [](double, double, double, double, double) { return 0.0; };
    return LagrangianSpec{[](double, double, double u, double v, double) { return u * v; },
                          [](double, double, double, double v, double) { return v; },
                          [](double, double, double u, double, double) { return u; }, zero};
}

/// (v - p0(x,y))^2 + (w - q0(x,y))^2 where p0, q0 are stored fields
/// (bilinear reconstruction off nodes; exact at nodes).
inline LagrangianSpec integrand_tracking(Field2D p0, Field2D q0) {
    auto p0p = std::make_shared<Field2D>(std::move(p0));
    auto q0p = std::make_shared<Field2D>(std::move(q0));
    return LagrangianSpec{
        [p0p, q0p](double x, double y, double, double v, double w) {
            const double dv = v - bilinear_at(*p0p, x, y);
            const double dw = w - bilinear_at(*q0p, x, y);
            return dv * dv + dw * dw;
        },
        [](double, double, double, double, double) { return 0.0; },
        [p0p](double x, double y, double, double v, double) {
            return 2.0 * (v - bilinear_at(*p0p, x, y));
        },
        [q0p](double x, double y, double, double, double w) {
            return 2.0 * (w - bilinear_at(*q0p, x, y));
        }};
}

/// Integrands addressable by name in problem-spec files.
inline LagrangianSpec integrand_by_name(const std::string& name) {
    if (name == "zero") return integrand_zero();
    if (name == "one") return integrand_one();
    if (name == "u") return integrand_u();
    if (name == "quad-vw") return integrand_grad_quadratic();
    if (name == "quad-uvw") return integrand_full_quadratic();
    if (name == "quad-u1vw") return integrand_shifted_quadratic();
    if (name == "neg-u2") return integrand_neg_u_squared();
    if (name == "cross-uv") return integrand_cross_uv();
    throw std::invalid_argument("unknown integrand name: " + name);
}

// ---------------------------------------------------------------------------
// Built-in problems
// ---------------------------------------------------------------------------

/// Reference field u*(x,y) = x*y used by the manufactured problem.
inline Field2D manufactured_reference(const Grid2D& grid) {
    return sample([](double x, double y) { return x * y; }, grid);
}

/// Tracking problem built so that u* = xy attains the global minimum J = 0:
/// f = (v - p0)^2 + (w - q0)^2 with p0, q0 the sampled fractional partials
/// of u*, g = u, K = G(u*), psi = trace of u*.
inline IsoperimetricProblem make_manufactured_problem(const Grid2D& grid, FractionalOrder order) {
    const Field2D ustar = manufactured_reference(grid);
    Field2D p0 = partial_frac(ustar, Axis::X, order);
    Field2D q0 = partial_frac(ustar, Axis::Y, order);
    IsoperimetricProblem p{grid, order, integrand_tracking(std::move(p0), std::move(q0)),
                           integrand_u(), 0.0, BoundaryTrace::from_field(ustar)};
    p.K = eval_constraint(p, ustar);
    p.validate();
    return p;
}

/// Fixed-boundary quadratic problem: minimize intint (v^2 + w^2) subject to
/// intint u = K with u = 0 on the boundary.
inline IsoperimetricProblem make_dirichlet_quadratic_problem(const Grid2D& grid,
                                                             FractionalOrder order,
                                                             double K = 1.0) {
    IsoperimetricProblem p{grid, order, integrand_grad_quadratic(), integrand_u(), K,
                           BoundaryTrace::from_function([](double, double) { return 0.0; }, grid)};
    p.validate();
    return p;
}

/// Free-boundary quadratic problem with a linear constraint: minimize
/// intint (u^2 + v^2 + w^2) subject to intint u = K. With the default
/// K = (b-a)^alpha (d-c)^alpha the exact solution is u == 1, lambda = -2.
inline IsoperimetricProblem make_linear_g_problem(const Grid2D& grid, FractionalOrder order,
                                                  double K = std::numeric_limits<double>::quiet_NaN()) {
    IsoperimetricProblem p{grid, order, integrand_full_quadratic(), integrand_u(), 0.0,
                           std::nullopt};
    p.K = std::isnan(K) ? volume_integral(Field2D::constant(grid, 1.0), order) : K;
    p.validate();
    return p;
}

inline const std::vector<std::string>& problem_catalog_names() {
    static const std::vector<std::string> names{"dirichlet-quadratic", "manufactured", "linear-g"};
    return names;
}

/// Problem by catalog name. K_override replaces the default constraint level
/// when finite.
inline IsoperimetricProblem make_catalog_problem(
    const std::string& name, const Grid2D& grid, FractionalOrder order,
    double K_override = std::numeric_limits<double>::quiet_NaN()) {
    if (name == "dirichlet-quadratic")
        return make_dirichlet_quadratic_problem(grid, order, std::isnan(K_override) ? 1.0 : K_override);
    if (name == "manufactured") {
        IsoperimetricProblem p = make_manufactured_problem(grid, order);
        if (!std::isnan(K_override)) p.K = K_override;
        return p;
    }
    if (name == "linear-g") return make_linear_g_problem(grid, order, K_override);
    throw std::invalid_argument("unknown problem name: " + name +
                                " (expected dirichlet-quadratic | manufactured | linear-g)");
}

} // namespace fracvar
