#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracvar/fields.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/rng.hpp"

namespace fracvar {

/// Pointwise integrand (x, y, u, v, w) -> real, where v and w stand for the
/// fractional partials of u in x and y.
using PointFn = std::function<double(double, double, double, double, double)>;

/// An integrand together with its partial derivatives with respect to the
/// third, fourth and fifth arguments (u, v, w). The partials are supplied by
/// the caller; check_partial_consistency audits them against central
/// differences.
struct LagrangianSpec {
    PointFn value;
    PointFn d3;
    PointFn d4;
    PointFn d5;
};

/// Multiplier pair (lambda0, lambda); the pair must not be identically zero.
struct MultiplierPair {
    double lambda0;
    double lambda;

    MultiplierPair(double l0, double l) : lambda0(l0), lambda(l) {
        if (l0 == 0.0 && l == 0.0)
            throw std::invalid_argument("MultiplierPair: (0,0) is not a valid pair");
    }
};

/// Values prescribed on the four boundary edges of a grid. Corner entries are
/// shared by two edges and must agree.
struct BoundaryTrace {
    std::vector<double> at_x_a;  ///< edge x = a, indexed by j (length ny)
    std::vector<double> at_x_b;  ///< edge x = b, indexed by j (length ny)
    std::vector<double> at_y_c;  ///< edge y = c, indexed by i (length nx)
    std::vector<double> at_y_d;  ///< edge y = d, indexed by i (length nx)

    void validate(const Grid2D& grid) const {
        const auto nx = static_cast<std::size_t>(grid.nx());
        const auto ny = static_cast<std::size_t>(grid.ny());
        if (at_x_a.size() != ny || at_x_b.size() != ny || at_y_c.size() != nx ||
            at_y_d.size() != nx)
            throw std::invalid_argument("BoundaryTrace: edge lengths do not match grid");
        detail::require_finite(at_x_a, "BoundaryTrace");
        detail::require_finite(at_x_b, "BoundaryTrace");
        detail::require_finite(at_y_c, "BoundaryTrace");
        detail::require_finite(at_y_d, "BoundaryTrace");
        if (at_x_a.front() != at_y_c.front() || at_x_a.back() != at_y_d.front() ||
            at_x_b.front() != at_y_c.back() || at_x_b.back() != at_y_d.back())
            throw std::invalid_argument("BoundaryTrace: corner values disagree between edges");
    }

    static BoundaryTrace from_function(const std::function<double(double, double)>& fn,
                                       const Grid2D& grid) {
        BoundaryTrace t;
        t.at_x_a.resize(static_cast<std::size_t>(grid.ny()));
        t.at_x_b.resize(static_cast<std::size_t>(grid.ny()));
        t.at_y_c.resize(static_cast<std::size_t>(grid.nx()));
        t.at_y_d.resize(static_cast<std::size_t>(grid.nx()));
        for (int j = 0; j < grid.ny(); ++j) {
            t.at_x_a[static_cast<std::size_t>(j)] = fn(grid.a(), grid.y(j));
            t.at_x_b[static_cast<std::size_t>(j)] = fn(grid.b(), grid.y(j));
        }
        for (int i = 0; i < grid.nx(); ++i) {
            t.at_y_c[static_cast<std::size_t>(i)] = fn(grid.x(i), grid.c());
            t.at_y_d[static_cast<std::size_t>(i)] = fn(grid.x(i), grid.d());
        }
        t.validate(grid);
        return t;
    }

    static BoundaryTrace from_field(const Field2D& u) {
        const Grid2D& g = u.grid();
        return from_function([&u, &g](double x, double y) {
            const int i = static_cast<int>(std::lround((x - g.a()) / g.hx()));
            const int j = static_cast<int>(std::lround((y - g.c()) / g.hy()));
            return u(i, j);
        }, g);
    }
};

/// The full problem: minimize the weighted double integral of f subject to
/// the same integral of g being K, with an optional prescribed boundary
/// trace psi (absent = free boundary).
struct IsoperimetricProblem {
    Grid2D grid;
    FractionalOrder order;
    LagrangianSpec f;
    LagrangianSpec g;
    double K = 0.0;
    std::optional<BoundaryTrace> psi;

    void validate() const {
        if (!std::isfinite(K)) throw std::invalid_argument("IsoperimetricProblem: K must be finite");
        if (psi) psi->validate(grid);
    }
};

/// Residuals sampled on the four boundary edges (natural boundary conditions).
struct EdgeResiduals {
    std::vector<double> at_x_a;
    std::vector<double> at_x_b;
    std::vector<double> at_y_c;
    std::vector<double> at_y_d;

    double max_abs() const {
        double m = 0.0;
        for (const auto* edge : {&at_x_a, &at_x_b, &at_y_c, &at_y_d})
            for (double v : *edge) m = std::max(m, std::abs(v));
        return m;
    }
};

enum class Functional { objective, constraint };

/// lambda0 * f + lambda * g and its u/v/w partials, evaluated pointwise.
inline double lagrangian_value(const IsoperimetricProblem& p, const MultiplierPair& m, double x,
                               double y, double u, double v, double w) {
    return m.lambda0 * p.f.value(x, y, u, v, w) + m.lambda * p.g.value(x, y, u, v, w);
}
inline double lagrangian_d3(const IsoperimetricProblem& p, const MultiplierPair& m, double x,
                            double y, double u, double v, double w) {
    return m.lambda0 * p.f.d3(x, y, u, v, w) + m.lambda * p.g.d3(x, y, u, v, w);
}
inline double lagrangian_d4(const IsoperimetricProblem& p, const MultiplierPair& m, double x,
                            double y, double u, double v, double w) {
    return m.lambda0 * p.f.d4(x, y, u, v, w) + m.lambda * p.g.d4(x, y, u, v, w);
}
inline double lagrangian_d5(const IsoperimetricProblem& p, const MultiplierPair& m, double x,
                            double y, double u, double v, double w) {
    return m.lambda0 * p.f.d5(x, y, u, v, w) + m.lambda * p.g.d5(x, y, u, v, w);
}

namespace detail {

/// Samples fn(x, y, u, v, w) over the grid given nodal u and its partials.
inline Field2D assemble_integrand(const PointFn& fn, const Field2D& u, const Field2D& v,
                                  const Field2D& w) {
    const Grid2D& g = u.grid();
    std::vector<double> out(g.size());
    std::size_t idx = 0;
    for (int i = 0; i < g.nx(); ++i) {
        const double x = g.x(i);
        for (int j = 0; j < g.ny(); ++j) {
            out[idx++] = fn(x, g.y(j), u(i, j), v(i, j), w(i, j));
        }
    }
    return Field2D(g, std::move(out));  // rejects non-finite integrand values
}

struct StateFields {
    Field2D v;
    Field2D w;
};

inline StateFields fractional_state(const IsoperimetricProblem& p, const Field2D& u) {
    return StateFields{partial_frac(u, Axis::X, p.order), partial_frac(u, Axis::Y, p.order)};
}

} // namespace detail

/// Value of the cost functional at u: the fractional volume integral of
/// f(x, y, u, Dx u, Dy u).
inline double eval_objective(const IsoperimetricProblem& p, const Field2D& u) {
    if (!(u.grid() == p.grid)) throw std::invalid_argument("eval_objective: u not on problem grid");
    const auto s = detail::fractional_state(p, u);
    return volume_integral(detail::assemble_integrand(p.f.value, u, s.v, s.w), p.order);
}

/// Value of the constraint functional at u (compare against p.K).
inline double eval_constraint(const IsoperimetricProblem& p, const Field2D& u) {
    if (!(u.grid() == p.grid)) throw std::invalid_argument("eval_constraint: u not on problem grid");
    const auto s = detail::fractional_state(p, u);
    return volume_integral(detail::assemble_integrand(p.g.value, u, s.v, s.w), p.order);
}

/// Nodal residual of the Euler-Lagrange fractional PDE
///   d3 H{u} - Dx^alpha d4 H{u} - Dy^alpha d5 H{u}
/// with H = lambda0 f + lambda g.
inline Field2D euler_lagrange_residual(const IsoperimetricProblem& p, const Field2D& u,
                                       const MultiplierPair& m) {
    if (!(u.grid() == p.grid))
        throw std::invalid_argument("euler_lagrange_residual: u not on problem grid");
    const auto s = detail::fractional_state(p, u);
    const auto combined = [&](const PointFn& ff, const PointFn& gg) {
        return detail::assemble_integrand(
            [&](double x, double y, double uu, double vv, double ww) {
                return m.lambda0 * ff(x, y, uu, vv, ww) + m.lambda * gg(x, y, uu, vv, ww);
            },
            u, s.v, s.w);
    };
    const Field2D a = combined(p.f.d3, p.g.d3);
    const Field2D b = combined(p.f.d4, p.g.d4);
    const Field2D c = combined(p.f.d5, p.g.d5);
    return a - partial_frac(b, Axis::X, p.order) - partial_frac(c, Axis::Y, p.order);
}

/// d4 H{u} sampled on the x = a and x = b edges, d5 H{u} on the y = c and
/// y = d edges: the four natural boundary condition residuals.
inline EdgeResiduals natural_boundary_residuals(const IsoperimetricProblem& p, const Field2D& u,
                                                const MultiplierPair& m) {
    if (!(u.grid() == p.grid))
        throw std::invalid_argument("natural_boundary_residuals: u not on problem grid");
    const Grid2D& g = p.grid;
    const auto s = detail::fractional_state(p, u);
    EdgeResiduals r;
    r.at_x_a.resize(static_cast<std::size_t>(g.ny()));
    r.at_x_b.resize(static_cast<std::size_t>(g.ny()));
    r.at_y_c.resize(static_cast<std::size_t>(g.nx()));
    r.at_y_d.resize(static_cast<std::size_t>(g.nx()));
    const int ib = g.nx() - 1, jd = g.ny() - 1;
    for (int j = 0; j < g.ny(); ++j) {
        r.at_x_a[static_cast<std::size_t>(j)] =
            lagrangian_d4(p, m, g.a(), g.y(j), u(0, j), s.v(0, j), s.w(0, j));
        r.at_x_b[static_cast<std::size_t>(j)] =
            lagrangian_d4(p, m, g.b(), g.y(j), u(ib, j), s.v(ib, j), s.w(ib, j));
    }
    for (int i = 0; i < g.nx(); ++i) {
        r.at_y_c[static_cast<std::size_t>(i)] =
            lagrangian_d5(p, m, g.x(i), g.c(), u(i, 0), s.v(i, 0), s.w(i, 0));
        r.at_y_d[static_cast<std::size_t>(i)] =
            lagrangian_d5(p, m, g.x(i), g.d(), u(i, jd), s.v(i, jd), s.w(i, jd));
    }
    return r;
}

/// Central-difference Gateaux derivative of the objective or constraint at u
/// in direction eta.
inline double gateaux_derivative(const IsoperimetricProblem& p, Functional which, const Field2D& u,
                                 const Field2D& eta, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("gateaux_derivative: eps must be > 0");
    require_same_grid(u, eta, "gateaux_derivative");
    const auto phi = [&](const Field2D& cand) {
        return which == Functional::objective ? eval_objective(p, cand) : eval_constraint(p, cand);
    };
    return (phi(u + eps * eta) - phi(u - (eps)*eta)) / (2.0 * eps);
}

/// Default step: 1e-5 scaled by (1 + max|u|).
inline double gateaux_default_eps(const Field2D& u) { return 1e-5 * (1.0 + max_abs(u)); }

inline double gateaux_derivative(const IsoperimetricProblem& p, Functional which, const Field2D& u,
                                 const Field2D& eta) {
    return gateaux_derivative(p, which, u, eta, gateaux_default_eps(u));
}

/// A sampled point where the Hessian of H in (u, v, w) failed the
/// positive-semidefiniteness test.
struct ConvexityWitness {
    double x, y, u, v, w;
    double min_eigenvalue;
};

struct ConvexityVerdict {
    bool convex_on_samples;
    std::optional<ConvexityWitness> witness;
};

namespace detail {

/// Smallest eigenvalue of a symmetric 3x3 matrix by cyclic Jacobi rotations.
inline double min_eigenvalue_sym3(std::array<std::array<double, 3>, 3> m) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
        if (off < 1e-14 * (1.0 + std::abs(m[0][0]) + std::abs(m[1][1]) + std::abs(m[2][2]))) break;
        for (int pq = 0; pq < 3; ++pq) {
            const int p = pq == 2 ? 1 : 0;
            const int q = pq == 0 ? 1 : 2;
            if (m[p][q] == 0.0) continue;
            const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
            const double t = (theta >= 0 ? 1.0 : -1.0) /
                             (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double cth = 1.0 / std::sqrt(t * t + 1.0);
            const double sth = t * cth;
            std::array<std::array<double, 3>, 3> r{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
            r[p][p] = cth; r[q][q] = cth; r[p][q] = sth; r[q][p] = -sth;
            std::array<std::array<double, 3>, 3> tmp{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    double acc = 0.0;
                    for (int k = 0; k < 3; ++k) acc += r[k][i] * m[k][j];
                    tmp[i][j] = acc;
                }
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    double acc = 0.0;
                    for (int k = 0; k < 3; ++k) acc += tmp[i][k] * r[k][j];
                    m[i][j] = acc;
                }
        }
    }
    return std::min({m[0][0], m[1][1], m[2][2]});
}

} // namespace detail

/// Draws sample_count points (x, y) from the grid domain and (u, v, w) from
/// [-box_radius, box_radius]^3 with a seeded deterministic generator, forms
/// the finite-difference Hessian of H in (u, v, w) at each, and tests
/// positive semidefiniteness with eigenvalue bound >= -1e-6. Returns the
/// first violating point as witness.
inline ConvexityVerdict convexity_probe(const IsoperimetricProblem& p, const MultiplierPair& m,
                                        int sample_count, std::uint64_t seed,
                                        double box_radius = 10.0) {
    if (sample_count < 1) throw std::invalid_argument("convexity_probe: sample_count must be >= 1");
    detail::Rng rng(seed);
    const Grid2D& g = p.grid;
    for (int s = 0; s < sample_count; ++s) {
        const double x = rng.uniform(g.a(), g.b());
        const double y = rng.uniform(g.c(), g.d());
        const double u = rng.uniform(-box_radius, box_radius);
        const double v = rng.uniform(-box_radius, box_radius);
        const double w = rng.uniform(-box_radius, box_radius);

        const auto hval = [&](double du, double dv, double dw) {
            return lagrangian_value(p, m, x, y, u + du, v + dv, w + dw);
        };
        const std::array<double, 3> step{1e-4 * (1.0 + std::abs(u)), 1e-4 * (1.0 + std::abs(v)),
                                         1e-4 * (1.0 + std::abs(w))};
        std::array<std::array<double, 3>, 3> hess{};
        const double f0 = hval(0, 0, 0);
        for (int i = 0; i < 3; ++i) {
            std::array<double, 3> e{0, 0, 0};
            e[static_cast<std::size_t>(i)] = step[static_cast<std::size_t>(i)];
            hess[i][i] = (hval(e[0], e[1], e[2]) - 2.0 * f0 + hval(-e[0], -e[1], -e[2])) /
                         (step[static_cast<std::size_t>(i)] * step[static_cast<std::size_t>(i)]);
        }
        const auto cross = [&](int i, int j) {
            std::array<double, 3> ei{0, 0, 0}, ej{0, 0, 0};
            ei[static_cast<std::size_t>(i)] = step[static_cast<std::size_t>(i)];
            ej[static_cast<std::size_t>(j)] = step[static_cast<std::size_t>(j)];
            const double pp = hval(ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2]);
            const double pm = hval(ei[0] - ej[0], ei[1] - ej[1], ei[2] - ej[2]);
            const double mp = hval(ej[0] - ei[0], ej[1] - ei[1], ej[2] - ei[2]);
            const double mm = hval(-ei[0] - ej[0], -ei[1] - ej[1], -ei[2] - ej[2]);
            return (pp - pm - mp + mm) /
                   (4.0 * step[static_cast<std::size_t>(i)] * step[static_cast<std::size_t>(j)]);
        };
        hess[0][1] = hess[1][0] = cross(0, 1);
        hess[0][2] = hess[2][0] = cross(0, 2);
        hess[1][2] = hess[2][1] = cross(1, 2);

        const double lam_min = detail::min_eigenvalue_sym3(hess);
        if (lam_min < -1e-6)
            return ConvexityVerdict{false, ConvexityWitness{x, y, u, v, w, lam_min}};
    }
    return ConvexityVerdict{true, std::nullopt};
}

/// Audits d3/d4/d5 of a LagrangianSpec against central differences of value
/// at seeded random points; returns the worst relative deviation seen.
inline double check_partial_consistency(const LagrangianSpec& spec, const Grid2D& domain,
                                        int samples, std::uint64_t seed, double state_radius = 2.0) {
    detail::Rng rng(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double x = rng.uniform(domain.a(), domain.b());
        const double y = rng.uniform(domain.c(), domain.d());
        const double u = rng.uniform(-state_radius, state_radius);
        const double v = rng.uniform(-state_radius, state_radius);
        const double w = rng.uniform(-state_radius, state_radius);
        const std::array<double, 3> provided{spec.d3(x, y, u, v, w), spec.d4(x, y, u, v, w),
                                             spec.d5(x, y, u, v, w)};
        for (int arg = 0; arg < 3; ++arg) {
            const double h = 1e-6 * (1.0 + std::abs(arg == 0 ? u : arg == 1 ? v : w));
            const double up = spec.value(x, y, u + (arg == 0 ? h : 0), v + (arg == 1 ? h : 0),
                                         w + (arg == 2 ? h : 0));
            const double dn = spec.value(x, y, u - (arg == 0 ? h : 0), v - (arg == 1 ? h : 0),
                                         w - (arg == 2 ? h : 0));
            const double fd = (up - dn) / (2.0 * h);
            const double scale = std::max({1.0, std::abs(fd), std::abs(provided[static_cast<std::size_t>(arg)])});
            worst = std::max(worst, std::abs(fd - provided[static_cast<std::size_t>(arg)]) / scale);
        }
    }
    return worst;
}

} // namespace fracvar
