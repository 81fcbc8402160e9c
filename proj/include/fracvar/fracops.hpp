#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fracvar/fields.hpp"
#include "fracvar/gamma.hpp"
#include "fracvar/parallel.hpp"
#include "fracvar/quadrature.hpp"

namespace fracvar {

enum class Axis { X, Y };

namespace detail {

/// Shared coefficients of the L1-type scheme on a uniform axis:
///   coeff[m] = (((m+1)h)^(1-alpha) - (m h)^(1-alpha)) / (Gamma(2-alpha) * h).
/// The derivative of the piecewise-linear reconstruction of f - f(front) is
///   g[j] = sum_{k=0}^{j-1} (f[k+1]-f[k]) * coeff[j-1-k],   g[0] = 0,
/// which is exact for that reconstruction; the singularity is integrated
/// analytically, never differenced across.
struct L1Stencil {
    std::vector<double> coeff;

    L1Stencil(int n, double h, double alpha) : coeff(static_cast<std::size_t>(n) - 1) {
        const double scale = 1.0 / (gamma_fn(2.0 - alpha) * h);
        double prev = 0.0;  // (0*h)^(1-alpha)
        for (int m = 0; m + 1 < n; ++m) {
            const double cur = std::pow((m + 1) * h, 1.0 - alpha);
            coeff[static_cast<std::size_t>(m)] = (cur - prev) * scale;
            prev = cur;
        }
    }

    /// forward map: one derivative line, fixed ascending-k summation order
    void apply(const double* f, std::size_t stride, double* g, std::size_t gstride, int n) const {
        g[0] = 0.0;
        for (int j = 1; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < j; ++k) {
                const double df = f[(k + 1) * stride] - f[k * stride];
                acc += df * coeff[static_cast<std::size_t>(j - 1 - k)];
            }
            g[static_cast<std::size_t>(j) * gstride] = acc;
        }
    }

    /// exact transpose of apply (same coefficients, scatter form)
    void apply_transpose(const double* z, std::size_t stride, double* out, std::size_t ostride,
                         int n) const {
        for (int m = 0; m < n; ++m) out[static_cast<std::size_t>(m) * ostride] = 0.0;
        for (int j = 1; j < n; ++j) {
            const double zj = z[static_cast<std::size_t>(j) * stride];
            if (zj == 0.0) continue;
            for (int k = 0; k < j; ++k) {
                const double c = coeff[static_cast<std::size_t>(j - 1 - k)] * zj;
                out[(static_cast<std::size_t>(k) + 1) * ostride] += c;
                out[static_cast<std::size_t>(k) * ostride] -= c;
            }
        }
    }
};

} // namespace detail

/// Jumarie fractional derivative of order alpha in (0,1) of nodal samples,
/// via the L1-type closed form. g[0] = 0 by the empty-sum convention; the
/// derivative of any constant field is exactly zero (all increments vanish).
inline Field1D jumarie_derivative(const Field1D& f, FractionalOrder order) {
    const int n = f.n();
    detail::L1Stencil stencil(n, f.h(), order.value());
    std::vector<double> g(static_cast<std::size_t>(n));
    stencil.apply(f.values().data(), 1, g.data(), 1, n);
    return Field1D(f.a(), f.b(), std::move(g));
}

/// Fractional partial derivative along one axis: the 1D operator applied to
/// every grid line, the other coordinate held fixed. Lower limit a for X,
/// c for Y. Lines are independent and may run on several threads; results
/// are bit-identical to the serial order.
inline Field2D partial_frac(const Field2D& u, Axis axis, FractionalOrder order) {
    const Grid2D& g = u.grid();
    const int nx = g.nx(), ny = g.ny();
    std::vector<double> out(g.size());
    const double* src = u.values().data();
    if (axis == Axis::X) {
        detail::L1Stencil stencil(nx, g.hx(), order.value());
        detail::for_each_line(ny, static_cast<std::size_t>(nx) * nx, [&](int j) {
            stencil.apply(src + j, static_cast<std::size_t>(ny), out.data() + j,
                          static_cast<std::size_t>(ny), nx);
        });
    } else {
        detail::L1Stencil stencil(ny, g.hy(), order.value());
        detail::for_each_line(nx, static_cast<std::size_t>(ny) * ny, [&](int i) {
            stencil.apply(src + static_cast<std::size_t>(i) * ny, 1,
                          out.data() + static_cast<std::size_t>(i) * ny, 1, ny);
        });
    }
    return Field2D(g, std::move(out));
}

/// Algebraic adjoint of partial_frac as a linear map on nodal values:
/// <partial_frac(u), z> = <u, partial_frac_adjoint(z)> exactly, coefficient
/// by coefficient. This is what exact discrete gradients are built from.
inline Field2D partial_frac_adjoint(const Field2D& z, Axis axis, FractionalOrder order) {
    const Grid2D& g = z.grid();
    const int nx = g.nx(), ny = g.ny();
    std::vector<double> out(g.size());
    const double* src = z.values().data();
    if (axis == Axis::X) {
        detail::L1Stencil stencil(nx, g.hx(), order.value());
        detail::for_each_line(ny, static_cast<std::size_t>(nx) * nx, [&](int j) {
            stencil.apply_transpose(src + j, static_cast<std::size_t>(ny), out.data() + j,
                                    static_cast<std::size_t>(ny), nx);
        });
    } else {
        detail::L1Stencil stencil(ny, g.hy(), order.value());
        detail::for_each_line(nx, static_cast<std::size_t>(ny) * ny, [&](int i) {
            stencil.apply_transpose(src + static_cast<std::size_t>(i) * ny, 1,
                                    out.data() + static_cast<std::size_t>(i) * ny, 1, ny);
        });
    }
    return Field2D(g, std::move(out));
}

/// Fractional volume integral over the rectangle (n = 2 case):
/// alpha^2 * sum_ij wx[i] wy[j] f(i,j), product integration of the bilinear
/// reconstruction against both singular kernels.
inline double volume_integral(const Field2D& f, FractionalOrder order) {
    QuadratureWeights qw(f.grid(), order);
    const double a = order.value();
    return a * a * kernel_weighted_sum(f, qw);
}

inline double volume_integral(const Field2D& f, FractionalOrder order,
                              const QuadratureWeights& qw) {
    const double a = order.value();
    return a * a * kernel_weighted_sum(f, qw);
}

/// Fractional line integral on the boundary of the rectangle:
///   alpha * int_a^b [f(t,c)-f(t,d)] (b-t)^(alpha-1) dt
/// + alpha * int_c^d [f(b,t)-f(a,t)] (d-t)^(alpha-1) dt,
/// both evaluated with the 1D product-integration weights.
inline double line_integral(const Field2D& f, FractionalOrder order) {
    const Grid2D& g = f.grid();
    const double a = order.value();
    const std::vector<double> wx = singular_axis_weights(g.a(), g.b(), g.nx(), a);
    const std::vector<double> wy = singular_axis_weights(g.c(), g.d(), g.ny(), a);
    double horiz = 0.0;
    for (int i = 0; i < g.nx(); ++i)
        horiz += wx[static_cast<std::size_t>(i)] * (f(i, 0) - f(i, g.ny() - 1));
    double vert = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        vert += wy[static_cast<std::size_t>(j)] * (f(g.nx() - 1, j) - f(0, j));
    return a * (horiz + vert);
}

/// First component of the line integral (horizontal edges, x-kernel).
inline double line_integral_first(const Field2D& f, FractionalOrder order,
                                  const QuadratureWeights& qw) {
    const Grid2D& g = f.grid();
    double acc = 0.0;
    for (int i = 0; i < g.nx(); ++i)
        acc += qw.wx[static_cast<std::size_t>(i)] * (f(i, 0) - f(i, g.ny() - 1));
    return order.value() * acc;
}

/// Second component of the line integral (vertical edges, y-kernel).
inline double line_integral_second(const Field2D& f, FractionalOrder order,
                                   const QuadratureWeights& qw) {
    const Grid2D& g = f.grid();
    double acc = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        acc += qw.wy[static_cast<std::size_t>(j)] * (f(g.nx() - 1, j) - f(0, j));
    return order.value() * acc;
}

/// The three members of the fractional Green identity and its signed defect.
struct GreenReport {
    double lhs;
    double rhs_volume;
    double rhs_boundary;
    double residual;  ///< lhs - (rhs_volume + rhs_boundary)
};

/// Evaluates both sides of the fractional Green formula for (h, k, eta):
///   lhs          = intint [h * Dx eta - k * Dy eta] * kernels
///   rhs_volume   = -intint [Dx h - Dy k] * eta * kernels
///   rhs_boundary = Gamma(1+alpha) * [ I1(h*eta) + I2(k*eta) ]
/// The residual measures the defect of the identity; when eta vanishes on
/// the boundary the line-integral samples are all zero and rhs_boundary is
/// exactly 0.
inline GreenReport green_residual(const Field2D& h, const Field2D& k, const Field2D& eta,
                                  FractionalOrder order) {
    require_same_grid(h, k, "green_residual");
    require_same_grid(h, eta, "green_residual");
    const QuadratureWeights qw(h.grid(), order);

    const Field2D dx_eta = partial_frac(eta, Axis::X, order);
    const Field2D dy_eta = partial_frac(eta, Axis::Y, order);
    const Field2D lhs_field = hadamard(h, dx_eta) - hadamard(k, dy_eta);
    const double lhs = kernel_weighted_sum(lhs_field, qw);

    const Field2D dx_h = partial_frac(h, Axis::X, order);
    const Field2D dy_k = partial_frac(k, Axis::Y, order);
    const Field2D vol_field = hadamard(dx_h - dy_k, eta);
    const double rhs_volume = -kernel_weighted_sum(vol_field, qw);

    const double factorial_alpha = gamma_fn(1.0 + order.value());
    const double rhs_boundary =
        factorial_alpha * (line_integral_first(hadamard(h, eta), order, qw) +
                           line_integral_second(hadamard(k, eta), order, qw));

    return GreenReport{lhs, rhs_volume, rhs_boundary, lhs - (rhs_volume + rhs_boundary)};
}

/// Exact Jumarie derivative of (t-a)^beta: Gamma(beta+1)/Gamma(beta-alpha+1)
/// * (x-a)^(beta-alpha). Test oracle for the discrete operators.
inline double power_rule_derivative(double beta, FractionalOrder order, double a, double x) {
    if (!(beta > 0.0)) throw std::domain_error("power_rule_derivative: beta must be > 0");
    if (x < a) throw std::domain_error("power_rule_derivative: x must be >= a");
    const double alpha = order.value();
    if (x == a) {
        if (beta > alpha) return 0.0;
        throw std::domain_error("power_rule_derivative: unbounded limit at x = a for beta <= alpha");
    }
    return gamma_fn(beta + 1.0) / gamma_fn(beta - alpha + 1.0) * std::pow(x - a, beta - alpha);
}

} // namespace fracvar
