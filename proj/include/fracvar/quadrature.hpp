#pragma once

#include <cmath>
#include <vector>

#include "fracvar/fields.hpp"

namespace fracvar {

/// Product-integration weights for the weakly singular kernel (b-x)^(alpha-1)
/// on a uniform grid of [a,b]: sum_i w[i]*phi(x_i) equals the exact integral
/// of phi(x)*(b-x)^(alpha-1) whenever phi is the piecewise-linear interpolant
/// of its nodal samples. The kernel is integrable but unbounded at x = b, so
/// it is never sampled; each segment integral is evaluated in closed form.
///
/// Per segment [x_k, x_{k+1}] with s = b - x:
///   I0 = int (b-x)^(alpha-1) dx           = (s_k^a - s_{k+1}^a)/a
///   I1 = int (x-x_k)(b-x)^(alpha-1) dx    = s_k*I0 - (s_k^(a+1)-s_{k+1}^(a+1))/(a+1)
/// and the hat-function split gives w[k] += I0 - I1/h, w[k+1] += I1/h.
inline std::vector<double> singular_axis_weights(double a, double b, int n, double alpha) {
    if (n < 2) throw std::invalid_argument("singular_axis_weights: need n >= 2");
    if (!(a < b)) throw std::invalid_argument("singular_axis_weights: need a < b");
    const double h = (b - a) / (n - 1);
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    // s_k = (n-1-k)*h exactly; powers evaluated once per node
    std::vector<double> sa(static_cast<std::size_t>(n)), sa1(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double s = (n - 1 - k) * h;
        sa[static_cast<std::size_t>(k)] = std::pow(s, alpha);
        sa1[static_cast<std::size_t>(k)] = std::pow(s, alpha + 1.0);
    }
    for (int k = 0; k + 1 < n; ++k) {
        const double sk = (n - 1 - k) * h;
        const double i0 = (sa[k] - sa[k + 1]) / alpha;
        const double i1 = sk * i0 - (sa1[k] - sa1[k + 1]) / (alpha + 1.0);
        w[static_cast<std::size_t>(k)] += i0 - i1 / h;
        w[static_cast<std::size_t>(k) + 1] += i1 / h;
    }
    return w;
}

/// Axis weight pair for a Grid2D: wx integrates against (b-x)^(alpha-1),
/// wy against (d-y)^(alpha-1).
struct QuadratureWeights {
    std::vector<double> wx;
    std::vector<double> wy;

    QuadratureWeights(const Grid2D& grid, FractionalOrder order)
        : wx(singular_axis_weights(grid.a(), grid.b(), grid.nx(), order.value())),
          wy(singular_axis_weights(grid.c(), grid.d(), grid.ny(), order.value())) {}
};

/// sum_ij wx[i]*wy[j]*f(i,j): the double integral of f against both singular
/// kernels (no alpha^2 prefactor). Summation order is fixed (per-line, then
/// across lines) so results are reproducible.
inline double kernel_weighted_sum(const Field2D& f, const QuadratureWeights& qw) {
    const int nx = f.grid().nx(), ny = f.grid().ny();
    double total = 0.0;
    for (int i = 0; i < nx; ++i) {
        double line = 0.0;
        for (int j = 0; j < ny; ++j) line += qw.wy[static_cast<std::size_t>(j)] * f(i, j);
        total += qw.wx[static_cast<std::size_t>(i)] * line;
    }
    return total;
}

} // namespace fracvar
