#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracvar {

/// Fractional order alpha, restricted to (0, 1).
class FractionalOrder {
public:
    explicit FractionalOrder(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("FractionalOrder: alpha must lie in (0,1), got " +
                                        std::to_string(alpha));
    }
    double value() const { return alpha_; }

private:
    double alpha_;
};

/// Uniform tensor grid on the rectangle [a,b] x [c,d].
///
/// Node coordinates are reproducible bit-exactly as a + i*hx / c + j*hy with
/// the spacings computed once at construction.
class Grid2D {
public:
    Grid2D(double a, double b, double c, double d, int nx, int ny)
        : a_(a), b_(b), c_(c), d_(d), nx_(nx), ny_(ny) {
        if (!(a < b) || !(c < d))
            throw std::invalid_argument("Grid2D: domain bounds must satisfy a < b and c < d");
        if (nx < 2 || ny < 2)
            throw std::invalid_argument("Grid2D: node counts must be >= 2");
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d))
            throw std::invalid_argument("Grid2D: bounds must be finite");
        hx_ = (b - a) / (nx - 1);
        hy_ = (d - c) / (ny - 1);
    }

    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }
    double d() const { return d_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double x(int i) const { return a_ + i * hx_; }
    double y(int j) const { return c_ + j * hy_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }

    bool is_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
    }

    friend bool operator==(const Grid2D& g, const Grid2D& h) {
        return g.a_ == h.a_ && g.b_ == h.b_ && g.c_ == h.c_ && g.d_ == h.d_ &&
               g.nx_ == h.nx_ && g.ny_ == h.ny_;
    }

private:
    double a_, b_, c_, d_;
    int nx_, ny_;
    double hx_, hy_;
};

inline Grid2D make_grid(double a, double b, double c, double d, int nx, int ny) {
    return Grid2D(a, b, c, d, nx, ny);
}

namespace detail {
inline void require_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}
} // namespace detail

/// Samples of a function on the nodes of a 1D uniform grid on [a,b].
class Field1D {
public:
    Field1D(double a, double b, std::vector<double> values)
        : a_(a), b_(b), values_(std::move(values)) {
        if (!(a < b)) throw std::invalid_argument("Field1D: requires a < b");
        if (values_.size() < 2) throw std::invalid_argument("Field1D: needs at least 2 nodes");
        detail::require_finite(values_, "Field1D");
    }

    double a() const { return a_; }
    double b() const { return b_; }
    int n() const { return static_cast<int>(values_.size()); }
    double h() const { return (b_ - a_) / (n() - 1); }
    double x(int i) const { return a_ + i * h(); }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    std::span<const double> values() const { return values_; }

private:
    double a_, b_;
    std::vector<double> values_;
};

inline Field1D sample_line(const std::function<double(double)>& fn, double a, double b, int n) {
    if (n < 2) throw std::invalid_argument("sample_line: needs at least 2 nodes");
    const double h = (b - a) / (n - 1);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = fn(a + i * h);
    return Field1D(a, b, std::move(v));
}

/// Immutable nodal samples of a function on a Grid2D. Storage is row-major
/// with y fastest: values[i*ny + j] is the sample at node (x_i, y_j).
class Field2D {
public:
    Field2D(Grid2D grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("Field2D: value count does not match grid");
        detail::require_finite(values_, "Field2D");
    }

    const Grid2D& grid() const { return grid_; }
    double operator()(int i, int j) const {
        return values_[static_cast<std::size_t>(i) * grid_.ny() + j];
    }
    std::span<const double> values() const { return values_; }

    static Field2D zeros(const Grid2D& grid) {
        return Field2D(grid, std::vector<double>(grid.size(), 0.0));
    }
    static Field2D constant(const Grid2D& grid, double value) {
        return Field2D(grid, std::vector<double>(grid.size(), value));
    }

private:
    Grid2D grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const Field2D& u, const Field2D& v, const char* what) {
    if (!(u.grid() == v.grid()))
        throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

inline Field2D sample(const std::function<double(double, double)>& fn, const Grid2D& grid) {
    std::vector<double> v(grid.size());
    std::size_t idx = 0;
    for (int i = 0; i < grid.nx(); ++i)
        for (int j = 0; j < grid.ny(); ++j) v[idx++] = fn(grid.x(i), grid.y(j));
    return Field2D(grid, std::move(v));  // ctor rejects non-finite samples
}

inline Field2D operator+(const Field2D& u, const Field2D& v) {
    require_same_grid(u, v, "Field2D::operator+");
    std::vector<double> w(u.values().begin(), u.values().end());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += v.values()[k];
    return Field2D(u.grid(), std::move(w));
}

inline Field2D operator-(const Field2D& u, const Field2D& v) {
    require_same_grid(u, v, "Field2D::operator-");
    std::vector<double> w(u.values().begin(), u.values().end());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= v.values()[k];
    return Field2D(u.grid(), std::move(w));
}

inline Field2D operator*(double s, const Field2D& u) {
    std::vector<double> w(u.values().begin(), u.values().end());
    for (double& x : w) x *= s;
    return Field2D(u.grid(), std::move(w));
}

inline Field2D hadamard(const Field2D& u, const Field2D& v) {
    require_same_grid(u, v, "hadamard");
    std::vector<double> w(u.values().begin(), u.values().end());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] *= v.values()[k];
    return Field2D(u.grid(), std::move(w));
}

inline double max_abs(const Field2D& u) {
    double m = 0.0;
    for (double x : u.values()) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Bilinear reconstruction of the nodal samples at an arbitrary point of the
/// rectangle. Exact at nodes; clamps (x,y) to the closed rectangle.
inline double bilinear_at(const Field2D& u, double x, double y) {
    const Grid2D& g = u.grid();
    double sx = (x - g.a()) / g.hx();
    double sy = (y - g.c()) / g.hy();
    sx = std::clamp(sx, 0.0, static_cast<double>(g.nx() - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(g.ny() - 1));
    int i = std::min(static_cast<int>(sx), g.nx() - 2);
    int j = std::min(static_cast<int>(sy), g.ny() - 2);
    const double tx = sx - i, ty = sy - j;
    return (1 - tx) * (1 - ty) * u(i, j) + tx * (1 - ty) * u(i + 1, j) +
           (1 - tx) * ty * u(i, j + 1) + tx * ty * u(i + 1, j + 1);
}

/// The sup-type norm that defines local minimizers: max|u| plus the max of
/// both fractional partials, with the sup over the rectangle replaced by the
/// max over grid nodes. The derivative fields are supplied by the caller
/// (fracops produces them) so this module stays independent of the operators.
inline double norm_1_inf(const Field2D& u, const Field2D& dux, const Field2D& duy) {
    require_same_grid(u, dux, "norm_1_inf");
    require_same_grid(u, duy, "norm_1_inf");
    return max_abs(u) + max_abs(dux) + max_abs(duy);
}

} // namespace fracvar
