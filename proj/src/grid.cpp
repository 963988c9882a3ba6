#include "relent/grid.hpp"

#include <cmath>

namespace relent {

Grid::Grid(int dim_, int n_, double length_) : dim(dim_), n(n_), length(length_) {
    if (dim != 1 && dim != 2)
        throw UsageError("grid: dim must be 1 or 2, got " + std::to_string(dim));
    if (n < 8 || n % 2 != 0)
        throw UsageError("grid: n must be even and >= 8, got " + std::to_string(n));
    if (length <= 0.0) throw UsageError("grid: length must be positive");
    dx = length / n;
}

namespace {

inline int wrap_up(int i, int n) { return i + 1 == n ? 0 : i + 1; }
inline int wrap_dn(int i, int n) { return i == 0 ? n - 1 : i - 1; }

// central difference of one component span along `axis`, writing into out
void central_diff(const Grid& g, std::span<const double> in, std::span<double> out, int axis) {
    const int n = g.n;
    const double inv2dx = 1.0 / (2.0 * g.dx);
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i)
            out[i] = (in[wrap_up(i, n)] - in[wrap_dn(i, n)]) * inv2dx;
        return;
    }
    if (axis == 0) {
        for (int iy = 0; iy < n; ++iy) {
            const std::size_t row = static_cast<std::size_t>(iy) * n;
            for (int ix = 0; ix < n; ++ix)
                out[row + ix] = (in[row + wrap_up(ix, n)] - in[row + wrap_dn(ix, n)]) * inv2dx;
        }
    } else {
        for (int iy = 0; iy < n; ++iy) {
            const std::size_t row = static_cast<std::size_t>(iy) * n;
            const std::size_t up = static_cast<std::size_t>(wrap_up(iy, n)) * n;
            const std::size_t dn = static_cast<std::size_t>(wrap_dn(iy, n)) * n;
            for (int ix = 0; ix < n; ++ix)
                out[row + ix] = (in[up + ix] - in[dn + ix]) * inv2dx;
        }
    }
}

void check_axis(const Grid& g, int axis) {
    if (axis < 0 || axis >= g.dim)
        throw UsageError("diff_op: axis " + std::to_string(axis) + " out of range for dim " +
                         std::to_string(g.dim));
}

}  // namespace

ScalarField partial(const ScalarField& f, int axis) {
    check_axis(f.grid(), axis);
    ScalarField out(f.grid());
    central_diff(f.grid(), f.data(), out.data(), axis);
    return out;
}

VectorField partial(const VectorField& v, int axis) {
    check_axis(v.grid(), axis);
    VectorField out(v.grid());
    for (int c = 0; c < v.components(); ++c)
        central_diff(v.grid(), v.comp_span(c), out.comp_span(c), axis);
    return out;
}

VectorField grad(const ScalarField& f) {
    VectorField out(f.grid());
    for (int c = 0; c < f.grid().dim; ++c)
        central_diff(f.grid(), f.data(), out.comp_span(c), c);
    return out;
}

ScalarField divergence(const VectorField& v) {
    const Grid& g = v.grid();
    ScalarField out(g);
    std::vector<double> tmp(g.cells());
    for (int c = 0; c < g.dim; ++c) {
        central_diff(g, v.comp_span(c), tmp, c);
        for (std::size_t i = 0; i < tmp.size(); ++i) out[i] += tmp[i];
    }
    return out;
}

ScalarField laplacian(const ScalarField& f) { return divergence(grad(f)); }

VectorField laplacian(const VectorField& v) {
    VectorField out(v.grid());
    for (int c = 0; c < v.components(); ++c) {
        ScalarField comp(v.grid());
        auto src = v.comp_span(c);
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = src[i];
        ScalarField lap = laplacian(comp);
        auto dst = out.comp_span(c);
        for (std::size_t i = 0; i < comp.size(); ++i) dst[i] = lap[i];
    }
    return out;
}

Field diff_op(const Field& f, DiffKind kind) {
    switch (kind) {
        case DiffKind::grad:
            if (!std::holds_alternative<ScalarField>(f))
                throw UsageError("diff_op: grad expects a scalar field");
            return grad(std::get<ScalarField>(f));
        case DiffKind::divergence:
            if (!std::holds_alternative<VectorField>(f))
                throw UsageError("diff_op: div expects a vector field");
            return divergence(std::get<VectorField>(f));
        case DiffKind::laplacian:
            if (std::holds_alternative<ScalarField>(f)) return laplacian(std::get<ScalarField>(f));
            return laplacian(std::get<VectorField>(f));
    }
    throw UsageError("diff_op: unknown kind");
}

Field diff_op_partial(const Field& f, int axis) {
    if (std::holds_alternative<ScalarField>(f)) return partial(std::get<ScalarField>(f), axis);
    return partial(std::get<VectorField>(f), axis);
}

double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.data()) s += v;
    return s * f.grid().cell_volume();
}

double inner(const ScalarField& a, const ScalarField& b) {
    if (a.grid() != b.grid()) throw UsageError("inner: grids differ");
    double s = 0.0;
    auto pa = a.data(), pb = b.data();
    for (std::size_t i = 0; i < pa.size(); ++i) s += pa[i] * pb[i];
    return s * a.grid().cell_volume();
}

double inner(const VectorField& a, const VectorField& b) {
    if (a.grid() != b.grid()) throw UsageError("inner: grids differ");
    double s = 0.0;
    auto pa = a.data(), pb = b.data();
    for (std::size_t i = 0; i < pa.size(); ++i) s += pa[i] * pb[i];
    return s * a.grid().cell_volume();
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }
double l2_norm(const VectorField& v) { return std::sqrt(inner(v, v)); }

double max_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_norm(const VectorField& v) {
    double m = 0.0;
    for (double x : v.data()) m = std::max(m, std::abs(x));
    return m;
}

double min_value(const ScalarField& f) {
    double m = f.data()[0];
    for (double v : f.data()) m = std::min(m, v);
    return m;
}

double max_value(const ScalarField& f) {
    double m = f.data()[0];
    for (double v : f.data()) m = std::max(m, v);
    return m;
}

bool all_finite(const ScalarField& f) {
    for (double v : f.data())
        if (!std::isfinite(v)) return false;
    return true;
}

bool all_finite(const VectorField& v) {
    for (double x : v.data())
        if (!std::isfinite(x)) return false;
    return true;
}

ScalarField& axpy(ScalarField& y, double a, const ScalarField& x) {
    auto py = y.data();
    auto px = x.data();
    for (std::size_t i = 0; i < py.size(); ++i) py[i] += a * px[i];
    return y;
}

VectorField& axpy(VectorField& y, double a, const VectorField& x) {
    auto py = y.data();
    auto px = x.data();
    for (std::size_t i = 0; i < py.size(); ++i) py[i] += a * px[i];
    return y;
}

ScalarField scaled(const ScalarField& f, double a) {
    ScalarField out = f;
    for (double& v : out.data()) v *= a;
    return out;
}

VectorField scaled(const VectorField& v, double a) {
    VectorField out = v;
    for (double& x : out.data()) x *= a;
    return out;
}

}  // namespace relent
