#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "relent/errors.hpp"

namespace relent {

/// Uniform periodic grid on the flat torus [-length/2, length/2)^dim,
/// dim in {1, 2}, cell-centered collocation.
struct Grid {
    int dim = 1;
    int n = 8;            // cells per axis
    double length = 2.0;  // axis period
    double dx = 0.25;

    Grid() = default;
    Grid(int dim, int n, double length = 2.0);

    std::size_t cells() const {
        return dim == 1 ? static_cast<std::size_t>(n)
                        : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    }
    double cell_volume() const { return dim == 1 ? dx : dx * dx; }
    double coord(int i) const { return -0.5 * length + (i + 0.5) * dx; }
    std::size_t index(int ix, int iy = 0) const {
        return static_cast<std::size_t>(iy) * n + static_cast<std::size_t>(ix);
    }

    bool operator==(const Grid&) const = default;
};

/// Cell-centered scalar samples. Operations treat fields as immutable values;
/// mutation is confined to construction.
class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid_(g), data_(g.cells(), fill) {}

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(int ix, int iy = 0) { return data_[grid_.index(ix, iy)]; }
    double at(int ix, int iy = 0) const { return data_[grid_.index(ix, iy)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

  private:
    Grid grid_;
    std::vector<double> data_;
};

/// Cell-centered vector samples, component-major storage (comp*cells + idx).
class VectorField {
  public:
    VectorField() = default;
    explicit VectorField(const Grid& g, double fill = 0.0)
        : grid_(g), data_(g.cells() * g.dim, fill) {}

    const Grid& grid() const { return grid_; }
    int components() const { return grid_.dim; }
    std::size_t cells() const { return grid_.cells(); }

    double& comp(int c, std::size_t i) { return data_[static_cast<std::size_t>(c) * cells() + i]; }
    double comp(int c, std::size_t i) const {
        return data_[static_cast<std::size_t>(c) * cells() + i];
    }
    std::span<double> comp_span(int c) { return {data_.data() + c * cells(), cells()}; }
    std::span<const double> comp_span(int c) const { return {data_.data() + c * cells(), cells()}; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

  private:
    Grid grid_;
    std::vector<double> data_;
};

// -- second-order central differences with periodic wraparound ------------

ScalarField partial(const ScalarField& f, int axis);
VectorField partial(const VectorField& v, int axis);
VectorField grad(const ScalarField& f);
ScalarField divergence(const VectorField& v);
/// Composed stencil div(grad(.)): keeps summation-by-parts exact.
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& v);

/// Dynamically ranked field, for the generic diff_op dispatch surface.
using Field = std::variant<ScalarField, VectorField>;

enum class DiffKind { grad, divergence, laplacian };

/// Generic dispatcher; throws UsageError on rank mismatch (e.g. div of a scalar).
Field diff_op(const Field& f, DiffKind kind);
Field diff_op_partial(const Field& f, int axis);

// -- reductions ------------------------------------------------------------

/// Sum of samples times cell volume.
double integrate(const ScalarField& f);
/// Discrete L2 inner products, \sum f g dV.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);
double max_norm(const ScalarField& f);
double max_norm(const VectorField& v);
double min_value(const ScalarField& f);
double max_value(const ScalarField& f);
bool all_finite(const ScalarField& f);
bool all_finite(const VectorField& v);

// -- small arithmetic helpers ----------------------------------------------

ScalarField& axpy(ScalarField& y, double a, const ScalarField& x);  // y += a*x
VectorField& axpy(VectorField& y, double a, const VectorField& x);
ScalarField scaled(const ScalarField& f, double a);
VectorField scaled(const VectorField& v, double a);

}  // namespace relent
