#pragma once

#include "relent/grid.hpp"

namespace relent {

/// Conservative-variable state (rho, m = rho u) at time t.
struct State {
    double t = 0.0;
    ScalarField rho;
    VectorField mom;

    State() = default;
    State(double t, ScalarField rho, VectorField mom);

    const Grid& grid() const { return rho.grid(); }
};

/// Velocity u = m / rho; throws PositivityError below `floor`.
VectorField velocity(const State& s, double floor = 0.0);

/// Checks rho >= 0 and m = 0 on vacuum cells.
void validate_state(const State& s);

}  // namespace relent
