#pragma once

#include <cstdint>

#include "relent/state.hpp"

namespace relent {

ScalarField constant_field(const Grid& g, double value);
VectorField constant_velocity(const Grid& g, const std::vector<double>& value);

/// amp * sin(2 pi (mx x + my y)/L + phase).
ScalarField harmonic_scalar(const Grid& g, double amp, int mx, int my = 0, double phase = 0.0);

/// Band-limited random field with decaying mode amplitudes and counter-keyed
/// phases; zero mean, max amplitude ~ amp.
ScalarField random_smooth_scalar(const Grid& g, std::uint64_t seed, std::uint32_t tag, double amp,
                                 int max_mode = 3);
VectorField random_smooth_velocity(const Grid& g, std::uint64_t seed, std::uint32_t tag,
                                   double amp, int max_mode = 3);

/// 2D Taylor-Green vortex amp*(cos(pi x) sin(pi y), -sin(pi x) cos(pi y))
/// scaled to the grid period.
VectorField taylor_green(const Grid& g, double amp);

State make_state(const ScalarField& rho, const VectorField& u, double t = 0.0);

State equilibrium_state(const Grid& g, double rho0 = 1.0);

/// rho = rho0 + amp_rho sin(2 pi mode x / L), u_c = amp_u cos(2 pi mode x / L)
/// (y-modulated in 2D); the standard smooth test data.
State smooth_state(const Grid& g, double rho0, double amp_rho, double amp_u, int mode = 1);

/// Well-prepared data for the singular limit: rho = 1 + eps*delta*phi,
/// m = v0 + delta*psi with zero-mean phi and a fixed smooth psi.
State well_prepared_state(const Grid& g, double eps, double delta, const VectorField& v0);

}  // namespace relent
