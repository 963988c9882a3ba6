#pragma once

#include "relent/grid.hpp"

namespace relent {

/// Isentropic pressure law p(rho) = a * rho^gamma with its potential
/// H(rho) = rho * int_0^rho p(z)/z^2 dz = a * rho^gamma / (gamma - 1).
struct PressureLaw {
    double gamma = 2.0;
    double a = 1.0;
    /// Allows gamma <= 3/2 for 1D/2D experiments; the default enforces the
    /// hypothesis gamma > 3/2.
    bool relax_gamma = false;

    PressureLaw() = default;
    PressureLaw(double gamma, double a, bool relax_gamma = false);

    double p(double rho) const;
    double dp(double rho) const;   // p'
    double d2p(double rho) const;  // p''
    double H(double rho) const;
    double dH(double rho) const;   // H'
    double d2H(double rho) const;  // H'' = p'(rho)/rho
    double d3H(double rho) const;  // H'''
};

/// Pointwise pressure field; rejects negative density, naming the cell.
ScalarField pressure(const ScalarField& rho, const PressureLaw& law);

/// Closed-form pressure potential (same as law.H; kept as the named operation).
double pressure_potential(double rho, const PressureLaw& law);

/// Bregman divergence H(rho) - H'(r)(rho - r) - H(r), direct evaluation.
double bregman(double rho, double r, const PressureLaw& law);

/// Cancellation-free ratio bregman(rho, r)/(rho-r)^2 via the integral
/// remainder a*gamma*int_0^1 (1-s) (r + s(rho-r))^(gamma-2) ds.
double bregman_ratio(double rho, double r, const PressureLaw& law);

/// Smooth density cutoff: 1 on [rho_lower, rho_upper], C^1 blend to 0 outside
/// the band widened by transition_width (relative).
struct EssResSplit {
    double rho_lower = 0.5;
    double rho_upper = 2.0;
    double transition_width = 0.2;

    double cutoff(double rho) const;  // Phi_M
};

struct EssRes {
    ScalarField ess;
    ScalarField res;
};
struct EssResVec {
    VectorField ess;
    VectorField res;
};

/// ess = Phi_M(rho) * h, res = h - ess (exact partition).
EssRes ess_res_split(const ScalarField& h, const ScalarField& rho, const EssResSplit& split);
EssResVec ess_res_split(const VectorField& h, const ScalarField& rho, const EssResSplit& split);

enum class CoercivityMode { quadratic_band, residual_gamma };

/// Brute-force c(delta) over a fine (rho, r) grid:
///   quadratic_band: min of bregman/(rho-r)^2 on delta < rho, r < 1/delta;
///   residual_gamma: min of bregman/(1+rho^gamma) for delta < r < 1/delta and
///                   rho outside [delta/2, 2/delta].
/// Throws CoercivityError if the computed constant is not strictly positive.
double coercivity_constant(double delta, const PressureLaw& law, CoercivityMode mode);

/// Relative energy of (rho, m) against a positive reference (r, U):
///   int [ |m - rho U|^2/(2 rho) + (1/eps^2)(H(rho) - H'(r)(rho-r) - H(r)) ] dx
/// with the vacuum convention 0 where rho = 0 and m = 0 (error otherwise).
double relative_energy(const ScalarField& rho, const VectorField& mom, const ScalarField& r,
                       const VectorField& U, const PressureLaw& law, double eps = 1.0);

/// Same value assembled from the five-term expansion
///   int[ rho|u|^2/2 + H ] - int rho u.U + int rho|U|^2/2 - int rho H'(r)
///   + int [H'(r) r - H(r)], potential terms carrying 1/eps^2.
double relative_energy_expanded(const ScalarField& rho, const VectorField& mom,
                                const ScalarField& r, const VectorField& U,
                                const PressureLaw& law, double eps = 1.0);

/// Kinetic part |m|^2/(2 rho) with the vacuum convention; throws VacuumError
/// when m != 0 on a vacuum cell.
double kinetic_energy(const ScalarField& rho, const VectorField& mom);

}  // namespace relent
