#pragma once

#include <functional>
#include <optional>
#include <string>

#include "relent/ledger.hpp"
#include "relent/noise.hpp"
#include "relent/spectral.hpp"
#include "relent/state.hpp"
#include "relent/thermo.hpp"

namespace relent {

class ReferenceProcess;  // diagnostics

/// Physical parameters of the (optionally Mach-scaled) system. eps = 1
/// recovers the unscaled equations; for eps < 1 the pressure gradient carries
/// 1/eps^2 and mu, eta are understood as mu_eps, eta_eps.
struct ModelParams {
    PressureLaw law;
    double mu = 0.1;
    double eta = 0.0;
    double eps = 1.0;
    NoiseModel noise = NoiseModel::zero();

    void validate(int dim) const;
};

struct StepperConfig {
    enum class Viscous { explicit_step, semi_implicit };

    double cfl = 0.4;
    double rho_floor = 1e-8;
    double max_dt = std::numeric_limits<double>::infinity();
    Viscous viscous_treatment = Viscous::explicit_step;

    void validate() const;
};

/// div S(grad u) with S = mu (grad u + grad^t u - (2/3) div u I) + eta div u I,
/// composed central stencils. In 1D this reduces to (4 mu/3 + eta) u_xx.
VectorField stress_divergence(const VectorField& u, double mu, double eta);

/// Pointwise S(grad u):grad u (nonnegative for mu, eta >= 0).
ScalarField dissipation_density(const VectorField& u, double mu, double eta);

/// int (S(grad u) - S(grad U)) : (grad u - grad U) dx.
double mutual_dissipation(const VectorField& u, const VectorField& U, double mu, double eta);

/// int S(grad a) : grad b dx.
double stress_inner(const VectorField& a, const VectorField& b, double mu, double eta);

struct DriftRhs {
    ScalarField drho;
    VectorField dmom;
};

/// Conservative drift: drho = -div m, dmom = -div(m (x) m / rho)
/// - (1/eps^2) grad p + div S(grad u). Flux form throughout, so both
/// tendencies integrate to zero up to roundoff. `include_viscous` = false
/// leaves the viscous term to the semi-implicit stepper.
DriftRhs drift_rhs(const State& s, const ModelParams& params, double rho_floor,
                   bool include_viscous = true);

/// Stable step: cfl * min( dx/(max|u| + c_s/eps), dx^2/(2 d nu), nu/c_tot^2 )
/// with c_s = sqrt(p'(max rho)), nu = (4 mu/3 + eta)/min rho. The second term
/// is dropped for the semi-implicit viscous treatment, the third whenever
/// nu = 0. Capped by max_dt.
double cfl_dt(const State& s, const ModelParams& params, const StepperConfig& cfg);

/// dt frozen for a whole run, aligned so that t_end is an exact multiple.
double frozen_dt(const State& init, const ModelParams& params, const StepperConfig& cfg,
                 double t_end);

/// One Euler-Maruyama step. dW must be sampled with this dt. Density
/// positivity is enforced by error, never clipping. The workspace is only
/// needed for the semi-implicit viscous solve.
State em_step(const State& s, const ModelParams& params, const StepperConfig& cfg, double dt,
              std::span<const double> dW, SpectralWorkspace* ws = nullptr);

struct TrajectoryResult {
    State final_state;
    EnergyLedger ledger;
    double dt = 0.0;
    long steps = 0;
    /// max over the run of ||grad U||_inf of the coupled reference, if any
    double ref_grad_max = 0.0;
};

struct RunHooks {
    /// Called for every ledger row after the standard columns are filled.
    std::function<void(const State&, LedgerRow&)> on_row;
};

/// Repeated em_step with the path's dt until t_end. Ledger rows are recorded
/// at t = 0, every `ledger_every` steps and at t_end. A coupled reference
/// process advances in lockstep on the same increments and populates the
/// relative-energy columns. On a numerical failure the last good state is
/// checkpointed under `checkpoint_dir` (when nonempty) before rethrowing.
TrajectoryResult run_trajectory(const State& init, const ModelParams& params,
                                const StepperConfig& cfg, const WienerPath& path, double t_end,
                                int ledger_every, ReferenceProcess* ref = nullptr,
                                const std::string& checkpoint_dir = "",
                                const RunHooks* hooks = nullptr);

}  // namespace relent
