#pragma once

#include <functional>

#include "relent/cns.hpp"
#include "relent/diagnostics.hpp"
#include "relent/initial_data.hpp"

namespace relent {

struct ExperimentPlan {
    enum class Kind { energy, twin, eps_sweep, ito_check, coercivity };
    enum class MuRule { mu_eq_eps, mu_eq_eps_sq, custom };

    Kind kind = Kind::energy;
    int n_members = 1;
    std::uint64_t seed = 0;
    double t_end = 0.5;
    std::vector<int> resolutions;  // deterministic residual-fit sweep
    std::vector<double> eps_list;  // strictly decreasing
    MuRule mu_rule = MuRule::mu_eq_eps;
    std::vector<double> mu_custom;
    int jobs = 1;
    int ledger_every = 1;

    void validate() const;
    double mu_of(double eps, std::size_t idx) const;
};

/// Deterministic parallel map over member ids; results land in member order
/// regardless of scheduling.
std::vector<EnergyLedger> run_members(int n_members, int jobs,
                                      const std::function<EnergyLedger(int)>& fn);

using InitGen = std::function<State(const Grid&)>;

// -- energy experiment -------------------------------------------------------

struct EnergyExperimentResult {
    std::vector<EnergyLedger> ledgers;
    EnsembleStats stats;
    double dt = 0.0;
    double max_mass_drift = 0.0;  // relative, over all members and rows
    bool mass_ok = false;
    MartingaleEstimate martingale;  // stoch_cum; trivial when noise is off
    bool residual_ok = false;
    double budget_constant = 0.0;
};

/// Ensemble of trajectories from a shared initial condition; verdicts for
/// mass conservation, the energy-inequality residual (pathwise when noise is
/// off, in ensemble mean otherwise, with budget C*(dt+dx^2)*t) and the
/// energy-martingale estimate.
EnergyExperimentResult run_energy(const ExperimentPlan& plan, const Grid& g,
                                  const ModelParams& params, const StepperConfig& cfg,
                                  const InitGen& init_gen, double budget_constant,
                                  const std::string& checkpoint_dir = "");

struct ResolutionFitResult {
    std::vector<int> resolutions;
    std::vector<double> max_abs_residual;  // max_t |energy_residual(0,t)| per n
    double order = 0.0;                    // log-log slope against dx
    double fitted_c = 0.0;                 // max residual/((dt+dx^2) t)
    double worst_positive_finest = 0.0;    // signed residual cap at the finest n
};

/// Deterministic (noise-off) 1D resolution sweep of the energy-inequality
/// residual over plan.resolutions; fits the budget constant C and the
/// convergence order in dx. The fitted C feeds the stochastic budget.
ResolutionFitResult run_resolution_fit(const ExperimentPlan& plan, const ModelParams& params,
                                       const StepperConfig& cfg, const InitGen& init_gen,
                                       double t_end);

// -- twin (weak-strong) experiment -------------------------------------------

struct TwinSpec {
    enum class Variant { identical, perturbed, refined };

    Variant variant = Variant::identical;
    double perturb_energy = 0.0;  // relative energy seeded into the weak twin
    int refine_factor = 3;        // odd; refined variant only
    bool decouple = false;        // negative control: independent noise
    double fixed_c = -1.0;        // Gronwall rate; < 0 fits from the data
    double envelope_margin = 1.2;
};

struct TwinResult {
    std::vector<EnergyLedger> ledgers;
    EnsembleStats stats;
    double dt = 0.0;
    double max_rel_energy = 0.0;
    bool coupled = false;  // exact-coincidence verdict (identical variant)
    double grad_bound = 0.0;      // M, max reference gradient over the run
    double fitted_c = 0.0;        // rate per unit M t
    bool envelope_ok = false;     // mean relE <= margin * E0 * exp(c M t)
    double initial_rel_energy = 0.0;
};

TwinResult run_twin(const ExperimentPlan& plan, const Grid& g, const ModelParams& params,
                    const StepperConfig& cfg, const InitGen& init_gen, const TwinSpec& spec);

// -- inviscid-incompressible limit sweep --------------------------------------

struct WellPreparedSpec {
    double delta_over_eps = 1.0;    // delta(eps) = this * eps
    std::vector<double> v0_value;   // constant solenoidal target (empty = 0)
    double v0_taylor_green = 0.0;   // 2D: Taylor-Green amplitude added to v0
    double grad_bound = 1e6;        // tau_M monitor on the Euler reference
    int rows = 64;                  // target ledger rows
    double target_fraction = 0.25;  // final sup <= fraction * first sup
};

struct SweepRow {
    double eps = 0.0;
    double mu_eps = 0.0;
    double sup_relE_mean = 0.0;
    double sup_relE_ci = 0.0;
    bool tau_triggered = false;
    int n_members = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool monotone_within_ci = false;
    bool final_below_target = false;
    double dt_base = 0.0;
};

/// For each eps: well-prepared data, scaled system, relative energy against
/// one Euler reference per member shared bit-exactly across all eps (dyadic
/// refinement of a single Brownian path).
SweepResult run_eps_sweep(const ExperimentPlan& plan, const Grid& g, const PressureLaw& law,
                          const NoiseModel& noise, const StepperConfig& cfg,
                          const WellPreparedSpec& spec);

// -- Ito product-rule refinement check ----------------------------------------

struct ItoCheckSpec {
    std::vector<double> dt_list{1e-2, 5e-3, 2.5e-3};  // dyadic multiples of the last
    double t_end = 1.0;
    int grid_n = 8;
};

struct ItoCheckResult {
    std::vector<double> dt_list;
    std::vector<double> mean_residual;
    std::vector<double> ci;
    double order = 0.0;  // log-log slope of |mean| against dt
};

ItoCheckResult run_ito_check(const ExperimentPlan& plan, const ItoCheckSpec& spec);

// -- coercivity constants ------------------------------------------------------

struct CoercivitySpec {
    std::vector<double> deltas{0.1, 0.01};
};

struct CoercivityRow {
    double delta = 0.0;
    double quadratic_band = 0.0;
    double residual_gamma = 0.0;
};

struct CoercivityResult {
    std::vector<CoercivityRow> rows;
    bool all_positive = false;
};

CoercivityResult run_coercivity(const PressureLaw& law, const CoercivitySpec& spec);

}  // namespace relent
