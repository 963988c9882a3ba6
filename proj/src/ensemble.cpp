#include "relent/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace relent {

void ExperimentPlan::validate() const {
    if (n_members < 1) throw UsageError("plan: n_members must be >= 1");
    if (t_end < 0.0) throw UsageError("plan: t_end must be nonnegative");
    if (jobs < 1) throw UsageError("plan: jobs must be >= 1");
    if (ledger_every < 1) throw UsageError("plan: ledger_every must be >= 1");
    if (kind == Kind::eps_sweep) {
        if (eps_list.size() < 2) throw UsageError("plan: eps_sweep needs at least two eps values");
        for (std::size_t i = 1; i < eps_list.size(); ++i)
            if (eps_list[i] >= eps_list[i - 1])
                throw UsageError("plan: eps_list must be strictly decreasing");
        for (double e : eps_list)
            if (e <= 0.0 || e > 1.0) throw UsageError("plan: eps values must be in (0,1]");
        if (mu_rule == MuRule::custom && mu_custom.size() != eps_list.size())
            throw UsageError("plan: custom mu list must match eps_list");
    }
}

double ExperimentPlan::mu_of(double eps, std::size_t idx) const {
    switch (mu_rule) {
        case MuRule::mu_eq_eps: return eps;
        case MuRule::mu_eq_eps_sq: return eps * eps;
        case MuRule::custom: return mu_custom.at(idx);
    }
    throw UsageError("plan: unknown mu rule");
}

std::vector<EnergyLedger> run_members(int n_members, int jobs,
                                      const std::function<EnergyLedger(int)>& fn) {
    std::vector<EnergyLedger> out(n_members);
    if (jobs <= 1 || n_members == 1) {
        for (int m = 0; m < n_members; ++m) out[m] = fn(m);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const int m = next.fetch_add(1);
            if (m >= n_members) return;
            try {
                out[m] = fn(m);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int threads = std::min(jobs, n_members);
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

namespace {

double mass_drift(const EnergyLedger& ledger) {
    const double m0 = ledger.front().mass;
    double drift = 0.0;
    for (const auto& row : ledger) drift = std::max(drift, std::abs(row.mass - m0));
    return drift / std::abs(m0);
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    // least-squares slope of log(y) against log(x)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

EnergyExperimentResult run_energy(const ExperimentPlan& plan, const Grid& g,
                                  const ModelParams& params, const StepperConfig& cfg,
                                  const InitGen& init_gen, double budget_constant,
                                  const std::string& checkpoint_dir) {
    plan.validate();
    params.validate(g.dim);
    const State init = init_gen(g);
    const double dt = frozen_dt(init, params, cfg, plan.t_end);

    EnergyExperimentResult out;
    out.dt = dt;
    out.budget_constant = budget_constant;
    out.ledgers = run_members(plan.n_members, plan.jobs, [&](int member) {
        WienerPath path(plan.seed, static_cast<std::uint32_t>(member), dt);
        return run_trajectory(init, params, cfg, path, plan.t_end, plan.ledger_every, nullptr,
                              checkpoint_dir)
            .ledger;
    });
    out.stats = reduce_stats(out.ledgers);

    out.max_mass_drift = 0.0;
    for (const auto& led : out.ledgers)
        out.max_mass_drift = std::max(out.max_mass_drift, mass_drift(led));
    out.mass_ok = out.max_mass_drift <= 1e-12;

    const double dx = g.dx;
    const int resid_col = out.stats.column_index("energy_residual");
    out.residual_ok = true;
    const bool silent = params.noise.silent();
    for (std::size_t i = 0; i < out.stats.times.size(); ++i) {
        const double budget = budget_constant * (dt + dx * dx) * out.stats.times[i];
        const double bound = silent ? budget : out.stats.ci[resid_col][i] + budget;
        if (out.stats.mean[resid_col][i] > bound + 1e-14) out.residual_ok = false;
    }

    if (!silent && plan.n_members >= 16) {
        out.martingale = martingale_estimate(out.stats, "stoch_cum");
    } else {
        out.martingale.verdict = true;
    }
    return out;
}

ResolutionFitResult run_resolution_fit(const ExperimentPlan& plan, const ModelParams& params,
                                       const StepperConfig& cfg, const InitGen& init_gen,
                                       double t_end) {
    if (!params.noise.silent())
        throw UsageError("resolution fit: deterministic runs only (noise must be off)");
    if (plan.resolutions.size() < 2)
        throw UsageError("resolution fit: need at least two resolutions");
    ResolutionFitResult out;
    out.resolutions = plan.resolutions;
    out.worst_positive_finest = -std::numeric_limits<double>::infinity();
    std::vector<double> dxs;
    for (std::size_t j = 0; j < plan.resolutions.size(); ++j) {
        const Grid g(1, plan.resolutions[j], 2.0);
        const State init = init_gen(g);
        const double dt = frozen_dt(init, params, cfg, t_end);
        auto res = run_trajectory(init, params, cfg, WienerPath(0, 0, dt), t_end, 32);
        double max_abs = 0.0;
        for (std::size_t i = 1; i < res.ledger.size(); ++i) {
            const double r = energy_residual(res.ledger, 0, i);
            const double t = res.ledger[i].t;
            max_abs = std::max(max_abs, std::abs(r));
            out.fitted_c = std::max(out.fitted_c, std::abs(r) / ((dt + g.dx * g.dx) * t));
            if (j + 1 == plan.resolutions.size())
                out.worst_positive_finest = std::max(out.worst_positive_finest, r);
        }
        dxs.push_back(g.dx);
        out.max_abs_residual.push_back(max_abs);
    }
    out.order = std::log(out.max_abs_residual.front() / out.max_abs_residual.back()) /
                std::log(dxs.front() / dxs.back());
    return out;
}

TwinResult run_twin(const ExperimentPlan& plan, const Grid& g, const ModelParams& params,
                    const StepperConfig& cfg, const InitGen& init_gen, const TwinSpec& spec) {
    plan.validate();
    params.validate(g.dim);
    if (spec.variant == TwinSpec::Variant::refined && spec.refine_factor % 2 == 0)
        throw UsageError("twin: refinement factor must be odd");

    const State coarse_init = init_gen(g);
    Grid strong_grid = g;
    if (spec.variant == TwinSpec::Variant::refined)
        strong_grid = Grid(g.dim, g.n * spec.refine_factor, g.length);
    const State strong_init =
        spec.variant == TwinSpec::Variant::refined ? init_gen(strong_grid) : coarse_init;

    // shared time grid: the more restrictive of the two stability limits
    const double dt_raw =
        0.95 * std::min(cfl_dt(coarse_init, params, cfg), cfl_dt(strong_init, params, cfg));
    const double steps = std::ceil(plan.t_end / dt_raw - 1e-12);
    const double dt = plan.t_end > 0.0 ? plan.t_end / steps : dt_raw;

    TwinResult out;
    out.dt = dt;
    std::vector<double> grad_bounds(plan.n_members, 0.0);

    out.ledgers = run_members(plan.n_members, plan.jobs, [&](int member) {
        State weak = coarse_init;
        if (spec.variant == TwinSpec::Variant::perturbed && spec.perturb_energy > 0.0) {
            VectorField psi = random_smooth_velocity(g, plan.seed ^ 0x7e57ull,
                                                     static_cast<std::uint32_t>(member), 1.0);
            double kin = 0.0;
            for (std::size_t i = 0; i < weak.rho.size(); ++i) {
                double p2 = 0.0;
                for (int c = 0; c < g.dim; ++c) p2 += psi.comp(c, i) * psi.comp(c, i);
                kin += 0.5 * p2 / weak.rho[i];
            }
            kin *= g.cell_volume();
            const double scale = std::sqrt(spec.perturb_energy / kin);
            axpy(weak.mom, scale, psi);
        }

        WienerPath path(plan.seed, static_cast<std::uint32_t>(member), dt);
        std::optional<WienerPath> own;
        if (spec.decouple)
            own = WienerPath(plan.seed, static_cast<std::uint32_t>(member) ^ 0x40000000u, dt);
        TwinReference ref(strong_init, params, cfg, g,
                          spec.variant == TwinSpec::Variant::refined ? spec.refine_factor : 1,
                          own ? &*own : nullptr);
        auto res = run_trajectory(weak, params, cfg, path, plan.t_end, plan.ledger_every, &ref);
        grad_bounds[member] = res.ref_grad_max;
        return res.ledger;
    });

    out.stats = reduce_stats(out.ledgers);
    for (double m : grad_bounds) out.grad_bound = std::max(out.grad_bound, m);

    const int rel_col = out.stats.column_index("rel_energy");
    for (const auto& led : out.ledgers)
        for (const auto& row : led)
            out.max_rel_energy = std::max(out.max_rel_energy, row.rel_energy);
    out.coupled = out.max_rel_energy <= 1e-10;
    out.initial_rel_energy = out.stats.mean[rel_col][0];

    if (spec.variant == TwinSpec::Variant::perturbed && spec.perturb_energy > 0.0) {
        const double E0 = spec.perturb_energy;
        if (spec.fixed_c >= 0.0) {
            out.fitted_c = spec.fixed_c;
        } else {
            // least-squares rate through the origin: ln(mean/E0) = c * (M t)
            double sxx = 0.0, sxy = 0.0;
            for (std::size_t i = 1; i < out.stats.times.size(); ++i) {
                const double mean = out.stats.mean[rel_col][i];
                if (mean <= 0.0) continue;
                const double x = out.grad_bound * out.stats.times[i];
                sxx += x * x;
                sxy += x * std::log(mean / E0);
            }
            out.fitted_c = sxx > 0.0 ? std::max(0.0, sxy / sxx) : 0.0;
        }
        out.envelope_ok = true;
        for (std::size_t i = 0; i < out.stats.times.size(); ++i) {
            const double envelope =
                spec.envelope_margin *
                gronwall_envelope(E0, out.fitted_c * out.grad_bound, out.stats.times[i]);
            if (out.stats.mean[rel_col][i] > envelope) out.envelope_ok = false;
        }
    } else if (spec.variant == TwinSpec::Variant::refined) {
        // nested injection of identical closed-form data starts with a zero
        // gap; the truncation-error difference then pushes the state gap
        // linearly and the relative energy quadratically in t. Fit the
        // inhomogeneous envelope D * t^2 * exp(c M t) on the first half of
        // the run (regress ln(mean/t^2) against M t) and require it, with
        // the configured margin, to cover the whole run.
        double sx = 0.0, sy = 0.0;
        int n = 0;
        for (std::size_t i = 1; i < out.stats.times.size(); ++i) {
            const double t = out.stats.times[i];
            const double mean = out.stats.mean[rel_col][i];
            if (mean <= 0.0 || t > 0.5 * plan.t_end) continue;
            sx += out.grad_bound * t;
            sy += std::log(mean / (t * t));
            ++n;
        }
        double intercept = 0.0;
        if (n >= 2) {
            const double mx = sx / n, my = sy / n;
            double vxx = 0.0, vxy = 0.0;
            for (std::size_t i = 1; i < out.stats.times.size(); ++i) {
                const double t = out.stats.times[i];
                const double mean = out.stats.mean[rel_col][i];
                if (mean <= 0.0 || t > 0.5 * plan.t_end) continue;
                vxx += (out.grad_bound * t - mx) * (out.grad_bound * t - mx);
                vxy += (out.grad_bound * t - mx) * (std::log(mean / (t * t)) - my);
            }
            out.fitted_c = vxx > 0.0 ? std::max(0.0, vxy / vxx) : 0.0;
            intercept = my - out.fitted_c * mx;
        } else if (n == 1) {
            intercept = sy;
        }
        const double defect_rate = std::exp(intercept);
        out.envelope_ok = n >= 1;
        for (std::size_t i = 1; i < out.stats.times.size(); ++i) {
            const double t = out.stats.times[i];
            const double envelope = spec.envelope_margin * defect_rate * t * t *
                                    std::exp(out.fitted_c * out.grad_bound * t);
            if (out.stats.mean[rel_col][i] > envelope) out.envelope_ok = false;
        }
    } else {
        out.envelope_ok = out.coupled;
    }
    return out;
}

SweepResult run_eps_sweep(const ExperimentPlan& plan, const Grid& g, const PressureLaw& law,
                          const NoiseModel& noise, const StepperConfig& cfg,
                          const WellPreparedSpec& spec) {
    plan.validate();
    if (plan.kind != ExperimentPlan::Kind::eps_sweep)
        throw UsageError("run_eps_sweep: plan kind mismatch");
    if (plan.t_end <= 0.0) throw UsageError("run_eps_sweep: t_end must be positive");

    // target velocity: constant part plus optional 2D Taylor-Green
    VectorField v0 = spec.v0_value.empty() ? VectorField(g) : constant_velocity(g, spec.v0_value);
    if (spec.v0_taylor_green != 0.0) {
        if (g.dim != 2) throw UsageError("run_eps_sweep: Taylor-Green target needs dim 2");
        axpy(v0, 1.0, taylor_green(g, spec.v0_taylor_green));
    }

    const std::size_t ne = plan.eps_list.size();
    std::vector<ModelParams> params(ne);
    std::vector<State> inits(ne);
    double dt_min = std::numeric_limits<double>::infinity();
    std::vector<double> limits(ne);
    for (std::size_t i = 0; i < ne; ++i) {
        const double eps = plan.eps_list[i];
        params[i].law = law;
        params[i].mu = plan.mu_of(eps, i);
        params[i].eta = 0.0;
        params[i].eps = eps;
        params[i].noise = noise;
        params[i].validate(g.dim);
        inits[i] = well_prepared_state(g, eps, spec.delta_over_eps * eps, v0);
        limits[i] = cfl_dt(inits[i], params[i], cfg);
        dt_min = std::min(dt_min, limits[i]);
    }

    // dyadic master grid: one Brownian path serves every eps and the Euler
    // reference
    const int m_levels = std::max(0, static_cast<int>(std::ceil(std::log2(plan.t_end / dt_min))));
    const double dt_base = plan.t_end / std::ldexp(1.0, m_levels);
    std::vector<int> level(ne);
    int level_max = 0;
    for (std::size_t i = 0; i < ne; ++i) {
        int j = 0;
        while (j < m_levels && dt_base * std::ldexp(1.0, j + 1) <= limits[i]) ++j;
        level[i] = j;
        level_max = std::max(level_max, j);
    }

    // Euler reference time step: advective limit with margin for noise growth
    double umax0 = max_norm(v0) + 0.5;
    int level_euler = 0;
    const double euler_limit = cfg.cfl * g.dx / umax0;
    while (level_euler < m_levels && dt_base * std::ldexp(1.0, level_euler + 1) <= euler_limit)
        ++level_euler;

    // ledger rows: common dyadic times, coarse enough for every run
    int rows_pow = 0;
    while ((1 << (rows_pow + 1)) <= spec.rows) ++rows_pow;
    int ledger_level = std::max(level_max, m_levels - rows_pow);
    ledger_level = std::min(ledger_level, m_levels);
    level_euler = std::min(level_euler, ledger_level);

    const ScalarField ones(g, 1.0);
    std::vector<std::vector<std::vector<double>>> rel(ne);  // [eps][member][row]
    for (auto& v : rel) v.resize(plan.n_members);
    std::vector<char> triggered(plan.n_members, 0);

    auto member_job = [&](int member) -> EnergyLedger {
        WienerPath base(plan.seed, static_cast<std::uint32_t>(member), dt_base);

        EulerRunResult euler =
            run_euler(v0, noise, base.coarsened(level_euler), plan.t_end,
                      1 << (ledger_level - level_euler), spec.grad_bound, true);
        if (euler.monitor.triggered() && *euler.monitor.triggered_at < 0.5 * plan.t_end)
            throw Error("eps sweep aborted: Euler gradient monitor triggered at t=" +
                        std::to_string(*euler.monitor.triggered_at) + " (before t_end/2)");
        triggered[member] = euler.monitor.triggered() ? 1 : 0;
        // first row index at or beyond the stopping time
        std::size_t freeze_row = euler.rows.size();
        if (euler.monitor.triggered()) {
            for (std::size_t i = 0; i < euler.rows.size(); ++i)
                if (euler.rows[i].t >= *euler.monitor.triggered_at) {
                    freeze_row = i;
                    break;
                }
        }

        for (std::size_t i = 0; i < ne; ++i) {
            std::size_t row_idx = 0;
            RunHooks hooks;
            hooks.on_row = [&, i](const State& s, LedgerRow& row) {
                const std::size_t idx = row_idx++;
                const std::size_t eff = std::min(idx, freeze_row);
                row.rel_energy = relative_energy(s.rho, s.mom, ones, euler.snapshots[eff],
                                                 params[i].law, params[i].eps);
                rel[i][member].push_back(row.rel_energy);
            };
            run_trajectory(inits[i], params[i], cfg, base.coarsened(level[i]), plan.t_end,
                           1 << (ledger_level - level[i]), nullptr, "", &hooks);
            // freeze relE at tau_M: E(t and tau)
            auto& series = rel[i][member];
            for (std::size_t rix = freeze_row + 1; rix < series.size(); ++rix)
                series[rix] = series[freeze_row];
        }
        return EnergyLedger{};  // per-eps data captured in `rel`
    };
    run_members(plan.n_members, plan.jobs, member_job);

    SweepResult out;
    out.dt_base = dt_base;
    bool any_triggered = false;
    for (char c : triggered) any_triggered |= (c != 0);
    for (std::size_t i = 0; i < ne; ++i) {
        const std::size_t rows = rel[i][0].size();
        double sup_mean = -std::numeric_limits<double>::infinity();
        double sup_ci = 0.0;
        for (std::size_t rix = 0; rix < rows; ++rix) {
            double mean = 0.0;
            for (int mbr = 0; mbr < plan.n_members; ++mbr) mean += rel[i][mbr][rix];
            mean /= plan.n_members;
            double var = 0.0;
            for (int mbr = 0; mbr < plan.n_members; ++mbr) {
                const double d = rel[i][mbr][rix] - mean;
                var += d * d;
            }
            var = plan.n_members > 1 ? var / (plan.n_members - 1) : 0.0;
            const double ci = 3.0 * std::sqrt(var / plan.n_members);
            if (mean > sup_mean) {
                sup_mean = mean;
                sup_ci = ci;
            }
        }
        out.rows.push_back({plan.eps_list[i], params[i].mu, sup_mean, sup_ci, any_triggered,
                            plan.n_members});
    }

    out.monotone_within_ci = true;
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (out.rows[i].sup_relE_mean >
            out.rows[i - 1].sup_relE_mean + out.rows[i - 1].sup_relE_ci + out.rows[i].sup_relE_ci)
            out.monotone_within_ci = false;
    out.final_below_target =
        out.rows.back().sup_relE_mean <= spec.target_fraction * out.rows.front().sup_relE_mean;
    return out;
}

namespace {

// toy processes for the product-rule refinement study
struct ItoSetup {
    ToyProcess s, r;
    Poly4 Q;
};

ItoSetup make_ito_setup(int n) {
    const Grid g(1, n, 2.0);
    ItoSetup setup;
    setup.s.init = constant_field(g, 1.0);
    axpy(setup.s.init, 1.0, harmonic_scalar(g, 0.2, 1));
    setup.s.drift_const = constant_field(g, 1.2);
    axpy(setup.s.drift_const, 1.0, harmonic_scalar(g, 0.4, 1, 0, 0.3));
    setup.s.drift_linear = -0.5;
    setup.s.diff.push_back(harmonic_scalar(g, 0.15, 1, 0, 1.1));
    setup.s.diff.push_back(constant_field(g, 0.1));

    setup.r.init = constant_field(g, 0.5);
    axpy(setup.r.init, 1.0, harmonic_scalar(g, 0.1, 2));
    setup.r.drift_const = constant_field(g, 0.9);
    axpy(setup.r.drift_const, 1.0, harmonic_scalar(g, 0.5, 1, 0, 2.0));
    setup.r.drift_linear = -0.6;
    setup.r.diff.push_back(constant_field(g, 0.12));
    setup.r.diff.push_back(harmonic_scalar(g, 0.08, 1, 0, 0.7));

    setup.Q.c = {0.2, 1.0, 0.4, 0.25, 0.0};
    return setup;
}

}  // namespace

ItoCheckResult run_ito_check(const ExperimentPlan& plan, const ItoCheckSpec& spec) {
    plan.validate();
    if (spec.dt_list.empty()) throw UsageError("ito check: empty dt list");
    const double dt_min = *std::min_element(spec.dt_list.begin(), spec.dt_list.end());
    std::vector<int> levels;
    for (double dt : spec.dt_list) {
        const double ratio = dt / dt_min;
        const int j = std::lround(std::log2(ratio));
        if (std::abs(std::ldexp(1.0, j) - ratio) > 1e-9)
            throw UsageError("ito check: dt values must be dyadic multiples of the smallest");
        levels.push_back(j);
    }
    const ItoSetup setup = make_ito_setup(spec.grid_n);

    ItoCheckResult out;
    out.dt_list = spec.dt_list;
    std::vector<std::vector<double>> residuals(spec.dt_list.size(),
                                               std::vector<double>(plan.n_members, 0.0));
    run_members(plan.n_members, plan.jobs, [&](int member) {
        WienerPath base(plan.seed, static_cast<std::uint32_t>(member), dt_min);
        for (std::size_t i = 0; i < spec.dt_list.size(); ++i)
            residuals[i][member] =
                ito_product_check(setup.s, setup.r, setup.Q, base.coarsened(levels[i]), spec.t_end);
        return EnergyLedger{};
    });

    std::vector<double> abs_means;
    for (std::size_t i = 0; i < spec.dt_list.size(); ++i) {
        double mean = 0.0;
        for (double rr : residuals[i]) mean += rr;
        mean /= plan.n_members;
        double var = 0.0;
        for (double rr : residuals[i]) var += (rr - mean) * (rr - mean);
        var = plan.n_members > 1 ? var / (plan.n_members - 1) : 0.0;
        out.mean_residual.push_back(mean);
        out.ci.push_back(3.0 * std::sqrt(var / plan.n_members));
        abs_means.push_back(std::abs(mean));
    }
    out.order = fit_loglog_slope(out.dt_list, abs_means);
    return out;
}

CoercivityResult run_coercivity(const PressureLaw& law, const CoercivitySpec& spec) {
    CoercivityResult out;
    out.all_positive = true;
    for (double delta : spec.deltas) {
        CoercivityRow row;
        row.delta = delta;
        row.quadratic_band = coercivity_constant(delta, law, CoercivityMode::quadratic_band);
        row.residual_gamma = coercivity_constant(delta, law, CoercivityMode::residual_gamma);
        if (row.quadratic_band <= 0.0 || row.residual_gamma <= 0.0) out.all_positive = false;
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace relent
