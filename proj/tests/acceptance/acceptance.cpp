// Acceptance suite: one pass/fail line per criterion (A1-A10), exit code is
// the number of failures. An optional argv[1] substring filters criteria.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "relent/config.hpp"
#include "relent/dispatch.hpp"
#include "relent/ensemble.hpp"
#include "relent/rng.hpp"

using namespace relent;

namespace {

struct Harness {
    int failures = 0;
    std::string filter;

    bool wants(const std::string& id) const {
        return filter.empty() || id.find(filter) != std::string::npos;
    }

    void record(const std::string& id, bool ok, const std::string& detail) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << id << ": " << detail << "\n" << std::flush;
        if (!ok) ++failures;
    }
};

std::string fmt(double x) {
    std::ostringstream s;
    s << std::setprecision(3) << std::scientific << x;
    return s.str();
}

int hw_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// the pinned stochastic model shared by A1/A3/A5: K=4, sum alpha = 0.5
NoiseModel pinned_noise() {
    return NoiseModel::affine({0.08, 0.06, 0.04, 0.02}, {0.12, 0.08, 0.06, 0.04});
}

ModelParams pinned_params(NoiseModel noise) {
    ModelParams p;
    p.law = PressureLaw(2.0, 1.0);
    p.mu = 0.1;
    p.eta = 0.0;
    p.noise = std::move(noise);
    return p;
}

InitGen smooth_init() {
    return [](const Grid& g) { return smooth_state(g, 1.0, 0.02, 0.02, 1); };
}

// ---------------------------------------------------------------------------
// A1: mass conservation along a noisy trajectory
void criterion_a1(Harness& h) {
    Grid g(1, 64);
    ModelParams p = pinned_params(pinned_noise());
    StepperConfig cfg;
    ExperimentPlan plan;
    plan.n_members = 4;
    plan.seed = 101;
    plan.t_end = 0.2;
    plan.jobs = hw_jobs();
    plan.ledger_every = 4;
    auto res = run_energy(plan, g, p, cfg, smooth_init(), 1.0);
    h.record("A1 mass conservation", res.mass_ok,
             "max relative drift " + fmt(res.max_mass_drift) + " (tol 1e-12), " +
                 std::to_string(plan.n_members) + " noisy members");
}

// ---------------------------------------------------------------------------
// A2: deterministic energy inequality with a resolution fit.
// Returns the fitted budget constant C for A3.
double criterion_a2(Harness& h, bool enabled) {
    ExperimentPlan plan;
    plan.resolutions = {64, 128, 256};
    const auto fit = run_resolution_fit(plan, pinned_params(NoiseModel::zero(0)), StepperConfig{},
                                        smooth_init(), 0.5);
    const bool order_ok = fit.order >= 1.8;
    const bool cap_ok = fit.worst_positive_finest <= 1e-6;
    if (enabled)
        h.record("A2 deterministic energy inequality", order_ok && cap_ok,
                 "residual order " + fmt(fit.order) + " (need >= 1.8), max residual at n=256 " +
                     fmt(fit.worst_positive_finest) + " (cap 1e-6), fitted C " +
                     fmt(fit.fitted_c));
    return fit.fitted_c;
}

// ---------------------------------------------------------------------------
// A3: stochastic energy inequality in ensemble mean
void criterion_a3(Harness& h, double c_fit) {
    Grid g(1, 128);
    ModelParams p = pinned_params(pinned_noise());
    StepperConfig cfg;
    ExperimentPlan plan;
    plan.n_members = 64;
    plan.seed = 303;
    plan.t_end = 0.5;
    plan.jobs = hw_jobs();
    plan.ledger_every = 64;
    // discretization budget: the deterministic fit with headroom for the
    // Euler-Maruyama noise bias (same dt scaling, see the A2 sweep)
    const double budget_c = 3.0 * c_fit;
    auto res = run_energy(plan, g, p, cfg, smooth_init(), budget_c);
    const double alpha = p.noise.alpha_sum();
    h.record("A3 stochastic energy inequality",
             res.residual_ok && res.martingale.verdict && res.mass_ok,
             "mean residual within 3 sigma/sqrt(64) + " + fmt(budget_c) +
                 "*(dt+dx^2)*t; martingale verdict " +
                 std::string(res.martingale.verdict ? "true" : "false") + "; sum alpha_k = " +
                 fmt(alpha));
}

// ---------------------------------------------------------------------------
// A4: relative-energy diagonal and expansion agreement on random states
void criterion_a4(Harness& h) {
    PressureLaw law(2.0, 1.0);
    bool diag_ok = true, expand_ok = true;
    double worst_diag = 0.0, worst_gap = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = trial % 4 == 0 ? 2 : 1;
        Grid g(dim, dim == 1 ? 64 : 16);
        ScalarField rho(g);
        VectorField u(g);
        for (std::size_t i = 0; i < rho.size(); ++i) {
            rho[i] = 0.3 + 2.0 * counter_uniform(404, trial, i, 1);
            for (int c = 0; c < dim; ++c)
                u.comp(c, i) = counter_gaussian(404, trial, i, 2 + c);
        }
        State s = make_state(rho, u);
        const double diag = relative_energy(s.rho, s.mom, s.rho, u, law);
        worst_diag = std::max(worst_diag, std::abs(diag));
        if (std::abs(diag) > 1e-12) diag_ok = false;

        ScalarField r(g);
        VectorField U(g);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = 0.3 + 2.0 * counter_uniform(405, trial, i, 1);
            for (int c = 0; c < dim; ++c)
                U.comp(c, i) = counter_gaussian(405, trial, i, 2 + c);
        }
        const double direct = relative_energy(s.rho, s.mom, r, U, law);
        const double expanded = relative_energy_expanded(s.rho, s.mom, r, U, law);
        const double gap = std::abs(direct - expanded) / (1.0 + std::abs(direct));
        worst_gap = std::max(worst_gap, gap);
        if (gap > 1e-10) expand_ok = false;
    }
    h.record("A4 relative-energy diagonal", diag_ok && expand_ok,
             "100 random states: max |relE(state|state)| " + fmt(worst_diag) +
                 " (tol 1e-12), max direct-vs-expanded gap " + fmt(worst_gap) + " (tol 1e-10)");
}

// ---------------------------------------------------------------------------
// A5: pathwise weak-strong Gronwall
void criterion_a5(Harness& h) {
    Grid g(1, 128);
    ModelParams p = pinned_params(pinned_noise());
    StepperConfig cfg;
    ExperimentPlan plan;
    plan.kind = ExperimentPlan::Kind::twin;
    plan.n_members = 32;
    plan.seed = 505;
    plan.t_end = 0.5;
    plan.jobs = hw_jobs();
    plan.ledger_every = 64;

    TwinSpec identical;
    auto exact = run_twin(plan, g, p, cfg, smooth_init(), identical);
    h.record("A5a twin exact coincidence", exact.coupled,
             "max rel_energy " + fmt(exact.max_rel_energy) + " (tol 1e-10)");

    TwinSpec big;
    big.variant = TwinSpec::Variant::perturbed;
    big.perturb_energy = 1e-2;
    auto res_big = run_twin(plan, g, p, cfg, smooth_init(), big);

    TwinSpec small = big;
    small.perturb_energy = 1e-4;
    small.fixed_c = res_big.fitted_c;  // rate fitted once, applied to both runs
    auto res_small = run_twin(plan, g, p, cfg, smooth_init(), small);

    h.record("A5b perturbed-twin Gronwall envelope", res_big.envelope_ok && res_small.envelope_ok,
             "E0 in {1e-2, 1e-4}, fitted c " + fmt(res_big.fitted_c) + ", M " +
                 fmt(res_big.grad_bound) + ", margin 1.2");
}

// ---------------------------------------------------------------------------
// A6: coercivity constants
void criterion_a6(Harness& h) {
    PressureLaw g2(2.0, 1.0);
    bool ok = true;
    std::string detail;
    for (double delta : {0.1, 0.01}) {
        const double c = coercivity_constant(delta, g2, CoercivityMode::quadratic_band);
        if (std::abs(c - 1.0) > 1e-10) ok = false;
        detail += "c(" + fmt(delta) + ")=" + fmt(c) + " ";
    }
    for (double gamma : {5.0 / 3.0, 2.0}) {
        PressureLaw law(gamma, 1.0);
        for (double delta : {0.1, 0.01}) {
            const double c = coercivity_constant(delta, law, CoercivityMode::residual_gamma);
            if (!(c > 0.0)) ok = false;
        }
    }
    h.record("A6 coercivity constants", ok,
             detail + "(quadratic band = 1 +- 1e-10); residual mode positive for gamma in "
                      "{5/3, 2}");
}

// ---------------------------------------------------------------------------
// A7: Helmholtz projection suite
void criterion_a7(Harness& h) {
    Grid g(2, 64);
    SpectralWorkspace ws(g);
    bool ok = true;
    std::string detail;

    // gradient annihilation
    ScalarField phi(g);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix)
            phi.at(ix, iy) = std::sin(M_PI * g.coord(ix)) * std::cos(M_PI * g.coord(iy));
    const double annihilation = max_norm(helmholtz_project(ws, grad(phi)));
    ok = ok && annihilation <= 1e-12;
    detail += "grad-annihilation " + fmt(annihilation);

    // solenoidal fixed point
    ScalarField psi(g);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix)
            psi.at(ix, iy) = std::sin(M_PI * g.coord(ix)) * std::sin(M_PI * g.coord(iy));
    VectorField sol(g);
    ScalarField px = spectral_derivative(ws, psi, 0);
    ScalarField py = spectral_derivative(ws, psi, 1);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        sol.comp(0, i) = -py[i];
        sol.comp(1, i) = px[i];
    }
    VectorField fixed = helmholtz_project(ws, sol);
    axpy(fixed, -1.0, sol);
    const double fixed_point = max_norm(fixed);
    ok = ok && fixed_point <= 1e-12;
    detail += ", fixed-point " + fmt(fixed_point);

    // idempotence on a random field
    VectorField v(g);
    for (std::size_t i = 0; i < v.data().size(); ++i)
        v.data()[i] = counter_gaussian(707, 0, i, 0);
    VectorField p1 = helmholtz_project(ws, v);
    VectorField p2 = helmholtz_project(ws, p1);
    axpy(p2, -1.0, p1);
    const double idem = max_norm(p2);
    ok = ok && idem <= 1e-12;
    detail += ", idempotence " + fmt(idem);

    // Taylor-Green pressure
    VectorField tg = taylor_green(g, 1.0);
    ScalarField Pi = pressure_recover(tg);
    double perr = 0.0;
    const double w = 2.0 * M_PI / g.length;
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
            const double exact =
                -0.25 * (std::cos(2.0 * w * g.coord(ix)) + std::cos(2.0 * w * g.coord(iy)));
            perr = std::max(perr, std::abs(Pi.at(ix, iy) - exact));
        }
    ok = ok && perr <= 1e-8;
    detail += ", TG pressure error " + fmt(perr);

    h.record("A7 Helmholtz projection suite", ok, detail + " (tols 1e-12 / 1e-8)");
}

// ---------------------------------------------------------------------------
// A8: inviscid-incompressible limit
void criterion_a8(Harness& h) {
    ExperimentPlan plan;
    plan.kind = ExperimentPlan::Kind::eps_sweep;
    plan.n_members = 16;
    plan.seed = 808;
    plan.t_end = 0.25;
    plan.jobs = hw_jobs();
    plan.eps_list = {0.4, 0.2, 0.1, 0.05};
    plan.mu_rule = ExperimentPlan::MuRule::mu_eq_eps;
    NoiseModel noise = NoiseModel::affine({0.05, 0.03}, {0.05, 0.03});
    StepperConfig cfg;

    {
        Grid g(1, 128);
        WellPreparedSpec spec;
        spec.v0_value = {0.1};
        spec.rows = 32;
        spec.grad_bound = 50.0;
        auto res = run_eps_sweep(plan, g, PressureLaw(2.0, 1.0), noise, cfg, spec);
        const double ratio = res.rows.back().sup_relE_mean / res.rows.front().sup_relE_mean;
        h.record("A8a eps sweep (1D)", res.monotone_within_ci && res.final_below_target,
                 "sup relE " + fmt(res.rows.front().sup_relE_mean) + " -> " +
                     fmt(res.rows.back().sup_relE_mean) + ", ratio " + fmt(ratio) +
                     " (need <= 0.25), monotone within CI " +
                     (res.monotone_within_ci ? "yes" : "no"));
    }
    {
        Grid g(2, 64);
        WellPreparedSpec spec;
        spec.v0_taylor_green = 0.1;
        spec.rows = 32;
        spec.grad_bound = 50.0;
        auto res = run_eps_sweep(plan, g, PressureLaw(2.0, 1.0), noise, cfg, spec);
        const double ratio = res.rows.back().sup_relE_mean / res.rows.front().sup_relE_mean;
        h.record("A8b eps sweep (2D smoke)", res.monotone_within_ci && res.final_below_target,
                 "sup relE " + fmt(res.rows.front().sup_relE_mean) + " -> " +
                     fmt(res.rows.back().sup_relE_mean) + ", ratio " + fmt(ratio) +
                     " (need <= 0.25)");
    }
}

// ---------------------------------------------------------------------------
// A9: Ito product rule refinement
void criterion_a9(Harness& h) {
    ExperimentPlan plan;
    plan.kind = ExperimentPlan::Kind::ito_check;
    plan.n_members = 256;
    plan.seed = 909;
    plan.jobs = hw_jobs();
    ItoCheckSpec spec;
    spec.dt_list = {1e-2, 5e-3, 2.5e-3};
    spec.t_end = 0.5;
    auto res = run_ito_check(plan, spec);
    h.record("A9 Ito product rule", res.order >= 0.8,
             "|mean residual| " + fmt(std::abs(res.mean_residual[0])) + " -> " +
                 fmt(std::abs(res.mean_residual[2])) + ", observed order " + fmt(res.order) +
                 " (need >= 0.8, N=256)");
}

// ---------------------------------------------------------------------------
// A10: determinism and coupling
void criterion_a10(Harness& h) {
    Grid g(1, 64);
    ModelParams p = pinned_params(pinned_noise());
    StepperConfig cfg;
    State init = smooth_init()(g);
    const double dt = frozen_dt(init, p, cfg, 0.1);

    bool bitwise = true;
    {
        WienerPath path(1010, 3, dt);
        auto r1 = run_trajectory(init, p, cfg, path, 0.1, 16);
        auto r2 = run_trajectory(init, p, cfg, path, 0.1, 16);
        for (std::size_t i = 0; i < r1.final_state.rho.size(); ++i)
            if (r1.final_state.rho[i] != r2.final_state.rho[i]) bitwise = false;
        for (std::size_t i = 0; i < r1.final_state.mom.data().size(); ++i)
            if (r1.final_state.mom.data()[i] != r2.final_state.mom.data()[i]) bitwise = false;
    }

    bool shared = true;
    {
        WienerPath weak(1010, 7, dt), strong(1010, 7, dt);
        for (long step = 0; step < 200; ++step)
            if (wiener_increments(weak, step, p.noise.K) !=
                wiener_increments(strong, step, p.noise.K))
                shared = false;
    }

    bool jobs_free = true;
    {
        ExperimentPlan plan;
        plan.n_members = 8;
        plan.seed = 1010;
        plan.t_end = 0.1;
        plan.ledger_every = 16;
        plan.jobs = 1;
        auto serial = run_energy(plan, g, p, cfg, smooth_init(), 1.0);
        plan.jobs = hw_jobs();
        auto parallel = run_energy(plan, g, p, cfg, smooth_init(), 1.0);
        for (int m = 0; m < plan.n_members && jobs_free; ++m)
            for (std::size_t i = 0; i < serial.ledgers[m].size(); ++i) {
                const auto a = serial.ledgers[m][i].values();
                const auto b = parallel.ledgers[m][i].values();
                for (int c = 0; c < LedgerRow::column_count; ++c) {
                    const bool both_nan = std::isnan(a[c]) && std::isnan(b[c]);
                    if (!both_nan && a[c] != b[c]) jobs_free = false;
                }
            }
    }

    h.record("A10 determinism & coupling", bitwise && shared && jobs_free,
             std::string("repeat-run bitwise ") + (bitwise ? "yes" : "no") +
                 ", twin increments identical " + (shared ? "yes" : "no") +
                 ", jobs-independent " + (jobs_free ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
    Harness h;
    if (argc > 1) h.filter = argv[1];
    const auto t0 = std::chrono::steady_clock::now();

    auto timed = [&](const char* id, auto&& fn) {
        if (!h.wants(id)) return;
        const auto s = std::chrono::steady_clock::now();
        fn();
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - s)
                .count();
        std::cout << "       (" << id << " took " << ms << " ms)\n";
    };

    try {
        timed("A1", [&] { criterion_a1(h); });
        double c_fit = 0.0;
        timed("A2", [&] { c_fit = criterion_a2(h, true); });
        timed("A3", [&] {
            if (c_fit == 0.0) c_fit = criterion_a2(h, false);  // fit needed when filtered
            criterion_a3(h, c_fit);
        });
        timed("A4", [&] { criterion_a4(h); });
        timed("A5", [&] { criterion_a5(h); });
        timed("A6", [&] { criterion_a6(h); });
        timed("A7", [&] { criterion_a7(h); });
        timed("A8", [&] { criterion_a8(h); });
        timed("A9", [&] { criterion_a9(h); });
        timed("A10", [&] { criterion_a10(h); });
    } catch (const Error& e) {
        std::cout << "[FAIL] suite aborted by error: " << e.what() << "\n";
        ++h.failures;
    }

    const auto total =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - t0)
            .count();
    std::cout << (h.failures == 0 ? "ACCEPTANCE: ALL PASS" : "ACCEPTANCE: FAILURES") << " ("
              << total << " s)\n";
    return h.failures;
}
