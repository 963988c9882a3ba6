#include "relent/cns.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "relent/diagnostics.hpp"
#include "relent/io.hpp"

namespace relent {

void ModelParams::validate(int dim) const {
    if (mu < 0.0 || eta < 0.0) throw UsageError("model: viscosities must be nonnegative");
    if (eps <= 0.0 || eps > 1.0) throw UsageError("model: eps must be in (0,1]");
    if (eps == 1.0 && mu <= 0.0)
        throw UsageError("model: mu > 0 required for the unscaled system");
    noise.validate(dim);
}

void StepperConfig::validate() const {
    if (cfl <= 0.0 || cfl > 1.0) throw UsageError("stepper: cfl must be in (0,1]");
    if (rho_floor <= 0.0) throw UsageError("stepper: rho_floor must be positive");
    if (max_dt <= 0.0) throw UsageError("stepper: max_dt must be positive");
}

namespace {

// velocity gradient tensor g[c][j] = d_j u_c
struct GradTensor {
    std::array<std::array<ScalarField, 2>, 2> g;
    int dim = 1;

    explicit GradTensor(const VectorField& u) : dim(u.grid().dim) {
        for (int c = 0; c < dim; ++c) {
            ScalarField comp(u.grid());
            auto src = u.comp_span(c);
            for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = src[i];
            for (int j = 0; j < dim; ++j) g[c][j] = partial(comp, j);
        }
    }

    double div_at(std::size_t i) const {
        double d = g[0][0][i];
        if (dim == 2) d += g[1][1][i];
        return d;
    }

    double stress_at(int c, int j, std::size_t i, double mu, double eta) const {
        const double dv = div_at(i);
        double s = mu * (g[c][j][i] + g[j][c][i]);
        if (c == j) s += -(2.0 / 3.0) * mu * dv + eta * dv;
        return s;
    }
};

}  // namespace

VectorField stress_divergence(const VectorField& u, double mu, double eta) {
    const Grid& grid = u.grid();
    const int d = grid.dim;
    GradTensor gt(u);
    VectorField out(grid);
    for (int c = 0; c < d; ++c) {
        for (int j = 0; j < d; ++j) {
            ScalarField s(grid);
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = gt.stress_at(c, j, i, mu, eta);
            ScalarField ds = partial(s, j);
            auto oc = out.comp_span(c);
            for (std::size_t i = 0; i < ds.size(); ++i) oc[i] += ds[i];
        }
    }
    return out;
}

ScalarField dissipation_density(const VectorField& u, double mu, double eta) {
    const Grid& grid = u.grid();
    const int d = grid.dim;
    GradTensor gt(u);
    ScalarField out(grid);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (int c = 0; c < d; ++c)
            for (int j = 0; j < d; ++j) s += gt.stress_at(c, j, i, mu, eta) * gt.g[c][j][i];
        out[i] = s;
    }
    return out;
}

double mutual_dissipation(const VectorField& u, const VectorField& U, double mu, double eta) {
    // S is linear, so (S(gu)-S(gU)):(gu-gU) = S(g(u-U)):g(u-U)
    VectorField w = u;
    axpy(w, -1.0, U);
    return integrate(dissipation_density(w, mu, eta));
}

double stress_inner(const VectorField& a, const VectorField& b, double mu, double eta) {
    if (a.grid() != b.grid()) throw UsageError("stress_inner: grids differ");
    const int d = a.grid().dim;
    GradTensor ga(a), gb(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.cells(); ++i)
        for (int c = 0; c < d; ++c)
            for (int j = 0; j < d; ++j) s += ga.stress_at(c, j, i, mu, eta) * gb.g[c][j][i];
    return s * a.grid().cell_volume();
}

DriftRhs drift_rhs(const State& s, const ModelParams& params, double rho_floor,
                   bool include_viscous) {
    const Grid& grid = s.grid();
    const int d = grid.dim;
    VectorField u(grid);
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        if (s.rho[i] < rho_floor) throw PositivityError(s.t, i, s.rho[i]);
        for (int c = 0; c < d; ++c) u.comp(c, i) = s.mom.comp(c, i) / s.rho[i];
    }

    DriftRhs rhs{ScalarField(grid), VectorField(grid)};
    rhs.drho = scaled(divergence(s.mom), -1.0);

    // convective flux divergence, conservative form
    for (int c = 0; c < d; ++c) {
        for (int j = 0; j < d; ++j) {
            ScalarField flux(grid);
            for (std::size_t i = 0; i < flux.size(); ++i)
                flux[i] = s.mom.comp(c, i) * u.comp(j, i);
            ScalarField df = partial(flux, j);
            auto oc = rhs.dmom.comp_span(c);
            for (std::size_t i = 0; i < df.size(); ++i) oc[i] -= df[i];
        }
    }

    const double inv_eps2 = 1.0 / (params.eps * params.eps);
    VectorField gp = grad(pressure(s.rho, params.law));
    axpy(rhs.dmom, -inv_eps2, gp);

    if (include_viscous && (params.mu > 0.0 || params.eta > 0.0))
        axpy(rhs.dmom, 1.0, stress_divergence(u, params.mu, params.eta));
    return rhs;
}

double cfl_dt(const State& s, const ModelParams& params, const StepperConfig& cfg) {
    const Grid& grid = s.grid();
    const int d = grid.dim;
    double umax = 0.0, rho_min = s.rho[0], rho_max = s.rho[0];
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        if (s.rho[i] <= 0.0) throw PositivityError(s.t, i, s.rho[i]);
        rho_min = std::min(rho_min, s.rho[i]);
        rho_max = std::max(rho_max, s.rho[i]);
        double u2 = 0.0;
        for (int c = 0; c < d; ++c) {
            const double uc = s.mom.comp(c, i) / s.rho[i];
            u2 += uc * uc;
        }
        umax = std::max(umax, std::sqrt(u2));
    }
    const double cs = std::sqrt(params.law.dp(rho_max));
    const double c_tot = umax + cs / params.eps;
    const double nu = (4.0 * params.mu / 3.0 + params.eta) / rho_min;
    double dt = grid.dx / c_tot;
    if (nu > 0.0) {
        if (cfg.viscous_treatment == StepperConfig::Viscous::explicit_step)
            dt = std::min(dt, grid.dx * grid.dx / (2.0 * d * nu));
        // central stencils are only damped by viscosity; keep the acoustic
        // growth per step below the viscous decay
        dt = std::min(dt, nu / (c_tot * c_tot));
    }
    return std::min(cfg.cfl * dt, cfg.max_dt);
}

double frozen_dt(const State& init, const ModelParams& params, const StepperConfig& cfg,
                 double t_end) {
    const double dt0 = cfl_dt(init, params, cfg);
    if (t_end <= 0.0) return dt0;
    const double steps = std::ceil(t_end / dt0 - 1e-12);
    return t_end / steps;
}

namespace {

VectorField semi_implicit_viscous(SpectralWorkspace& ws, const VectorField& mstar,
                                  const ScalarField& rho_new, double mu, double eta, double dt,
                                  double t) {
    const Grid& grid = mstar.grid();
    const int d = grid.dim;
    const double rho_bar = 0.5 * (min_value(rho_new) + max_value(rho_new));
    VectorField u = stress_implicit_solve(ws, mstar, rho_bar, mu, eta, dt);
    const double scale = max_norm(mstar) + 1e-300;
    for (int it = 0; it < 200; ++it) {
        // residual of (rho u - dt div S(grad u)) = m*
        VectorField resid = mstar;
        axpy(resid, dt, stress_divergence(u, mu, eta));
        for (int c = 0; c < d; ++c) {
            auto rc = resid.comp_span(c);
            auto uc = u.comp_span(c);
            for (std::size_t i = 0; i < rc.size(); ++i) rc[i] -= rho_new[i] * uc[i];
        }
        if (max_norm(resid) <= 1e-13 * scale) return u;
        axpy(u, 1.0, stress_implicit_solve(ws, resid, rho_bar, mu, eta, dt));
    }
    throw StabilityError("semi-implicit viscous solve did not converge at t=" + std::to_string(t));
}

}  // namespace

State em_step(const State& s, const ModelParams& params, const StepperConfig& cfg, double dt,
              std::span<const double> dW, SpectralWorkspace* ws) {
    const bool semi = cfg.viscous_treatment == StepperConfig::Viscous::semi_implicit &&
                      (params.mu > 0.0 || params.eta > 0.0);
    DriftRhs rhs = drift_rhs(s, params, cfg.rho_floor, !semi);

    State next;
    next.t = s.t + dt;
    next.rho = s.rho;
    axpy(next.rho, dt, rhs.drho);
    for (std::size_t i = 0; i < next.rho.size(); ++i)
        if (next.rho[i] < cfg.rho_floor) throw PositivityError(next.t, i, next.rho[i]);

    next.mom = s.mom;
    axpy(next.mom, dt, rhs.dmom);
    if (!params.noise.silent())
        axpy(next.mom, 1.0, noise_forcing_increment(s, params.noise, dW));

    if (semi) {
        std::unique_ptr<SpectralWorkspace> local;
        if (!ws) {
            local = std::make_unique<SpectralWorkspace>(s.grid());
            ws = local.get();
        }
        VectorField u =
            semi_implicit_viscous(*ws, next.mom, next.rho, params.mu, params.eta, dt, next.t);
        for (int c = 0; c < next.mom.components(); ++c) {
            auto mc = next.mom.comp_span(c);
            auto uc = u.comp_span(c);
            for (std::size_t i = 0; i < mc.size(); ++i) mc[i] = next.rho[i] * uc[i];
        }
    }

    if (!all_finite(next.rho) || !all_finite(next.mom)) throw DivergenceError(next.t, -1);
    return next;
}

namespace {

VectorField velocity_vacuum_zero(const State& s) {
    VectorField u(s.grid());
    const int d = u.components();
    for (std::size_t i = 0; i < s.rho.size(); ++i)
        if (s.rho[i] > 0.0)
            for (int c = 0; c < d; ++c) u.comp(c, i) = s.mom.comp(c, i) / s.rho[i];
    return u;
}

}  // namespace

TrajectoryResult run_trajectory(const State& init, const ModelParams& params,
                                const StepperConfig& cfg, const WienerPath& path, double t_end,
                                int ledger_every, ReferenceProcess* ref,
                                const std::string& checkpoint_dir, const RunHooks* hooks) {
    params.validate(init.grid().dim);
    cfg.validate();
    validate_state(init);
    if (ledger_every < 1) throw UsageError("run_trajectory: ledger_every must be >= 1");

    const double dt = path.dt();
    long steps = 0;
    if (t_end > 0.0) {
        steps = std::lround(t_end / dt);
        if (steps < 1 || std::abs(steps * dt - t_end) > 1e-9 * std::max(t_end, dt))
            throw UsageError("run_trajectory: t_end must be an integer multiple of the path dt");
    }

    const int K = params.noise.K;
    const bool silent = params.noise.silent();
    std::vector<double> dW(K, 0.0);

    TrajectoryResult out;
    out.dt = dt;
    out.steps = steps;

    double diss_cum = 0.0, ito_cum = 0.0, stoch_cum = 0.0;
    double remainder_cum = 0.0, rel_diss_cum = 0.0;
    double m1a = 0.0, m1b = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;

    State state = init;
    long current_step = 0;
    std::unique_ptr<SpectralWorkspace> ws;
    if (cfg.viscous_treatment == StepperConfig::Viscous::semi_implicit)
        ws = std::make_unique<SpectralWorkspace>(init.grid());

    EnergyLedger& ledger = out.ledger;
    auto push_row = [&](const State& s) {
        LedgerRow row;
        row.t = s.t;
        row.mass = integrate(s.rho);
        const EnergyPair e = energy(s, params.law, params.eps);
        row.kinetic = e.kinetic;
        row.potential = e.potential;
        row.total = e.total();
        row.dissipation_cum = diss_cum;
        row.ito_cum = ito_cum;
        row.stoch_cum = stoch_cum;
        if (ref) {
            row.rel_energy =
                relative_energy(s.rho, s.mom, ref->r(), ref->U(), params.law, params.eps);
            row.remainder_cum = remainder_cum;
            row.rel_diss_cum = rel_diss_cum;
            row.m1a = m1a;
            row.m1b = m1b;
            row.m2 = m2;
            row.m3 = m3;
            row.m4 = m4;
            row.mre_sum = stoch_cum - m1a - m1b + m2 + m3 - m4;
        }
        if (!ledger.empty()) {
            const LedgerRow& r0 = ledger.front();
            row.energy_residual = (row.total - r0.total) + (row.dissipation_cum - r0.dissipation_cum) -
                                  (row.ito_cum - r0.ito_cum) - (row.stoch_cum - r0.stoch_cum);
            if (ref)
                row.rei_residual = (row.rel_energy - r0.rel_energy) +
                                   (row.rel_diss_cum - r0.rel_diss_cum) -
                                   (row.remainder_cum - r0.remainder_cum) -
                                   (row.mre_sum - r0.mre_sum);
        } else if (ref) {
            row.rei_residual = 0.0;
        }
        if (hooks && hooks->on_row) hooks->on_row(s, row);
        ledger.push_back(row);
    };
    push_row(state);

    try {
        for (long step = 0; step < steps; ++step) {
            current_step = step;
            const double hard_limit = cfl_dt(state, params, cfg) / cfg.cfl;
            if (dt > hard_limit * (1.0 + 1e-12))
                throw StabilityError("frozen dt " + std::to_string(dt) +
                                     " exceeds the CFL limit " + std::to_string(hard_limit) +
                                     " at t=" + std::to_string(state.t));
            if (!silent) path.increments(step, K, dW);

            const VectorField u = velocity_vacuum_zero(state);
            diss_cum += dt * integrate(dissipation_density(u, params.mu, params.eta));
            ito_cum += dt * ito_correction(state, params.noise);

            VectorField forcing;
            if (!silent) {
                forcing = noise_forcing_increment(state, params.noise, dW);
                stoch_cum += inner(u, forcing);
            }

            if (ref) {
                const RemainderTerms rem = remainder(state, *ref, params.law, params);
                remainder_cum += dt * rem.total();
                rel_diss_cum += dt * mutual_dissipation(u, ref->U(), params.mu, params.eta);
                out.ref_grad_max = std::max(out.ref_grad_max, ref->grad_max());
                if (!silent) {
                    m1a += inner(ref->U(), forcing);
                    ScalarField dp_r(state.grid()), rho_d2H(state.grid());
                    bool have_r_fields = false;
                    VectorField rhoU(state.grid());
                    for (int c = 0; c < state.grid().dim; ++c) {
                        auto rc = rhoU.comp_span(c);
                        auto Uc = ref->U().comp_span(c);
                        for (std::size_t i = 0; i < rc.size(); ++i)
                            rc[i] = state.rho[i] * Uc[i];
                    }
                    for (int k = 0; k < std::min(K, ref->modes()); ++k) {
                        if (const VectorField* dU = ref->diff_U(k)) {
                            m1b += dW[k] * inner(state.mom, *dU);
                            m2 += dW[k] * inner(rhoU, *dU);
                        }
                        if (const ScalarField* dr = ref->diff_r(k)) {
                            if (!have_r_fields) {
                                for (std::size_t i = 0; i < dp_r.size(); ++i) {
                                    dp_r[i] = params.law.dp(ref->r()[i]);
                                    rho_d2H[i] = state.rho[i] * params.law.d2H(ref->r()[i]);
                                }
                                have_r_fields = true;
                            }
                            m3 += dW[k] * inner(dp_r, *dr);
                            m4 += dW[k] * inner(rho_d2H, *dr);
                        }
                    }
                }
            }

            state = em_step(state, params, cfg, dt, dW, ws.get());
            if (ref) ref->advance(dt, dW);

            if ((step + 1) % ledger_every == 0 || step + 1 == steps) push_row(state);
        }
    } catch (const Error&) {
        if (!checkpoint_dir.empty()) {
            std::filesystem::create_directories(checkpoint_dir);
            std::ostringstream meta;
            meta.precision(17);
            meta << "{\"t\":" << state.t << ",\"seed\":" << path.seed
                 << ",\"member\":" << path.member << ",\"step\":" << current_step
                 << ",\"dt\":" << dt << ",\"params\":{\"gamma\":" << params.law.gamma
                 << ",\"a\":" << params.law.a << ",\"mu\":" << params.mu
                 << ",\"eta\":" << params.eta << ",\"eps\":" << params.eps
                 << ",\"K\":" << params.noise.K << "}}";
            write_checkpoint(checkpoint_dir + "/last_good", state, meta.str());
        }
        throw;
    }

    out.final_state = std::move(state);
    return out;
}

}  // namespace relent
