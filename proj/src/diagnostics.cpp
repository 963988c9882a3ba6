#include "relent/diagnostics.hpp"

#include <cmath>

namespace relent {

EnergyPair energy(const State& s, const PressureLaw& law, double eps) {
    if (eps <= 0.0 || eps > 1.0) throw UsageError("energy: eps must be in (0,1]");
    EnergyPair e;
    e.kinetic = kinetic_energy(s.rho, s.mom);
    double h = 0.0;
    for (std::size_t i = 0; i < s.rho.size(); ++i) h += law.H(s.rho[i]);
    e.potential = h * s.grid().cell_volume() / (eps * eps);
    return e;
}

double ReferenceProcess::grad_max() const {
    const VectorField& Uf = U();
    double m = 0.0;
    for (int c = 0; c < Uf.components(); ++c) {
        ScalarField comp(Uf.grid());
        auto src = Uf.comp_span(c);
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = src[i];
        for (int j = 0; j < Uf.grid().dim; ++j) m = std::max(m, max_norm(partial(comp, j)));
    }
    return m;
}

ConstantReference::ConstantReference(ScalarField r, VectorField U)
    : r_(std::move(r)), U_(std::move(U)) {
    lo_ = min_value(r_);
    hi_ = max_value(r_);
    if (lo_ <= 0.0) throw ReferenceBoundError("constant reference: density must be positive");
}

SyntheticReference::SyntheticReference(ScalarField r0, VectorField U0, ScalarField drift_r,
                                       VectorField drift_U, std::vector<ScalarField> diff_r,
                                       std::vector<VectorField> diff_U, double r_lo, double r_hi)
    : r_(std::move(r0)), drift_r_(std::move(drift_r)), U_(std::move(U0)),
      drift_U_(std::move(drift_U)), diff_r_(std::move(diff_r)), diff_U_(std::move(diff_U)),
      lo_(r_lo), hi_(r_hi) {
    if (diff_r_.size() != diff_U_.size())
        throw UsageError("synthetic reference: diff_r and diff_U mode counts differ");
    if (lo_ <= 0.0 || hi_ < lo_) throw UsageError("synthetic reference: bad density bounds");
}

void SyntheticReference::advance(double dt, std::span<const double> dW) {
    axpy(r_, dt, drift_r_);
    axpy(U_, dt, drift_U_);
    for (std::size_t k = 0; k < diff_r_.size() && k < dW.size(); ++k) {
        axpy(r_, dW[k], diff_r_[k]);
        axpy(U_, dW[k], diff_U_[k]);
    }
}

namespace {

int restriction_offset(int fine_n, int coarse_n) {
    if (fine_n == coarse_n) return 0;
    if (fine_n % coarse_n != 0)
        throw UsageError("twin reference: fine grid not a multiple of the coarse one");
    const int f = fine_n / coarse_n;
    if (f % 2 == 0)
        throw UsageError("twin reference: refinement factor must be odd (cell centers nest)");
    return (f - 1) / 2;
}

ScalarField restrict_field(const ScalarField& fine, const Grid& coarse) {
    if (fine.grid() == coarse) return fine;
    const int f = fine.grid().n / coarse.n;
    const int off = restriction_offset(fine.grid().n, coarse.n);
    ScalarField out(coarse);
    if (coarse.dim == 1) {
        for (int i = 0; i < coarse.n; ++i) out[i] = fine[f * i + off];
    } else {
        for (int iy = 0; iy < coarse.n; ++iy)
            for (int ix = 0; ix < coarse.n; ++ix)
                out.at(ix, iy) = fine.at(f * ix + off, f * iy + off);
    }
    return out;
}

VectorField restrict_field(const VectorField& fine, const Grid& coarse) {
    if (fine.grid() == coarse) return fine;
    const int f = fine.grid().n / coarse.n;
    const int off = restriction_offset(fine.grid().n, coarse.n);
    VectorField out(coarse);
    for (int c = 0; c < coarse.dim; ++c) {
        if (coarse.dim == 1) {
            for (int i = 0; i < coarse.n; ++i) out.comp(c, i) = fine.comp(c, f * i + off);
        } else {
            for (int iy = 0; iy < coarse.n; ++iy)
                for (int ix = 0; ix < coarse.n; ++ix)
                    out.comp(c, coarse.index(ix, iy)) =
                        fine.comp(c, fine.grid().index(f * ix + off, f * iy + off));
        }
    }
    return out;
}

VectorField velocity_vacuum_zero(const State& s) {
    VectorField u(s.grid());
    const int d = u.components();
    for (std::size_t i = 0; i < s.rho.size(); ++i)
        if (s.rho[i] > 0.0)
            for (int c = 0; c < d; ++c) u.comp(c, i) = s.mom.comp(c, i) / s.rho[i];
    return u;
}

}  // namespace

TwinReference::TwinReference(const State& strong_init, const ModelParams& params,
                             const StepperConfig& cfg, const Grid& coarse, int refine_factor,
                             const WienerPath* own_path)
    : state_(strong_init), params_(params), cfg_(cfg), coarse_(coarse), refine_(refine_factor) {
    if (own_path) own_path_ = *own_path;
    if (strong_init.grid().n != coarse.n * refine_factor || strong_init.grid().dim != coarse.dim)
        throw UsageError("twin reference: strong grid must refine the coarse grid");
    restriction_offset(strong_init.grid().n, coarse.n);  // validates odd factor
    if (cfg_.viscous_treatment == StepperConfig::Viscous::semi_implicit)
        ws_ = std::make_unique<SpectralWorkspace>(strong_init.grid());
    const double lo = min_value(state_.rho), hi = max_value(state_.rho);
    lo_ = 0.5 * lo;
    hi_ = 2.0 * hi;
    diff_U_.resize(params_.noise.K);
    refresh();
}

void TwinReference::refresh() {
    const DriftRhs rhs = drift_rhs(state_, params_, cfg_.rho_floor, true);
    const VectorField u = velocity(state_, cfg_.rho_floor);

    r_ = restrict_field(state_.rho, coarse_);
    U_ = restrict_field(u, coarse_);
    drift_r_ = restrict_field(rhs.drho, coarse_);

    // d(u) drift: (dmom - u * drho) / rho
    VectorField dU(state_.grid());
    for (int c = 0; c < state_.grid().dim; ++c) {
        auto out = dU.comp_span(c);
        auto dm = rhs.dmom.comp_span(c);
        auto uc = u.comp_span(c);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (dm[i] - uc[i] * rhs.drho[i]) / state_.rho[i];
    }
    drift_U_ = restrict_field(dU, coarse_);

    for (int k = 0; k < params_.noise.K; ++k) {
        VectorField gk = eval_G(state_, params_.noise, k);
        for (int c = 0; c < state_.grid().dim; ++c) {
            auto gc = gk.comp_span(c);
            for (std::size_t i = 0; i < gc.size(); ++i) gc[i] /= state_.rho[i];
        }
        diff_U_[k] = restrict_field(gk, coarse_);
    }
}

double TwinReference::hard_dt_limit() const {
    return cfl_dt(state_, params_, cfg_) / cfg_.cfl;
}

void TwinReference::advance(double dt, std::span<const double> dW) {
    if (dt > hard_dt_limit() * (1.0 + 1e-12))
        throw StabilityError("twin reference: shared dt exceeds the strong twin's CFL limit");
    if (own_path_) {
        if (std::abs(own_path_->dt() - dt) > 1e-12 * dt)
            throw CouplingError("twin reference: own path dt does not match the shared grid");
        std::vector<double> own(params_.noise.K, 0.0);
        if (!params_.noise.silent()) own_path_->increments(own_step_, params_.noise.K, own);
        ++own_step_;
        state_ = em_step(state_, params_, cfg_, dt, own, ws_.get());
    } else {
        state_ = em_step(state_, params_, cfg_, dt, dW, ws_.get());
    }
    refresh();
}

EulerReference::EulerReference(const VectorField& v0, const NoiseModel& model, double grad_bound)
    : solver_(v0.grid()), model_(model), one_(v0.grid(), 1.0) {
    model_.validate(v0.grid().dim);
    monitor_.M = grad_bound;
    state_ = solver_.prepare(v0);
    diff_U_.resize(model_.K);
    refresh();
    if (solver_.grad_max(state_.v) > monitor_.M) monitor_.triggered_at = state_.t;
}

void EulerReference::refresh() {
    U_ = state_.v;
    drift_U_ = solver_.drift(state_.v);
    for (int k = 0; k < model_.K; ++k) {
        VectorField g(state_.v.grid());
        for (int c = 0; c < g.components(); ++c) {
            const double fk = model_.F_comp.empty() ? model_.F[k] : model_.F_comp[k][c];
            auto gc = g.comp_span(c);
            auto vc = state_.v.comp_span(c);
            for (std::size_t i = 0; i < gc.size(); ++i) gc[i] = fk + vc[i] * model_.Hc[k];
        }
        diff_U_[k] = std::move(g);
    }
}

void EulerReference::advance(double dt, std::span<const double> dW) {
    if (monitor_.triggered()) {
        state_.t += dt;
        return;
    }
    state_ = solver_.step(state_, model_, dt, dW);
    if (solver_.grad_max(state_.v) > monitor_.M) {
        monitor_.triggered_at = state_.t;
        return;  // U frozen at v(tau_M)
    }
    refresh();
}

RemainderTerms remainder(const State& s, const ReferenceProcess& ref, const PressureLaw& law,
                         const ModelParams& params) {
    const Grid& g = s.grid();
    const int d = g.dim;
    const ScalarField& r = ref.r();
    const VectorField& U = ref.U();
    if (r.grid() != g || U.grid() != g) throw UsageError("remainder: reference on a different grid");

    const double rmin = min_value(r), rmax = max_value(r);
    if (rmin < ref.r_lower() * (1.0 - 1e-12) || rmax > ref.r_upper() * (1.0 + 1e-12))
        throw ReferenceBoundError("reference density left its declared bounds [" +
                                  std::to_string(ref.r_lower()) + ", " +
                                  std::to_string(ref.r_upper()) + "]");

    const VectorField u = velocity_vacuum_zero(s);
    const double dV = g.cell_volume();
    RemainderTerms out;

    out.viscous_cross =
        stress_inner(U, U, params.mu, params.eta) - stress_inner(U, u, params.mu, params.eta);

    // grad U (central), div U
    std::array<std::array<ScalarField, 2>, 2> gU;
    for (int c = 0; c < d; ++c) {
        ScalarField comp(g);
        auto src = U.comp_span(c);
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = src[i];
        for (int j = 0; j < d; ++j) gU[c][j] = partial(comp, j);
    }

    // inertial: rho (D^d U + u . grad U) . (U - u)
    {
        const VectorField* dU = ref.drift_U();
        double acc = 0.0;
        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            for (int c = 0; c < d; ++c) {
                double adv = 0.0;
                for (int j = 0; j < d; ++j) adv += u.comp(j, i) * gU[c][j][i];
                const double drift = (dU ? dU->comp(c, i) : 0.0) + adv;
                acc += s.rho[i] * drift * (U.comp(c, i) - u.comp(c, i));
            }
        }
        out.inertial = acc * dV;
    }

    // density terms: (r - rho) H''(r) D^d r + grad H'(r) . (r U - rho u)
    {
        ScalarField h1(g);
        for (std::size_t i = 0; i < h1.size(); ++i) h1[i] = law.dH(r[i]);
        const VectorField gh1 = grad(h1);
        const ScalarField* dr = ref.drift_r();
        double acc = 0.0;
        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            if (dr) acc += (r[i] - s.rho[i]) * law.d2H(r[i]) * (*dr)[i];
            for (int c = 0; c < d; ++c)
                acc += gh1.comp(c, i) * (r[i] * U.comp(c, i) - s.mom.comp(c, i));
        }
        out.density = acc * dV;
    }

    // pressure: -int div U (p(rho) - p(r))
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            double divU = gU[0][0][i];
            if (d == 2) divU += gU[1][1][i];
            acc += divU * (law.p(s.rho[i]) - law.p(r[i]));
        }
        out.pressure = -acc * dV;
    }

    // noise terms
    const int K = std::max(params.noise.K, ref.modes());
    const bool affine = params.noise.form == NoiseModel::Form::affine;
    for (int k = 0; k < K; ++k) {
        const VectorField* dU = k < ref.modes() ? ref.diff_U(k) : nullptr;
        const bool have_G = k < params.noise.K;
        double acc_u = 0.0;
        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            for (int c = 0; c < d; ++c) {
                double g_over_rho = 0.0;
                if (have_G) {
                    if (affine) {
                        const double fk = params.noise.F_comp.empty() ? params.noise.F[k]
                                                                      : params.noise.F_comp[k][c];
                        g_over_rho = fk + u.comp(c, i) * params.noise.Hc[k];
                    } else {
                        if (s.rho[i] <= 0.0)
                            throw VacuumError("remainder: custom noise on vacuum cell");
                        VectorField gk = eval_G(s, params.noise, k);
                        g_over_rho = gk.comp(c, i) / s.rho[i];
                    }
                }
                const double w = g_over_rho - (dU ? dU->comp(c, i) : 0.0);
                acc_u += s.rho[i] * w * w;
            }
        }
        out.noise_u += 0.5 * acc_u * dV;

        if (const ScalarField* drk = k < ref.modes() ? ref.diff_r(k) : nullptr) {
            double acc_h3 = 0.0, acc_p2 = 0.0;
            for (std::size_t i = 0; i < s.rho.size(); ++i) {
                const double d2 = (*drk)[i] * (*drk)[i];
                acc_h3 += s.rho[i] * law.d3H(r[i]) * d2;
                acc_p2 += law.d2p(r[i]) * d2;
            }
            out.noise_r_H3 += 0.5 * acc_h3 * dV;
            out.noise_r_p2 += 0.5 * acc_p2 * dV;
        }
    }
    return out;
}

double gronwall_envelope(double E0, double cM, double t) { return E0 * std::exp(cM * t); }

MartingaleEstimate martingale_estimate(const EnsembleStats& stats, const std::string& column) {
    if (stats.n_members < 16)
        throw UsageError("martingale_estimate: need at least 16 members, got " +
                         std::to_string(stats.n_members));
    const std::string name = column == "rei_martingale" ? "mre_sum" : column;
    const int c = stats.column_index(name);
    MartingaleEstimate est;
    est.times = stats.times;
    est.mean = stats.mean[c];
    est.ci = stats.ci[c];
    est.verdict = true;
    for (std::size_t i = 0; i < est.times.size(); ++i)
        if (std::abs(est.mean[i]) > est.ci[i]) est.verdict = false;
    return est;
}

double Poly4::eval(double x) const {
    return c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])));
}
double Poly4::d1(double x) const {
    return c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * 4.0 * c[4]));
}
double Poly4::d2(double x) const { return 2.0 * c[2] + x * (6.0 * c[3] + x * 12.0 * c[4]); }

double ito_product_check(const ToyProcess& s_proc, const ToyProcess& r_proc, const Poly4& Q,
                         const WienerPath& path, double t_end) {
    const Grid& g = s_proc.init.grid();
    if (r_proc.init.grid() != g) throw UsageError("ito_product_check: grids differ");
    const int K = static_cast<int>(std::max(s_proc.diff.size(), r_proc.diff.size()));
    const double dt = path.dt();
    const long steps = std::lround(t_end / dt);
    if (steps < 1 || std::abs(steps * dt - t_end) > 1e-9 * std::max(t_end, dt))
        throw UsageError("ito_product_check: t_end must be a multiple of the path dt");
    const double dV = g.cell_volume();

    ScalarField s = s_proc.init, r = r_proc.init;
    auto pair_integral = [&](const ScalarField& a, const ScalarField& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * Q.eval(b[i]);
        return acc * dV;
    };

    const double X0 = pair_integral(s, r);
    double rhs = 0.0;
    std::vector<double> dW(K);

    for (long n = 0; n < steps; ++n) {
        path.increments(n, K, dW);

        double drift = 0.0, mart = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double Ds = s_proc.drift_const[i] + s_proc.drift_linear * s[i];
            const double Dr = r_proc.drift_const[i] + r_proc.drift_linear * r[i];
            const double q1 = Q.d1(r[i]);
            double quad_r = 0.0, cross = 0.0, mart_i = 0.0;
            for (int k = 0; k < K; ++k) {
                const double br =
                    k < static_cast<int>(r_proc.diff.size()) ? r_proc.diff[k][i] : 0.0;
                const double bs =
                    k < static_cast<int>(s_proc.diff.size()) ? s_proc.diff[k][i] : 0.0;
                quad_r += br * br;
                cross += bs * br;
                mart_i += dW[k] * (s[i] * q1 * br + Q.eval(r[i]) * bs);
            }
            drift += s[i] * (q1 * Dr + 0.5 * Q.d2(r[i]) * quad_r) + Q.eval(r[i]) * Ds +
                     q1 * cross;
            mart += mart_i;
        }
        rhs += dt * drift * dV + mart * dV;

        // Euler-Maruyama update of both processes on the same increments
        for (std::size_t i = 0; i < s.size(); ++i) {
            double ds = dt * (s_proc.drift_const[i] + s_proc.drift_linear * s[i]);
            double dr = dt * (r_proc.drift_const[i] + r_proc.drift_linear * r[i]);
            for (int k = 0; k < K; ++k) {
                if (k < static_cast<int>(s_proc.diff.size())) ds += dW[k] * s_proc.diff[k][i];
                if (k < static_cast<int>(r_proc.diff.size())) dr += dW[k] * r_proc.diff[k][i];
            }
            s[i] += ds;
            r[i] += dr;
        }
    }
    return pair_integral(s, r) - X0 - rhs;
}

}  // namespace relent
