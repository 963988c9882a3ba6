#include "relent/euler.hpp"

#include <cmath>

namespace relent {

namespace {

bool field_constant(const VectorField& v) {
    for (int c = 0; c < v.components(); ++c) {
        auto s = v.comp_span(c);
        for (double x : s)
            if (std::abs(x - s[0]) > 1e-13 * (1.0 + std::abs(s[0]))) return false;
    }
    return true;
}

}  // namespace

EulerSolver::EulerSolver(const Grid& g) : grid_(g), ws_(g) {}

VectorField EulerSolver::drift(const VectorField& v) {
    if (grid_.dim == 1) {
        if (!field_constant(v))
            throw DimensionError("euler: 1D solenoidal fields are constants");
        return VectorField(grid_);  // v . grad v = 0
    }
    VectorField vt = dealias_23(ws_, v);
    // spectral derivatives of the truncated field
    std::array<std::array<ScalarField, 2>, 2> dv;
    for (int c = 0; c < 2; ++c) {
        ScalarField comp(grid_);
        auto src = vt.comp_span(c);
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = src[i];
        for (int j = 0; j < 2; ++j) dv[c][j] = spectral_derivative(ws_, comp, j);
    }
    VectorField adv(grid_);
    for (int c = 0; c < 2; ++c) {
        auto oc = adv.comp_span(c);
        for (std::size_t i = 0; i < oc.size(); ++i)
            oc[i] = vt.comp(0, i) * dv[c][0][i] + vt.comp(1, i) * dv[c][1][i];
    }
    adv = dealias_23(ws_, adv);
    adv = helmholtz_project(ws_, adv);
    return scaled(adv, -1.0);
}

ScalarField EulerSolver::pressure(const VectorField& v) {
    if (grid_.dim == 1) {
        if (!field_constant(v))
            throw DimensionError("euler: 1D solenoidal fields are constants");
        return ScalarField(grid_);
    }
    VectorField vt = dealias_23(ws_, v);
    // div div (v (x) v) with spectral derivatives of the dealiased products
    ScalarField divdiv(grid_);
    for (int c = 0; c < 2; ++c) {
        for (int j = 0; j < 2; ++j) {
            ScalarField prod(grid_);
            for (std::size_t i = 0; i < prod.size(); ++i)
                prod[i] = vt.comp(c, i) * vt.comp(j, i);
            prod = dealias_23(ws_, prod);
            ScalarField d2 = spectral_derivative(ws_, spectral_derivative(ws_, prod, c), j);
            for (std::size_t i = 0; i < divdiv.size(); ++i) divdiv[i] += d2[i];
        }
    }
    ScalarField Pi = inverse_laplacian(ws_, divdiv);
    for (double& x : Pi.data()) x = -x;
    // inverse_laplacian already fixes the zero mode; enforce the gauge exactly
    const double mean = integrate(Pi) / (grid_.length * (grid_.dim == 1 ? 1.0 : grid_.length));
    for (double& x : Pi.data()) x -= mean;
    return Pi;
}

EulerState EulerSolver::step(const EulerState& s, const NoiseModel& model, double dt,
                             std::span<const double> dW) {
    VectorField vnew = s.v;
    axpy(vnew, dt, drift(s.v));
    if (!model.silent()) {
        if (static_cast<int>(dW.size()) != model.K)
            throw UsageError("euler_step: dW length does not match K");
        // G(1, v) = F + v H per mode, F isotropic across components
        for (int c = 0; c < vnew.components(); ++c) {
            double fsum = 0.0, hsum = 0.0;
            for (int k = 0; k < model.K; ++k) {
                fsum += (model.F_comp.empty() ? model.F[k] : model.F_comp[k][c]) * dW[k];
                hsum += model.Hc[k] * dW[k];
            }
            auto vc = vnew.comp_span(c);
            auto sc = s.v.comp_span(c);
            for (std::size_t i = 0; i < vc.size(); ++i) vc[i] += fsum + sc[i] * hsum;
        }
    }
    VectorField projected = grid_.dim == 1 ? vnew : dealias_23(ws_, helmholtz_project(ws_, vnew));
    if (grid_.dim == 1 && !field_constant(projected))
        throw DimensionError("euler: 1D state left the constant manifold");
    VectorField defect = vnew;
    axpy(defect, -1.0, projected);
    last_defect_ = max_norm(defect);
    if (!all_finite(projected)) throw DivergenceError(s.t + dt, -1);
    EulerState out;
    out.t = s.t + dt;
    out.v = std::move(projected);
    out.Pi = pressure(out.v);
    return out;
}

double EulerSolver::grad_max(const VectorField& v) {
    if (grid_.dim == 1) return 0.0;
    double m = 0.0;
    for (int c = 0; c < 2; ++c) {
        ScalarField comp(grid_);
        auto src = v.comp_span(c);
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = src[i];
        for (int j = 0; j < 2; ++j) m = std::max(m, max_norm(spectral_derivative(ws_, comp, j)));
    }
    return m;
}

EulerState EulerSolver::prepare(const VectorField& v0, double t0) {
    EulerState s;
    s.t = t0;
    s.v = grid_.dim == 1 ? v0 : dealias_23(ws_, helmholtz_project(ws_, v0));
    if (grid_.dim == 1 && !field_constant(v0))
        throw DimensionError("euler: 1D initial data must be constant");
    s.Pi = pressure(s.v);
    return s;
}

VectorField euler_drift(const VectorField& v) {
    EulerSolver solver(v.grid());
    return solver.drift(v);
}

ScalarField pressure_recover(const VectorField& v) {
    EulerSolver solver(v.grid());
    return solver.pressure(v);
}

EulerState euler_step(const EulerState& s, const NoiseModel& model, double dt,
                      std::span<const double> dW) {
    EulerSolver solver(s.v.grid());
    return solver.step(s, model, dt, dW);
}

bool check_stop(const EulerState& s, StoppingMonitor& mon) {
    if (mon.triggered()) return true;
    EulerSolver solver(s.v.grid());
    if (solver.grad_max(s.v) > mon.M) {
        mon.triggered_at = s.t;
        return true;
    }
    return false;
}

EulerRunResult run_euler(const VectorField& v0, const NoiseModel& model, const WienerPath& path,
                         double t_end, int ledger_every, double grad_bound, bool store_snapshots) {
    model.validate(v0.grid().dim);
    if (ledger_every < 1) throw UsageError("run_euler: ledger_every must be >= 1");
    EulerSolver solver(v0.grid());
    EulerRunResult out;
    out.monitor.M = grad_bound;

    const double dt = path.dt();
    long steps = 0;
    if (t_end > 0.0) {
        steps = std::lround(t_end / dt);
        if (steps < 1 || std::abs(steps * dt - t_end) > 1e-9 * std::max(t_end, dt))
            throw UsageError("run_euler: t_end must be an integer multiple of the path dt");
    }

    EulerState state = solver.prepare(v0);
    check_stop(state, out.monitor);
    double defect = 0.0;

    auto push_row = [&](const EulerState& s) {
        EulerRunRow row;
        row.t = s.t;
        row.kinetic = 0.5 * inner(s.v, s.v);
        row.grad_max = solver.grad_max(s.v);
        row.proj_defect = defect;
        row.div_max = v0.grid().dim == 1 ? 0.0 : spectral_divergence_max(s.v);
        out.rows.push_back(row);
        if (store_snapshots) out.snapshots.push_back(s.v);
    };
    push_row(state);

    std::vector<double> dW(model.K, 0.0);
    const bool silent = model.silent();
    for (long step = 0; step < steps; ++step) {
        if (!out.monitor.triggered()) {
            if (!silent) path.increments(step, model.K, dW);
            state = solver.step(state, model, dt, dW);
            defect = std::max(defect, solver.last_projection_defect());
            if (solver.grad_max(state.v) > out.monitor.M && !out.monitor.triggered())
                out.monitor.triggered_at = state.t;
        } else {
            state.t += dt;  // frozen at v(tau_M)
        }
        if ((step + 1) % ledger_every == 0 || step + 1 == steps) push_row(state);
    }
    out.final_state = std::move(state);
    return out;
}

}  // namespace relent
