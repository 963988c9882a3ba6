#include "relent/noise.hpp"

#include <cmath>

#include "relent/rng.hpp"

namespace relent {

State::State(double t_, ScalarField rho_, VectorField mom_)
    : t(t_), rho(std::move(rho_)), mom(std::move(mom_)) {
    if (rho.grid() != mom.grid()) throw UsageError("state: rho and mom grids differ");
}

VectorField velocity(const State& s, double floor) {
    VectorField u(s.grid());
    const int d = s.mom.components();
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        if (s.rho[i] <= floor) throw PositivityError(s.t, i, s.rho[i]);
        for (int c = 0; c < d; ++c) u.comp(c, i) = s.mom.comp(c, i) / s.rho[i];
    }
    return u;
}

void validate_state(const State& s) {
    const int d = s.mom.components();
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        if (s.rho[i] < 0.0) throw PositivityError(s.t, i, s.rho[i]);
        if (s.rho[i] == 0.0)
            for (int c = 0; c < d; ++c)
                if (s.mom.comp(c, i) != 0.0)
                    throw VacuumError("nonzero momentum on vacuum cell " + std::to_string(i));
    }
}

void NoiseModel::validate(int dim) const {
    if (K < 0) throw UsageError("noise: K must be nonnegative");
    if (form == Form::affine) {
        if (static_cast<int>(F.size()) != K || static_cast<int>(Hc.size()) != K)
            throw UsageError("noise: F and H must have K entries");
        for (double x : F)
            if (!std::isfinite(x)) throw UsageError("noise: nonfinite F entry");
        for (double x : Hc)
            if (!std::isfinite(x)) throw UsageError("noise: nonfinite H entry");
        if (!F_comp.empty()) {
            if (static_cast<int>(F_comp.size()) != K)
                throw UsageError("noise: F_comp must have K rows");
            for (const auto& row : F_comp)
                if (static_cast<int>(row.size()) != dim)
                    throw UsageError("noise: F_comp rows must have dim entries");
        }
    } else {
        if (!custom) throw UsageError("noise: custom form without hook");
        if (static_cast<int>(alpha_custom.size()) != K)
            throw UsageError("noise: custom form requires declared alpha bounds");
    }
    if (tail_budget < 0.0) throw UsageError("noise: tail budget must be nonnegative");
}

std::vector<double> NoiseModel::alpha() const {
    if (form == Form::custom) return alpha_custom;
    std::vector<double> a(K);
    for (int k = 0; k < K; ++k) {
        double fmax = std::abs(F[k]);
        if (!F_comp.empty())
            for (double x : F_comp[k]) fmax = std::max(fmax, std::abs(x));
        a[k] = fmax + std::abs(Hc[k]);
    }
    return a;
}

double NoiseModel::alpha_sum() const {
    double s = tail_budget;
    for (double a : alpha()) s += a;
    return s;
}

bool NoiseModel::silent() const {
    if (form == Form::custom) return false;
    for (double x : F)
        if (x != 0.0) return false;
    for (double x : Hc)
        if (x != 0.0) return false;
    for (const auto& row : F_comp)
        for (double x : row)
            if (x != 0.0) return false;
    return true;
}

NoiseModel NoiseModel::zero(int K) {
    NoiseModel m;
    m.K = K;
    m.F.assign(K, 0.0);
    m.Hc.assign(K, 0.0);
    return m;
}

NoiseModel NoiseModel::affine(std::vector<double> F, std::vector<double> Hc) {
    if (F.size() != Hc.size()) throw UsageError("noise: F and H lengths differ");
    NoiseModel m;
    m.K = static_cast<int>(F.size());
    m.F = std::move(F);
    m.Hc = std::move(Hc);
    return m;
}

WienerPath WienerPath::coarsened(int extra_levels) const {
    if (!explicit_increments.empty())
        throw UsageError("wiener path: cannot coarsen explicit increments");
    WienerPath p = *this;
    p.level += extra_levels;
    return p;
}

void WienerPath::increments(long step, int K, std::span<double> out) const {
    if (step < 0) throw UsageError("wiener path: negative step");
    if (!explicit_increments.empty()) {
        if (step >= static_cast<long>(explicit_increments.size()))
            throw UsageError("wiener path: step beyond explicit increments");
        const auto& row = explicit_increments[step];
        if (static_cast<int>(row.size()) < K)
            throw UsageError("wiener path: explicit increment row too short");
        for (int k = 0; k < K; ++k) out[k] = row[k];
        return;
    }
    const long span = 1L << level;
    const double root_dt = std::sqrt(base_dt);
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        for (long i = 0; i < span; ++i)
            s += counter_gaussian(seed, member, static_cast<std::uint64_t>(step * span + i),
                                  static_cast<std::uint32_t>(k));
        out[k] = s * root_dt;
    }
}

std::vector<double> wiener_increments(const WienerPath& path, long step, int K) {
    std::vector<double> dW(K);
    path.increments(step, K, dW);
    return dW;
}

VectorField eval_G(const State& s, const NoiseModel& model, int k) {
    if (k < 0 || k >= model.K)
        throw UsageError("eval_G: mode " + std::to_string(k) + " out of range");
    const Grid& g = s.grid();
    VectorField out(g);
    if (model.form == NoiseModel::Form::custom) {
        model.custom(k, s.rho, s.mom, out);
        return out;
    }
    const int d = g.dim;
    for (int c = 0; c < d; ++c) {
        const double fk = model.F_comp.empty() ? model.F[k] : model.F_comp[k][c];
        const double hk = model.Hc[k];
        auto mo = s.mom.comp_span(c);
        auto oc = out.comp_span(c);
        for (std::size_t i = 0; i < oc.size(); ++i) oc[i] = s.rho[i] * fk + mo[i] * hk;
    }
    return out;
}

double ito_correction(const State& s, const NoiseModel& model) {
    const Grid& g = s.grid();
    const int d = g.dim;
    double sum = 0.0;
    if (model.form == NoiseModel::Form::affine) {
        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            const double rho = s.rho[i];
            double cell = 0.0;
            for (int k = 0; k < model.K; ++k) {
                const double hk = model.Hc[k];
                for (int c = 0; c < d; ++c) {
                    const double fk = model.F_comp.empty() ? model.F[k] : model.F_comp[k][c];
                    const double gkc = rho * fk + s.mom.comp(c, i) * hk;
                    if (rho > 0.0) {
                        cell += gkc * gkc / rho;
                    } else if (gkc != 0.0) {
                        throw VacuumError("noise coefficient nonzero on vacuum cell " +
                                          std::to_string(i));
                    }
                }
            }
            sum += cell;
        }
        return 0.5 * sum * g.cell_volume();
    }
    for (int k = 0; k < model.K; ++k) {
        VectorField gk = eval_G(s, model, k);
        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            double g2 = 0.0;
            for (int c = 0; c < d; ++c) g2 += gk.comp(c, i) * gk.comp(c, i);
            if (s.rho[i] > 0.0) {
                sum += g2 / s.rho[i];
            } else if (g2 != 0.0) {
                throw VacuumError("noise coefficient nonzero on vacuum cell " + std::to_string(i));
            }
        }
    }
    return 0.5 * sum * g.cell_volume();
}

VectorField noise_forcing_increment(const State& s, const NoiseModel& model,
                                    std::span<const double> dW) {
    if (static_cast<int>(dW.size()) != model.K)
        throw UsageError("noise_forcing_increment: dW length " + std::to_string(dW.size()) +
                         " does not match K=" + std::to_string(model.K));
    const Grid& g = s.grid();
    VectorField out(g);
    if (model.form == NoiseModel::Form::affine) {
        const int d = g.dim;
        for (int c = 0; c < d; ++c) {
            double fsum = 0.0, hsum = 0.0;
            for (int k = 0; k < model.K; ++k) {
                fsum += (model.F_comp.empty() ? model.F[k] : model.F_comp[k][c]) * dW[k];
                hsum += model.Hc[k] * dW[k];
            }
            auto mo = s.mom.comp_span(c);
            auto oc = out.comp_span(c);
            for (std::size_t i = 0; i < oc.size(); ++i)
                oc[i] = s.rho[i] * fsum + mo[i] * hsum;
        }
        return out;
    }
    for (int k = 0; k < model.K; ++k) {
        VectorField gk = eval_G(s, model, k);
        axpy(out, dW[k], gk);
    }
    return out;
}

}  // namespace relent
