#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "relent/state.hpp"

namespace relent {

/// Truncated family of diffusion coefficients G_k. The affine form is
/// G_k(rho, m) = rho F_k + m H_k, with the scalar F_k entering every vector
/// component identically unless a per-component matrix is configured.
struct NoiseModel {
    enum class Form { affine, custom };

    int K = 8;
    std::vector<double> F;    // size K
    std::vector<double> Hc;   // size K
    /// Opt-in per-component additive coefficients, K x dim; overrides F.
    std::vector<std::vector<double>> F_comp;
    Form form = Form::affine;
    /// C^1 hook for tabulated non-affine coefficients; must satisfy
    /// G_k(0, 0) = 0. Only the affine form ships with the library.
    std::function<void(int k, const ScalarField& rho, const VectorField& mom, VectorField& out)>
        custom;
    /// Declared Lipschitz bounds for the custom form.
    std::vector<double> alpha_custom;
    /// Declared alpha tail beyond the K retained modes, reported in run metadata.
    double tail_budget = 0.0;

    void validate(int dim) const;
    /// Lipschitz bounds alpha_k = |F_k| + |H_k| (affine) or the declared array.
    std::vector<double> alpha() const;
    double alpha_sum() const;
    bool silent() const;  // all coefficients zero

    static NoiseModel zero(int K = 8);
    static NoiseModel affine(std::vector<double> F, std::vector<double> Hc);
};

/// Truncated cylindrical Wiener path, realized as counter-keyed increments.
/// An increment at refinement level L spans 2^L base steps; paths at
/// different levels over the same base grid sample one Brownian path, so
/// dt-refinement studies and eps-sweeps can share noise bit-exactly.
struct WienerPath {
    std::uint64_t seed = 0;
    std::uint32_t member = 0;
    double base_dt = 1.0;
    int level = 0;
    /// Optional override: explicit per-step increments (each of size K).
    std::vector<std::vector<double>> explicit_increments;

    WienerPath() = default;
    WienerPath(std::uint64_t seed, std::uint32_t member, double dt)
        : seed(seed), member(member), base_dt(dt) {}

    double dt() const { return base_dt * static_cast<double>(1L << level); }
    /// Path on the same base grid taking steps 2^extra_levels times larger.
    WienerPath coarsened(int extra_levels) const;

    void increments(long step, int K, std::span<double> out) const;
};

/// dW array for one step (size K).
std::vector<double> wiener_increments(const WienerPath& path, long step, int K);

/// G_k evaluated on the state; k in [0, K).
VectorField eval_G(const State& s, const NoiseModel& model, int k);

/// (1/2) int sum_k |G_k(rho, m)|^2 / rho dx. Vacuum cells contribute zero when
/// all G_k vanish there, otherwise a VacuumError is raised.
double ito_correction(const State& s, const NoiseModel& model);

/// sum_k G_k(state) dW_k, the momentum-equation forcing increment.
VectorField noise_forcing_increment(const State& s, const NoiseModel& model,
                                    std::span<const double> dW);

}  // namespace relent
