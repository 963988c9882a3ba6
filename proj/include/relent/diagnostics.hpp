#pragma once

#include <memory>
#include <string>
#include <vector>

#include "relent/cns.hpp"
#include "relent/euler.hpp"
#include "relent/ledger.hpp"

namespace relent {

struct EnergyPair {
    double kinetic = 0.0;
    double potential = 0.0;
    double total() const { return kinetic + potential; }
};

/// kinetic = int |m|^2/(2 rho), potential = (1/eps^2) int H(rho), with the
/// vacuum convention of the relative energy.
EnergyPair energy(const State& s, const PressureLaw& law, double eps = 1.0);

/// Smooth test pair (r, U) with declared drift/diffusion decomposition,
/// advancing in lockstep with the trajectory it is compared against.
/// diff_r/diff_U may return nullptr for identically zero components.
class ReferenceProcess {
  public:
    virtual ~ReferenceProcess() = default;

    virtual const ScalarField& r() const = 0;
    virtual const VectorField& U() const = 0;
    virtual const ScalarField* drift_r() const = 0;
    virtual const VectorField* drift_U() const = 0;
    virtual int modes() const = 0;
    virtual const ScalarField* diff_r(int k) const = 0;
    virtual const VectorField* diff_U(int k) const = 0;

    /// Declared density bounds 0 < r_lower <= r <= r_upper.
    virtual double r_lower() const = 0;
    virtual double r_upper() const = 0;

    virtual void advance(double dt, std::span<const double> dW) = 0;

    /// ||grad U||_inf of the current reference velocity (central stencils).
    double grad_max() const;
};

/// Constant-in-time reference with zero drift and diffusion.
class ConstantReference : public ReferenceProcess {
  public:
    ConstantReference(ScalarField r, VectorField U);

    const ScalarField& r() const override { return r_; }
    const VectorField& U() const override { return U_; }
    const ScalarField* drift_r() const override { return nullptr; }
    const VectorField* drift_U() const override { return nullptr; }
    int modes() const override { return 0; }
    const ScalarField* diff_r(int) const override { return nullptr; }
    const VectorField* diff_U(int) const override { return nullptr; }
    double r_lower() const override { return lo_; }
    double r_upper() const override { return hi_; }
    void advance(double, std::span<const double>) override {}

  private:
    ScalarField r_;
    VectorField U_;
    double lo_, hi_;
};

/// Test pair driven by a declared constant-coefficient SDE, advanced by
/// Euler-Maruyama on the shared increments. Exercises the density-noise
/// remainder terms (nonzero D^s r).
class SyntheticReference : public ReferenceProcess {
  public:
    SyntheticReference(ScalarField r0, VectorField U0, ScalarField drift_r, VectorField drift_U,
                       std::vector<ScalarField> diff_r, std::vector<VectorField> diff_U,
                       double r_lo, double r_hi);

    const ScalarField& r() const override { return r_; }
    const VectorField& U() const override { return U_; }
    const ScalarField* drift_r() const override { return &drift_r_; }
    const VectorField* drift_U() const override { return &drift_U_; }
    int modes() const override { return static_cast<int>(diff_r_.size()); }
    const ScalarField* diff_r(int k) const override { return &diff_r_[k]; }
    const VectorField* diff_U(int k) const override { return &diff_U_[k]; }
    double r_lower() const override { return lo_; }
    double r_upper() const override { return hi_; }
    void advance(double dt, std::span<const double> dW) override;

  private:
    ScalarField r_, drift_r_;
    VectorField U_, drift_U_;
    std::vector<ScalarField> diff_r_;
    std::vector<VectorField> diff_U_;
    double lo_, hi_;
};

/// Strong twin: a second compressible trajectory on the same noise, either at
/// identical resolution or refined by an odd factor and restricted to the
/// coarse grid by pointwise injection at coincident cell centers.
class TwinReference : public ReferenceProcess {
  public:
    /// When `own_path` is set the strong twin draws its own increments from it
    /// instead of the shared ones (negative-control decoupling).
    TwinReference(const State& strong_init, const ModelParams& params, const StepperConfig& cfg,
                  const Grid& coarse, int refine_factor = 1,
                  const WienerPath* own_path = nullptr);

    const ScalarField& r() const override { return r_; }
    const VectorField& U() const override { return U_; }
    const ScalarField* drift_r() const override { return &drift_r_; }
    const VectorField* drift_U() const override { return &drift_U_; }
    int modes() const override { return params_.noise.K; }
    const ScalarField* diff_r(int) const override { return nullptr; }
    const VectorField* diff_U(int k) const override { return &diff_U_[k]; }
    double r_lower() const override { return lo_; }
    double r_upper() const override { return hi_; }
    void advance(double dt, std::span<const double> dW) override;

    const State& strong_state() const { return state_; }
    /// Hard stability limit of the strong twin at its current state.
    double hard_dt_limit() const;

  private:
    void refresh();

    State state_;
    ModelParams params_;
    StepperConfig cfg_;
    Grid coarse_;
    int refine_;
    std::unique_ptr<SpectralWorkspace> ws_;  // semi-implicit only
    ScalarField r_, drift_r_;
    VectorField U_, drift_U_;
    std::vector<VectorField> diff_U_;
    double lo_, hi_;
    std::optional<WienerPath> own_path_;
    long own_step_ = 0;
};

/// Euler-limit reference per the singular-limit substitution: r = 1,
/// U = v(t and tau_M), D^d_t U = -P_H[v.grad v] - grad Pi,
/// D^s_t U(e_k) = F_k + v H_k; everything frozen once the gradient monitor
/// triggers.
class EulerReference : public ReferenceProcess {
  public:
    EulerReference(const VectorField& v0, const NoiseModel& model, double grad_bound);

    const ScalarField& r() const override { return one_; }
    const VectorField& U() const override { return U_; }
    const ScalarField* drift_r() const override { return nullptr; }
    const VectorField* drift_U() const override { return stopped()? nullptr : &drift_U_; }
    int modes() const override { return model_.K; }
    const ScalarField* diff_r(int) const override { return nullptr; }
    const VectorField* diff_U(int k) const override { return stopped() ? nullptr : &diff_U_[k]; }
    double r_lower() const override { return 1.0; }
    double r_upper() const override { return 1.0; }
    void advance(double dt, std::span<const double> dW) override;

    bool stopped() const { return monitor_.triggered(); }
    const StoppingMonitor& monitor() const { return monitor_; }
    const EulerState& euler_state() const { return state_; }

  private:
    void refresh();

    EulerSolver solver_;
    EulerState state_;
    NoiseModel model_;
    StoppingMonitor monitor_;
    ScalarField one_;
    VectorField U_, drift_U_;
    std::vector<VectorField> diff_U_;
};

/// Itemized remainder R(rho, u | r, U).
struct RemainderTerms {
    double viscous_cross = 0.0;  // int S(grad U):(grad U - grad u)
    double inertial = 0.0;       // int rho (D^d U + u.grad U).(U - u)
    double density = 0.0;        // int (r-rho)H''(r) D^d r + grad H'(r).(r U - rho u)
    double pressure = 0.0;       // -int div U (p(rho) - p(r))
    double noise_u = 0.0;        // 1/2 sum int rho |G_k/rho - D^s U(e_k)|^2
    double noise_r_H3 = 0.0;     // 1/2 sum int rho H'''(r) |D^s r(e_k)|^2
    double noise_r_p2 = 0.0;     // 1/2 sum int p''(r) |D^s r(e_k)|^2

    double total() const {
        return viscous_cross + inertial + density + pressure + noise_u + noise_r_H3 + noise_r_p2;
    }
};

/// Evaluates the remainder at the current (state, reference) pair. Throws
/// ReferenceBoundError when r leaves its declared bounds.
RemainderTerms remainder(const State& s, const ReferenceProcess& ref, const PressureLaw& law,
                         const ModelParams& params);

/// E0 * exp(cM * t).
double gronwall_envelope(double E0, double cM, double t);

struct MartingaleEstimate {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> ci;
    bool verdict = false;  // |mean| <= ci at every time
};

/// Ensemble-mean estimate of a martingale ledger column ("stoch_cum" or
/// "mre_sum"); requires at least 16 members.
MartingaleEstimate martingale_estimate(const EnsembleStats& stats, const std::string& column);

/// Scalar toy process ds = (c0(x) + c1 s) dt + sum_k b_k(x) dW_k on a coarse
/// grid, for the discrete product-rule verification.
struct ToyProcess {
    ScalarField init;
    ScalarField drift_const;
    double drift_linear = 0.0;
    std::vector<ScalarField> diff;
};

/// Polynomial of degree <= 4.
struct Poly4 {
    std::array<double, 5> c{};
    double eval(double x) const;
    double d1(double x) const;
    double d2(double x) const;
};

/// Simulates both sides of the product-rule identity
///   d int s Q(r) = [int s(Q'(r) D^d r + 1/2 sum Q''(r)|D^s r|^2) + <Q(r), D^d s>
///                   + sum int Q'(r) D^s s(e_k) D^s r(e_k)] dt + dM
/// on the path's dt grid and returns the signed terminal residual
/// (left side minus right side).
double ito_product_check(const ToyProcess& s_proc, const ToyProcess& r_proc, const Poly4& Q,
                         const WienerPath& path, double t_end);

}  // namespace relent
