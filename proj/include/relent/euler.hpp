#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "relent/noise.hpp"
#include "relent/spectral.hpp"

namespace relent {

/// Incompressible Euler state: divergence-free velocity and the recovered
/// zero-mean pressure.
struct EulerState {
    double t = 0.0;
    VectorField v;
    ScalarField Pi;
};

/// Latching gradient monitor: triggers the first time ||grad v||_inf > M.
struct StoppingMonitor {
    double M = std::numeric_limits<double>::infinity();
    std::optional<double> triggered_at;

    bool triggered() const { return triggered_at.has_value(); }
};

/// Spectral solver for the stochastic incompressible Euler system with affine
/// noise G(1, v) = F + v H. The velocity is kept dealiased (2/3 rule) and
/// discretely solenoidal after every step. In 1D solenoidal fields are
/// constants and the dynamics reduce to the spatially uniform SDE
/// dv = (F + v H) dW.
class EulerSolver {
  public:
    explicit EulerSolver(const Grid& g);

    const Grid& grid() const { return grid_; }

    /// -P_H[dealias(v . grad v)]; divergence-free to spectral roundoff.
    VectorField drift(const VectorField& v);

    /// Pi = -inv_laplacian(div div dealias(v (x) v)), zero mean.
    ScalarField pressure(const VectorField& v);

    /// Euler-Maruyama step followed by re-projection; the projection defect
    /// removed from the raw update is recorded (see last_projection_defect).
    EulerState step(const EulerState& s, const NoiseModel& model, double dt,
                    std::span<const double> dW);

    /// Max norm of the spectral velocity gradient.
    double grad_max(const VectorField& v);

    double last_projection_defect() const { return last_defect_; }

    /// Projects and dealiases arbitrary initial data onto the state manifold.
    EulerState prepare(const VectorField& v0, double t0 = 0.0);

  private:
    Grid grid_;
    SpectralWorkspace ws_;
    double last_defect_ = 0.0;
};

/// Free-function forms of the named operations (construct a solver per call).
VectorField euler_drift(const VectorField& v);
ScalarField pressure_recover(const VectorField& v);
EulerState euler_step(const EulerState& s, const NoiseModel& model, double dt,
                      std::span<const double> dW);

/// Evaluates the monitor on the current state; returns true iff (now or
/// previously) triggered, latching triggered_at at the first exceedance.
bool check_stop(const EulerState& s, StoppingMonitor& mon);

struct EulerRunRow {
    double t = 0.0;
    double kinetic = 0.0;
    double grad_max = 0.0;
    double proj_defect = 0.0;
    double div_max = 0.0;
};

struct EulerRunResult {
    EulerState final_state;
    std::vector<EulerRunRow> rows;
    StoppingMonitor monitor;
    /// Velocity snapshots at row times, frozen at the stopping time once the
    /// monitor triggers (v(t and tau_M)).
    std::vector<VectorField> snapshots;
};

/// Integrates the Euler system on the path's dt grid until t_end, recording
/// rows (and optionally snapshots) every ledger_every steps.
EulerRunResult run_euler(const VectorField& v0, const NoiseModel& model, const WienerPath& path,
                         double t_end, int ledger_every, double grad_bound,
                         bool store_snapshots = false);

}  // namespace relent
