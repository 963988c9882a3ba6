#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "relent/grid.hpp"

namespace relent {

/// Owns FFTW plans and scratch for one grid. Plan creation is serialized
/// internally; a workspace instance must not be shared across threads.
class SpectralWorkspace {
  public:
    explicit SpectralWorkspace(const Grid& g);
    ~SpectralWorkspace();
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    const Grid& grid() const { return grid_; }

    /// Unnormalized forward DFT of a real sample vector.
    void to_spectral(std::span<const double> physical, std::vector<std::complex<double>>& out);
    /// Inverse DFT including the 1/N normalization.
    void to_physical(const std::vector<std::complex<double>>& spectral, std::span<double> out);

    /// Integer frequency of mode index j: j for j <= n/2, else j - n.
    int freq(int j) const { return j <= grid_.n / 2 ? j : j - grid_.n; }
    /// Angular wavenumber 2*pi*freq/length.
    double wavenumber(int j) const;
    /// Frequencies kept by the 2/3 rule.
    bool kept_23(int j) const { return std::abs(freq(j)) <= grid_.n / 3; }

  private:
    Grid grid_;
    std::vector<std::complex<double>> buf_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
};

/// Fourier-space Helmholtz projection onto discretely divergence-free fields.
/// dim == 2 only; a 1D field is accepted unchanged when constant and rejected
/// otherwise (1D solenoidal fields are constants).
VectorField helmholtz_project(SpectralWorkspace& ws, const VectorField& v);
VectorField helmholtz_project(const VectorField& v);

/// Max norm of the spectral divergence sum_c i k_c v_c.
double spectral_divergence_max(SpectralWorkspace& ws, const VectorField& v);
double spectral_divergence_max(const VectorField& v);

/// Spectral partial derivative (Nyquist mode zeroed).
ScalarField spectral_derivative(SpectralWorkspace& ws, const ScalarField& f, int axis);

/// Zero-mean solution of laplace(u) = f (true spectral symbol -|k|^2).
ScalarField inverse_laplacian(SpectralWorkspace& ws, const ScalarField& f);

/// 2/3-rule truncation.
ScalarField dealias_23(SpectralWorkspace& ws, const ScalarField& f);
VectorField dealias_23(SpectralWorkspace& ws, const VectorField& v);

/// Solves (rho_bar I - dt * Lhat) u = rhs per Fourier mode, where Lhat is the
/// symbol of div S(grad .) built from the composed central stencil
/// (D_j = i sin(k_j dx)/dx), S the full viscous stress with coefficients mu,
/// eta. Used as the preconditioner of the semi-implicit viscous solve.
VectorField stress_implicit_solve(SpectralWorkspace& ws, const VectorField& rhs, double rho_bar,
                                  double mu, double eta, double dt);

}  // namespace relent
