#include "relent/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace relent {

namespace {
// FFTW plan creation/destruction is not thread-safe.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

SpectralWorkspace::SpectralWorkspace(const Grid& g) : grid_(g), buf_(g.cells()) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto* b = reinterpret_cast<fftw_complex*>(buf_.data());
    if (g.dim == 1) {
        plan_fwd_ = fftw_plan_dft_1d(g.n, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_dft_1d(g.n, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
        plan_fwd_ = fftw_plan_dft_2d(g.n, g.n, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_dft_2d(g.n, g.n, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
}

SpectralWorkspace::~SpectralWorkspace() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void SpectralWorkspace::to_spectral(std::span<const double> physical,
                                    std::vector<std::complex<double>>& out) {
    for (std::size_t i = 0; i < buf_.size(); ++i) buf_[i] = physical[i];
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    out = buf_;
}

void SpectralWorkspace::to_physical(const std::vector<std::complex<double>>& spectral,
                                    std::span<double> out) {
    buf_ = spectral;
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    const double norm = 1.0 / static_cast<double>(grid_.cells());
    for (std::size_t i = 0; i < buf_.size(); ++i) out[i] = buf_[i].real() * norm;
}

double SpectralWorkspace::wavenumber(int j) const {
    return 2.0 * M_PI * freq(j) / grid_.length;
}

namespace {

bool is_constant(const VectorField& v) {
    for (int c = 0; c < v.components(); ++c) {
        auto s = v.comp_span(c);
        double lo = s[0], hi = s[0];
        for (double x : s) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (hi - lo > 1e-13 * (1.0 + std::max(std::abs(lo), std::abs(hi)))) return false;
    }
    return true;
}

}  // namespace

VectorField helmholtz_project(SpectralWorkspace& ws, const VectorField& v) {
    const Grid& g = v.grid();
    if (g.dim == 1) {
        if (!is_constant(v))
            throw DimensionError("helmholtz_project: no nonconstant solenoidal fields in 1D");
        return v;
    }
    const int n = g.n;
    std::vector<std::complex<double>> vx, vy;
    ws.to_spectral(v.comp_span(0), vx);
    ws.to_spectral(v.comp_span(1), vy);
    // derivative wavenumber convention (Nyquist zeroed): keeps the projector
    // even under mode conjugation, so real fields stay real
    auto dk = [&](int j) { return ws.freq(j) == n / 2 ? 0.0 : ws.wavenumber(j); };
    for (int jy = 0; jy < n; ++jy) {
        const double ky = dk(jy);
        for (int jx = 0; jx < n; ++jx) {
            const double kx = dk(jx);
            const double k2 = kx * kx + ky * ky;
            if (k2 == 0.0) continue;  // zero mode (and pure-Nyquist modes) unchanged
            const std::size_t idx = g.index(jx, jy);
            const std::complex<double> kdotv = kx * vx[idx] + ky * vy[idx];
            vx[idx] -= kx * kdotv / k2;
            vy[idx] -= ky * kdotv / k2;
        }
    }
    VectorField out(g);
    ws.to_physical(vx, out.comp_span(0));
    ws.to_physical(vy, out.comp_span(1));
    return out;
}

VectorField helmholtz_project(const VectorField& v) {
    SpectralWorkspace ws(v.grid());
    return helmholtz_project(ws, v);
}

double spectral_divergence_max(SpectralWorkspace& ws, const VectorField& v) {
    const Grid& g = v.grid();
    auto dk = [&](int j) { return ws.freq(j) == g.n / 2 ? 0.0 : ws.wavenumber(j); };
    if (g.dim == 1) {
        std::vector<std::complex<double>> vx;
        ws.to_spectral(v.comp_span(0), vx);
        const double norm = 1.0 / g.cells();
        double m = 0.0;
        for (int j = 0; j < g.n; ++j)
            m = std::max(m, std::abs(dk(j) * vx[j]) * norm);
        return m;
    }
    std::vector<std::complex<double>> vx, vy;
    ws.to_spectral(v.comp_span(0), vx);
    ws.to_spectral(v.comp_span(1), vy);
    std::vector<std::complex<double>> div(g.cells());
    for (int jy = 0; jy < g.n; ++jy) {
        const double ky = dk(jy);
        for (int jx = 0; jx < g.n; ++jx) {
            const double kx = dk(jx);
            const std::size_t idx = g.index(jx, jy);
            div[idx] = std::complex<double>(0.0, 1.0) * (kx * vx[idx] + ky * vy[idx]);
        }
    }
    ScalarField d(g);
    ws.to_physical(div, d.data());
    return max_norm(d);
}

double spectral_divergence_max(const VectorField& v) {
    SpectralWorkspace ws(v.grid());
    return spectral_divergence_max(ws, v);
}

ScalarField spectral_derivative(SpectralWorkspace& ws, const ScalarField& f, int axis) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim) throw UsageError("spectral_derivative: axis out of range");
    std::vector<std::complex<double>> fh;
    ws.to_spectral(f.data(), fh);
    const int n = g.n;
    const std::complex<double> I(0.0, 1.0);
    auto dk = [&](int j) {
        // odd derivative: Nyquist mode has no well-defined sign, zero it
        return ws.freq(j) == n / 2 ? 0.0 : ws.wavenumber(j);
    };
    if (g.dim == 1) {
        for (int j = 0; j < n; ++j) fh[j] *= I * dk(j);
    } else {
        for (int jy = 0; jy < n; ++jy)
            for (int jx = 0; jx < n; ++jx)
                fh[g.index(jx, jy)] *= I * dk(axis == 0 ? jx : jy);
    }
    ScalarField out(g);
    ws.to_physical(fh, out.data());
    return out;
}

ScalarField inverse_laplacian(SpectralWorkspace& ws, const ScalarField& f) {
    const Grid& g = f.grid();
    std::vector<std::complex<double>> fh;
    ws.to_spectral(f.data(), fh);
    const int n = g.n;
    if (g.dim == 1) {
        for (int j = 0; j < n; ++j) {
            const double k = ws.wavenumber(j);
            fh[j] = (k == 0.0) ? 0.0 : fh[j] / (-k * k);
        }
    } else {
        for (int jy = 0; jy < n; ++jy) {
            const double ky = ws.wavenumber(jy);
            for (int jx = 0; jx < n; ++jx) {
                const double kx = ws.wavenumber(jx);
                const double k2 = kx * kx + ky * ky;
                const std::size_t idx = g.index(jx, jy);
                fh[idx] = (k2 == 0.0) ? 0.0 : fh[idx] / (-k2);
            }
        }
    }
    ScalarField out(g);
    ws.to_physical(fh, out.data());
    return out;
}

namespace {

void dealias_span(SpectralWorkspace& ws, std::span<const double> in, std::span<double> out) {
    const Grid& g = ws.grid();
    std::vector<std::complex<double>> fh;
    ws.to_spectral(in, fh);
    if (g.dim == 1) {
        for (int j = 0; j < g.n; ++j)
            if (!ws.kept_23(j)) fh[j] = 0.0;
    } else {
        for (int jy = 0; jy < g.n; ++jy)
            for (int jx = 0; jx < g.n; ++jx)
                if (!ws.kept_23(jx) || !ws.kept_23(jy)) fh[g.index(jx, jy)] = 0.0;
    }
    ws.to_physical(fh, out);
}

}  // namespace

ScalarField dealias_23(SpectralWorkspace& ws, const ScalarField& f) {
    ScalarField out(f.grid());
    dealias_span(ws, f.data(), out.data());
    return out;
}

VectorField dealias_23(SpectralWorkspace& ws, const VectorField& v) {
    VectorField out(v.grid());
    for (int c = 0; c < v.components(); ++c)
        dealias_span(ws, v.comp_span(c), out.comp_span(c));
    return out;
}

VectorField stress_implicit_solve(SpectralWorkspace& ws, const VectorField& rhs, double rho_bar,
                                  double mu, double eta, double dt) {
    const Grid& g = rhs.grid();
    // symbol of the composed central first derivative: i*sin(k dx)/dx
    auto sym = [&](int j) { return std::sin(ws.wavenumber(j) * g.dx) / g.dx; };
    if (g.dim == 1) {
        std::vector<std::complex<double>> rh;
        ws.to_spectral(rhs.comp_span(0), rh);
        const double coef = 4.0 * mu / 3.0 + eta;
        for (int j = 0; j < g.n; ++j) {
            const double s = sym(j);
            rh[j] /= (rho_bar + dt * coef * s * s);
        }
        VectorField out(g);
        ws.to_physical(rh, out.comp_span(0));
        return out;
    }
    std::vector<std::complex<double>> rx, ry;
    ws.to_spectral(rhs.comp_span(0), rx);
    ws.to_spectral(rhs.comp_span(1), ry);
    for (int jy = 0; jy < g.n; ++jy) {
        const double sy = sym(jy);
        for (int jx = 0; jx < g.n; ++jx) {
            const double sx = sym(jx);
            const std::size_t idx = g.index(jx, jy);
            // Lhat = -(mu*|s|^2 I + (mu/3 + eta) s s^T), real symmetric
            const double s2 = sx * sx + sy * sy;
            const double b = mu / 3.0 + eta;
            const double a00 = rho_bar + dt * (mu * s2 + b * sx * sx);
            const double a11 = rho_bar + dt * (mu * s2 + b * sy * sy);
            const double a01 = dt * b * sx * sy;
            const double det = a00 * a11 - a01 * a01;
            const std::complex<double> r0 = rx[idx], r1 = ry[idx];
            rx[idx] = (a11 * r0 - a01 * r1) / det;
            ry[idx] = (a00 * r1 - a01 * r0) / det;
        }
    }
    VectorField out(g);
    ws.to_physical(rx, out.comp_span(0));
    ws.to_physical(ry, out.comp_span(1));
    return out;
}

}  // namespace relent
