#include "relent/initial_data.hpp"

#include <cmath>

#include "relent/rng.hpp"

namespace relent {

ScalarField constant_field(const Grid& g, double value) { return ScalarField(g, value); }

VectorField constant_velocity(const Grid& g, const std::vector<double>& value) {
    if (static_cast<int>(value.size()) != g.dim)
        throw UsageError("constant_velocity: need one value per component");
    VectorField v(g);
    for (int c = 0; c < g.dim; ++c) {
        auto s = v.comp_span(c);
        for (double& x : s) x = value[c];
    }
    return v;
}

ScalarField harmonic_scalar(const Grid& g, double amp, int mx, int my, double phase) {
    ScalarField f(g);
    const double w = 2.0 * M_PI / g.length;
    if (g.dim == 1) {
        for (int i = 0; i < g.n; ++i) f[i] = amp * std::sin(w * mx * g.coord(i) + phase);
    } else {
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix)
                f.at(ix, iy) =
                    amp * std::sin(w * (mx * g.coord(ix) + my * g.coord(iy)) + phase);
    }
    return f;
}

ScalarField random_smooth_scalar(const Grid& g, std::uint64_t seed, std::uint32_t tag, double amp,
                                 int max_mode) {
    ScalarField f(g);
    int draw = 0;
    auto add_mode = [&](int mx, int my) {
        const double mag = std::abs(mx) + std::abs(my);
        const double phase = 2.0 * M_PI * counter_uniform(seed, tag, draw, 7001);
        const double a = amp * (0.5 + 0.5 * counter_uniform(seed, tag, draw, 7002)) / (mag * mag);
        ++draw;
        axpy(f, 1.0, harmonic_scalar(g, a, mx, my, phase));
    };
    if (g.dim == 1) {
        for (int m = 1; m <= max_mode; ++m) add_mode(m, 0);
    } else {
        // canonical half-plane of mode pairs, no conjugate duplicates
        for (int mx = 0; mx <= max_mode; ++mx)
            for (int my = -max_mode; my <= max_mode; ++my)
                if (mx > 0 || my > 0) add_mode(mx, my);
    }
    return f;
}

VectorField random_smooth_velocity(const Grid& g, std::uint64_t seed, std::uint32_t tag,
                                   double amp, int max_mode) {
    VectorField v(g);
    for (int c = 0; c < g.dim; ++c) {
        ScalarField f = random_smooth_scalar(g, seed, tag + 31u * (c + 1), amp, max_mode);
        auto dst = v.comp_span(c);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = f[i];
    }
    return v;
}

VectorField taylor_green(const Grid& g, double amp) {
    if (g.dim != 2) throw UsageError("taylor_green: 2D only");
    VectorField v(g);
    const double w = 2.0 * M_PI / g.length;
    for (int iy = 0; iy < g.n; ++iy) {
        for (int ix = 0; ix < g.n; ++ix) {
            const double x = g.coord(ix), y = g.coord(iy);
            v.comp(0, g.index(ix, iy)) = amp * std::cos(w * x) * std::sin(w * y);
            v.comp(1, g.index(ix, iy)) = -amp * std::sin(w * x) * std::cos(w * y);
        }
    }
    return v;
}

State make_state(const ScalarField& rho, const VectorField& u, double t) {
    if (rho.grid() != u.grid()) throw UsageError("make_state: grids differ");
    VectorField mom(rho.grid());
    for (int c = 0; c < u.components(); ++c) {
        auto m = mom.comp_span(c);
        auto uc = u.comp_span(c);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = rho[i] * uc[i];
    }
    State s(t, rho, mom);
    validate_state(s);
    return s;
}

State equilibrium_state(const Grid& g, double rho0) {
    return make_state(ScalarField(g, rho0), VectorField(g));
}

State smooth_state(const Grid& g, double rho0, double amp_rho, double amp_u, int mode) {
    ScalarField rho = constant_field(g, rho0);
    axpy(rho, 1.0, harmonic_scalar(g, amp_rho, mode, g.dim == 2 ? mode : 0));
    if (min_value(rho) <= 0.0) throw UsageError("smooth_state: density amplitude too large");
    VectorField u(g);
    for (int c = 0; c < g.dim; ++c) {
        ScalarField uc = harmonic_scalar(g, amp_u, mode, g.dim == 2 ? mode : 0,
                                         0.5 * M_PI + 0.25 * M_PI * c);
        auto dst = u.comp_span(c);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = uc[i];
    }
    return make_state(rho, u);
}

State well_prepared_state(const Grid& g, double eps, double delta, const VectorField& v0) {
    if (v0.grid() != g) throw UsageError("well_prepared_state: v0 on a different grid");
    ScalarField rho = constant_field(g, 1.0);
    axpy(rho, eps * delta, harmonic_scalar(g, 1.0, 1, 0));
    if (min_value(rho) <= 0.0) throw UsageError("well_prepared_state: perturbation too large");
    VectorField mom = v0;
    for (int c = 0; c < g.dim; ++c) {
        ScalarField psi = harmonic_scalar(g, 1.0, 1, g.dim == 2 ? 1 : 0, 0.5 * M_PI * (c + 1));
        auto m = mom.comp_span(c);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += delta * psi[i];
    }
    State s(0.0, rho, mom);
    validate_state(s);
    return s;
}

}  // namespace relent
