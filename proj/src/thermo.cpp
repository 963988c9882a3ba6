#include "relent/thermo.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace relent {

PressureLaw::PressureLaw(double gamma_, double a_, bool relax) : gamma(gamma_), a(a_), relax_gamma(relax) {
    if (a <= 0.0) throw UsageError("pressure law: a must be positive");
    if (gamma <= 1.0) throw UsageError("pressure law: gamma must exceed 1");
    if (!relax_gamma && gamma <= 1.5)
        throw UsageError("pressure law: gamma > 3/2 required (set relax_gamma to override)");
}

double PressureLaw::p(double rho) const { return a * std::pow(rho, gamma); }
double PressureLaw::dp(double rho) const { return a * gamma * std::pow(rho, gamma - 1.0); }
double PressureLaw::d2p(double rho) const {
    return a * gamma * (gamma - 1.0) * std::pow(rho, gamma - 2.0);
}
double PressureLaw::H(double rho) const { return a * std::pow(rho, gamma) / (gamma - 1.0); }
double PressureLaw::dH(double rho) const {
    return a * gamma * std::pow(rho, gamma - 1.0) / (gamma - 1.0);
}
double PressureLaw::d2H(double rho) const { return a * gamma * std::pow(rho, gamma - 2.0); }
double PressureLaw::d3H(double rho) const {
    return a * gamma * (gamma - 2.0) * std::pow(rho, gamma - 3.0);
}

ScalarField pressure(const ScalarField& rho, const PressureLaw& law) {
    ScalarField out(rho.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < 0.0)
            throw PositivityError(0.0, i, rho[i]);
        out[i] = law.p(rho[i]);
    }
    return out;
}

double pressure_potential(double rho, const PressureLaw& law) {
    if (rho < 0.0) throw UsageError("pressure_potential: negative density");
    return law.H(rho);
}

double bregman(double rho, double r, const PressureLaw& law) {
    return law.H(rho) - law.dH(r) * (rho - r) - law.H(r);
}

namespace {

struct GaussLegendre {
    std::vector<double> nodes;    // on [0,1]
    std::vector<double> weights;  // sum to 1
};

// nodes/weights of the n-point rule on [0,1] via Newton on P_n
const GaussLegendre& gl32() {
    static const GaussLegendre rule = [] {
        const int n = 32;
        GaussLegendre g;
        g.nodes.resize(n);
        g.weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            g.nodes[i] = 0.5 * (x + 1.0);
            g.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        return g;
    }();
    return rule;
}

std::vector<double> log_space(double lo, double hi, int count) {
    std::vector<double> out(count);
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < count; ++i)
        out[i] = std::exp(la + (lb - la) * i / (count - 1.0));
    return out;
}

}  // namespace

double bregman_ratio(double rho, double r, const PressureLaw& law) {
    const auto& gl = gl32();
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double t = gl.nodes[i];
        s += gl.weights[i] * (1.0 - t) * std::pow(r + t * (rho - r), law.gamma - 2.0);
    }
    return law.a * law.gamma * s;
}

double EssResSplit::cutoff(double rho) const {
    if (rho_lower <= 0.0 || rho_upper <= rho_lower)
        throw UsageError("ess_res_split: need 0 < rho_lower < rho_upper");
    const double lo_edge = rho_lower * (1.0 - transition_width);
    const double hi_edge = rho_upper * (1.0 + transition_width);
    if (rho >= rho_lower && rho <= rho_upper) return 1.0;
    if (rho <= lo_edge || rho >= hi_edge) return 0.0;
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    if (rho < rho_lower) return smooth((rho - lo_edge) / (rho_lower - lo_edge));
    return smooth((hi_edge - rho) / (hi_edge - rho_upper));
}

EssRes ess_res_split(const ScalarField& h, const ScalarField& rho, const EssResSplit& split) {
    if (h.grid() != rho.grid()) throw UsageError("ess_res_split: grids differ");
    EssRes out{ScalarField(h.grid()), ScalarField(h.grid())};
    for (std::size_t i = 0; i < h.size(); ++i) {
        out.ess[i] = split.cutoff(rho[i]) * h[i];
        out.res[i] = h[i] - out.ess[i];
    }
    return out;
}

EssResVec ess_res_split(const VectorField& h, const ScalarField& rho, const EssResSplit& split) {
    if (h.grid() != rho.grid()) throw UsageError("ess_res_split: grids differ");
    EssResVec out{VectorField(h.grid()), VectorField(h.grid())};
    for (int c = 0; c < h.components(); ++c) {
        auto hs = h.comp_span(c);
        auto es = out.ess.comp_span(c);
        auto rs = out.res.comp_span(c);
        for (std::size_t i = 0; i < hs.size(); ++i) {
            es[i] = split.cutoff(rho[i]) * hs[i];
            rs[i] = hs[i] - es[i];
        }
    }
    return out;
}

double coercivity_constant(double delta, const PressureLaw& law, CoercivityMode mode) {
    if (delta <= 0.0 || delta >= 1.0) throw UsageError("coercivity_constant: need 0 < delta < 1");
    double cmin = std::numeric_limits<double>::infinity();
    if (mode == CoercivityMode::quadratic_band) {
        const auto pts = log_space(delta, 1.0 / delta, 240);
        for (double r : pts)
            for (double rho : pts)
                cmin = std::min(cmin, bregman_ratio(rho, r, law));
    } else {
        const auto rs = log_space(delta, 1.0 / delta, 160);
        auto lows = log_space(delta * 1e-6, delta / 2.0, 240);
        auto highs = log_space(2.0 / delta, std::max(1e6, 4.0 / delta), 320);
        lows.insert(lows.end(), highs.begin(), highs.end());
        for (double r : rs)
            for (double rho : lows)
                cmin = std::min(cmin, bregman(rho, r, law) / (1.0 + std::pow(rho, law.gamma)));
    }
    if (!(cmin > 0.0))
        throw CoercivityError("coercivity constant came out nonpositive: " + std::to_string(cmin));
    return cmin;
}

double kinetic_energy(const ScalarField& rho, const VectorField& mom) {
    if (rho.grid() != mom.grid()) throw UsageError("kinetic_energy: grids differ");
    const int d = mom.components();
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double m2 = 0.0;
        for (int c = 0; c < d; ++c) m2 += mom.comp(c, i) * mom.comp(c, i);
        if (rho[i] > 0.0) {
            s += m2 / (2.0 * rho[i]);
        } else if (m2 != 0.0) {
            throw VacuumError("nonzero momentum on vacuum cell " + std::to_string(i));
        }
    }
    return s * rho.grid().cell_volume();
}

double relative_energy(const ScalarField& rho, const VectorField& mom, const ScalarField& r,
                       const VectorField& U, const PressureLaw& law, double eps) {
    if (rho.grid() != r.grid() || mom.grid() != U.grid() || rho.grid() != mom.grid())
        throw UsageError("relative_energy: grids differ");
    if (eps <= 0.0 || eps > 1.0) throw UsageError("relative_energy: eps must be in (0,1]");
    const int d = mom.components();
    const double inv_eps2 = 1.0 / (eps * eps);
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (r[i] <= 0.0)
            throw ReferenceBoundError("reference density not positive at cell " + std::to_string(i));
        double diff2 = 0.0;
        for (int c = 0; c < d; ++c) {
            const double w = mom.comp(c, i) - rho[i] * U.comp(c, i);
            diff2 += w * w;
        }
        if (rho[i] > 0.0) {
            s += diff2 / (2.0 * rho[i]);
        } else if (diff2 != 0.0) {
            throw VacuumError("nonzero momentum on vacuum cell " + std::to_string(i));
        }
        s += inv_eps2 * bregman(rho[i], r[i], law);
    }
    return s * rho.grid().cell_volume();
}

double relative_energy_expanded(const ScalarField& rho, const VectorField& mom,
                                const ScalarField& r, const VectorField& U,
                                const PressureLaw& law, double eps) {
    if (eps <= 0.0 || eps > 1.0) throw UsageError("relative_energy: eps must be in (0,1]");
    const int d = mom.components();
    const double inv_eps2 = 1.0 / (eps * eps);
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (r[i] <= 0.0)
            throw ReferenceBoundError("reference density not positive at cell " + std::to_string(i));
        double m2 = 0.0, mU = 0.0, U2 = 0.0;
        for (int c = 0; c < d; ++c) {
            m2 += mom.comp(c, i) * mom.comp(c, i);
            mU += mom.comp(c, i) * U.comp(c, i);
            U2 += U.comp(c, i) * U.comp(c, i);
        }
        if (rho[i] > 0.0) {
            s += m2 / (2.0 * rho[i]);
        } else if (m2 != 0.0) {
            throw VacuumError("nonzero momentum on vacuum cell " + std::to_string(i));
        }
        s -= mU;
        s += 0.5 * rho[i] * U2;
        s += inv_eps2 *
             (law.H(rho[i]) - rho[i] * law.dH(r[i]) + (law.dH(r[i]) * r[i] - law.H(r[i])));
    }
    return s * rho.grid().cell_volume();
}

}  // namespace relent
