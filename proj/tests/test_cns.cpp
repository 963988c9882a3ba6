#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "relent/cns.hpp"
#include "relent/diagnostics.hpp"
#include "relent/initial_data.hpp"

using namespace relent;

namespace {

ModelParams basic_params(double mu = 0.1, double eta = 0.0) {
    ModelParams p;
    p.law = PressureLaw(2.0, 1.0);
    p.mu = mu;
    p.eta = eta;
    p.noise = NoiseModel::zero(0);
    return p;
}

double state_l2_diff(const State& a, const State& b) {
    ScalarField dr = a.rho;
    axpy(dr, -1.0, b.rho);
    VectorField dm = a.mom;
    axpy(dm, -1.0, b.mom);
    return std::sqrt(l2_norm(dr) * l2_norm(dr) + l2_norm(dm) * l2_norm(dm));
}

}  // namespace

TEST_CASE("stress divergence of a constant velocity is zero") {
    for (int dim : {1, 2}) {
        Grid g(dim, 16);
        VectorField u(g, 1.3);
        CHECK(max_norm(stress_divergence(u, 1.0, 0.5)) == 0.0);
    }
}

TEST_CASE("1D stress divergence: (4mu/3) u_xx for u = sin(pi x)") {
    Grid g(1, 128);
    VectorField u(g);
    for (int i = 0; i < g.n; ++i) u.comp(0, i) = std::sin(M_PI * g.coord(i));
    VectorField ds = stress_divergence(u, 1.0, 0.0);
    double err = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double exact = -(4.0 / 3.0) * M_PI * M_PI * std::sin(M_PI * g.coord(i));
        err = std::max(err, std::abs(ds.comp(0, i) - exact));
    }
    CHECK(err < 2e-2);  // O(dx^2) at n=128
}

TEST_CASE("2D rigid rotation has no deviatoric stress on the interior band") {
    Grid g(2, 32);
    VectorField u(g);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
            u.comp(0, g.index(ix, iy)) = -g.coord(iy);
            u.comp(1, g.index(ix, iy)) = g.coord(ix);
        }
    VectorField ds = stress_divergence(u, 1.0, 0.7);
    // the wrap seam contaminates two cells on each side; check the interior
    double err = 0.0;
    for (int iy = 3; iy < g.n - 3; ++iy)
        for (int ix = 3; ix < g.n - 3; ++ix)
            for (int c = 0; c < 2; ++c) err = std::max(err, std::abs(ds.comp(c, g.index(ix, iy))));
    CHECK(err <= 1e-13);
}

TEST_CASE("dissipation density is nonnegative") {
    Grid g(2, 16);
    State s = smooth_state(g, 1.0, 0.2, 0.5);
    VectorField u = velocity(s);
    ScalarField d = dissipation_density(u, 0.7, 0.2);
    CHECK(min_value(d) >= 0.0);
}

TEST_CASE("drift is zero at equilibrium and for constant advection") {
    for (int dim : {1, 2}) {
        Grid g(dim, 16);
        ModelParams p = basic_params();
        SUBCASE("equilibrium") {
            State s = equilibrium_state(g, 1.0);
            DriftRhs rhs = drift_rhs(s, p, 1e-8);
            CHECK(max_norm(rhs.drho) == 0.0);
            CHECK(max_norm(rhs.dmom) == 0.0);
        }
        SUBCASE("uniform advection") {
            State s = make_state(ScalarField(g, 1.0),
                                 constant_velocity(g, std::vector<double>(dim, 0.8)));
            DriftRhs rhs = drift_rhs(s, basic_params(0.0, 0.0), 1e-8);
            CHECK(max_norm(rhs.drho) == 0.0);
            CHECK(max_norm(rhs.dmom) == 0.0);
        }
    }
}

TEST_CASE("acoustic linearization of the momentum drift") {
    Grid g(1, 128);
    ModelParams p = basic_params(0.0, 0.0);
    const double amp = 1e-4;
    ScalarField rho(g);
    for (int i = 0; i < g.n; ++i) rho[i] = 1.0 + amp * std::sin(M_PI * g.coord(i));
    State s = make_state(rho, VectorField(g));
    DriftRhs rhs = drift_rhs(s, p, 1e-10);
    double err = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double exact = -p.law.dp(1.0) * amp * M_PI * std::cos(M_PI * g.coord(i));
        err = std::max(err, std::abs(rhs.dmom.comp(0, i) - exact));
    }
    CHECK(err <= 1e-2 * p.law.dp(1.0) * amp * M_PI);
}

TEST_CASE("flux form: both tendencies integrate to zero") {
    for (int dim : {1, 2}) {
        Grid g(dim, 16);
        State s = smooth_state(g, 1.0, 0.3, 0.6);
        DriftRhs rhs = drift_rhs(s, basic_params(0.2, 0.1), 1e-8);
        CHECK(std::abs(integrate(rhs.drho)) <= 1e-12);
        for (int c = 0; c < dim; ++c) {
            ScalarField comp(g);
            auto src = rhs.dmom.comp_span(c);
            for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = src[i];
            CHECK(std::abs(integrate(comp)) <= 1e-11);
        }
    }
}

TEST_CASE("positivity breach carries time and cell index") {
    Grid g(1, 8);
    ScalarField rho(g, 1.0);
    rho[6] = 1e-12;
    State s(0.25, rho, VectorField(g));
    try {
        drift_rhs(s, basic_params(), 1e-8);
        FAIL("expected PositivityError");
    } catch (const PositivityError& e) {
        CHECK(e.cell == 6);
        CHECK(e.t == 0.25);
    }
}

TEST_CASE("model parameter validation") {
    ModelParams p = basic_params();
    CHECK_NOTHROW(p.validate(1));
    p.mu = 0.0;
    CHECK_THROWS_AS(p.validate(1), UsageError);  // unscaled system requires mu > 0
    p.eps = 0.5;
    CHECK_NOTHROW(p.validate(1));  // scaled system accepts mu_eps >= 0
    p.eps = 1.5;
    CHECK_THROWS_AS(p.validate(1), UsageError);
    StepperConfig cfg;
    cfg.cfl = 0.0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
}

TEST_CASE("cfl_dt formula") {
    SUBCASE("pinned evaluation") {
        Grid g(1, 64);  // dx = 1/32
        ModelParams p = basic_params(0.0, 0.0);
        StepperConfig cfg;
        State s = equilibrium_state(g, 1.0);
        CHECK(cfl_dt(s, p, cfg) ==
              doctest::Approx(0.4 * (1.0 / 32.0) / std::sqrt(2.0)).epsilon(1e-14));
    }
    SUBCASE("halving eps halves the acoustic step") {
        Grid g(1, 64);
        ModelParams p = basic_params(0.0, 0.0);
        StepperConfig cfg;
        State s = equilibrium_state(g, 1.0);
        p.eps = 1.0;
        const double dt1 = cfl_dt(s, p, cfg);
        p.eps = 0.5;
        const double dt2 = cfl_dt(s, p, cfg);
        CHECK(dt2 == doctest::Approx(0.5 * dt1).epsilon(1e-12));
    }
    SUBCASE("viscosity-dominated step scales like dx^2") {
        ModelParams p = basic_params(5.0, 0.0);
        StepperConfig cfg;
        std::vector<double> dxs, dts;
        for (int n : {16, 32, 64}) {
            Grid g(1, n);
            State s = equilibrium_state(g, 1.0);
            dxs.push_back(g.dx);
            dts.push_back(cfl_dt(s, p, cfg));
        }
        const double slope = std::log(dts[0] / dts[2]) / std::log(dxs[0] / dxs[2]);
        CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
    }
    SUBCASE("max_dt caps the step") {
        Grid g(1, 64);
        ModelParams p = basic_params(0.0, 0.0);
        StepperConfig cfg;
        cfg.max_dt = 1e-5;
        State s = equilibrium_state(g, 1.0);
        CHECK(cfl_dt(s, p, cfg) == 1e-5);
    }
}

TEST_CASE("em_step keeps an equilibrium fixed") {
    Grid g(1, 32);
    ModelParams p = basic_params();
    StepperConfig cfg;
    State s = equilibrium_state(g, 1.0);
    State next = em_step(s, p, cfg, 1e-3, {});
    CHECK(next.t == doctest::Approx(1e-3));
    for (std::size_t i = 0; i < s.rho.size(); ++i) CHECK(next.rho[i] == s.rho[i]);
    CHECK(max_norm(next.mom) == 0.0);
}

TEST_CASE("deterministic self-convergence in dt is first order") {
    Grid g(1, 32);
    ModelParams p = basic_params();
    StepperConfig cfg;
    State init = smooth_state(g, 1.0, 0.05, 0.05);
    const double t_end = 0.04;
    auto run_at = [&](double dt) {
        WienerPath path(0, 0, dt);
        return run_trajectory(init, p, cfg, path, t_end, 1 << 20).final_state;
    };
    State ref = run_at(2.5e-4);
    const double e1 = state_l2_diff(run_at(4e-3), ref);
    const double e2 = state_l2_diff(run_at(2e-3), ref);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 0.9);
}

TEST_CASE("pathwise strong self-convergence with noise is near first order") {
    Grid g(1, 32);
    ModelParams p = basic_params();
    p.noise = NoiseModel::affine({0.1, 0.05}, {0.0, 0.0});  // momentum-additive
    StepperConfig cfg;
    State init = smooth_state(g, 1.0, 0.05, 0.05);
    const double t_end = 0.032;
    const double dt_ref = 2.5e-4 / 2.0;
    WienerPath base(77, 3, dt_ref);
    auto run_level = [&](int level) {
        return run_trajectory(init, p, cfg, base.coarsened(level), t_end, 1 << 20).final_state;
    };
    State ref = run_level(0);
    const double e1 = state_l2_diff(run_level(5), ref);  // dt = 4e-3
    const double e2 = state_l2_diff(run_level(4), ref);  // dt = 2e-3
    const double order = std::log2(e1 / e2);
    CHECK(order >= 0.7);
    CHECK(order <= 1.1);
}

TEST_CASE("trajectory bookkeeping and conservation") {
    Grid g(1, 64);
    ModelParams p = basic_params();
    p.noise = NoiseModel::affine({0.05, 0.02}, {0.08, 0.03});
    StepperConfig cfg;
    State init = smooth_state(g, 1.0, 0.05, 0.05);
    const double dt = frozen_dt(init, p, cfg, 0.1);
    WienerPath path(11, 0, dt);
    auto res = run_trajectory(init, p, cfg, path, 0.1, 8);

    SUBCASE("mass is conserved at every ledger row") {
        const double m0 = res.ledger.front().mass;
        for (const auto& row : res.ledger) CHECK(std::abs(row.mass - m0) <= 1e-12 * m0);
    }
    SUBCASE("momentum is conserved without noise") {
        ModelParams pd = basic_params();
        auto det = run_trajectory(init, pd, cfg, WienerPath(0, 0, dt), 0.1, 8);
        ScalarField mom0(g), mom1(g);
        for (int i = 0; i < g.n; ++i) {
            mom0[i] = init.mom.comp(0, i);
            mom1[i] = det.final_state.mom.comp(0, i);
        }
        CHECK(std::abs(integrate(mom1) - integrate(mom0)) <= 1e-12 * (1.0 + std::abs(integrate(mom0))));
    }
    SUBCASE("total column is kinetic plus potential") {
        for (const auto& row : res.ledger)
            CHECK(row.total == doctest::Approx(row.kinetic + row.potential).epsilon(1e-15));
    }
    SUBCASE("repeated runs are bitwise identical") {
        auto res2 = run_trajectory(init, p, cfg, path, 0.1, 8);
        CHECK(res2.final_state.rho.data().size() == res.final_state.rho.data().size());
        for (std::size_t i = 0; i < res.final_state.rho.size(); ++i)
            CHECK(res2.final_state.rho[i] == res.final_state.rho[i]);
        for (std::size_t i = 0; i < res.final_state.mom.data().size(); ++i)
            CHECK(res2.final_state.mom.data()[i] == res.final_state.mom.data()[i]);
    }
    SUBCASE("t_end = 0 returns the initial state with one ledger row") {
        auto res0 = run_trajectory(init, p, cfg, path, 0.0, 8);
        CHECK(res0.ledger.size() == 1);
        CHECK(res0.final_state.t == init.t);
    }
}

TEST_CASE("deterministic energy is dissipated up to discretization error") {
    Grid g(1, 64);
    ModelParams p = basic_params();
    StepperConfig cfg;
    State init = smooth_state(g, 1.0, 0.05, 0.05);
    const double dt = frozen_dt(init, p, cfg, 0.2);
    auto res = run_trajectory(init, p, cfg, WienerPath(0, 0, dt), 0.2, 16);
    CHECK(res.ledger.back().total <= res.ledger.front().total + 1e-8);
    // interval residual stays within a loose C (dt + dx^2) t band
    for (std::size_t i = 1; i < res.ledger.size(); ++i) {
        const double t = res.ledger[i].t;
        CHECK(energy_residual(res.ledger, 0, i) <= 20.0 * (dt + g.dx * g.dx) * t);
    }
    CHECK(energy_residual(res.ledger, 2, 2) == 0.0);
}

TEST_CASE("huge noise amplitude fails with a positivity error and a checkpoint") {
    Grid g(1, 32);
    ModelParams p = basic_params();
    p.noise = NoiseModel::affine({50.0}, {0.0});
    StepperConfig cfg;
    State init = smooth_state(g, 1.0, 0.3, 0.1);
    const double dt = frozen_dt(init, p, cfg, 0.5);
    const std::string dir = (std::filesystem::temp_directory_path() / "relent_ckpt_test").string();
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(
        run_trajectory(init, p, cfg, WienerPath(3, 0, dt), 0.5, 4, nullptr, dir),
        Error);
    CHECK(std::filesystem::exists(dir + "/last_good.bin"));
    CHECK(std::filesystem::exists(dir + "/last_good.json"));
}

TEST_CASE("frozen dt beyond the CFL limit raises a stability error") {
    Grid g(1, 32);
    ModelParams p = basic_params();
    StepperConfig cfg;
    State init = smooth_state(g, 1.0, 0.05, 0.05);
    const double dt = 50.0 * cfl_dt(init, p, cfg);
    CHECK_THROWS_AS(run_trajectory(init, p, cfg, WienerPath(0, 0, dt), dt * 4, 1), StabilityError);
}

TEST_CASE("semi-implicit viscous treatment") {
    Grid g(1, 32);
    ModelParams p = basic_params(0.5, 0.1);
    StepperConfig expl, semi;
    semi.viscous_treatment = StepperConfig::Viscous::semi_implicit;
    State init = smooth_state(g, 1.0, 0.05, 0.05);

    SUBCASE("equilibrium is preserved") {
        State s = equilibrium_state(g, 1.0);
        State next = em_step(s, p, semi, 1e-3, {});
        for (std::size_t i = 0; i < s.rho.size(); ++i) CHECK(next.rho[i] == s.rho[i]);
        CHECK(max_norm(next.mom) <= 1e-14);
    }
    SUBCASE("agrees with the explicit step to O(dt^2) per step") {
        const double dt1 = 1e-5, dt2 = 5e-6;
        const double d1 = state_l2_diff(em_step(init, p, expl, dt1, {}),
                                        em_step(init, p, semi, dt1, {}));
        const double d2 = state_l2_diff(em_step(init, p, expl, dt2, {}),
                                        em_step(init, p, semi, dt2, {}));
        CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.2));  // O(dt^2) gap
    }
    SUBCASE("runs stably beyond the explicit viscous limit") {
        const double dt_explicit = cfl_dt(init, p, expl);
        const double dt_semi = cfl_dt(init, p, semi);
        CHECK(dt_semi > dt_explicit);  // the dx^2 constraint is dropped
        const double t_end = 16 * dt_semi;
        auto res =
            run_trajectory(init, p, semi, WienerPath(0, 0, dt_semi), t_end, 4);
        CHECK(all_finite(res.final_state.rho));
        CHECK(res.ledger.back().total <= res.ledger.front().total + 1e-8);
    }
}
