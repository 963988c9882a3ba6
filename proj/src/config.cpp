#include "relent/config.hpp"

#include <json.hpp>

namespace relent {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                ok = true;
                break;
            }
        if (!ok) {
            const std::string path = section.empty() ? it.key() : section + "." + it.key();
            throw ConfigError("config: unknown key \"" + path + "\"");
        }
    }
}

template <typename T>
T get_or(const json& j, const std::string& section, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value type for \"" + section + "." + key + "\"");
    }
}

std::vector<double> get_doubles(const json& j, const std::string& section, const char* key,
                                std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<std::vector<double>>();
    } catch (const json::exception&) {
        throw ConfigError("config: \"" + section + "." + key + "\" must be an array of numbers");
    }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(root, "",
               {"experiment", "grid", "params", "stepper", "noise", "init", "twin", "sweep",
                "ito", "coercivity", "verdict", "output_dir", "jobs", "ledger_every"});

    RunConfig cfg;

    // experiment
    const json exp = root.value("experiment", json::object());
    check_keys(exp, "experiment",
               {"kind", "n_members", "seed", "t_end", "eps_list", "mu_rule", "mu_custom",
                "resolutions"});
    const std::string kind = get_or<std::string>(exp, "experiment", "kind", "energy");
    if (kind == "energy")
        cfg.plan.kind = ExperimentPlan::Kind::energy;
    else if (kind == "twin")
        cfg.plan.kind = ExperimentPlan::Kind::twin;
    else if (kind == "eps_sweep")
        cfg.plan.kind = ExperimentPlan::Kind::eps_sweep;
    else if (kind == "ito_check")
        cfg.plan.kind = ExperimentPlan::Kind::ito_check;
    else if (kind == "coercivity")
        cfg.plan.kind = ExperimentPlan::Kind::coercivity;
    else
        throw ConfigError("config: experiment.kind must be one of energy|twin|eps_sweep|"
                          "ito_check|coercivity");
    cfg.plan.n_members = get_or<int>(exp, "experiment", "n_members", 1);
    cfg.plan.seed = get_or<std::uint64_t>(exp, "experiment", "seed", 0);
    cfg.plan.t_end = get_or<double>(exp, "experiment", "t_end", 0.5);
    cfg.plan.eps_list = get_doubles(exp, "experiment", "eps_list", {});
    const std::string mu_rule = get_or<std::string>(exp, "experiment", "mu_rule", "mu=eps");
    if (mu_rule == "mu=eps")
        cfg.plan.mu_rule = ExperimentPlan::MuRule::mu_eq_eps;
    else if (mu_rule == "mu=eps^2")
        cfg.plan.mu_rule = ExperimentPlan::MuRule::mu_eq_eps_sq;
    else if (mu_rule == "custom")
        cfg.plan.mu_rule = ExperimentPlan::MuRule::custom;
    else
        throw ConfigError("config: experiment.mu_rule must be mu=eps, mu=eps^2 or custom");
    cfg.plan.mu_custom = get_doubles(exp, "experiment", "mu_custom", {});
    if (exp.contains("resolutions")) {
        try {
            cfg.plan.resolutions = exp.at("resolutions").get<std::vector<int>>();
        } catch (const json::exception&) {
            throw ConfigError("config: experiment.resolutions must be an array of integers");
        }
    }

    // grid
    const json grid = root.value("grid", json::object());
    check_keys(grid, "grid", {"dim", "n", "length"});
    const int dim = get_or<int>(grid, "grid", "dim", 1);
    const int n = get_or<int>(grid, "grid", "n", 128);
    const double length = get_or<double>(grid, "grid", "length", 2.0);
    try {
        cfg.grid = Grid(dim, n, length);
    } catch (const UsageError& e) {
        throw ConfigError(std::string("config: grid: ") + e.what());
    }

    // params
    const json par = root.value("params", json::object());
    check_keys(par, "params", {"gamma", "a", "relax_gamma", "mu", "eta", "eps"});
    const double gamma = get_or<double>(par, "params", "gamma", 2.0);
    const double a = get_or<double>(par, "params", "a", 1.0);
    const bool relax = get_or<bool>(par, "params", "relax_gamma", false);
    if (!relax && gamma <= 1.5)
        throw ConfigError("config: params.gamma violates gamma > 3/2 (set params.relax_gamma "
                          "for 1D/2D experiments with smaller gamma)");
    try {
        cfg.params.law = PressureLaw(gamma, a, relax);
    } catch (const UsageError& e) {
        throw ConfigError(std::string("config: params: ") + e.what());
    }
    cfg.params.mu = get_or<double>(par, "params", "mu", 0.1);
    cfg.params.eta = get_or<double>(par, "params", "eta", 0.0);
    cfg.params.eps = get_or<double>(par, "params", "eps", 1.0);

    // stepper
    const json stp = root.value("stepper", json::object());
    check_keys(stp, "stepper", {"cfl", "rho_floor", "max_dt", "viscous"});
    cfg.stepper.cfl = get_or<double>(stp, "stepper", "cfl", 0.4);
    cfg.stepper.rho_floor = get_or<double>(stp, "stepper", "rho_floor", 1e-8);
    cfg.stepper.max_dt = get_or<double>(stp, "stepper", "max_dt",
                                        std::numeric_limits<double>::infinity());
    const std::string visc = get_or<std::string>(stp, "stepper", "viscous", "explicit");
    if (visc == "explicit")
        cfg.stepper.viscous_treatment = StepperConfig::Viscous::explicit_step;
    else if (visc == "semi_implicit")
        cfg.stepper.viscous_treatment = StepperConfig::Viscous::semi_implicit;
    else
        throw ConfigError("config: stepper.viscous must be explicit or semi_implicit");
    try {
        cfg.stepper.validate();
    } catch (const UsageError& e) {
        throw ConfigError(std::string("config: stepper: ") + e.what());
    }

    // noise
    const json noi = root.value("noise", json::object());
    check_keys(noi, "noise", {"K", "F", "H", "form", "tail_budget"});
    const int K = get_or<int>(noi, "noise", "K", 8);
    if (K < 0) throw ConfigError("config: noise.K must be nonnegative");
    const std::string form = get_or<std::string>(noi, "noise", "form", "affine");
    if (form != "affine")
        throw ConfigError("config: noise.form: only the affine form is configurable");
    cfg.params.noise = NoiseModel::zero(K);
    auto F = get_doubles(noi, "noise", "F", cfg.params.noise.F);
    auto H = get_doubles(noi, "noise", "H", cfg.params.noise.Hc);
    if (static_cast<int>(F.size()) != K)
        throw ConfigError("config: noise.F must have noise.K entries");
    if (static_cast<int>(H.size()) != K)
        throw ConfigError("config: noise.H must have noise.K entries");
    cfg.params.noise.F = std::move(F);
    cfg.params.noise.Hc = std::move(H);
    cfg.params.noise.tail_budget = get_or<double>(noi, "noise", "tail_budget", 0.0);

    // init
    const json ini = root.value("init", json::object());
    check_keys(ini, "init", {"kind", "rho0", "amp_rho", "amp_u", "mode"});
    const std::string ikind = get_or<std::string>(ini, "init", "kind", "smooth");
    if (ikind == "equilibrium")
        cfg.init.kind = RunConfig::Init::Kind::equilibrium;
    else if (ikind == "smooth")
        cfg.init.kind = RunConfig::Init::Kind::smooth;
    else if (ikind == "well_prepared")
        cfg.init.kind = RunConfig::Init::Kind::well_prepared;
    else
        throw ConfigError("config: init.kind must be equilibrium, smooth or well_prepared");
    cfg.init.rho0 = get_or<double>(ini, "init", "rho0", 1.0);
    cfg.init.amp_rho = get_or<double>(ini, "init", "amp_rho", 0.02);
    cfg.init.amp_u = get_or<double>(ini, "init", "amp_u", 0.02);
    cfg.init.mode = get_or<int>(ini, "init", "mode", 1);
    if (cfg.init.rho0 <= 0.0) throw ConfigError("config: init.rho0 must be positive");

    // twin
    const json twin = root.value("twin", json::object());
    check_keys(twin, "twin",
               {"variant", "perturb_energy", "refine_factor", "decouple", "fixed_c",
                "envelope_margin"});
    const std::string variant = get_or<std::string>(twin, "twin", "variant", "identical");
    if (variant == "identical")
        cfg.twin.variant = TwinSpec::Variant::identical;
    else if (variant == "perturbed")
        cfg.twin.variant = TwinSpec::Variant::perturbed;
    else if (variant == "refined")
        cfg.twin.variant = TwinSpec::Variant::refined;
    else
        throw ConfigError("config: twin.variant must be identical, perturbed or refined");
    cfg.twin.perturb_energy = get_or<double>(twin, "twin", "perturb_energy", 0.0);
    cfg.twin.refine_factor = get_or<int>(twin, "twin", "refine_factor", 3);
    cfg.twin.decouple = get_or<bool>(twin, "twin", "decouple", false);
    cfg.twin.fixed_c = get_or<double>(twin, "twin", "fixed_c", -1.0);
    cfg.twin.envelope_margin = get_or<double>(twin, "twin", "envelope_margin", 1.2);
    if (cfg.twin.refine_factor < 1 || cfg.twin.refine_factor % 2 == 0)
        throw ConfigError("config: twin.refine_factor must be odd and >= 1");

    // sweep
    const json sweep = root.value("sweep", json::object());
    check_keys(sweep, "sweep",
               {"delta_over_eps", "v0", "v0_taylor_green", "grad_bound", "rows",
                "target_fraction"});
    cfg.sweep.delta_over_eps = get_or<double>(sweep, "sweep", "delta_over_eps", 1.0);
    cfg.sweep.v0_value = get_doubles(sweep, "sweep", "v0", {});
    cfg.sweep.v0_taylor_green = get_or<double>(sweep, "sweep", "v0_taylor_green", 0.0);
    cfg.sweep.grad_bound = get_or<double>(sweep, "sweep", "grad_bound", 1e6);
    cfg.sweep.rows = get_or<int>(sweep, "sweep", "rows", 64);
    cfg.sweep.target_fraction = get_or<double>(sweep, "sweep", "target_fraction", 0.25);

    // ito
    const json ito = root.value("ito", json::object());
    check_keys(ito, "ito", {"dt_list", "t_end", "grid_n"});
    cfg.ito.dt_list = get_doubles(ito, "ito", "dt_list", cfg.ito.dt_list);
    cfg.ito.t_end = get_or<double>(ito, "ito", "t_end", 1.0);
    cfg.ito.grid_n = get_or<int>(ito, "ito", "grid_n", 8);

    // coercivity
    const json coer = root.value("coercivity", json::object());
    check_keys(coer, "coercivity", {"deltas"});
    cfg.coercivity.deltas = get_doubles(coer, "coercivity", "deltas", cfg.coercivity.deltas);

    // verdict knobs
    const json verdict = root.value("verdict", json::object());
    check_keys(verdict, "verdict", {"budget_constant"});
    cfg.budget_constant = get_or<double>(verdict, "verdict", "budget_constant", 5.0);

    cfg.output_dir = get_or<std::string>(root, "", "output_dir", std::string("out"));
    cfg.plan.jobs = get_or<int>(root, "", "jobs", 1);
    cfg.plan.ledger_every = get_or<int>(root, "", "ledger_every", 1);

    try {
        cfg.plan.validate();
        cfg.params.validate(cfg.grid.dim);
    } catch (const UsageError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

std::string emit_config(const RunConfig& cfg) {
    json root;
    json exp;
    switch (cfg.plan.kind) {
        case ExperimentPlan::Kind::energy: exp["kind"] = "energy"; break;
        case ExperimentPlan::Kind::twin: exp["kind"] = "twin"; break;
        case ExperimentPlan::Kind::eps_sweep: exp["kind"] = "eps_sweep"; break;
        case ExperimentPlan::Kind::ito_check: exp["kind"] = "ito_check"; break;
        case ExperimentPlan::Kind::coercivity: exp["kind"] = "coercivity"; break;
    }
    exp["n_members"] = cfg.plan.n_members;
    exp["seed"] = cfg.plan.seed;
    exp["t_end"] = cfg.plan.t_end;
    exp["eps_list"] = cfg.plan.eps_list;
    switch (cfg.plan.mu_rule) {
        case ExperimentPlan::MuRule::mu_eq_eps: exp["mu_rule"] = "mu=eps"; break;
        case ExperimentPlan::MuRule::mu_eq_eps_sq: exp["mu_rule"] = "mu=eps^2"; break;
        case ExperimentPlan::MuRule::custom: exp["mu_rule"] = "custom"; break;
    }
    exp["mu_custom"] = cfg.plan.mu_custom;
    exp["resolutions"] = cfg.plan.resolutions;
    root["experiment"] = exp;

    root["grid"] = {{"dim", cfg.grid.dim}, {"n", cfg.grid.n}, {"length", cfg.grid.length}};
    root["params"] = {{"gamma", cfg.params.law.gamma}, {"a", cfg.params.law.a},
                      {"relax_gamma", cfg.params.law.relax_gamma}, {"mu", cfg.params.mu},
                      {"eta", cfg.params.eta}, {"eps", cfg.params.eps}};
    json stp = {{"cfl", cfg.stepper.cfl}, {"rho_floor", cfg.stepper.rho_floor}};
    if (std::isfinite(cfg.stepper.max_dt)) stp["max_dt"] = cfg.stepper.max_dt;
    stp["viscous"] = cfg.stepper.viscous_treatment == StepperConfig::Viscous::explicit_step
                         ? "explicit"
                         : "semi_implicit";
    root["stepper"] = stp;
    root["noise"] = {{"K", cfg.params.noise.K}, {"F", cfg.params.noise.F},
                     {"H", cfg.params.noise.Hc}, {"form", "affine"},
                     {"tail_budget", cfg.params.noise.tail_budget}};
    json ini;
    switch (cfg.init.kind) {
        case RunConfig::Init::Kind::equilibrium: ini["kind"] = "equilibrium"; break;
        case RunConfig::Init::Kind::smooth: ini["kind"] = "smooth"; break;
        case RunConfig::Init::Kind::well_prepared: ini["kind"] = "well_prepared"; break;
    }
    ini["rho0"] = cfg.init.rho0;
    ini["amp_rho"] = cfg.init.amp_rho;
    ini["amp_u"] = cfg.init.amp_u;
    ini["mode"] = cfg.init.mode;
    root["init"] = ini;

    json twin;
    switch (cfg.twin.variant) {
        case TwinSpec::Variant::identical: twin["variant"] = "identical"; break;
        case TwinSpec::Variant::perturbed: twin["variant"] = "perturbed"; break;
        case TwinSpec::Variant::refined: twin["variant"] = "refined"; break;
    }
    twin["perturb_energy"] = cfg.twin.perturb_energy;
    twin["refine_factor"] = cfg.twin.refine_factor;
    twin["decouple"] = cfg.twin.decouple;
    twin["fixed_c"] = cfg.twin.fixed_c;
    twin["envelope_margin"] = cfg.twin.envelope_margin;
    root["twin"] = twin;

    root["sweep"] = {{"delta_over_eps", cfg.sweep.delta_over_eps}, {"v0", cfg.sweep.v0_value},
                     {"v0_taylor_green", cfg.sweep.v0_taylor_green},
                     {"grad_bound", cfg.sweep.grad_bound}, {"rows", cfg.sweep.rows},
                     {"target_fraction", cfg.sweep.target_fraction}};
    root["ito"] = {{"dt_list", cfg.ito.dt_list}, {"t_end", cfg.ito.t_end},
                   {"grid_n", cfg.ito.grid_n}};
    root["coercivity"] = {{"deltas", cfg.coercivity.deltas}};
    root["verdict"] = {{"budget_constant", cfg.budget_constant}};
    root["output_dir"] = cfg.output_dir;
    root["jobs"] = cfg.plan.jobs;
    root["ledger_every"] = cfg.plan.ledger_every;
    return root.dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string text = emit_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

InitGen make_init_gen(const RunConfig& cfg) {
    const RunConfig::Init init = cfg.init;
    const double eps = cfg.params.eps;
    const double delta = cfg.sweep.delta_over_eps * eps;
    switch (init.kind) {
        case RunConfig::Init::Kind::equilibrium:
            return [init](const Grid& g) { return equilibrium_state(g, init.rho0); };
        case RunConfig::Init::Kind::smooth:
            return [init](const Grid& g) {
                return smooth_state(g, init.rho0, init.amp_rho, init.amp_u, init.mode);
            };
        case RunConfig::Init::Kind::well_prepared: {
            const auto sweep = cfg.sweep;
            return [sweep, eps, delta](const Grid& g) {
                VectorField v0 =
                    sweep.v0_value.empty() ? VectorField(g) : constant_velocity(g, sweep.v0_value);
                if (sweep.v0_taylor_green != 0.0)
                    axpy(v0, 1.0, taylor_green(g, sweep.v0_taylor_green));
                return well_prepared_state(g, eps, delta, v0);
            };
        }
    }
    throw ConfigError("config: unknown init kind");
}

}  // namespace relent
