// relent: command-line driver for the stochastic compressible-flow laboratory.
//
//   relent energy|twin|eps-sweep|ito-check|coercivity --config <file>
//          [--jobs N] [--seed S] [--out DIR]
//
// RELENT_SEED overrides the config seed; --seed overrides both.
// Exit codes: 0 pass, 1 usage/config error, 2 inequality verdict failed,
// 3 numerical failure (positivity breach, divergence, stability).

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "relent/dispatch.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw relent::ConfigError("cannot open config file " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

relent::ExperimentPlan::Kind kind_of(const std::string& cmd) {
    using Kind = relent::ExperimentPlan::Kind;
    if (cmd == "energy") return Kind::energy;
    if (cmd == "twin") return Kind::twin;
    if (cmd == "eps-sweep") return Kind::eps_sweep;
    if (cmd == "ito-check") return Kind::ito_check;
    return Kind::coercivity;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relative-energy laboratory for stochastic compressible flow"};
    app.require_subcommand(1);

    std::string config_path;
    int jobs = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;

    const std::vector<std::string> commands = {"energy", "twin", "eps-sweep", "ito-check",
                                               "coercivity"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--jobs", jobs, "worker pool size (ensemble members)");
        sub->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--out", out_dir, "output directory override");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        relent::RunConfig cfg = relent::parse_config(read_file(config_path));
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (kind_of(cmd) != cfg.plan.kind)
            throw relent::ConfigError("config: experiment.kind does not match the subcommand " +
                                      cmd);
        if (const char* env = std::getenv("RELENT_SEED")) cfg.plan.seed = std::strtoull(env, nullptr, 10);
        if (seed_set) cfg.plan.seed = seed;
        if (jobs > 0) cfg.plan.jobs = jobs;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        return relent::dispatch(cfg, std::cout);
    } catch (const relent::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const relent::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const relent::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
