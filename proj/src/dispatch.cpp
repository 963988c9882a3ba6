#include "relent/dispatch.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace relent {

namespace {

namespace fs = std::filesystem;

std::string kind_name(ExperimentPlan::Kind kind) {
    switch (kind) {
        case ExperimentPlan::Kind::energy: return "energy";
        case ExperimentPlan::Kind::twin: return "twin";
        case ExperimentPlan::Kind::eps_sweep: return "eps-sweep";
        case ExperimentPlan::Kind::ito_check: return "ito-check";
        case ExperimentPlan::Kind::coercivity: return "coercivity";
    }
    return "unknown";
}

std::string member_name(int m) {
    std::ostringstream s;
    s << "member_" << std::setw(4) << std::setfill('0') << m << ".csv";
    return s.str();
}

std::string fmt(double x) {
    std::ostringstream s;
    s << std::setprecision(4) << std::scientific << x;
    return s.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << text;
}

void verdict_line(std::ostream& out, const std::string& name, bool ok, const std::string& info) {
    out << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << info << "\n";
}

int stats_mean_column(const EnsembleStats& stats, const std::string& name) {
    // 1-based gnuplot column of <name>_mean in stats.csv (t first, then triples)
    return 2 + 3 * stats.column_index(name);
}

void write_members_and_stats(const std::string& dir, const std::vector<EnergyLedger>& ledgers,
                             const EnsembleStats& stats) {
    for (std::size_t m = 0; m < ledgers.size(); ++m)
        write_ledger_csv(dir + "/" + member_name(static_cast<int>(m)), ledgers[m]);
    write_stats_csv(dir + "/stats.csv", stats);
}

}  // namespace

std::string run_directory(const RunConfig& cfg) {
    std::ostringstream s;
    s << cfg.output_dir << "/" << kind_name(cfg.plan.kind) << "-" << std::hex << std::setw(16)
      << std::setfill('0') << config_hash(cfg);
    return s.str();
}

int dispatch(const RunConfig& cfg, std::ostream& out) {
    const std::string dir = run_directory(cfg);
    fs::create_directories(dir);
    write_text(dir + "/run.json", emit_config(cfg) + "\n");
    {
        // run metadata: noise truncation bookkeeping and the ledger layout
        std::ostringstream meta;
        meta.precision(17);
        meta << "{\n  \"noise_alpha_sum\": " << cfg.params.noise.alpha_sum()
             << ",\n  \"noise_tail_budget\": " << cfg.params.noise.tail_budget
             << ",\n  \"ledger_columns\": [";
        const auto& names = LedgerRow::column_names();
        for (std::size_t i = 0; i < names.size(); ++i)
            meta << (i ? ", " : "") << '"' << names[i] << '"';
        meta << "]\n}\n";
        write_text(dir + "/metadata.json", meta.str());
    }

    bool pass = true;
    std::ostringstream plot;
    plot << "# gnuplot script generated by relent\nset datafile separator ','\nset key left\n";

    switch (cfg.plan.kind) {
        case ExperimentPlan::Kind::energy: {
            if (!cfg.plan.resolutions.empty() && cfg.params.noise.silent()) {
                // deterministic residual fit across the configured resolutions
                auto fit = run_resolution_fit(cfg.plan, cfg.params, cfg.stepper,
                                              make_init_gen(cfg), cfg.plan.t_end);
                const bool fit_ok = fit.order >= 1.8;
                verdict_line(out, "residual resolution fit", fit_ok,
                             "order " + fmt(fit.order) + " in dx (need >= 1.8), fitted C " +
                                 fmt(fit.fitted_c));
                pass = pass && fit_ok;
            }
            auto res = run_energy(cfg.plan, cfg.grid, cfg.params, cfg.stepper, make_init_gen(cfg),
                                  cfg.budget_constant, dir);
            write_members_and_stats(dir, res.ledgers, res.stats);
            verdict_line(out, "mass conservation", res.mass_ok,
                         "max relative drift " + fmt(res.max_mass_drift) +
                             " (tol 1e-12)");
            verdict_line(out, "energy inequality residual", res.residual_ok,
                         "budget C=" + fmt(res.budget_constant) + ", dt=" +
                             fmt(res.dt));
            // the martingale estimate is statistical: a 3-sigma exceedance is
            // flagged as inconclusive, not failed
            if (res.martingale.verdict) {
                out << "[PASS] energy martingale: "
                    << (cfg.params.noise.silent() ? "noise off (trivial)"
                                                  : "|mean| within 3 sigma/sqrt(N) at all rows")
                    << "\n";
            } else {
                out << "[FLAG] energy martingale: 3 sigma/sqrt(N) exceeded at some row "
                       "(inconclusive within noise; rerun with more members)\n";
            }
            pass = pass && res.mass_ok && res.residual_ok;
            plot << "set title 'total energy (ensemble mean)'\n"
                 << "plot 'stats.csv' using 1:" << stats_mean_column(res.stats, "total")
                 << " with lines title 'E(t)', 'stats.csv' using 1:"
                 << stats_mean_column(res.stats, "energy_residual")
                 << " with lines title 'residual'\n";
            break;
        }
        case ExperimentPlan::Kind::twin: {
            auto res = run_twin(cfg.plan, cfg.grid, cfg.params, cfg.stepper, make_init_gen(cfg),
                                cfg.twin);
            write_members_and_stats(dir, res.ledgers, res.stats);
            if (cfg.twin.variant == TwinSpec::Variant::identical) {
                verdict_line(out, "twin coincidence", res.coupled,
                             "max rel_energy " + fmt(res.max_rel_energy) +
                                 (cfg.twin.decouple ? " (decoupled control: expected not coupled)"
                                                    : " (tol 1e-10)"));
                pass = cfg.twin.decouple ? !res.coupled : res.coupled;
            } else {
                verdict_line(out, "gronwall envelope", res.envelope_ok,
                             "E0=" + fmt(res.initial_rel_energy) + ", fitted c=" +
                                 fmt(res.fitted_c) + ", M=" +
                                 fmt(res.grad_bound));
                pass = res.envelope_ok;
            }
            plot << "set title 'relative energy vs strong twin'\nset logscale y\n"
                 << "plot 'stats.csv' using 1:" << stats_mean_column(res.stats, "rel_energy")
                 << " with lines title 'mean relE'\n";
            break;
        }
        case ExperimentPlan::Kind::eps_sweep: {
            auto res = run_eps_sweep(cfg.plan, cfg.grid, cfg.params.law, cfg.params.noise,
                                     cfg.stepper, cfg.sweep);
            std::ofstream table(dir + "/sweep.csv");
            table.precision(17);
            table << "eps,mu_eps,sup_relE_mean,sup_relE_ci,tau_M_triggered,n_members\n";
            for (const auto& row : res.rows)
                table << row.eps << "," << row.mu_eps << "," << row.sup_relE_mean << ","
                      << row.sup_relE_ci << "," << (row.tau_triggered ? 1 : 0) << ","
                      << row.n_members << "\n";
            verdict_line(out, "sweep monotone within CI", res.monotone_within_ci,
                         std::to_string(res.rows.size()) + " eps points");
            verdict_line(out, "final below target", res.final_below_target,
                         "last/first = " +
                             fmt(res.rows.back().sup_relE_mean /
                                            res.rows.front().sup_relE_mean) +
                             " (target " + fmt(cfg.sweep.target_fraction) + ")");
            pass = res.monotone_within_ci && res.final_below_target;
            plot << "set title 'inviscid-incompressible limit'\nset logscale xy\n"
                 << "plot 'sweep.csv' using 1:3 with linespoints title 'sup relE'\n";
            break;
        }
        case ExperimentPlan::Kind::ito_check: {
            auto res = run_ito_check(cfg.plan, cfg.ito);
            std::ofstream table(dir + "/ito.csv");
            table.precision(17);
            table << "dt,mean_residual,ci\n";
            for (std::size_t i = 0; i < res.dt_list.size(); ++i)
                table << res.dt_list[i] << "," << res.mean_residual[i] << "," << res.ci[i] << "\n";
            const bool ok = res.order >= 0.8;
            verdict_line(out, "product-rule residual order", ok,
                         "observed order " + fmt(res.order) + " (need >= 0.8)");
            pass = ok;
            plot << "set title 'product-rule residual refinement'\nset logscale xy\n"
                 << "plot 'ito.csv' using 1:(abs($2)) with linespoints title '|mean residual|'\n";
            break;
        }
        case ExperimentPlan::Kind::coercivity: {
            auto res = run_coercivity(cfg.params.law, cfg.coercivity);
            std::ofstream table(dir + "/coercivity.csv");
            table.precision(17);
            table << "delta,quadratic_band,residual_gamma\n";
            for (const auto& row : res.rows)
                table << row.delta << "," << row.quadratic_band << "," << row.residual_gamma
                      << "\n";
            verdict_line(out, "coercivity constants positive", res.all_positive,
                         std::to_string(res.rows.size()) + " delta values");
            pass = res.all_positive;
            plot << "set title 'coercivity constants'\nset logscale x\n"
                 << "plot 'coercivity.csv' using 1:2 with linespoints title 'quadratic band', "
                    "'coercivity.csv' using 1:3 with linespoints title 'residual gamma'\n";
            break;
        }
    }

    write_text(dir + "/plots.gp", plot.str());
    out << (pass ? "RESULT: PASS" : "RESULT: FAIL") << " (" << dir << ")\n";
    return pass ? 0 : 2;
}

}  // namespace relent
