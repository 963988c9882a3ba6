#include "relent/ledger.hpp"

#include <cmath>
#include <fstream>

namespace relent {

const std::array<const char*, LedgerRow::column_count>& LedgerRow::column_names() {
    static const std::array<const char*, column_count> names = {
        "t",           "mass",          "kinetic",       "potential", "total",
        "dissipation_cum", "ito_cum",   "stoch_cum",     "rel_energy", "remainder_cum",
        "rel_diss_cum", "m1a",          "m1b",           "m2",        "m3",
        "m4",          "mre_sum",       "energy_residual", "rei_residual"};
    return names;
}

std::array<double, LedgerRow::column_count> LedgerRow::values() const {
    return {t,   mass, kinetic, potential, total, dissipation_cum, ito_cum, stoch_cum,
            rel_energy, remainder_cum, rel_diss_cum, m1a, m1b, m2, m3, m4, mre_sum,
            energy_residual, rei_residual};
}

double energy_residual(const EnergyLedger& ledger, std::size_t s_idx, std::size_t t_idx) {
    if (s_idx > t_idx || t_idx >= ledger.size())
        throw UsageError("energy_residual: need s_idx <= t_idx < ledger size");
    const LedgerRow& s = ledger[s_idx];
    const LedgerRow& t = ledger[t_idx];
    return (t.total - s.total) + (t.dissipation_cum - s.dissipation_cum) -
           (t.ito_cum - s.ito_cum) - (t.stoch_cum - s.stoch_cum);
}

double rei_residual(const EnergyLedger& ledger, std::size_t s_idx, std::size_t t_idx) {
    if (s_idx > t_idx || t_idx >= ledger.size())
        throw UsageError("rei_residual: need s_idx <= t_idx < ledger size");
    const LedgerRow& s = ledger[s_idx];
    const LedgerRow& t = ledger[t_idx];
    if (std::isnan(s.rel_energy) || std::isnan(t.rel_energy) || std::isnan(t.remainder_cum))
        throw UsageError("rei_residual: relative-energy columns not populated");
    return (t.rel_energy - s.rel_energy) + (t.rel_diss_cum - s.rel_diss_cum) -
           (t.remainder_cum - s.remainder_cum) - (t.mre_sum - s.mre_sum);
}

int EnsembleStats::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw UsageError("ensemble stats: unknown column " + name);
}

EnsembleStats reduce_stats(const std::vector<EnergyLedger>& ledgers) {
    if (ledgers.empty()) throw ReductionError("reduce_stats: no ledgers");
    const std::size_t rows = ledgers.front().size();
    for (const auto& led : ledgers) {
        if (led.size() != rows) throw ReductionError("reduce_stats: ledger lengths differ");
        for (std::size_t i = 0; i < rows; ++i)
            if (led[i].t != ledgers.front()[i].t)
                throw ReductionError("reduce_stats: time grids misaligned at row " +
                                     std::to_string(i));
    }
    const int n = static_cast<int>(ledgers.size());
    EnsembleStats stats;
    stats.n_members = n;
    stats.times.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) stats.times[i] = ledgers.front()[i].t;
    const auto& names = LedgerRow::column_names();
    stats.columns.assign(names.begin(), names.end());
    const int cols = LedgerRow::column_count;
    stats.mean.assign(cols, std::vector<double>(rows, 0.0));
    stats.stddev.assign(cols, std::vector<double>(rows, 0.0));
    stats.ci.assign(cols, std::vector<double>(rows, 0.0));
    for (std::size_t i = 0; i < rows; ++i) {
        for (int c = 0; c < cols; ++c) {
            double sum = 0.0;
            for (const auto& led : ledgers) sum += led[i].values()[c];
            const double mean = sum / n;
            double var = 0.0;
            for (const auto& led : ledgers) {
                const double d = led[i].values()[c] - mean;
                var += d * d;
            }
            var = n > 1 ? var / (n - 1) : 0.0;
            stats.mean[c][i] = mean;
            stats.stddev[c][i] = std::sqrt(var);
            stats.ci[c][i] = 3.0 * stats.stddev[c][i] / std::sqrt(static_cast<double>(n));
        }
    }
    return stats;
}

void write_ledger_csv(const std::string& path, const EnergyLedger& ledger) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out.precision(17);
    const auto& names = LedgerRow::column_names();
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
    out << "\n";
    for (const auto& row : ledger) {
        const auto vals = row.values();
        for (std::size_t c = 0; c < vals.size(); ++c) out << (c ? "," : "") << vals[c];
        out << "\n";
    }
}

void write_stats_csv(const std::string& path, const EnsembleStats& stats) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out.precision(17);
    out << "t";
    for (const auto& col : stats.columns)
        out << "," << col << "_mean," << col << "_std," << col << "_ci";
    out << "\n";
    for (std::size_t i = 0; i < stats.times.size(); ++i) {
        out << stats.times[i];
        for (std::size_t c = 0; c < stats.columns.size(); ++c)
            out << "," << stats.mean[c][i] << "," << stats.stddev[c][i] << "," << stats.ci[c][i];
        out << "\n";
    }
}

}  // namespace relent
