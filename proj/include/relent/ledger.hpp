#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "relent/errors.hpp"

namespace relent {

/// One diagnostics record along a trajectory. Cumulative columns integrate
/// from t = 0; reference-dependent columns are NaN when no reference process
/// is coupled.
struct LedgerRow {
    double t = 0.0;
    double mass = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double total = 0.0;
    double dissipation_cum = 0.0;  // int int S(grad u):grad u
    double ito_cum = 0.0;          // int (1/2) sum |G_k|^2/rho
    double stoch_cum = 0.0;        // int u . G dW  (the M_E sample)
    double rel_energy = NAN;
    double remainder_cum = NAN;
    double rel_diss_cum = NAN;  // int (S(grad u)-S(grad U)):(grad u - grad U)
    double m1a = NAN;           // int U . G dW
    double m1b = NAN;           // int rho u . D^s U dW
    double m2 = NAN;            // int rho U . D^s U dW
    double m3 = NAN;            // int p'(r) D^s r dW
    double m4 = NAN;            // int rho H''(r) D^s r dW
    double mre_sum = NAN;       // M_E - M1a - M1b + M2 + M3 - M4
    double energy_residual = 0.0;  // interval residual from row 0
    double rei_residual = NAN;

    static constexpr int column_count = 19;
    static const std::array<const char*, column_count>& column_names();
    std::array<double, column_count> values() const;
};

using EnergyLedger = std::vector<LedgerRow>;

/// [E(t) - E(s)] + dissipation(s,t) - ito(s,t) - stoch(s,t); the energy
/// inequality predicts <= 0 pathwise up to discretization error.
double energy_residual(const EnergyLedger& ledger, std::size_t s_idx, std::size_t t_idx);

/// [relE(t) - relE(s)] + rel_diss(s,t) - remainder(s,t) - M_RE(s,t).
double rei_residual(const EnergyLedger& ledger, std::size_t s_idx, std::size_t t_idx);

/// Monte Carlo aggregates of every ledger column on a shared time grid;
/// ci = 3 std / sqrt(n) (3-sigma convention).
struct EnsembleStats {
    int n_members = 0;
    std::vector<double> times;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> mean;  // [column][time]
    std::vector<std::vector<double>> stddev;
    std::vector<std::vector<double>> ci;

    int column_index(const std::string& name) const;
};

/// Reduction over members; all ledgers must share the time grid exactly.
EnsembleStats reduce_stats(const std::vector<EnergyLedger>& ledgers);

void write_ledger_csv(const std::string& path, const EnergyLedger& ledger);
void write_stats_csv(const std::string& path, const EnsembleStats& stats);

}  // namespace relent
