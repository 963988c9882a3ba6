#pragma once

#include <cstdint>
#include <string>

#include "relent/ensemble.hpp"

namespace relent {

/// Fully resolved run configuration. Parsed from strict JSON: unknown keys are
/// rejected, defaults (gamma=2, a=1, cfl=0.4, K=8, ...) fill the gaps.
struct RunConfig {
    ExperimentPlan plan;
    Grid grid{1, 128, 2.0};
    ModelParams params;
    StepperConfig stepper;

    struct Init {
        enum class Kind { equilibrium, smooth, well_prepared };
        Kind kind = Kind::smooth;
        double rho0 = 1.0;
        double amp_rho = 0.02;
        double amp_u = 0.02;
        int mode = 1;
    } init;

    TwinSpec twin;
    WellPreparedSpec sweep;
    ItoCheckSpec ito;
    CoercivitySpec coercivity;

    double budget_constant = 5.0;  // energy-residual budget C in C*(dt+dx^2)*t
    std::string output_dir = "out";
};

/// Parses and validates a JSON document; error messages name the offending
/// key and the violated constraint.
RunConfig parse_config(const std::string& json_text);

/// Canonical JSON (stable key order and formatting); reparsing reproduces the
/// same configuration and the same canonical text.
std::string emit_config(const RunConfig& cfg);

/// FNV-1a hash of the canonical form; used for deterministic output paths.
std::uint64_t config_hash(const RunConfig& cfg);

/// Initial-data generator for the configured experiment.
InitGen make_init_gen(const RunConfig& cfg);

}  // namespace relent
