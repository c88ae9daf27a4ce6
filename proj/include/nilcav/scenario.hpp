#pragma once

// Scenario configs: versioned JSON documents that drive every CLI subcommand.
// The schema is strict (unknown keys are errors, with field paths in the
// diagnostics) and fully round-trips through dump_config, so a dumped file
// reruns to byte-identical outputs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilcav/coupling.hpp"
#include "nilcav/protocols.hpp"

namespace nilcav {

struct DickeSweepConfig {
    int num_atoms = 0;
    std::vector<int> excitations;  // default: 1..num_atoms
    double c_abs_min = 0.0;
    double c_abs_max = 2.0;
    int c_abs_steps = 81;
};

struct GhzConfig {
    std::vector<Cx> linear;  // one I_n per atom
    double kappa = 1.0;
    double laser_amplitude = 0.0;
    double omega_laser = 0.0;
    bool run_dynamic = true;
};

struct TwoEnsembleConfig {
    int atoms_per_ensemble = 0;
    Cx mu;
    double g = 0.0;
    double t = 0.0;
};

struct ScheduleSolveConfig {
    double omega_cavity = 0.0;
    std::vector<double> omega_atoms;
    std::vector<ScheduleWindow> windows;  // atom indices stored 0-based
    CouplingCoefficients target;
};

struct CanonicalizeConfig {
    std::string polynomial;  // text serialization of the input state
    int restarts = 8;
};

struct PipelineStage {
    std::string op;  // measure | displace | squeeze | kerr | canonicalize
    int photons = 0;                                        // measure
    Cx lambda;                                              // displace
    double g = 0.0;                                         // squeeze
    double t = 0.0;                                         // squeeze
    double kappa = 0.0;                                     // kerr
    double laser_amplitude = 0.0;                           // kerr
    double omega_laser = 0.0;                               // kerr
    Cx b, c;                                                // kerr projection
    int restarts = 8;                                       // canonicalize
};

struct PipelineConfig {
    // Exactly one source: a drive schedule (integrated on the fly) or parsed
    // coupling coefficients.
    std::optional<ControlSchedule> schedule;
    std::optional<CouplingCoefficients> coefficients;
    // Exactly one terminal stage (measure/displace/squeeze/kerr); an optional
    // canonicalize stage may follow it.
    std::vector<PipelineStage> stages;
};

struct ScenarioConfig {
    int version = 1;
    std::string protocol;  // dicke-sweep | ghz | two-ensemble | schedule-solve
                           // | validate | canonicalize | pipeline
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = ".";

    std::optional<DickeSweepConfig> dicke_sweep;
    std::optional<GhzConfig> ghz;
    std::optional<TwoEnsembleConfig> two_ensemble;
    std::optional<ScheduleSolveConfig> schedule_solve;
    std::optional<CanonicalizeConfig> canonicalize;
    std::optional<PipelineConfig> pipeline;
};

// Parse + validate; throws ConfigError with a field path on any violation.
ScenarioConfig scenario_from_text(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

// Canonical serialization with all defaults materialized; parsing the result
// reproduces the config exactly.
std::string dump_config(const ScenarioConfig& config);

// Out-dir precedence: CLI flag > NILCAV_OUT_DIR environment > config value.
// Seed/threads: CLI flag > config value.
void apply_overrides(ScenarioConfig& config,
                     const std::optional<std::string>& out_dir_flag,
                     const std::optional<std::uint64_t>& seed_flag,
                     const std::optional<int>& threads_flag);

struct ScenarioResult {
    ProtocolReport report;
    std::vector<std::string> files_written;  // absolute or out_dir-relative
    bool validation_failed = false;          // validate protocol only
};

ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace nilcav
