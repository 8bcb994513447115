#pragma once

#include "fsi/periodic.hpp"
#include "fsi/stepper.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace fsi {

struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(const std::string& k, const std::string& what) : std::runtime_error(what), key(k) {}
};

struct RunOptions {
    double t_end = 2 * pi;
    int output_interval = 1;
    StructuralState initial;  // flow starts at rest, projected around the rigid body velocity
};

struct SweepOptions {
    std::vector<double> T_list;
    std::vector<double> R_list;
    std::vector<double> eta_list;
    int vacuum_periods = 50;  // horizon of the vacuum envelope contrast
};

struct ExperimentConfig {
    std::string experiment = "simulate";
    PhysicalParams physics;
    BodyGeometry body;
    double cutoff_margin = 0.1;
    Forcing forcing;
    bool normalize_forcing = true;
    double grid_R = 6.0;
    int grid_n = 96;
    double eta = 0;  // 0 selects 2h
    StepConfig step;
    PicardOptions orbit;
    RunOptions run;
    SweepOptions sweep;
    bool deterministic = true;

    Grid grid() const { return make_grid(grid_R, grid_n, body.R_star); }
    CutoffProfile cutoff() const;
    // forcing after optional normalization to sup|V| = 1
    Forcing effective_forcing() const;
};

// Flat document: dotted keys map to values. forcing.period_T is required; every other key has a
// default. Unknown keys, wrong types and invalid values raise ConfigError naming the key.
// With check_physics false the physical constants are accepted as given (the verify suite
// reports on them instead).
ExperimentConfig parse_config(const std::string& text, bool check_physics = true);
ExperimentConfig load_config(const std::string& path, bool check_physics = true);
// Applies key=value; the value is read as JSON when possible, else as a string.
void apply_override(std::string& text, const std::string& assignment);
ExperimentConfig config_with_overrides(const std::string& text, const std::vector<std::string>& overrides,
                                       bool check_physics = true);

// Fully resolved document (all keys, defaults filled), keys sorted.
std::string resolved_config_text(const ExperimentConfig& c);
std::string config_hash(const ExperimentConfig& c);
const std::vector<std::string>& config_keys();

}  // namespace fsi
