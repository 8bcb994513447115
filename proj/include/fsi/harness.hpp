#pragma once

#include "fsi/config.hpp"
#include "fsi/energy.hpp"
#include "fsi/periodic.hpp"
#include "fsi/weakform.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace fsi {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_verification = 4 };

// Raised when a command is used outside its mode contract (e.g. symmetric mode on an ellipse).
struct InvalidMode : InvalidInput {
    using InvalidInput::InvalidInput;
};

struct HarnessContext {
    std::filesystem::path out = "out";
    int jobs = 1;
    std::ostream* log = nullptr;  // progress lines; never part of the outputs
};

// Solver for the configuration. With periodic set, dt is adjusted so that the period holds a whole
// multiple of orbit.n_phase steps.
std::unique_ptr<CoupledSolver> make_solver(const ExperimentConfig& c, bool periodic);

// Initial state of a plain run: rest_state(run.initial), or the zero state.
SystemState initial_state(const CoupledSolver& solver, const ExperimentConfig& c);

struct SimulateResult {
    TimeSeries series;
    BalanceSummary balance;
    SystemState final_state;
};

// Writes config.json, series.csv, energy.csv, final.chk. A step failure still writes the partial
// series before rethrowing.
SimulateResult run_simulate(const ExperimentConfig& c, const HarnessContext& ctx);

struct OrbitResult {
    PeriodicOrbit orbit;
    OrbitMetrics metrics;
    PeriodicityDefects defects;
    double dt = 0;
};

// Writes config.json, orbit_metrics.csv, residual_history.csv, orbit_phases.csv, periodicity.csv,
// weak_diagnostics.csv and orbit/phase_NNN.chk (one checkpoint per stored phase).
OrbitResult run_find_periodic(const ExperimentConfig& c, const HarnessContext& ctx);

// Weak-form diagnostics of a converged orbit as CSV rows (G family, then I family).
std::string weak_diagnostics_csv(const CoupledSolver& solver, const PeriodicOrbit& orbit);

struct SweepRow {
    double value = 0;
    bool converged = false;
    bool failed = false;
    std::string error;
    double residual = 0;
    int iterations = 0;
    double h = 0;
    int n = 0;
    OrbitMetrics metrics;
    std::vector<double> extra;  // kind-specific columns
    std::string config_hash;
};

struct SweepTable {
    std::string swept;                     // name of the swept key
    std::vector<std::string> extra_columns;
    std::vector<SweepRow> rows;            // sorted by value
    std::string csv() const;
};

// Each sweep validates its list before running (ConfigError on a violated precondition), runs the
// points concurrently with ctx.jobs workers, and writes sweep_<kind>.csv plus config.json.
SweepTable run_sweep_frequency(const ExperimentConfig& c, const HarnessContext& ctx);
SweepTable run_sweep_radius(const ExperimentConfig& c, const HarnessContext& ctx);
SweepTable run_sweep_eta(const ExperimentConfig& c, const HarnessContext& ctx);

// Vacuum oracle envelope at period T: max|theta| over the first 5 periods, over `periods` periods,
// and the slope of the running maximum over the final 20 periods.
struct VacuumEnvelope {
    bool resonant = false;
    double max5 = 0, maxN = 0;
    double growth = 0;  // maxN / max5
    double slope = 0;
    double predicted_slope = 0;  // |d| * resonant amplitude / 2 (0 off resonance)
};
VacuumEnvelope vacuum_envelope(const PhysicalParams& p, const CouplingConstants& cc, const Forcing& f,
                               int periods, int samples_per_period = 400);

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0;
    double limit = 0;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
    std::string text() const;
};

// Invariant suite; writes verify.txt. Physics need not be valid (the spectrum check reports it).
VerifyReport run_verify(const ExperimentConfig& c, const HarnessContext& ctx);

struct SymmetricReport {
    double d = 0;
    double max_abs_theta = 0, max_abs_omega = 0;
    double max_abs_delta = 0;
    double noise_floor = 0;  // machine epsilon * steps * max state magnitude
    bool quiescent = false;  // max|theta| <= 100 * noise_floor
    std::string text() const;
};

// Disk body only (InvalidMode otherwise). Starts from theta = omega = 0 and runs to run.t_end.
SymmetricReport run_symmetric_mode(const ExperimentConfig& c, const HarnessContext& ctx);

// Collects the CSV files present in ctx.out into report.md and writes plot_results.py.
std::string run_report(const HarnessContext& ctx);

}  // namespace fsi
