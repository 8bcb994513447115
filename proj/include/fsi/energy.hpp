#pragma once

#include "fsi/stepper.hpp"

#include <string>
#include <vector>

namespace fsi {

// Contributions to E, each already carrying its 1/2 and weight, so E is their sum.
struct EnergyComponents {
    double kinetic_fluid = 0;  // 1/2 ||u||^2 over fluid faces
    double translation = 0;    // |xi|^2 / (2 varpi)
    double elastic = 0;        // delta . B(theta) delta / (2 varpi)
    double rotation = 0;       // omega^2 / (2 tau)
    double torsion = 0;        // k theta^2 / (2 tau)

    double sum() const { return kinetic_fluid + translation + elastic + rotation + torsion; }
};

struct EnergyReport {
    double E = 0;
    double E_zeta = 0;
    double dissipation = 0;  // 2 ||D(u)||^2
    double balance_residual = 0;
    EnergyComponents components;
};

EnergyComponents energy_components(const Grid& g, const Masks& m, const PhysicalParams& p,
                                   const SystemState& st);
EnergyReport total_energy(const Grid& g, const Masks& m, const PhysicalParams& p,
                          const SystemState& st);
// sqrt(2E): the norm induced by the energy quadratic form
double energy_norm(const Grid& g, const Masks& m, const PhysicalParams& p, const SystemState& st);

// Cross term (u, H) + xi.delta / varpi + omega theta / tau, so E_zeta = E + 2 zeta * cross.
double energy_cross_term(const Grid& g, const Masks& m, const PhysicalParams& p,
                         const LiftingBasis& lift, const SystemState& st);
double perturbed_energy(const Grid& g, const Masks& m, const PhysicalParams& p,
                        const LiftingBasis& lift, const SystemState& st, double zeta);

// Largest zeta with 2 zeta^2 (c1 + 1/varpi) <= rho1 / (8 varpi) and 2 zeta^2 (c1 + 1/tau) <= k / (8 tau).
// c1 bounds ||H||^2 by c1 (|delta|^2 + theta^2); pass LiftingBasis::c1_l2.
double compute_zeta1(const PhysicalParams& p, double c1);

// Exact largest zeta keeping E/2 <= E_zeta <= 3E/2 over span{H2, H3, Htheta} x structural states
// at the given angle (the worst fluid field for the cross term lies in that span).
double critical_zeta(const Grid& g, const Masks& m, const PhysicalParams& p,
                     const LiftingBasis& lift, double theta);
// The state attaining critical_zeta at that angle, scaled so its own theta equals `theta`
// (consistent whenever the extreme direction has a rotational part).
SystemState adversarial_state(const Grid& g, const Masks& m, const PhysicalParams& p,
                              const LiftingBasis& lift, double theta);

// ---- time series ----

struct SeriesSample {
    double t = 0;
    double E = 0, E_zeta = 0;
    double dissipation = 0;  // 2 ||D(u)||^2 over the disk
    double grad_sq = 0;      // ||grad u||^2 over the disk
    StructuralState s;
    HydroLoads loads;
    double V = 0, Vdot = 0;
    double div_max = 0;
    double cfl = 0;
};

struct TimeSeries {
    std::vector<SeriesSample> samples;
    double zeta = 0;
};

// Observer filling a TimeSeries; E_zeta uses the given zeta.
class SeriesRecorder {
public:
    SeriesRecorder(const CoupledSolver& solver, double zeta);
    void operator()(const SystemState& st, const StepInfo& info, long step);
    StepObserver observer();
    const TimeSeries& series() const { return ts_; }
    TimeSeries& series() { return ts_; }

private:
    const CoupledSolver& solver_;
    TimeSeries ts_;
    CellVec div_;
};

extern const std::vector<std::string> series_columns;
// One row per sample, 17 significant digits.
std::string series_csv(const TimeSeries& ts);

struct BalanceSummary {
    std::vector<double> residuals;  // r_i between samples i and i+1
    double max_abs = 0;
    double sum_abs = 0;
};

// r_i = E_{i+1} - E_i + dt (D - W) with D the dissipation and W the forcing power
//   (c Vdot / varpi) xi.b - (V / varpi) b.B delta + d omega Vdot / tau, both by the trapezoid rule.
// Needs consecutive samples (output interval 1).
BalanceSummary energy_balance_residual(const TimeSeries& ts, const PhysicalParams& p,
                                       const CouplingConstants& cc);

struct TraceEstimate {
    double kappa = 0;
    double t_min = 0;
    int samples_used = 0;
    std::vector<double> running;  // running minimum per sample (NaN until defined)
};

// min over samples of (2||D u||^2 - ||grad u||^2 / 2) / (|xi|^2 + omega^2); throws UndefinedEstimate
// when no sample has body motion.
TraceEstimate estimate_trace_constant(const TimeSeries& ts);

// Energy report CSV: t, E, E_zeta, dissipation, balance_residual, kappa_running.
std::string energy_report_csv(const TimeSeries& ts, const BalanceSummary& bal,
                              const TraceEstimate* kappa);

struct DecayReport {
    bool trivial = false;       // zero initial energy, nothing to fit
    double E_zeta0 = 0, E_zetaT = 0;
    bool decreased = false;
    double rate = 0;            // fitted -d log E_zeta / dt over the last 80% of the horizon
    double zeta0 = 0;           // 3/2 rate, from E_zeta' <= -(2/3) zeta0 E_zeta
    // forced run (optional): smallest c10 with E_zeta(t) <= E_zeta(0) exp(-rate t) + c10 calV
    bool forced = false;
    double c10 = 0;
    double calV = 0;
};

// Free decay with V = 0 from `initial` over `horizon`; when forced_solver is given, also runs it
// from the same state to fit c10.
DecayReport dissipation_study(CoupledSolver& free_solver, const SystemState& initial, double horizon,
                              CoupledSolver* forced_solver = nullptr);
std::string decay_report_text(const DecayReport& r);

struct TwinReport {
    double max_energy_distance = 0;  // max over steps of the energy-norm distance
    double max_structural_distance = 0;
    double initial_distance = 0;
};

// Runs `state` and a copy with delta shifted by `perturbation` side by side.
TwinReport twin_divergence(CoupledSolver& solver, const SystemState& state, const Vec2& perturbation,
                           double horizon);

}  // namespace fsi
