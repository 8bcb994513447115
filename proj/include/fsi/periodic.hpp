#pragma once

#include "fsi/stepper.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fsi {

// Number of steps per period: a multiple of n_phase with T/N closest to dt_target.
int steps_per_period(double T, double dt_target, int n_phase);
// Copy of cfg with dt = T/N from steps_per_period.
StepConfig periodic_step_config(StepConfig cfg, double T, int n_phase);

// Flow over one forcing period. The solver's dt must divide the period. When snapshots is given,
// it receives n_phase + 1 states at equally spaced phases (first = input, last = output).
SystemState poincare_map(CoupledSolver& solver, const SystemState& s, int n_phase = 64,
                         std::vector<SystemState>* snapshots = nullptr);

// State of another discretization carried over to this solver's grid: the flow is resampled,
// restricted to free faces and projected; the structural state is copied. Used as a warm start.
SystemState transfer_state(const Grid& from, const SystemState& s, const CoupledSolver& to);

struct PicardOptions {
    double tol = 1e-3;
    int max_iters = 60;
    bool aitken = false;  // Aitken delta-squared on the structural components every third iterate
    int n_phase = 64;
    double divergence_limit = 1e3;
};

struct PeriodicOrbit {
    double T = 0;
    std::vector<SystemState> states;  // n_phase + 1 snapshots over the final period
    double residual = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;
};

// ||P(s) - s||_E / max(||s||_E, 1e-14)
double map_residual(const CoupledSolver& solver, const SystemState& s, const SystemState& Ps);

using PicardProgress = std::function<void(int iteration, double residual)>;

// Picard iteration s <- P(s) from the zero state or from warm_start. A residual above the divergence
// limit throws NumericalFailure, except on the first iterate from a zero seed, where the denominator
// is the floor and the residual carries no information.
PeriodicOrbit find_periodic_orbit(CoupledSolver& solver, const PicardOptions& opts,
                                  const SystemState* warm_start = nullptr,
                                  const PicardProgress& progress = nullptr);

struct OrbitMetrics {
    double max_abs_delta = 0, max_abs_theta = 0;
    double L2_xi = 0, L2_omega = 0, L2_delta = 0, L2_theta = 0;  // squared L2(0,T) norms
    double int_grad_u_sq = 0;                                    // int_0^T ||grad u||^2 over the fluid
    double calV = 0;
    double envelope_weaksol = 0;    // calV
    double envelope_weaksol_2 = 0;  // calV (T^2 + calV + calV^2 / T^(1/2) + calV^3 / T)
    double envelope_point = 0;      // calV^(1/2) (T^(1/2) + ... + calV^(3/2) / T)
    double ratio_weaksol = 0;       // (L2_xi + L2_omega + int_grad_u_sq) / envelope_weaksol
    double ratio_weaksol_2 = 0;     // (L2_delta + L2_theta) / envelope_weaksol_2
    double ratio_point = 0;         // (max|delta| + max|theta|) / envelope_point
};

double envelope_point_shape(double calV, double T);
OrbitMetrics orbit_metrics(const CoupledSolver& solver, const PeriodicOrbit& orbit);

extern const std::vector<std::string> orbit_metrics_columns;
// T, V-descriptor, residual, iterations, max_abs_delta, ... as one CSV row (without header).
std::string orbit_metrics_row(const PeriodicOrbit& orbit, const OrbitMetrics& m, double v_descriptor);

struct PeriodicityDefects {
    double omega_integral = 0;        // |int omega dt|
    double translation_integral = 0;  // |int (xi - V b - omega delta^perp) dt|
    double mean_omega = 0;            // omega_integral / (T max|omega|), 0 when omega vanishes
    double mean_translation = 0;      // translation_integral / (T max|xi - V b - omega delta^perp|)
    double endpoint = 0;          // ||s(T) - s(0)||_E / max(||s(0)||_E, floor)
    double theta_drift = 0;       // |theta(T) - theta(0)|
    double max_abs_theta = 0;
};

PeriodicityDefects verify_periodicity(const CoupledSolver& solver, const PeriodicOrbit& orbit);

// Trapezoid rule over equally spaced samples spanning [0, T].
double trapezoid(const std::vector<double>& f, double T);

}  // namespace fsi
