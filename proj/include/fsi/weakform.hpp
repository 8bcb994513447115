#pragma once

#include "fsi/periodic.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fsi {

// Solenoidal test field with rigid part rho_hat + alpha_hat x^perp where the cutoff is 1,
// together with its time derivative.
struct TestField {
    FaceVec phi, phi_t;
    Vec2 rho_hat = Vec2::Zero(), rho_hat_t = Vec2::Zero();
    double alpha_hat = 0, alpha_hat_t = 0;
    double support_radius = 0;
};

// grad^perp(psi(r) (-theta_bar r^2 / 2)); time independent.
TestField test_field_G(double theta_bar, const CutoffProfile& psi, const Grid& g);
// grad^perp(psi(r) (c2 x3 - c3 x2)) with c = R(theta)^T chi_bar; the time derivative follows from
// theta' = omega.
TestField test_field_I(double theta, double omega, const Vec2& chi_bar, const CutoffProfile& psi,
                       const Grid& g);

using TestFieldFamily = std::function<TestField(const SystemState&)>;

// Period average of chi = R(theta) delta over the orbit (trapezoid).
Vec2 mean_chi(const PeriodicOrbit& orbit);
// Period average of theta (trapezoid).
double mean_theta(const PeriodicOrbit& orbit);

struct WeakResidualTerms {
    double time = 0;       // -<u, phi_t> including the structural parts
    double advection = 0;  // lambda ((k*u - v).grad u, phi) + (omega u^perp, phi)
    double viscous = 0;    // 2 (D u, D phi)
    double structure = 0;  // omega xi^perp.rho/varpi + rho.B delta/varpi + alpha k theta/tau
    double forcing = 0;    // -rho.c Vdot b/varpi - alpha d Vdot/tau
    double value() const { return time + advection + viscous + structure + forcing; }
};

// Time integral over the stored period of the weak momentum balance tested with the family.
// Inner products are over fluid faces; the scheme's form is used (lambda on convection only).
WeakResidualTerms weak_residual_terms(const CoupledSolver& solver, const PeriodicOrbit& orbit,
                                      const TestFieldFamily& family);
double weak_residual(const CoupledSolver& solver, const PeriodicOrbit& orbit,
                     const TestFieldFamily& family);

TestFieldFamily family_G(const CoupledSolver& solver, double theta_bar);
TestFieldFamily family_I(const CoupledSolver& solver, const Vec2& chi_bar);

struct ThetaBarIdentity {
    double theta_bar = 0;
    double lhs = 0;       // k theta_bar^2 T / tau
    double rhs = 0;       // -(theta_bar d / tau) int Vdot - int [2 (D u, D G) + lambda (adv, G) + (omega u^perp, G)]
    double mismatch = 0;  // |lhs - rhs|
    double ratio = 0;     // |theta_bar| / (calV (T^(-1/2) + calV / T))
    double weak_residual_G = 0;
};

ThetaBarIdentity mean_rotation_identity(const CoupledSolver& solver, const PeriodicOrbit& orbit);

struct PointwiseChain {
    double max_value = 0;      // max |f(t)|
    double bound = 0;          // T^(-1/2) ||f||_L2 + int |f'|
    double max_violation = 0;  // max(0, |f(t)| - bound)
    bool ok = true;            // max_violation within quadrature tolerance
};

// |f(t)| <= T^(-1/2) ||f||_L2 + int_0^T |f'| on equally spaced samples spanning [0, T].
PointwiseChain pointwise_chain(const std::vector<double>& abs_f, const std::vector<double>& abs_fdot,
                               double T, double tol = 1e-10);

struct PointwiseBoundReport {
    PointwiseChain delta, theta;
    double max_abs_delta = 0, max_abs_theta = 0;
    double envelope = 0;  // calV^(1/2) (T^(1/2) + ... )
    double ratio = 0;     // (max|delta| + max|theta|) / envelope
    bool ok() const { return delta.ok && theta.ok; }
    double max_violation() const { return std::max(delta.max_violation, theta.max_violation); }
};

PointwiseBoundReport pointwise_bound_report(const CoupledSolver& solver, const PeriodicOrbit& orbit);

struct WirtingerCheck {
    double lhs = 0;  // int |theta - theta_bar|^2
    double rhs = 0;  // T^2 int |omega|^2
    bool holds = true;
};

WirtingerCheck poincare_wirtinger(const std::vector<double>& theta, const std::vector<double>& omega,
                                  double T);

extern const std::vector<std::string> weak_diagnostics_columns;

}  // namespace fsi
