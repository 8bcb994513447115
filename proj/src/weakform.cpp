#include "fsi/weakform.hpp"

#include <cmath>

namespace fsi {

namespace {

Vec2 rotated_back(double theta, const Vec2& chi) { return rotation_planar(theta).transpose() * chi; }

// derivative of R(theta)^T chi with respect to theta
Vec2 rotated_back_dtheta(double theta, const Vec2& chi) {
    double c = std::cos(theta), s = std::sin(theta);
    return Vec2(-s * chi[0] + c * chi[1], -c * chi[0] - s * chi[1]);
}

std::vector<double> phase_values(const PeriodicOrbit& orbit, const std::function<double(const SystemState&)>& f) {
    std::vector<double> v;
    v.reserve(orbit.states.size());
    for (const auto& st : orbit.states) v.push_back(f(st));
    return v;
}

}  // namespace

TestField test_field_G(double theta_bar, const CutoffProfile& psi, const Grid& g) {
    TestField t;
    lifting_field_H(g, psi, Vec2::Zero(), theta_bar, t.phi);
    t.phi_t.assign(g.nfaces(), 0.0);
    t.alpha_hat = theta_bar;
    t.support_radius = psi.r_outer();
    return t;
}

TestField test_field_I(double theta, double omega, const Vec2& chi_bar, const CutoffProfile& psi,
                       const Grid& g) {
    TestField t;
    t.rho_hat = rotated_back(theta, chi_bar);
    t.rho_hat_t = omega * rotated_back_dtheta(theta, chi_bar);
    lifting_field_H(g, psi, t.rho_hat, 0.0, t.phi);
    lifting_field_H(g, psi, t.rho_hat_t, 0.0, t.phi_t);
    t.support_radius = psi.r_outer();
    return t;
}

TestFieldFamily family_G(const CoupledSolver& solver, double theta_bar) {
    const LiftingBasis& L = solver.lifting();
    const int nf = solver.grid().nfaces();
    const double r = solver.cutoff().r_outer();
    return [&L, nf, r, theta_bar](const SystemState&) {
        TestField t;
        L.combine(Vec2::Zero(), theta_bar, t.phi);
        t.phi_t.assign(nf, 0.0);
        t.alpha_hat = theta_bar;
        t.support_radius = r;
        return t;
    };
}

TestFieldFamily family_I(const CoupledSolver& solver, const Vec2& chi_bar) {
    const LiftingBasis& L = solver.lifting();
    const double r = solver.cutoff().r_outer();
    return [&L, r, chi_bar](const SystemState& st) {
        TestField t;
        t.rho_hat = rotated_back(st.s.theta, chi_bar);
        t.rho_hat_t = st.s.omega * rotated_back_dtheta(st.s.theta, chi_bar);
        L.combine(t.rho_hat, 0.0, t.phi);
        L.combine(t.rho_hat_t, 0.0, t.phi_t);
        t.support_radius = r;
        return t;
    };
}

Vec2 mean_chi(const PeriodicOrbit& orbit) {
    auto c2 = phase_values(orbit, [](const SystemState& s) { return (rotation_planar(s.s.theta) * s.s.delta)[0]; });
    auto c3 = phase_values(orbit, [](const SystemState& s) { return (rotation_planar(s.s.theta) * s.s.delta)[1]; });
    return Vec2(trapezoid(c2, orbit.T), trapezoid(c3, orbit.T)) / orbit.T;
}

double mean_theta(const PeriodicOrbit& orbit) {
    return trapezoid(phase_values(orbit, [](const SystemState& s) { return s.s.theta; }), orbit.T) / orbit.T;
}

WeakResidualTerms weak_residual_terms(const CoupledSolver& solver, const PeriodicOrbit& orbit,
                                      const TestFieldFamily& family) {
    const Grid& g = solver.grid();
    const Masks& m = solver.masks();
    const PhysicalParams& p = solver.params();
    const Forcing& F = solver.forcing();
    const CouplingConstants& cc = solver.coupling();
    std::vector<double> tm, ad, vi, sr, fo;
    FaceVec a, out;
    AdvectionFluxes fl;
    for (const auto& st : orbit.states) {
        TestField tf = family(st);
        const double om = st.s.omega, th = st.s.theta;
        tm.push_back(-(masked_dot(g, m.face_fluid, st.u, tf.phi_t) + st.s.xi.dot(tf.rho_hat_t) / p.varpi +
                       om * tf.alpha_hat_t / p.tau));
        solver.advective_velocity(st, a);
        build_advection_fluxes(g, a, fl);
        advection_apply(g, m, fl, p.lambda, om, st.u, out);
        ad.push_back(-masked_dot(g, m.face_fluid, out, tf.phi));
        vi.push_back(deformation_inner(g, m, st.u, tf.phi, true));
        const Mat2 B = stiffness_planar(th, p.stiffness_A);
        sr.push_back(om * perp(st.s.xi).dot(tf.rho_hat) / p.varpi + tf.rho_hat.dot(B * st.s.delta) / p.varpi +
                     tf.alpha_hat * p.k * th / p.tau);
        const double Vd = F.derivative(st.time);
        const Vec2 b = flow_direction_planar(th, p.b_tilde);
        fo.push_back(-tf.rho_hat.dot(cc.c * Vd * b) / p.varpi - tf.alpha_hat * cc.d * Vd / p.tau);
    }
    WeakResidualTerms r;
    r.time = trapezoid(tm, orbit.T);
    r.advection = trapezoid(ad, orbit.T);
    r.viscous = trapezoid(vi, orbit.T);
    r.structure = trapezoid(sr, orbit.T);
    r.forcing = trapezoid(fo, orbit.T);
    return r;
}

double weak_residual(const CoupledSolver& solver, const PeriodicOrbit& orbit,
                     const TestFieldFamily& family) {
    return std::abs(weak_residual_terms(solver, orbit, family).value());
}

ThetaBarIdentity mean_rotation_identity(const CoupledSolver& solver, const PeriodicOrbit& orbit) {
    ThetaBarIdentity r;
    const PhysicalParams& p = solver.params();
    const Forcing& F = solver.forcing();
    const double T = orbit.T;
    r.theta_bar = mean_theta(orbit);
    WeakResidualTerms w = weak_residual_terms(solver, orbit, family_G(solver, r.theta_bar));
    r.weak_residual_G = std::abs(w.value());
    double int_Vdot = trapezoid(phase_values(orbit, [&](const SystemState& s) { return F.derivative(s.time); }), T);
    r.lhs = p.k * r.theta_bar * r.theta_bar * T / p.tau;
    r.rhs = -(r.theta_bar * solver.coupling().d / p.tau) * int_Vdot - (w.viscous + w.advection);
    r.mismatch = std::abs(r.lhs - r.rhs);
    const double V = F.calV();
    r.ratio = V > 0 ? std::abs(r.theta_bar) / (V * (1 / std::sqrt(T) + V / T)) : 0.0;
    return r;
}

PointwiseChain pointwise_chain(const std::vector<double>& abs_f, const std::vector<double>& abs_fdot,
                               double T, double tol) {
    PointwiseChain c;
    std::vector<double> sq;
    for (double v : abs_f) sq.push_back(v * v);
    c.bound = std::sqrt(trapezoid(sq, T)) / std::sqrt(T) + trapezoid(abs_fdot, T);
    for (double v : abs_f) {
        c.max_value = std::max(c.max_value, v);
        c.max_violation = std::max(c.max_violation, v - c.bound);
    }
    c.ok = c.max_violation <= tol * std::max(1.0, c.bound);
    return c;
}

PointwiseBoundReport pointwise_bound_report(const CoupledSolver& solver, const PeriodicOrbit& orbit) {
    PointwiseBoundReport r;
    const PhysicalParams& p = solver.params();
    const Forcing& F = solver.forcing();
    const double T = orbit.T;
    auto dnorm = phase_values(orbit, [](const SystemState& s) { return s.s.delta.norm(); });
    auto ddot = phase_values(orbit, [&](const SystemState& s) {
        return (s.s.xi - F.value(s.time) * flow_direction_planar(s.s.theta, p.b_tilde) - s.s.omega * perp(s.s.delta))
            .norm();
    });
    auto tabs = phase_values(orbit, [](const SystemState& s) { return std::abs(s.s.theta); });
    auto tdot = phase_values(orbit, [](const SystemState& s) { return std::abs(s.s.omega); });
    r.delta = pointwise_chain(dnorm, ddot, T);
    r.theta = pointwise_chain(tabs, tdot, T);
    r.max_abs_delta = r.delta.max_value;
    r.max_abs_theta = r.theta.max_value;
    const double V = F.calV();
    r.envelope = envelope_point_shape(V, T);
    r.ratio = r.envelope > 0 ? (r.max_abs_delta + r.max_abs_theta) / r.envelope : 0.0;
    return r;
}

WirtingerCheck poincare_wirtinger(const std::vector<double>& theta, const std::vector<double>& omega,
                                  double T) {
    WirtingerCheck w;
    double bar = trapezoid(theta, T) / T;
    std::vector<double> dev, om2;
    for (double v : theta) dev.push_back((v - bar) * (v - bar));
    for (double v : omega) om2.push_back(v * v);
    w.lhs = trapezoid(dev, T);
    w.rhs = T * T * trapezoid(om2, T);
    w.holds = w.lhs <= w.rhs * (1 + 1e-12) + 1e-300;
    return w;
}

const std::vector<std::string> weak_diagnostics_columns = {
    "test_field", "residual", "thetabar_lhs", "thetabar_rhs", "mismatch", "ratio_thetabar", "pointwise_ok",
    "max_violation"};

}  // namespace fsi
