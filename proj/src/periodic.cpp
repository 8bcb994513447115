#include "fsi/periodic.hpp"

#include "fsi/energy.hpp"
#include "fsi/io.hpp"

#include <cmath>
#include <limits>

namespace fsi {

namespace {

constexpr double residual_floor = 1e-14;

long steps_for(const CoupledSolver& solver) {
    const double T = solver.forcing().period_T, dt = solver.config().dt;
    long N = std::lround(T / dt);
    if (N < 1 || std::abs(N * dt - T) > 1e-9 * T)
        throw InvalidInput("time step does not divide the forcing period");
    return N;
}

SystemState difference(const SystemState& a, const SystemState& b) {
    SystemState d = a;
    for (size_t f = 0; f < d.u.size(); ++f) d.u[f] -= b.u[f];
    d.s.xi -= b.s.xi;
    d.s.delta -= b.s.delta;
    d.s.omega -= b.s.omega;
    d.s.theta -= b.s.theta;
    return d;
}

}  // namespace

int steps_per_period(double T, double dt_target, int n_phase) {
    if (!(T > 0) || !(dt_target > 0) || n_phase < 1) throw InvalidInput("invalid period discretization");
    long blocks = std::max(1L, std::lround(T / (dt_target * n_phase)));
    return (int)(blocks * n_phase);
}

StepConfig periodic_step_config(StepConfig cfg, double T, int n_phase) {
    cfg.dt = T / steps_per_period(T, cfg.dt, n_phase);
    return cfg;
}

SystemState poincare_map(CoupledSolver& solver, const SystemState& s, int n_phase,
                         std::vector<SystemState>* snapshots) {
    const long N = steps_for(solver);
    if (snapshots && (n_phase < 1 || N % n_phase != 0))
        throw InvalidInput("steps per period must be a multiple of the phase count");
    SystemState st = s;
    if (st.u.empty()) st = solver.zero_state();
    const long every = snapshots ? N / n_phase : N;
    if (snapshots) {
        snapshots->clear();
        snapshots->push_back(st);
    }
    for (long k = 1; k <= N; ++k) {
        solver.step(st);
        if (snapshots && k % every == 0) snapshots->push_back(st);
    }
    return st;
}

SystemState transfer_state(const Grid& from, const SystemState& s, const CoupledSolver& to) {
    SystemState r = to.zero_state();
    const Masks& m = to.masks();
    resample_faces(from, s.u, to.grid(), r.u);
    for (int f = 0; f < to.grid().nfaces(); ++f)
        if (!m.face_free[f]) r.u[f] = 0.0;
    Projector P(to.grid(), m, to.config().poisson_pc, to.config().poisson_tol);
    P.project(r.u);
    r.p.clear();
    r.s = s.s;
    r.time = s.time;
    return r;
}

double map_residual(const CoupledSolver& solver, const SystemState& s, const SystemState& Ps) {
    const Grid& g = solver.grid();
    const Masks& m = solver.masks();
    const PhysicalParams& p = solver.params();
    double num = energy_norm(g, m, p, difference(Ps, s));
    double den = std::max(energy_norm(g, m, p, s), residual_floor);
    return num / den;
}

PeriodicOrbit find_periodic_orbit(CoupledSolver& solver, const PicardOptions& opts,
                                  const SystemState* warm_start, const PicardProgress& progress) {
    if (!(opts.tol > 0) || opts.max_iters < 1) throw InvalidInput("invalid Picard options");
    PeriodicOrbit best;
    best.T = solver.forcing().period_T;
    best.residual = std::numeric_limits<double>::infinity();
    std::vector<double> history;

    SystemState s = warm_start ? *warm_start : solver.zero_state();
    std::vector<SystemState> snaps;
    // structural inputs of the current plain-iteration run, for Aitken
    std::vector<StructuralState> run;

    for (int it = 1; it <= opts.max_iters; ++it) {
        s.time = 0;
        SystemState Ps = poincare_map(solver, s, opts.n_phase, &snaps);
        double res = map_residual(solver, s, Ps);
        history.push_back(res);
        if (progress) progress(it, res);
        if (!std::isfinite(res)) throw NumericalFailure("Picard residual is not finite", it);
        const bool zero_seed = energy_norm(solver.grid(), solver.masks(), solver.params(), s) <= residual_floor;
        if (res > opts.divergence_limit && !zero_seed)
            throw NumericalFailure("Picard iteration diverged", it);
        if (res < best.residual) {
            best.residual = res;
            best.iterations = it;
            best.states = snaps;
        }
        if (res <= opts.tol) {
            best.residual = res;
            best.iterations = it;
            best.states = snaps;
            best.converged = true;
            break;
        }
        run.push_back(s.s);
        SystemState next = Ps;
        if (opts.aitken && run.size() == 2) {
            // x0, x1 = P(x0) stored; x2 = P(x1) is next
            const StructuralState &x0 = run[0], &x1 = run[1], &x2 = Ps.s;
            auto acc = [](double a, double b, double c) {
                double d2 = c - 2 * b + a;
                return std::abs(d2) > 1e-14 ? c - (c - b) * (c - b) / d2 : c;
            };
            for (int i = 0; i < 2; ++i) {
                next.s.xi[i] = acc(x0.xi[i], x1.xi[i], x2.xi[i]);
                next.s.delta[i] = acc(x0.delta[i], x1.delta[i], x2.delta[i]);
            }
            next.s.omega = acc(x0.omega, x1.omega, x2.omega);
            next.s.theta = acc(x0.theta, x1.theta, x2.theta);
            run.clear();
        }
        s = next;
    }
    best.residual_history = history;
    if (!best.converged) best.iterations = (int)history.size();
    return best;
}

double trapezoid(const std::vector<double>& f, double T) {
    if (f.size() < 2) return 0.0;
    const double h = T / (double)(f.size() - 1);
    double s = 0.5 * (f.front() + f.back());
    for (size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

double envelope_point_shape(double V, double T) {
    return std::sqrt(V) * (std::sqrt(T) + T * std::sqrt(V) + V + std::pow(V, 1.5) / std::pow(T, 0.25) +
                           (std::sqrt(V) + V * V) / std::sqrt(T) + V / std::pow(T, 0.75) +
                           std::pow(V, 1.5) / T);
}

OrbitMetrics orbit_metrics(const CoupledSolver& solver, const PeriodicOrbit& orbit) {
    OrbitMetrics m;
    const double T = orbit.T;
    std::vector<double> xi2, om2, de2, th2, gr;
    for (const auto& st : orbit.states) {
        m.max_abs_delta = std::max(m.max_abs_delta, st.s.delta.norm());
        m.max_abs_theta = std::max(m.max_abs_theta, std::abs(st.s.theta));
        xi2.push_back(st.s.xi.squaredNorm());
        om2.push_back(st.s.omega * st.s.omega);
        de2.push_back(st.s.delta.squaredNorm());
        th2.push_back(st.s.theta * st.s.theta);
        gr.push_back(gradient_norms(solver.grid(), solver.masks(), st.u).grad_sq_fluid);
    }
    m.L2_xi = trapezoid(xi2, T);
    m.L2_omega = trapezoid(om2, T);
    m.L2_delta = trapezoid(de2, T);
    m.L2_theta = trapezoid(th2, T);
    m.int_grad_u_sq = trapezoid(gr, T);
    const double V = solver.forcing().calV();
    m.calV = V;
    m.envelope_weaksol = V;
    m.envelope_weaksol_2 = V * (T * T + V + V * V / std::sqrt(T) + V * V * V / T);
    m.envelope_point = envelope_point_shape(V, T);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.ratio_weaksol = V > 0 ? (m.L2_xi + m.L2_omega + m.int_grad_u_sq) / m.envelope_weaksol : nan;
    m.ratio_weaksol_2 = V > 0 ? (m.L2_delta + m.L2_theta) / m.envelope_weaksol_2 : nan;
    m.ratio_point = V > 0 ? (m.max_abs_delta + m.max_abs_theta) / m.envelope_point : nan;
    return m;
}

const std::vector<std::string> orbit_metrics_columns = {
    "T",        "V_descriptor", "residual", "iterations", "max_abs_delta", "max_abs_theta", "L2_xi",
    "L2_omega", "L2_delta",     "L2_theta", "int_grad_u_sq", "calV",        "ratio_weaksol", "ratio_point"};

std::string orbit_metrics_row(const PeriodicOrbit& orbit, const OrbitMetrics& m, double v_descriptor) {
    return csv_row({orbit.T, v_descriptor, orbit.residual, (double)orbit.iterations, m.max_abs_delta,
                    m.max_abs_theta, m.L2_xi, m.L2_omega, m.L2_delta, m.L2_theta, m.int_grad_u_sq, m.calV,
                    m.ratio_weaksol, m.ratio_point});
}

PeriodicityDefects verify_periodicity(const CoupledSolver& solver, const PeriodicOrbit& orbit) {
    PeriodicityDefects d;
    if (orbit.states.size() < 2) return d;
    const double T = orbit.T;
    const PhysicalParams& p = solver.params();
    const Forcing& F = solver.forcing();
    std::vector<double> om, tr2, tr3;
    double max_om = 0, max_tr = 0;
    for (const auto& st : orbit.states) {
        om.push_back(st.s.omega);
        max_om = std::max(max_om, std::abs(st.s.omega));
        Vec2 v = st.s.xi - F.value(st.time) * flow_direction_planar(st.s.theta, p.b_tilde) -
                 st.s.omega * perp(st.s.delta);
        tr2.push_back(v[0]);
        tr3.push_back(v[1]);
        max_tr = std::max(max_tr, v.norm());
        d.max_abs_theta = std::max(d.max_abs_theta, std::abs(st.s.theta));
    }
    d.omega_integral = std::abs(trapezoid(om, T));
    d.translation_integral = std::hypot(trapezoid(tr2, T), trapezoid(tr3, T));
    d.mean_omega = max_om > 0 ? d.omega_integral / (T * max_om) : 0.0;
    d.mean_translation = max_tr > 0 ? d.translation_integral / (T * max_tr) : 0.0;
    const SystemState& a = orbit.states.front();
    const SystemState& b = orbit.states.back();
    d.endpoint = map_residual(solver, a, b);
    d.theta_drift = std::abs(b.s.theta - a.s.theta);
    return d;
}

}  // namespace fsi
