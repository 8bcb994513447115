#include "fsi/energy.hpp"

#include "fsi/io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fsi {

EnergyComponents energy_components(const Grid& g, const Masks& m, const PhysicalParams& p,
                                   const SystemState& st) {
    EnergyComponents c;
    c.kinetic_fluid = 0.5 * masked_dot(g, m.face_fluid, st.u, st.u);
    const Mat2 B = stiffness_planar(st.s.theta, p.stiffness_A);
    c.translation = st.s.xi.squaredNorm() / (2 * p.varpi);
    c.elastic = st.s.delta.dot(B * st.s.delta) / (2 * p.varpi);
    c.rotation = st.s.omega * st.s.omega / (2 * p.tau);
    c.torsion = p.k * st.s.theta * st.s.theta / (2 * p.tau);
    return c;
}

EnergyReport total_energy(const Grid& g, const Masks& m, const PhysicalParams& p,
                          const SystemState& st) {
    EnergyReport r;
    r.components = energy_components(g, m, p, st);
    r.E = r.components.sum();
    r.E_zeta = r.E;
    r.dissipation = gradient_norms(g, m, st.u).two_D_sq;
    return r;
}

double energy_norm(const Grid& g, const Masks& m, const PhysicalParams& p, const SystemState& st) {
    return std::sqrt(2 * energy_components(g, m, p, st).sum());
}

double energy_cross_term(const Grid& g, const Masks& m, const PhysicalParams& p,
                         const LiftingBasis& lift, const SystemState& st) {
    const Vec2& d = st.s.delta;
    double uH = d[0] * masked_dot(g, m.face_fluid, st.u, lift.H2) +
                d[1] * masked_dot(g, m.face_fluid, st.u, lift.H3) +
                st.s.theta * masked_dot(g, m.face_fluid, st.u, lift.Htheta);
    return uH + st.s.xi.dot(d) / p.varpi + st.s.omega * st.s.theta / p.tau;
}

double perturbed_energy(const Grid& g, const Masks& m, const PhysicalParams& p,
                        const LiftingBasis& lift, const SystemState& st, double zeta) {
    if (zeta < 0) throw InvalidInput("zeta must be non-negative");
    double E = energy_components(g, m, p, st).sum();
    if (zeta == 0) return E;
    return E + 2 * zeta * energy_cross_term(g, m, p, lift, st);
}

double compute_zeta1(const PhysicalParams& p, double c1) {
    if (c1 < 0) throw InvalidInput("c1 must be non-negative");
    double z1 = std::sqrt(p.rho1() / (8 * p.varpi) / (2 * (c1 + 1 / p.varpi)));
    double z2 = std::sqrt(p.k / (8 * p.tau) / (2 * (c1 + 1 / p.tau)));
    return std::min(z1, z2);
}

namespace {

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec9 = Eigen::Matrix<double, 9, 1>;

// Unknowns: coefficients of u in the lifting basis (3), xi (2), delta (2), omega, theta.
// E = x'Mx / 2 and cross = x'Kx.
void sandwich_forms(const Grid& g, const Masks& m, const PhysicalParams& p, const LiftingBasis& lift,
                    double theta, Mat9& M, Mat9& K) {
    const FaceVec* H[3] = {&lift.H2, &lift.H3, &lift.Htheta};
    Mat3 G;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) G(i, j) = masked_dot(g, m.face_fluid, *H[i], *H[j]);
    const Mat2 B = stiffness_planar(theta, p.stiffness_A);
    M.setZero();
    K.setZero();
    M.block<3, 3>(0, 0) = G;
    M.block<2, 2>(3, 3) = Mat2::Identity() / p.varpi;
    M.block<2, 2>(5, 5) = B / p.varpi;
    M(7, 7) = 1 / p.tau;
    M(8, 8) = p.k / p.tau;
    const int y[3] = {5, 6, 8};  // delta2, delta3, theta
    for (int i = 0; i < 3; ++i)
        for (int l = 0; l < 3; ++l) {
            K(i, y[l]) += 0.5 * G(i, l);
            K(y[l], i) += 0.5 * G(i, l);
        }
    for (int i = 0; i < 2; ++i) {
        K(3 + i, 5 + i) = K(5 + i, 3 + i) = 0.5 / p.varpi;
    }
    K(7, 8) = K(8, 7) = 0.5 / p.tau;
}

// largest |mu| with Kx = mu Mx, and its eigenvector
double extreme_ratio(const Mat9& M, const Mat9& K, Vec9* vec) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat9> es(K, M);
    if (es.info() != Eigen::Success) throw NumericalFailure("sandwich eigenproblem failed");
    const auto& ev = es.eigenvalues();
    int idx = std::abs(ev[0]) > std::abs(ev[8]) ? 0 : 8;
    if (vec) *vec = es.eigenvectors().col(idx);
    return std::abs(ev[idx]);
}

}  // namespace

double critical_zeta(const Grid& g, const Masks& m, const PhysicalParams& p,
                     const LiftingBasis& lift, double theta) {
    Mat9 M, K;
    sandwich_forms(g, m, p, lift, theta, M, K);
    // |E_zeta - E| = 2 zeta |x'Kx| <= 4 zeta mu (x'Mx / 2), so the sandwich holds iff zeta <= 1/(8 mu)
    return 1.0 / (8 * extreme_ratio(M, K, nullptr));
}

SystemState adversarial_state(const Grid& g, const Masks& m, const PhysicalParams& p,
                              const LiftingBasis& lift, double theta) {
    Mat9 M, K;
    sandwich_forms(g, m, p, lift, theta, M, K);
    Vec9 x;
    extreme_ratio(M, K, &x);
    // the ratio is scale invariant; scaling to theta makes the state's own B(theta) the one used above
    if (std::abs(x[8]) > 1e-14 && theta != 0) x *= theta / x[8];
    SystemState st;
    st.u.resize(g.nfaces());
    for (int f = 0; f < g.nfaces(); ++f)
        st.u[f] = x[0] * lift.H2[f] + x[1] * lift.H3[f] + x[2] * lift.Htheta[f];
    st.p.assign(g.ncells(), 0.0);
    st.s.xi = Vec2(x[3], x[4]);
    st.s.delta = Vec2(x[5], x[6]);
    st.s.omega = x[7];
    st.s.theta = x[8];
    return st;
}

// ---- series ----

SeriesRecorder::SeriesRecorder(const CoupledSolver& solver, double zeta) : solver_(solver) {
    ts_.zeta = zeta;
}

void SeriesRecorder::operator()(const SystemState& st, const StepInfo& info, long) {
    const Grid& g = solver_.grid();
    const Masks& m = solver_.masks();
    const PhysicalParams& p = solver_.params();
    SeriesSample s;
    s.t = st.time;
    s.E = energy_components(g, m, p, st).sum();
    s.E_zeta = ts_.zeta > 0 ? s.E + 2 * ts_.zeta * energy_cross_term(g, m, p, solver_.lifting(), st) : s.E;
    GradientNorms gn = gradient_norms(g, m, st.u);
    s.dissipation = gn.two_D_sq;
    s.grad_sq = gn.grad_sq;
    s.s = st.s;
    s.loads = info.loads;
    s.V = solver_.forcing().value(st.time);
    s.Vdot = solver_.forcing().derivative(st.time);
    divergence(g, st.u, div_);
    s.div_max = max_abs_active(m, div_);
    s.cfl = info.cfl;
    ts_.samples.push_back(s);
}

StepObserver SeriesRecorder::observer() {
    return [this](const SystemState& st, const StepInfo& info, long k) { (*this)(st, info, k); };
}

const std::vector<std::string> series_columns = {
    "t",      "E",     "E_zeta", "dissipation_2normDsq", "xi2",    "xi3",    "delta2",  "delta3", "omega",
    "theta",  "Sigma2", "Sigma3", "sigma1",              "V",      "Vdot",   "div_max", "cfl"};

std::string series_csv(const TimeSeries& ts) {
    std::string out = csv_header(series_columns);
    for (const auto& s : ts.samples)
        out += csv_row({s.t, s.E, s.E_zeta, s.dissipation, s.s.xi[0], s.s.xi[1], s.s.delta[0],
                        s.s.delta[1], s.s.omega, s.s.theta, s.loads.Sigma[0], s.loads.Sigma[1],
                        s.loads.sigma1, s.V, s.Vdot, s.div_max, s.cfl});
    return out;
}

BalanceSummary energy_balance_residual(const TimeSeries& ts, const PhysicalParams& p,
                                       const CouplingConstants& cc) {
    BalanceSummary b;
    auto power = [&](const SeriesSample& s) {
        const Vec2 dir = flow_direction_planar(s.s.theta, p.b_tilde);
        const Mat2 B = stiffness_planar(s.s.theta, p.stiffness_A);
        return cc.c * s.Vdot / p.varpi * s.s.xi.dot(dir) - s.V / p.varpi * dir.dot(B * s.s.delta) +
               cc.d * s.s.omega * s.Vdot / p.tau;
    };
    const auto& S = ts.samples;
    for (size_t i = 0; i + 1 < S.size(); ++i) {
        double dt = S[i + 1].t - S[i].t;
        double r = S[i + 1].E - S[i].E +
                   0.5 * dt * ((S[i].dissipation - power(S[i])) + (S[i + 1].dissipation - power(S[i + 1])));
        b.residuals.push_back(r);
        b.max_abs = std::max(b.max_abs, std::abs(r));
        b.sum_abs += std::abs(r);
    }
    return b;
}

TraceEstimate estimate_trace_constant(const TimeSeries& ts) {
    TraceEstimate k;
    k.kappa = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : ts.samples) {
        double den = s.s.xi.squaredNorm() + s.s.omega * s.s.omega;
        if (den > 0) {
            double v = (s.dissipation - 0.5 * s.grad_sq) / den;
            if (v < k.kappa) {
                k.kappa = v;
                k.t_min = s.t;
            }
            ++k.samples_used;
        }
        k.running.push_back(k.samples_used ? k.kappa : nan);
    }
    if (k.samples_used == 0) throw UndefinedEstimate("no sample with body motion; trace constant undefined");
    return k;
}

std::string energy_report_csv(const TimeSeries& ts, const BalanceSummary& bal,
                              const TraceEstimate* kappa) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::string out = csv_header({"t", "E", "E_zeta", "dissipation", "balance_residual", "kappa_running"});
    for (size_t i = 0; i < ts.samples.size(); ++i) {
        const auto& s = ts.samples[i];
        double r = i < bal.residuals.size() ? bal.residuals[i] : nan;
        double kr = kappa && i < kappa->running.size() ? kappa->running[i] : nan;
        out += csv_row({s.t, s.E, s.E_zeta, s.dissipation, r, kr});
    }
    return out;
}

namespace {

TimeSeries run_recorded(CoupledSolver& solver, const SystemState& initial, double horizon, double zeta) {
    SeriesRecorder rec(solver, zeta);
    simulate(solver, initial, initial.time + horizon, 1, rec.observer());
    return rec.series();
}

}  // namespace

DecayReport dissipation_study(CoupledSolver& free_solver, const SystemState& initial, double horizon,
                              CoupledSolver* forced_solver) {
    if (!free_solver.forcing().is_zero()) throw InvalidInput("free-decay solver must have V = 0");
    if (!(horizon > 0)) throw InvalidInput("horizon must be positive");
    DecayReport r;
    const double zeta = compute_zeta1(free_solver.params(), free_solver.lifting().c1_l2);
    const Grid& g = free_solver.grid();
    r.E_zeta0 = perturbed_energy(g, free_solver.masks(), free_solver.params(), free_solver.lifting(),
                                 initial, zeta);
    if (r.E_zeta0 == 0) {
        r.trivial = true;
        return r;
    }
    TimeSeries ts = run_recorded(free_solver, initial, horizon, zeta);
    r.E_zetaT = ts.samples.back().E_zeta;
    r.decreased = r.E_zetaT < r.E_zeta0;
    // least squares of log E_zeta against t over the last 80% of the horizon
    const double t0 = initial.time, t_fit = t0 + 0.2 * horizon;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& s : ts.samples) {
        if (s.t < t_fit || !(s.E_zeta > 0)) continue;
        double x = s.t - t0, y = std::log(s.E_zeta);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) r.rate = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    r.zeta0 = 1.5 * r.rate;

    if (forced_solver) {
        r.forced = true;
        r.calV = forced_solver->forcing().calV();
        TimeSeries tf = run_recorded(*forced_solver, initial, horizon, zeta);
        double excess = 0;
        for (const auto& s : tf.samples)
            excess = std::max(excess, s.E_zeta - r.E_zeta0 * std::exp(-r.rate * (s.t - t0)));
        r.c10 = r.calV > 0 ? excess / r.calV : 0.0;
    }
    return r;
}

std::string decay_report_text(const DecayReport& r) {
    std::ostringstream os;
    if (r.trivial) {
        os << "trivial run: initial perturbed energy is zero, decay rate undefined\n";
        return os.str();
    }
    os << "E_zeta(0) = " << format_double(r.E_zeta0) << "\n"
       << "E_zeta(T) = " << format_double(r.E_zetaT) << "\n"
       << "decreased = " << (r.decreased ? "yes" : "no") << "\n"
       << "decay_rate = " << format_double(r.rate) << "\n"
       << "zeta0 = " << format_double(r.zeta0) << "\n";
    if (r.forced)
        os << "calV = " << format_double(r.calV) << "\n"
           << "c10 = " << format_double(r.c10) << "\n";
    return os.str();
}

TwinReport twin_divergence(CoupledSolver& solver, const SystemState& state, const Vec2& perturbation,
                           double horizon) {
    const Grid& g = solver.grid();
    const Masks& m = solver.masks();
    const PhysicalParams& p = solver.params();
    SystemState a = state, b = state;
    b.s.delta += perturbation;
    auto dist = [&](TwinReport& rep) {
        SystemState d = a;
        for (size_t f = 0; f < d.u.size(); ++f) d.u[f] -= b.u[f];
        d.s.xi -= b.s.xi;
        d.s.delta -= b.s.delta;
        d.s.omega -= b.s.omega;
        d.s.theta -= b.s.theta;
        double e = energy_norm(g, m, p, d);
        double s = std::sqrt(d.s.xi.squaredNorm() + d.s.delta.squaredNorm() + d.s.omega * d.s.omega +
                             d.s.theta * d.s.theta);
        rep.max_energy_distance = std::max(rep.max_energy_distance, e);
        rep.max_structural_distance = std::max(rep.max_structural_distance, s);
        return e;
    };
    TwinReport rep;
    rep.initial_distance = dist(rep);
    long n = std::lround(horizon / solver.config().dt);
    for (long k = 0; k < n; ++k) {
        solver.step(a);
        solver.step(b);
        dist(rep);
    }
    return rep;
}

}  // namespace fsi
