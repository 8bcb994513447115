#include "fsi/stepper.hpp"

#include <cmath>
#include <sstream>

namespace fsi {

void StepConfig::validate() const {
    if (!(dt > 0)) throw InvalidInput("dt must be positive");
    if (eps_pen < 0) throw InvalidInput("eps_pen must be non-negative");
    if (n_subiter < 1) throw InvalidInput("n_subiter must be at least 1");
    if (!(cfl_max > 0)) throw InvalidInput("cfl_max must be positive");
    if (!(poisson_tol > 0) || !(diffusion_tol > 0)) throw InvalidInput("solver tolerances must be positive");
}

CoupledSolver::CoupledSolver(const Grid& g, const PhysicalParams& params, const BodyGeometry& geom,
                             const Forcing& forcing, const StepConfig& cfg, double eta,
                             const CutoffProfile* cutoff)
    : g_(g), params_(params), geom_(geom), forcing_(forcing), cfg_(cfg) {
    params_.validate_planar();
    geom_.validate();
    cfg_.validate();
    if (!(g_.R > 3 * geom_.R_star)) throw DomainTooSmall("truncation radius must exceed 3 R_star");
    cc_ = coupling_constants(params_, geom_);
    m_ = build_masks(g_, geom_);
    kern_ = make_mollifier(eta > 0 ? eta : 2 * g_.h, g_.h, inradius(geom_));
    if (cutoff)
        cutoff_ = *cutoff;
    else
        cutoff_.R_star = geom_.R_star;
    lift_ = make_lifting_basis(g_, m_, cutoff_);

    const double r = cfg_.dt / cfg_.eps();
    beta_.assign(g_.nfaces(), 1.0);
    for (int f = 0; f < g_.nfaces(); ++f)
        if (m_.face_body[f]) {
            beta_[f] = 1.0 / (1.0 + r);
            body_faces_.push_back(f);
        }
    psolve_ = std::make_unique<PressureSolver>(g_, m_, beta_, cfg_.poisson_pc);
    phi_.assign(g_.ncells(), 0.0);
}

SystemState CoupledSolver::zero_state() const {
    SystemState s;
    s.u.assign(g_.nfaces(), 0.0);
    s.p.assign(g_.ncells(), 0.0);
    return s;
}

SystemState CoupledSolver::rest_state(const StructuralState& ss) const {
    SystemState s = zero_state();
    s.s = ss;
    if (ss.xi.isZero() && ss.omega == 0.0) return s;
    rigid_field(g_, ss.xi, ss.omega, &m_.face_body, s.u);
    Projector proj(g_, m_, cfg_.poisson_pc, cfg_.poisson_tol);
    proj.project(s.u);
    return s;
}

void CoupledSolver::advective_velocity(const SystemState& st, FaceVec& a) const {
    mollify(g_, kern_, st.u, a);
    const Vec2& xi = st.s.xi;
    const double om = st.s.omega;
    const int n = g_.n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i) a[g_.id2(i, j)] -= xi[0] - om * g_.xc(j);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i) a[g_.id3(i, j)] -= xi[1] + om * g_.xc(i);
}

double CoupledSolver::cfl_number(const FaceVec& a) const {
    // faces further out than R + h never enter a free-face stencil
    const double lim2 = (g_.R + g_.h) * (g_.R + g_.h);
    double m = 0;
    for (int f = 0; f < g_.nfaces(); ++f)
        if (g_.face_pos(f).squaredNorm() < lim2) m = std::max(m, std::abs(a[f]));
    return cfg_.dt * params_.lambda * m / g_.h;
}

Vec3 CoupledSolver::body_sums(const FaceVec& v) const {
    Vec3 s = Vec3::Zero();
    for (int f : body_faces_) {
        Vec2 x = g_.face_pos(f);
        if (g_.face_comp(f) == 0) {
            s[0] += v[f];
            s[2] += -x[1] * v[f];
        } else {
            s[1] += v[f];
            s[2] += x[0] * v[f];
        }
    }
    return s * (g_.h * g_.h);
}

void CoupledSolver::diffuse(FaceVec& x, int& iters) {
    // (I - dt Lap) x = b, CG from x0 = b; the diagonal is constant so Jacobi scaling is implicit
    const double dt = cfg_.dt;
    const FaceVec b = x;
    const double bmax = max_abs(b);
    iters = 0;
    if (bmax == 0.0) return;
    const double tol = cfg_.diffusion_tol * bmax;
    helmholtz_apply(g_, m_, dt, x, cg_q_);
    cg_r_.resize(x.size());
    for (size_t f = 0; f < x.size(); ++f) cg_r_[f] = b[f] - cg_q_[f];
    cg_p_ = cg_r_;
    double rr = dot(cg_r_, cg_r_);
    for (iters = 1; iters <= 1000; ++iters) {
        if (max_abs(cg_r_) <= tol) {
            --iters;
            return;
        }
        helmholtz_apply(g_, m_, dt, cg_p_, cg_q_);
        double alpha = rr / dot(cg_p_, cg_q_);
        for (size_t f = 0; f < x.size(); ++f) {
            x[f] += alpha * cg_p_[f];
            cg_r_[f] -= alpha * cg_q_[f];
        }
        double rr1 = dot(cg_r_, cg_r_);
        if (!std::isfinite(rr1)) throw NumericalFailure("diffusion solve produced non-finite values", iters);
        double beta = rr1 / rr;
        rr = rr1;
        for (size_t f = 0; f < x.size(); ++f) cg_p_[f] = cg_r_[f] + beta * cg_p_[f];
    }
    if (max_abs(cg_r_) > tol) throw NumericalFailure("diffusion solve did not converge", iters);
}

StructuralState CoupledSolver::structural_update(const StructuralState& s, double t,
                                                 const HydroLoads& L) const {
    const double dt = cfg_.dt;
    const double V = forcing_.value(t), Vd = forcing_.derivative(t);
    const Vec2 b = flow_direction_planar(s.theta, params_.b_tilde);
    const Mat2 B = stiffness_planar(s.theta, params_.stiffness_A);
    StructuralState r;
    r.xi = s.xi + dt * (-s.omega * perp(s.xi) - B * s.delta + cc_.c * Vd * b) -
           params_.varpi * dt * L.Sigma;
    r.omega = s.omega + dt * (-params_.k * s.theta + cc_.d * Vd) - params_.tau * dt * L.sigma1;
    r.delta = s.delta + dt * (r.xi - V * b - s.omega * perp(s.delta));
    r.theta = s.theta + dt * r.omega;
    return r;
}

StepInfo CoupledSolver::step(SystemState& st) {
    StepInfo info;
    const double dt = cfg_.dt, lam = params_.lambda;
    const double r = dt / cfg_.eps();
    const double t = st.time;
    const StructuralState s0 = st.s;
    const double om = s0.omega;
    const int NF = g_.nfaces();
    if (!st.s.xi.allFinite() || !st.s.delta.allFinite() || !std::isfinite(om) ||
        !std::isfinite(s0.theta))
        throw NumericalFailure("structural state is not finite");

    advective_velocity(st, a_);
    info.cfl = cfl_number(a_);
    if (!std::isfinite(info.cfl)) throw NumericalFailure("advecting velocity is not finite");
    if (info.cfl > cfg_.cfl_max) {
        std::ostringstream os;
        os << "CFL " << info.cfl << " exceeds " << cfg_.cfl_max << " at t=" << t;
        throw StepRejected(os.str(), dt * cfg_.cfl_max / info.cfl);
    }
    build_advection_fluxes(g_, a_, fl_);

    // (1) explicit advection and frame term, three-stage SSP Runge-Kutta with frozen fluxes
    const FaceVec& u = st.u;
    advection_apply(g_, m_, fl_, lam, om, u, k1_);
    u1_.resize(NF);
    for (int f = 0; f < NF; ++f) u1_[f] = u[f] + dt * k1_[f];
    advection_apply(g_, m_, fl_, lam, om, u1_, k1_);
    u2_.resize(NF);
    for (int f = 0; f < NF; ++f) u2_[f] = 0.75 * u[f] + 0.25 * (u1_[f] + dt * k1_[f]);
    advection_apply(g_, m_, fl_, lam, om, u2_, k1_);
    ustar_.resize(NF);
    w_.resize(NF);
    for (int f = 0; f < NF; ++f) {
        ustar_[f] = (u[f] + 2.0 * (u2_[f] + dt * k1_[f])) / 3.0;
        w_[f] = (u[f] + u1_[f] + 4.0 * u2_[f]) / 6.0;
    }
    // frame-term momentum removed from the body region during the explicit stage
    perp_field(g_, m_, w_, perp_);
    const Vec3 frame = dt * om * body_sums(perp_);

    // (2) implicit diffusion
    diffuse(ustar_, info.diffusion_iters);

    // (3)-(6) penalization and projection solved together, loads, structure; repeated n_subiter times
    const Vec3 mom0 = body_sums(u);
    StructuralState snew = s0;
    Vec2 xs = s0.xi;
    double ws = s0.omega;
    const double h2 = g_.h * g_.h;
    // warm start from the previous pressure, so a step depends on the state alone
    phi_.assign(g_.ncells(), 0.0);
    if ((int)st.p.size() == g_.ncells())
        for (int c = 0; c < g_.ncells(); ++c) phi_[c] = st.p[c] * dt;
    for (int pass = 0; pass < cfg_.n_subiter; ++pass) {
        ut_ = ustar_;
        for (int f : body_faces_) {
            Vec2 x = g_.face_pos(f);
            double v = g_.face_comp(f) == 0 ? xs[0] - ws * x[1] : xs[1] + ws * x[0];
            ut_[f] = (ustar_[f] + r * v) / (1.0 + r);
        }
        divergence(g_, ut_, div_);
        rhs_.resize(g_.ncells());
        for (int c = 0; c < g_.ncells(); ++c) rhs_[c] = m_.cell_active[c] ? -h2 * div_[c] : 0.0;
        double umax = max_abs(ut_);
        if (umax > 0)
            info.poisson_iters += psolve_->solve(rhs_, phi_, cfg_.poisson_tol * g_.h * umax);
        else
            std::fill(phi_.begin(), phi_.end(), 0.0);
        gradient(g_, m_, phi_, grad_);
        for (int f = 0; f < NF; ++f) ut_[f] -= beta_[f] * grad_[f];

        // loads by momentum exchange over the body faces
        Vec3 mom1 = Vec3::Zero(), pen = Vec3::Zero();
        for (int f : body_faces_) {
            Vec2 x = g_.face_pos(f);
            double v = g_.face_comp(f) == 0 ? xs[0] - ws * x[1] : xs[1] + ws * x[0];
            double d = ut_[f] - v;
            if (g_.face_comp(f) == 0) {
                mom1[0] += ut_[f];
                mom1[2] += -x[1] * ut_[f];
                pen[0] += d;
                pen[2] += -x[1] * d;
            } else {
                mom1[1] += ut_[f];
                mom1[2] += x[0] * ut_[f];
                pen[1] += d;
                pen[2] += x[0] * d;
            }
        }
        mom1 *= h2;
        pen *= h2;
        Vec3 F = (mom1 - mom0 + r * pen + frame) / dt;
        HydroLoads L;
        L.Sigma = -F.head<2>();
        L.sigma1 = -F[2];
        L.Sigma_pen = -pen.head<2>() / cfg_.eps();
        L.sigma1_pen = -pen[2] / cfg_.eps();
        info.loads = L;

        snew = structural_update(s0, t, L);
        xs = snew.xi;
        ws = snew.omega;
    }

    st.u = ut_;
    st.s = snew;
    st.p.resize(g_.ncells());
    for (int c = 0; c < g_.ncells(); ++c) st.p[c] = phi_[c] / dt;
    st.time = t + dt;

    divergence(g_, st.u, div_);
    double umax = max_abs(st.u);
    info.div_rel = umax > 0 ? max_abs_active(m_, div_) * g_.h / umax : 0.0;
    if (!std::isfinite(umax)) throw NumericalFailure("flow field is not finite");
    return info;
}

HydroLoads CoupledSolver::control_volume_loads(const SystemState& before,
                                               const SystemState& after) const {
    const double dt = after.time - before.time;
    FaceVec a, adv;
    advective_velocity(before, a);
    AdvectionFluxes fl;
    build_advection_fluxes(g_, a, fl);
    advection_apply(g_, m_, fl, params_.lambda, before.s.omega, after.u, adv);
    FaceVec acc(g_.nfaces());
    for (int f = 0; f < g_.nfaces(); ++f) acc[f] = (after.u[f] - before.u[f]) / dt - adv[f];
    const FaceVec* tests[3] = {&lift_.H2, &lift_.H3, &lift_.Htheta};
    double Fe[3];
    for (int k = 0; k < 3; ++k)
        Fe[k] = -(masked_dot(g_, m_.face_fluid, acc, *tests[k]) +
                  deformation_inner(g_, m_, after.u, *tests[k], true));
    HydroLoads L;
    L.Sigma = -Vec2(Fe[0], Fe[1]);
    L.sigma1 = -Fe[2];
    return L;
}

SystemState simulate(CoupledSolver& solver, SystemState state, double t_end, int output_interval,
                     const StepObserver& obs) {
    const double dt = solver.config().dt;
    if (t_end < state.time) throw InvalidInput("t_end precedes the initial time");
    long n = std::lround((t_end - state.time) / dt);
    if (output_interval < 1) output_interval = 1;
    if (obs) obs(state, StepInfo{}, 0);
    for (long k = 1; k <= n; ++k) {
        StepInfo info = solver.step(state);
        if (obs && k % output_interval == 0) obs(state, info, k);
    }
    return state;
}

}  // namespace fsi
