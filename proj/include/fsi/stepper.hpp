#pragma once

#include "fsi/grid.hpp"
#include "fsi/lifting.hpp"
#include "fsi/model.hpp"
#include "fsi/poisson.hpp"

#include <functional>
#include <memory>

namespace fsi {

struct StepConfig {
    double dt = 2e-3;
    double eps_pen = 0;  // 0 selects eps = dt
    int n_subiter = 2;
    // bound on dt * lambda * max|advecting velocity| / h
    double cfl_max = 1.7;
    Preconditioner poisson_pc = Preconditioner::cholesky;
    double poisson_tol = 1e-10;
    double diffusion_tol = 1e-10;

    double eps() const { return eps_pen > 0 ? eps_pen : dt; }
    void validate() const;
};

struct SystemState {
    FaceVec u;
    CellVec p;
    StructuralState s;
    double time = 0;
};

struct HydroLoads {
    Vec2 Sigma = Vec2::Zero();       // enters xi' = ... - varpi Sigma
    double sigma1 = 0;               // enters omega' = ... - tau sigma1
    Vec2 Sigma_pen = Vec2::Zero();   // -(1/eps) int_body (u - v) alone
    double sigma1_pen = 0;
};

struct StepInfo {
    HydroLoads loads;
    double cfl = 0;
    double div_rel = 0;
    int poisson_iters = 0;
    int diffusion_iters = 0;
};

// Geometry, parameters and discretization for one run; owns all operators and work arrays.
class CoupledSolver {
public:
    CoupledSolver(const Grid& g, const PhysicalParams& params, const BodyGeometry& geom,
                  const Forcing& forcing, const StepConfig& cfg, double eta = 0,
                  const CutoffProfile* cutoff = nullptr);

    // Advances st by one step of size cfg.dt. Throws StepRejected on CFL violation.
    StepInfo step(SystemState& st);

    SystemState zero_state() const;
    // Flow initialized to the rigid field of s inside the body and zero elsewhere, then projected.
    SystemState rest_state(const StructuralState& s) const;

    // k_eta * u - (xi + omega x^perp) on all faces
    void advective_velocity(const SystemState& st, FaceVec& a) const;
    double cfl_number(const FaceVec& a) const;

    // Volume estimator of the loads from the momentum balance of the fluid around the body,
    // tested against the lifting fields (support in the annulus R_star < r < 2 R_star).
    HydroLoads control_volume_loads(const SystemState& before, const SystemState& after) const;

    const Grid& grid() const { return g_; }
    const Masks& masks() const { return m_; }
    const MollifierKernel& kernel() const { return kern_; }
    const PhysicalParams& params() const { return params_; }
    const BodyGeometry& geometry() const { return geom_; }
    const Forcing& forcing() const { return forcing_; }
    const StepConfig& config() const { return cfg_; }
    const CouplingConstants& coupling() const { return cc_; }
    const CutoffProfile& cutoff() const { return cutoff_; }
    const LiftingBasis& lifting() const { return lift_; }

    // Structural update with given loads (semi-implicit Euler, velocities first).
    StructuralState structural_update(const StructuralState& s, double t, const HydroLoads& L) const;

private:
    void diffuse(FaceVec& u, int& iters);
    Vec3 body_sums(const FaceVec& v) const;  // (sum_2, sum_3, torque) over body faces, h^2 weighted

    Grid g_;
    PhysicalParams params_;
    BodyGeometry geom_;
    Forcing forcing_;
    StepConfig cfg_;
    CouplingConstants cc_;
    Masks m_;
    MollifierKernel kern_;
    CutoffProfile cutoff_;
    LiftingBasis lift_;
    FaceVec beta_;
    std::unique_ptr<PressureSolver> psolve_;
    std::vector<int> body_faces_;

    // work arrays
    FaceVec a_, k1_, u1_, u2_, w_, ustar_, ut_, grad_, cg_r_, cg_p_, cg_q_, perp_;
    CellVec div_, rhs_, phi_;
    AdvectionFluxes fl_;
};

using StepObserver = std::function<void(const SystemState&, const StepInfo&, long step)>;

// Runs round((t_end - t0) / dt) steps; the observer sees the initial state (step 0, empty info)
// and then every output_interval-th state.
SystemState simulate(CoupledSolver& solver, SystemState state, double t_end, int output_interval,
                     const StepObserver& obs);

}  // namespace fsi
