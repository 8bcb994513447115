#include "fsi/harness.hpp"

#include "fsi/io.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace fsi {

namespace fs = std::filesystem;

namespace {

const double nan_v = std::numeric_limits<double>::quiet_NaN();

void log_line(const HarnessContext& ctx, const std::string& s) {
    if (!ctx.log) return;
#pragma omp critical(fsi_harness_log)
    { *ctx.log << s << std::endl; }
}

void emit(const HarnessContext& ctx, const std::string& name, const std::string& content) {
    fs::create_directories(ctx.out);
    write_file_atomic(ctx.out / name, content);
}

std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch == '\n' ? ' ' : ch;
    }
    return q + "\"";
}

bool zero_structure(const StructuralState& s) {
    return s.xi.isZero(0) && s.delta.isZero(0) && s.omega == 0 && s.theta == 0;
}

std::string orbit_phases_csv(const CoupledSolver& solver, const PeriodicOrbit& orbit) {
    std::string out = csv_header({"t", "xi2", "xi3", "delta2", "delta3", "omega", "theta", "E", "V"});
    for (const auto& st : orbit.states) {
        double E = total_energy(solver.grid(), solver.masks(), solver.params(), st).E;
        out += csv_row({st.time, st.s.xi[0], st.s.xi[1], st.s.delta[0], st.s.delta[1], st.s.omega, st.s.theta, E,
                        solver.forcing().value(st.time)});
    }
    return out;
}

std::string periodicity_csv(const PeriodicityDefects& d) {
    return csv_header({"omega_integral", "translation_integral", "mean_omega", "mean_translation", "endpoint",
                       "theta_drift", "max_abs_theta"}) +
           csv_row({d.omega_integral, d.translation_integral, d.mean_omega, d.mean_translation, d.endpoint,
                    d.theta_drift, d.max_abs_theta});
}

std::string residual_history_csv(const PeriodicOrbit& orbit) {
    std::string out = csv_header({"iteration", "residual"});
    for (size_t i = 0; i < orbit.residual_history.size(); ++i)
        out += csv_row({(double)(i + 1), orbit.residual_history[i]});
    return out;
}

// Largest relative deviation |a - b| / max(|b|, tiny) over the face vectors.
double rel_diff(const FaceVec& a, const FaceVec& b) {
    double d = 0, s = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
    }
    return d / std::max(s, 1e-300);
}

double rel_divergence(const Grid& g, const FaceVec& u) {
    CellVec div;
    divergence(g, u, div);
    return max_abs(div) * g.h / std::max(max_abs(u), 1e-300);
}

}  // namespace

std::unique_ptr<CoupledSolver> make_solver(const ExperimentConfig& c, bool periodic) {
    StepConfig step = periodic ? periodic_step_config(c.step, c.forcing.period_T, c.orbit.n_phase) : c.step;
    CutoffProfile psi = c.cutoff();
    return std::make_unique<CoupledSolver>(c.grid(), c.physics, c.body, c.effective_forcing(), step, c.eta, &psi);
}

SystemState initial_state(const CoupledSolver& solver, const ExperimentConfig& c) {
    return zero_structure(c.run.initial) ? solver.zero_state() : solver.rest_state(c.run.initial);
}

// ---- simulate ----

SimulateResult run_simulate(const ExperimentConfig& c, const HarnessContext& ctx) {
    emit(ctx, "config.json", resolved_config_text(c));
    auto solver = make_solver(c, false);
    const double zeta = compute_zeta1(c.physics, solver->lifting().c1_l2);
    SeriesRecorder rec(*solver, zeta);
    SimulateResult res;
    std::exception_ptr err;
    try {
        res.final_state = simulate(*solver, initial_state(*solver, c), c.run.t_end, c.run.output_interval,
                                   rec.observer());
    } catch (const std::exception& e) {
        log_line(ctx, std::string("simulate: ") + e.what());
        err = std::current_exception();
    }
    res.series = rec.series();
    res.balance = energy_balance_residual(res.series, c.physics, solver->coupling());
    emit(ctx, "series.csv", series_csv(res.series));
    TraceEstimate kappa;
    bool have_kappa = false;
    try {
        kappa = estimate_trace_constant(res.series);
        have_kappa = true;
    } catch (const UndefinedEstimate&) {
    }
    emit(ctx, "energy.csv", energy_report_csv(res.series, res.balance, have_kappa ? &kappa : nullptr));
    if (err) std::rethrow_exception(err);
    write_checkpoint(ctx.out / "final.chk", solver->grid(), res.final_state);
    return res;
}

// ---- periodic orbit ----

std::string weak_diagnostics_csv(const CoupledSolver& solver, const PeriodicOrbit& orbit) {
    std::string out = csv_header(weak_diagnostics_columns);
    ThetaBarIdentity id = mean_rotation_identity(solver, orbit);
    PointwiseBoundReport pb = pointwise_bound_report(solver, orbit);
    out += "G," + csv_row({id.weak_residual_G, id.lhs, id.rhs, id.mismatch, id.ratio, pb.theta.ok ? 1.0 : 0.0,
                           pb.theta.max_violation});
    double rI = weak_residual(solver, orbit, family_I(solver, mean_chi(orbit)));
    out += "I," + csv_row({rI, nan_v, nan_v, nan_v, nan_v, pb.delta.ok ? 1.0 : 0.0, pb.delta.max_violation});
    return out;
}

OrbitResult run_find_periodic(const ExperimentConfig& c, const HarnessContext& ctx) {
    emit(ctx, "config.json", resolved_config_text(c));
    auto solver = make_solver(c, true);
    OrbitResult r;
    r.dt = solver->config().dt;
    r.orbit = find_periodic_orbit(*solver, c.orbit, nullptr, [&](int it, double res) {
        std::ostringstream os;
        os << "picard " << it << " residual " << res;
        log_line(ctx, os.str());
    });
    r.metrics = orbit_metrics(*solver, r.orbit);
    r.defects = verify_periodicity(*solver, r.orbit);
    emit(ctx, "orbit_metrics.csv",
         csv_header(orbit_metrics_columns) + orbit_metrics_row(r.orbit, r.metrics, forcing_sup(solver->forcing())));
    emit(ctx, "residual_history.csv", residual_history_csv(r.orbit));
    emit(ctx, "orbit_phases.csv", orbit_phases_csv(*solver, r.orbit));
    emit(ctx, "periodicity.csv", periodicity_csv(r.defects));
    emit(ctx, "weak_diagnostics.csv", weak_diagnostics_csv(*solver, r.orbit));
    fs::create_directories(ctx.out / "orbit");
    for (size_t i = 0; i < r.orbit.states.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "phase_%03zu.chk", i);
        write_checkpoint(ctx.out / "orbit" / name, solver->grid(), r.orbit.states[i]);
    }
    if (!r.orbit.converged)
        throw NumericalFailure("Picard iteration did not reach the tolerance", r.orbit.iterations);
    return r;
}

// ---- sweeps ----

std::string SweepTable::csv() const {
    std::vector<std::string> cols = {swept,           "converged",     "failed",        "residual",
                                     "iterations",    "h",             "n",             "max_abs_delta",
                                     "max_abs_theta", "L2_xi",         "L2_omega",      "L2_delta",
                                     "L2_theta",      "int_grad_u_sq", "calV",          "ratio_weaksol",
                                     "ratio_weaksol_2", "ratio_point"};
    cols.insert(cols.end(), extra_columns.begin(), extra_columns.end());
    cols.push_back("config_hash");
    cols.push_back("error");
    std::string out = csv_header(cols);
    for (const auto& r : rows) {
        const OrbitMetrics& m = r.metrics;
        std::vector<double> v = {r.value,
                                 r.converged ? 1.0 : 0.0,
                                 r.failed ? 1.0 : 0.0,
                                 r.failed ? nan_v : r.residual,
                                 (double)r.iterations,
                                 r.h,
                                 (double)r.n};
        if (r.failed) {
            v.insert(v.end(), 11, nan_v);
        } else {
            v.insert(v.end(), {m.max_abs_delta, m.max_abs_theta, m.L2_xi, m.L2_omega, m.L2_delta, m.L2_theta,
                               m.int_grad_u_sq, m.calV, m.ratio_weaksol, m.ratio_weaksol_2, m.ratio_point});
        }
        std::vector<double> extra = r.extra;
        extra.resize(extra_columns.size(), nan_v);
        v.insert(v.end(), extra.begin(), extra.end());
        std::string line = csv_row(v);
        line.pop_back();
        out += line + "," + r.config_hash + "," + csv_text(r.error) + "\n";
    }
    return out;
}

namespace {

using PointConfig = std::function<ExperimentConfig(double)>;
using PointExtra = std::function<std::vector<double>(const ExperimentConfig&)>;

SweepTable run_points(const std::string& swept, const std::vector<std::string>& extra_cols,
                      const std::vector<double>& values, const PointConfig& point, const PointExtra& extra,
                      const HarnessContext& ctx) {
    SweepTable t;
    t.swept = swept;
    t.extra_columns = extra_cols;
    t.rows.resize(values.size());
    auto run_one = [&](size_t i) {
        SweepRow& row = t.rows[i];
        row.value = values[i];
        try {
            ExperimentConfig pc = point(values[i]);
            row.config_hash = config_hash(pc);
            Grid g = pc.grid();
            row.h = g.h;
            row.n = g.n;
            if (extra) row.extra = extra(pc);
            auto solver = make_solver(pc, true);
            PeriodicOrbit orbit = find_periodic_orbit(*solver, pc.orbit, nullptr, [&](int it, double res) {
                std::ostringstream os;
                os << swept << "=" << values[i] << " picard " << it << " residual " << res;
                log_line(ctx, os.str());
            });
            row.converged = orbit.converged;
            row.residual = orbit.residual;
            row.iterations = orbit.iterations;
            row.metrics = orbit_metrics(*solver, orbit);
        } catch (const NumericalFailure& e) {
            row.failed = true;
            row.iterations = e.iterations;
            row.error = e.what();
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
    };
    const int n = (int)values.size();
    if (ctx.jobs <= 1) {
        for (int i = 0; i < n; ++i) run_one(i);
    } else {
#pragma omp parallel for schedule(dynamic, 1) num_threads(ctx.jobs)
        for (int i = 0; i < n; ++i) run_one(i);
    }
    std::stable_sort(t.rows.begin(), t.rows.end(),
                     [](const SweepRow& a, const SweepRow& b) { return a.value < b.value; });
    return t;
}

void require_nonempty(const std::vector<double>& v, const char* key) {
    if (v.empty()) throw ConfigError(key, std::string("key \"") + key + "\": list is empty");
}

}  // namespace

VacuumEnvelope vacuum_envelope(const PhysicalParams& p, const CouplingConstants& cc, const Forcing& f,
                               int periods, int samples_per_period) {
    VacuumEnvelope env;
    VacuumOrbit vo(p, cc, f, StructuralState{});
    const auto& rot = vo.rotational_mode();
    env.resonant = vo.any_resonance();
    if (rot.resonant()) env.predicted_slope = std::hypot(rot.res_C, rot.res_S) / (2 * rot.Omega);
    const double T = f.period_T;
    const long N = (long)periods * samples_per_period;
    const long n5 = std::min<long>(5L * samples_per_period, N);
    const int fit_periods = std::min(20, periods);
    const long fit_from = N - (long)fit_periods * samples_per_period;
    double run_max = 0;
    // least squares of the running maximum against t over the final periods
    double st = 0, sy = 0, stt = 0, sty = 0, cnt = 0;
    for (long i = 0; i <= N; ++i) {
        double t = T * (double)i / samples_per_period;
        run_max = std::max(run_max, std::abs(vo.eval(t).theta));
        if (i == n5) env.max5 = run_max;
        if (i >= fit_from) {
            st += t;
            sy += run_max;
            stt += t * t;
            sty += t * run_max;
            cnt += 1;
        }
    }
    env.maxN = run_max;
    env.growth = env.max5 > 0 ? env.maxN / env.max5 : 0.0;
    double den = cnt * stt - st * st;
    env.slope = den > 0 ? (cnt * sty - st * sy) / den : 0.0;
    return env;
}

SweepTable run_sweep_frequency(const ExperimentConfig& c, const HarnessContext& ctx) {
    require_nonempty(c.sweep.T_list, "sweep.T_list");
    for (double T : c.sweep.T_list)
        if (!(T > 0)) throw ConfigError("sweep.T_list", "key \"sweep.T_list\": periods must be positive");
    emit(ctx, "config.json", resolved_config_text(c));
    auto point = [&](double T) {
        ExperimentConfig pc = c;
        pc.experiment = "find-periodic";
        pc.forcing.period_T = T;
        pc.normalize_forcing = true;
        return pc;
    };
    auto extra = [&](const ExperimentConfig& pc) {
        auto geom = coupling_constants(pc.physics, pc.body);
        VacuumEnvelope e = vacuum_envelope(pc.physics, geom, pc.effective_forcing(), c.sweep.vacuum_periods);
        return std::vector<double>{e.resonant ? 1.0 : 0.0, e.growth, e.slope, e.predicted_slope};
    };
    SweepTable t = run_points("T", {"vacuum_resonant", "vacuum_growth", "vacuum_slope", "vacuum_predicted_slope"},
                              c.sweep.T_list, point, extra, ctx);
    emit(ctx, "sweep_frequency.csv", t.csv());
    return t;
}

SweepTable run_sweep_radius(const ExperimentConfig& c, const HarnessContext& ctx) {
    const auto& Rs = c.sweep.R_list;
    require_nonempty(Rs, "sweep.R_list");
    for (size_t i = 0; i < Rs.size(); ++i) {
        if (!(Rs[i] > 3 * c.body.R_star))
            throw ConfigError("sweep.R_list", "key \"sweep.R_list\": every radius must exceed 3 R_star");
        if (i > 0 && !(Rs[i] > Rs[i - 1]))
            throw ConfigError("sweep.R_list", "key \"sweep.R_list\": radii must be increasing");
    }
    emit(ctx, "config.json", resolved_config_text(c));
    const double h = 2 * c.grid_R / c.grid_n;
    auto point = [&](double R) {
        ExperimentConfig pc = c;
        pc.experiment = "find-periodic";
        pc.grid_R = R;
        pc.grid_n = 2 * (int)std::lround(R / h);
        return pc;
    };
    SweepTable t = run_points("R", {"diff_max_abs_delta", "diff_max_abs_theta"}, Rs, point, nullptr, ctx);
    for (size_t i = 0; i < t.rows.size(); ++i) {
        t.rows[i].extra = {nan_v, nan_v};
        if (i == 0 || t.rows[i].failed || t.rows[i - 1].failed) continue;
        const OrbitMetrics &a = t.rows[i - 1].metrics, &b = t.rows[i].metrics;
        t.rows[i].extra = {std::abs(b.max_abs_delta - a.max_abs_delta), std::abs(b.max_abs_theta - a.max_abs_theta)};
    }
    emit(ctx, "sweep_radius.csv", t.csv());
    return t;
}

SweepTable run_sweep_eta(const ExperimentConfig& c, const HarnessContext& ctx) {
    require_nonempty(c.sweep.eta_list, "sweep.eta_list");
    const double h = c.grid().h;
    const double eta0 = inradius(c.body);
    for (double e : c.sweep.eta_list)
        if (!(e >= 2 * h * (1 - 1e-12)) || !(e < eta0)) {
            std::ostringstream os;
            os << "key \"sweep.eta_list\": " << e << " lies outside [2h, eta0) = [" << 2 * h << ", " << eta0 << ")";
            throw ConfigError("sweep.eta_list", os.str());
        }
    emit(ctx, "config.json", resolved_config_text(c));
    auto point = [&](double e) {
        ExperimentConfig pc = c;
        pc.experiment = "find-periodic";
        pc.eta = e;
        return pc;
    };
    SweepTable t = run_points("eta", {}, c.sweep.eta_list, point, nullptr, ctx);
    emit(ctx, "sweep_eta.csv", t.csv());
    // relative spread (max - min) / max of the amplitude metrics over the converged rows
    double dmin = INFINITY, dmax = 0, tmin = INFINITY, tmax = 0;
    for (const auto& r : t.rows) {
        if (r.failed) continue;
        dmin = std::min(dmin, r.metrics.max_abs_delta);
        dmax = std::max(dmax, r.metrics.max_abs_delta);
        tmin = std::min(tmin, r.metrics.max_abs_theta);
        tmax = std::max(tmax, r.metrics.max_abs_theta);
    }
    std::ostringstream os;
    os << "spread_max_abs_delta " << format_double(dmax > 0 ? (dmax - dmin) / dmax : 0.0) << "\n";
    os << "spread_max_abs_theta " << format_double(tmax > 0 ? (tmax - tmin) / tmax : 0.0) << "\n";
    emit(ctx, "sweep_eta_summary.txt", os.str());
    return t;
}

// ---- verify ----

bool VerifyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string VerifyReport::text() const {
    std::string out;
    for (const auto& c : checks) {
        out += (c.pass ? "PASS " : "FAIL ") + c.name + " measured=" + format_double(c.measured) +
               " limit=" + format_double(c.limit);
        if (!c.detail.empty()) out += " " + c.detail;
        out += "\n";
    }
    return out;
}

VerifyReport run_verify(const ExperimentConfig& c, const HarnessContext& ctx) {
    VerifyReport rep;
    auto add = [&](const std::string& name, double measured, double limit, bool pass, const std::string& d = "") {
        rep.checks.push_back({name, pass, measured, limit, d});
        log_line(ctx, rep.checks.back().pass ? "PASS " + name : "FAIL " + name);
    };
    auto guarded = [&](const std::string& name, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            add(name, nan_v, nan_v, false, e.what());
        }
    };
    const PhysicalParams& p = c.physics;
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(-1.0, 1.0);

    guarded("rotation_additivity", [&] {
        double err = 0;
        for (int i = -6; i <= 6; ++i)
            for (int j = -6; j <= 6; ++j) {
                double a = 0.37 * i, b = 0.53 * j;
                err = std::max(err, (rotation_matrix(a) * rotation_matrix(b) - rotation_matrix(a + b))
                                        .cwiseAbs()
                                        .maxCoeff());
            }
        add("rotation_additivity", err, 1e-12, err <= 1e-12);
    });

    bool physics_ok = true;
    guarded("stiffness_spectrum", [&] {
        const Mat3& A = p.stiffness_A;
        double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
        Eigen::SelfAdjointEigenSolver<Mat3> es(A, Eigen::EigenvaluesOnly);
        Vec3 ev = es.eigenvalues();
        if (asym > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()) || !(ev[0] > 0)) {
            physics_ok = false;
            add("stiffness_spectrum", ev[0], 0, false, "stiffness_A is not symmetric positive definite");
            return;
        }
        double err = 0;
        for (int i = 0; i < 16; ++i) {
            Eigen::SelfAdjointEigenSolver<Mat3> eb(stiffness_in_body_frame(0.41 * i - 3, A), Eigen::EigenvaluesOnly);
            err = std::max(err, (eb.eigenvalues() - ev).cwiseAbs().maxCoeff());
        }
        double lim = 1e-10 * std::max(1.0, ev[2]);
        add("stiffness_spectrum", err, lim, err <= lim);
    });
    guarded("physics_constants", [&] {
        try {
            p.validate_planar();
            add("physics_constants", 0, 0, true);
        } catch (const std::exception& e) {
            physics_ok = false;
            add("physics_constants", nan_v, nan_v, false, e.what());
        }
    });

    guarded("isometry", [&] {
        double err = 0;
        for (int i = 0; i < 1000; ++i) {
            Vec2 d(U(rng), U(rng));
            double th = 10 * U(rng);
            err = std::max(err, std::abs((rotation_planar(th) * d).norm() - d.norm()));
        }
        add("isometry", err, 1e-12, err <= 1e-12);
    });

    guarded("cfl_limit", [&] {
        // three-stage SSP Runge-Kutta on centered advection is stable up to sqrt(3) on the imaginary axis
        const double lim = std::sqrt(3.0);
        add("cfl_limit", c.step.cfl_max, lim, c.step.cfl_max <= lim, "configured cfl_max");
    });

    guarded("vacuum_oracle", [&] {
        if (!physics_ok) throw InvalidInput("skipped: invalid physical constants");
        auto cc = coupling_constants(p, c.body);
        double err = 0;
        StructuralState s0;
        s0.xi = Vec2(0.01, -0.02);
        s0.delta = Vec2(0.003, 0.001);
        s0.omega = 0.02;
        s0.theta = -0.01;
        for (double T : {5.0, 2 * pi / std::sqrt(p.k)}) {
            Forcing f = c.forcing;
            f.period_T = T;
            VacuumOrbit vo(p, cc, f, s0);
            StructuralState a = integrate_structure_vacuum(p, cc, f, s0, 0, T, 1e-4);
            StructuralState b = vo.body_state(T);
            err = std::max({err, (a.xi - b.xi).norm(), (a.delta - b.delta).norm(), std::abs(a.omega - b.omega),
                            std::abs(a.theta - b.theta)});
        }
        add("vacuum_oracle", err, 1e-6, err <= 1e-6, "one period, non-resonant and resonant");
    });

    std::unique_ptr<CoupledSolver> solver;
    std::string why;
    try {
        if (!physics_ok) throw InvalidInput("invalid physical constants");
        ExperimentConfig sc = c;
        sc.step.cfl_max = std::max(sc.step.cfl_max, 1e3);  // the CFL limit is reported separately
        solver = make_solver(sc, false);
    } catch (const std::exception& e) {
        why = std::string("skipped: ") + e.what();
    }
    auto with_solver = [&](const std::string& name, const std::function<void(CoupledSolver&)>& fn) {
        if (!solver) {
            add(name, nan_v, nan_v, false, why);
            return;
        }
        guarded(name, [&] { fn(*solver); });
    };

    with_solver("mollifier_constant", [&](CoupledSolver& s) {
        const Grid& g = s.grid();
        FaceVec one(g.nfaces(), 1.0), out;
        mollify(g, s.kernel(), one, out);
        double err = 0;
        const double lim2 = std::pow(g.R - s.kernel().eta - 2 * g.h, 2);
        for (int f = 0; f < g.nfaces(); ++f)
            if (std::abs(g.face_pos(f)[0]) < std::sqrt(lim2) && std::abs(g.face_pos(f)[1]) < std::sqrt(lim2))
                err = std::max(err, std::abs(out[f] - 1.0));
        add("mollifier_constant", err, 1e-12, err <= 1e-12);
    });
    with_solver("mollifier_sup_bound", [&](CoupledSolver& s) {
        const Grid& g = s.grid();
        FaceVec u(g.nfaces()), out;
        double worst = 0;
        for (int trial = 0; trial < 5; ++trial) {
            double ss = 0;
            for (auto& x : u) {
                x = U(rng);
                ss += x * x;
            }
            mollify(g, s.kernel(), u, out);
            double bound = s.kernel().c_eta() * g.h * std::sqrt(ss);
            worst = std::max(worst, max_abs(out) / bound);
        }
        add("mollifier_sup_bound", worst, 1.0, worst <= 1.0, "max |k*u| / (c_eta ||u||)");
    });
    with_solver("projection_idempotence", [&](CoupledSolver& s) {
        const Grid& g = s.grid();
        const Masks& m = s.masks();
        Projector P(g, m, c.step.poisson_pc, 1e-13);
        FaceVec u(g.nfaces(), 0.0);
        for (int f = 0; f < g.nfaces(); ++f)
            if (m.face_free[f]) u[f] = U(rng);
        P.project(u);
        FaceVec u1 = u;
        P.project(u);
        double err = rel_diff(u, u1);
        add("projection_idempotence", err, 1e-10, err <= 1e-10);
        double div = rel_divergence(g, u1);
        add("projection_divergence", div, 1e-10, div <= 1e-10);
    });
    with_solver("lifting_divergence", [&](CoupledSolver& s) {
        const Grid& g = s.grid();
        const LiftingBasis& L = s.lifting();
        double d = std::max({rel_divergence(g, L.H2), rel_divergence(g, L.H3), rel_divergence(g, L.Htheta)});
        add("lifting_divergence", d, 1e-10, d <= 1e-10, "H2, H3, Htheta");
        TestField G = test_field_G(0.3, s.cutoff(), g);
        TestField I = test_field_I(0.4, -0.2, Vec2(0.05, -0.02), s.cutoff(), g);
        double dgi = std::max({rel_divergence(g, G.phi), rel_divergence(g, I.phi), rel_divergence(g, I.phi_t)});
        add("test_field_divergence", dgi, 1e-10, dgi <= 1e-10, "G, I and dI/dt");
    });
    with_solver("sandwich", [&](CoupledSolver& s) {
        const Grid& g = s.grid();
        const Masks& m = s.masks();
        const LiftingBasis& L = s.lifting();
        const double z1 = compute_zeta1(p, L.c1_l2);
        double zc = INFINITY;
        for (int i = 0; i < 8; ++i) zc = std::min(zc, critical_zeta(g, m, p, L, pi * i / 8));
        add("sandwich_zeta", z1, zc, z1 <= zc, "compute_zeta1 against the exact critical value");
        int bad = 0;
        SystemState st = s.zero_state();
        for (int trial = 0; trial < 200; ++trial) {
            const double a = std::pow(10.0, 2 * U(rng));
            for (int f = 0; f < g.nfaces(); ++f) st.u[f] = m.face_free[f] ? a * U(rng) * 0.1 : 0.0;
            st.s.xi = Vec2(U(rng), U(rng));
            st.s.delta = Vec2(U(rng), U(rng));
            st.s.omega = U(rng);
            st.s.theta = 3 * U(rng);
            double E = total_energy(g, m, p, st).E, Ez = perturbed_energy(g, m, p, L, st, z1);
            if (!(Ez >= 0.5 * E * (1 - 1e-12) && Ez <= 1.5 * E * (1 + 1e-12))) ++bad;
        }
        add("sandwich_random_states", bad, 0, bad == 0, "violations over 200 states");
    });
    with_solver("free_decay_monotone", [&](CoupledSolver&) {
        ExperimentConfig fc = c;
        fc.forcing.cos_coeffs = {0.0};
        fc.forcing.sin_coeffs = {};
        fc.step.cfl_max = std::max(fc.step.cfl_max, 1e3);
        auto fs = make_solver(fc, false);
        StructuralState s0;
        s0.xi = Vec2(0.05, 0.02);
        s0.omega = 0.1;
        s0.delta = Vec2(0.01, 0.0);
        double prev = INFINITY, worst = -INFINITY;
        simulate(*fs, fs->rest_state(s0), 100 * fc.step.dt, 1, [&](const SystemState& st, const StepInfo&, long) {
            double E = total_energy(fs->grid(), fs->masks(), p, st).E;
            if (std::isfinite(prev)) worst = std::max(worst, (E - prev) / prev);
            prev = E;
        });
        add("free_decay_monotone", worst, 0, worst <= 0, "largest relative energy increase per step, V = 0");
    });
    with_solver("energy_balance_short_run", [&](CoupledSolver& s) {
        // summed balance residual over the same interval at dt and dt/2: first order halves it
        auto run = [&](CoupledSolver& solver, int steps, double* cfl) {
            SeriesRecorder rec(solver, 0.0);
            simulate(solver, solver.zero_state(), steps * solver.config().dt, 1, rec.observer());
            if (cfl)
                for (const auto& smp : rec.series().samples) *cfl = std::max(*cfl, smp.cfl);
            return energy_balance_residual(rec.series(), p, solver.coupling()).sum_abs;
        };
        double cfl = 0;
        const double coarse = run(s, 200, &cfl);
        ExperimentConfig hc = c;
        hc.step.cfl_max = s.config().cfl_max;
        hc.step.dt = c.step.dt / 2;
        const double fine = run(*make_solver(hc, false), 400, nullptr);
        const double ratio = coarse / fine;
        add("energy_balance_short_run", ratio, 2.0, std::abs(ratio - 2.0) <= 0.4,
            "sum |r_i| at dt over sum at dt/2, 200 steps (pass within 2 +- 0.4)");
        add("cfl_short_run", cfl, c.step.cfl_max, cfl <= c.step.cfl_max, "largest CFL number over 200 steps");
    });

    emit(ctx, "verify.txt", rep.text());
    return rep;
}

// ---- symmetric mode ----

std::string SymmetricReport::text() const {
    std::ostringstream os;
    os << "d " << format_double(d) << "\n"
       << "max_abs_theta " << format_double(max_abs_theta) << "\n"
       << "max_abs_omega " << format_double(max_abs_omega) << "\n"
       << "max_abs_delta " << format_double(max_abs_delta) << "\n"
       << "noise_floor " << format_double(noise_floor) << "\n"
       << "rotation_quiescent " << (quiescent ? "yes" : "no") << "\n";
    return os.str();
}

SymmetricReport run_symmetric_mode(const ExperimentConfig& c, const HarnessContext& ctx) {
    if (!c.body.shape.is_disk()) throw InvalidMode("symmetric mode requires a disk body");
    if (!c.body.com_offset.isZero(0)) throw InvalidMode("symmetric mode requires the disk centered at the center of mass");
    ExperimentConfig sc = c;
    sc.run.initial.theta = 0;
    sc.run.initial.omega = 0;
    emit(ctx, "config.json", resolved_config_text(sc));
    auto solver = make_solver(sc, false);
    SymmetricReport r;
    r.d = solver->coupling().d;
    SeriesRecorder rec(*solver, compute_zeta1(sc.physics, solver->lifting().c1_l2));
    double max_xi = 0;
    long steps = 0;
    auto obs = rec.observer();
    simulate(*solver, initial_state(*solver, sc), sc.run.t_end, 1, [&](const SystemState& st, const StepInfo& info, long k) {
        r.max_abs_theta = std::max(r.max_abs_theta, std::abs(st.s.theta));
        r.max_abs_omega = std::max(r.max_abs_omega, std::abs(st.s.omega));
        r.max_abs_delta = std::max(r.max_abs_delta, st.s.delta.norm());
        max_xi = std::max(max_xi, st.s.xi.norm());
        steps = k;
        if (k % sc.run.output_interval == 0) obs(st, info, k);
    });
    r.noise_floor = DBL_EPSILON * (double)std::max(1L, steps) * std::max(r.max_abs_delta, max_xi);
    r.quiescent = r.max_abs_theta <= 100 * r.noise_floor;
    emit(ctx, "series.csv", series_csv(rec.series()));
    emit(ctx, "symmetric_mode.txt", r.text());
    return r;
}

// ---- report ----

std::string run_report(const HarnessContext& ctx) {
    struct Known {
        const char* file;
        const char* x;
        std::vector<const char*> y;
    };
    const std::vector<Known> known = {
        {"series.csv", "t", {"E", "E_zeta", "theta", "delta2", "delta3"}},
        {"energy.csv", "t", {"E", "dissipation", "balance_residual"}},
        {"orbit_phases.csv", "t", {"theta", "delta2", "delta3", "omega"}},
        {"residual_history.csv", "iteration", {"residual"}},
        {"sweep_frequency.csv", "T", {"max_abs_delta", "max_abs_theta", "vacuum_growth"}},
        {"sweep_radius.csv", "R", {"max_abs_delta", "max_abs_theta"}},
        {"sweep_eta.csv", "eta", {"max_abs_delta", "max_abs_theta"}},
    };
    std::ostringstream md, py;
    md << "# Results in " << ctx.out.filename().string() << "\n\n";
    py << "import csv\nimport sys\nfrom pathlib import Path\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\n"
          "import matplotlib.pyplot as plt\n\nroot = Path(sys.argv[1]) if len(sys.argv) > 1 else "
          "Path(__file__).parent\n\n\ndef load(name):\n    with open(root / name) as f:\n"
          "        return list(csv.DictReader(f))\n\n\ndef num(v):\n    try:\n        return float(v)\n"
          "    except ValueError:\n        return float(\"nan\")\n\n";
    int found = 0;
    for (const auto& k : known) {
        fs::path f = ctx.out / k.file;
        if (!fs::exists(f)) continue;
        ++found;
        std::istringstream in(read_file(f));
        std::string header, line, last;
        std::getline(in, header);
        long rows = 0;
        while (std::getline(in, line))
            if (!line.empty()) {
                ++rows;
                last = line;
            }
        md << "## " << k.file << "\n\n" << rows << " rows\n\n";
        if (!last.empty()) md << "```\n" << header << "\n" << last << "\n```\n\n";
        std::string stem = fs::path(k.file).stem().string();
        py << "rows = load(\"" << k.file << "\")\nfig, ax = plt.subplots()\n";
        for (const char* y : k.y)
            py << "if rows and \"" << y << "\" in rows[0]:\n    ax.plot([num(r[\"" << k.x << "\"]) for r in rows], "
               << "[num(r[\"" << y << "\"]) for r in rows], label=\"" << y << "\")\n";
        py << "ax.set_xlabel(\"" << k.x << "\")\nax.legend()\nfig.savefig(root / \"" << stem
           << ".png\", dpi=120)\nplt.close(fig)\n\n";
    }
    for (const char* extra : {"verify.txt", "symmetric_mode.txt", "sweep_eta_summary.txt", "periodicity.csv",
                              "weak_diagnostics.csv", "orbit_metrics.csv"}) {
        fs::path f = ctx.out / extra;
        if (!fs::exists(f)) continue;
        ++found;
        md << "## " << extra << "\n\n```\n" << read_file(f) << "```\n\n";
    }
    if (found == 0) md << "No result files found.\n";
    emit(ctx, "report.md", md.str());
    emit(ctx, "plot_results.py", py.str());
    return md.str();
}

}  // namespace fsi
