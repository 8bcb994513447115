#pragma once

#include "fsi/config.hpp"
#include "fsi/energy.hpp"
#include "fsi/stepper.hpp"

#include <memory>
#include <random>

// Small, fast setup shared by the unit tests: a disk of radius 0.6 (or an ellipse) in B_3.2 on 48^2.
namespace testing_support {

inline fsi::BodyGeometry small_disk() {
    fsi::BodyGeometry b;
    b.shape = fsi::Shape::disk(0.6);
    b.com_offset = fsi::Vec2::Zero();
    return b;
}

inline fsi::BodyGeometry small_ellipse() {
    fsi::BodyGeometry b;
    b.shape = fsi::Shape::ellipse(0.7, 0.55);
    b.com_offset = fsi::Vec2(0.01, 0.0);
    return b;
}

inline fsi::Grid small_grid() { return fsi::make_grid(3.2, 48, 1.0); }

inline fsi::PhysicalParams small_params() {
    fsi::PhysicalParams p;
    p.lambda = 5.0;
    p.varpi = 0.1;
    return p;
}

inline fsi::Forcing sine_forcing(double T, double amp = 1.0) {
    fsi::Forcing f;
    f.period_T = T;
    f.cos_coeffs = {0.0};
    f.sin_coeffs = {amp};
    return f;
}

inline fsi::Forcing no_forcing() {
    fsi::Forcing f;
    f.cos_coeffs = {0.0};
    f.sin_coeffs = {};
    return f;
}

inline std::unique_ptr<fsi::CoupledSolver> small_solver(const fsi::Forcing& f, double dt = 5e-3,
                                                       const fsi::BodyGeometry& b = small_ellipse(),
                                                       const fsi::PhysicalParams& p = small_params()) {
    fsi::StepConfig cfg;
    cfg.dt = dt;
    return std::make_unique<fsi::CoupledSolver>(small_grid(), p, b, f, cfg);
}

// Minimal config text for the harness, on the small setup.
inline std::string small_config_text(double T = 0.5) {
    return R"({"forcing.period_T": )" + std::to_string(T) +
           R"(, "grid.R": 3.2, "grid.n": 48, "body.shape": "ellipse", "body.a": 0.7, "body.b": 0.55,
              "body.com_offset": [0.01, 0.0], "physics.lambda": 5.0, "physics.varpi": 0.1,
              "step.dt": 0.005, "orbit.n_phase": 16, "run.t_end": 0.05})";
}

}  // namespace testing_support
