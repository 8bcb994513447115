#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace fsi {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double pi = std::numbers::pi;

// x^perp = (-x3, x2) in the (x2, x3) labeling
inline Vec2 perp(const Vec2& v) { return Vec2(-v[1], v[0]); }

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainTooSmall : InvalidInput {
    using InvalidInput::InvalidInput;
};

struct NumericalFailure : std::runtime_error {
    int iterations = 0;
    NumericalFailure(const std::string& what, int iters = 0)
        : std::runtime_error(what), iterations(iters) {}
};

struct StepRejected : std::runtime_error {
    double admissible_dt;
    StepRejected(const std::string& what, double dt_ok)
        : std::runtime_error(what), admissible_dt(dt_ok) {}
};

struct UndefinedEstimate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fsi
