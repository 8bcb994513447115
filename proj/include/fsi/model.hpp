#pragma once

#include "fsi/common.hpp"

#include <optional>
#include <vector>

namespace fsi {

struct PhysicalParams {
    double lambda = 50.0;
    Mat3 stiffness_A = Vec3(1.0, 4.0, 9.0).asDiagonal();
    double k = 1.0;
    double varpi = 0.02;
    double tau = 1.0;
    double alpha = pi / 2;
    Vec2 b_tilde = Vec2(0.0, 1.0);

    // Throws InvalidInput on non-SPD stiffness, non-unit b_tilde or non-positive constants.
    void validate() const;
    // Additional requirement of the planar flow solver.
    void validate_planar() const;
    double rho1() const;  // smallest eigenvalue of stiffness_A
    double rho2() const;
};

struct Shape {
    enum class Kind { ellipse, rectangle, polygon };
    Kind kind = Kind::ellipse;
    double a = 0.8, b = 0.3;           // ellipse semi-axes, or rectangle half-widths
    std::vector<Vec2> vertices;        // polygon, counter-clockwise or clockwise

    static Shape ellipse(double a, double b);
    static Shape disk(double r) { return ellipse(r, r); }
    static Shape rectangle(double half_w2, double half_w3);
    static Shape polygon(std::vector<Vec2> verts);

    bool is_disk() const { return kind == Kind::ellipse && a == b; }
};

// The shape is described about its own area centroid; body coordinates put the
// center of mass at the origin, so shape points sit at centroid-relative position + com_offset.
struct BodyGeometry {
    Shape shape;
    Vec2 com_offset = Vec2(0.0025, 0.0);
    double R_star = 1.0;

    void validate() const;
    double area() const;
    // First moment of area in center-of-mass coordinates, i.e. area * com_offset.
    Vec2 first_moment() const;
    bool contains(const Vec2& x) const;
    double max_radius() const;  // farthest body point from the origin
};

struct Forcing {
    double period_T = 2 * pi;
    std::vector<double> cos_coeffs{0.0};      // a_0, a_1, ...
    std::vector<double> sin_coeffs{1.0};      // b_1, b_2, ...

    double value(double t) const;
    double derivative(double t) const;
    // calV = int_0^T (V^2 + Vdot^2) dt in closed form
    double calV() const;
    bool is_zero() const;
    double frequency(int m) const { return 2 * pi * m / period_T; }
    int harmonics() const;
};

Forcing normalize_forcing(const Forcing& f);
// Dense-sampling maximum of |V| with local refinement.
double forcing_sup(const Forcing& f);
double forcing_energy_quadrature(const Forcing& f, int samples);

struct StructuralState {
    Vec2 xi = Vec2::Zero();
    Vec2 delta = Vec2::Zero();
    double omega = 0.0;
    double theta = 0.0;  // unwrapped
};

Mat3 rotation_matrix(double theta);
Mat2 rotation_planar(double theta);
Mat3 stiffness_in_body_frame(double theta, const Mat3& A);
Mat2 stiffness_planar(double theta, const Mat3& A);
Vec3 flow_direction_in_body_frame(double theta, double alpha, const Vec2& b_tilde);
// In-plane part of b_alpha for the planar solver (alpha = pi/2).
Vec2 flow_direction_planar(double theta, const Vec2& b_tilde);

struct CouplingConstants {
    double c;
    double d;
};
CouplingConstants coupling_constants(const PhysicalParams& p, const BodyGeometry& g);

struct InertialQuantities {
    Vec2 chi;       // displacement in the inertial frame
    Vec2 gamma;     // translational velocity in the inertial frame
    Vec3 b_inertial;  // cos(alpha) e1 + sin(alpha) b_tilde
    Vec2 chi_dot;   // gamma - V * in-plane part of b_inertial
};
InertialQuantities body_to_inertial(const StructuralState& s, double V, double alpha,
                                    const Vec2& b_tilde);
// Inertial-frame fluid velocity reconstructed from a body-frame sample (output only).
Vec2 inertial_fluid_velocity(const Vec2& u_body, double theta, double V, double alpha,
                             const Vec2& b_tilde);

// Closed-form solution of chi'' + A chi = (c - 1) Vdot b and theta'' + k theta = d Vdot.
class VacuumOrbit {
public:
    struct Mode {
        double Omega;                 // natural frequency
        double coupling;              // forcing factor multiplying Vdot
        Vec3 shape;                   // eigenvector (unit), zero for the rotational mode
        double hom_cos = 0, hom_sin = 0;
        std::vector<double> part_cos, part_sin;  // non-resonant particular amplitudes per harmonic
        int resonant_harmonic = -1;
        double res_C = 0, res_S = 0;  // resonant harmonic forcing cos/sin amplitudes
        bool resonant() const { return resonant_harmonic >= 0; }
    };

    struct Sample {
        double t;
        Vec3 chi, chi_dot;
        double theta, omega;
    };

    VacuumOrbit(const PhysicalParams& p, const CouplingConstants& cc, const Forcing& f,
                const StructuralState& initial);

    Sample eval(double t) const;
    // Body-frame structural state (planar, alpha = pi/2 only).
    StructuralState body_state(double t) const;

    const std::vector<Mode>& translational_modes() const { return modes_; }
    const Mode& rotational_mode() const { return rot_; }
    bool any_resonance() const;

private:
    void setup_mode(Mode& m, double q0, double qdot0) const;
    std::pair<double, double> mode_value(const Mode& m, double t) const;

    PhysicalParams params_;
    Forcing f_;
    Vec3 b_inertial_;
    std::vector<Mode> modes_;
    Mode rot_;
};

struct VacuumTrajectory {
    std::vector<VacuumOrbit::Sample> samples;
};

VacuumOrbit vacuum_solve(const PhysicalParams& p, const CouplingConstants& cc, const Forcing& f,
                         const StructuralState& initial, double t_end, int n_samples,
                         VacuumTrajectory* traj = nullptr);

// Classic RK4 on the body-frame structural equations with all fluid terms removed.
StructuralState integrate_structure_vacuum(const PhysicalParams& p, const CouplingConstants& cc,
                                           const Forcing& f, StructuralState s, double t0,
                                           double t1, double dt);

}  // namespace fsi
