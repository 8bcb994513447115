#include "fsi/model.hpp"

#include <doctest.h>

#include <random>

using namespace fsi;

TEST_CASE("rotation matrix basics") {
    CHECK((rotation_matrix(0.0) - Mat3::Identity()).norm() == doctest::Approx(0.0));
    Vec3 e2(0, 1, 0), e3(0, 0, 1);
    CHECK((rotation_matrix(pi / 2) * e2 - e3).norm() < 1e-15);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-10, 10);
    for (int i = 0; i < 200; ++i) {
        double a = U(rng), b = U(rng);
        Mat3 Q = rotation_matrix(a);
        CHECK((rotation_matrix(a) * rotation_matrix(b) - rotation_matrix(a + b)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((Q.transpose() * Q - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(Q.determinant() == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("stiffness in the body frame") {
    Mat3 A = Vec3(1, 4, 9).asDiagonal();
    CHECK((stiffness_in_body_frame(0.0, A) - A).norm() < 1e-15);
    Mat3 expected = Vec3(1, 9, 4).asDiagonal();
    CHECK((stiffness_in_body_frame(pi / 2, A) - expected).cwiseAbs().maxCoeff() < 1e-14);
    // spectrum preserved, Rayleigh quotient bracketed by the extreme eigenvalues
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int i = 0; i < 50; ++i) {
        double th = 6 * U(rng);
        Eigen::SelfAdjointEigenSolver<Mat3> es(stiffness_in_body_frame(th, A));
        CHECK((es.eigenvalues() - Vec3(1, 4, 9)).cwiseAbs().maxCoeff() < 1e-12);
        Vec2 d(U(rng), U(rng));
        double q = d.dot(stiffness_planar(th, A) * d);
        CHECK(q >= 4 * d.squaredNorm() * (1 - 1e-12));
        CHECK(q <= 9 * d.squaredNorm() * (1 + 1e-12));
    }
}

TEST_CASE("flow direction") {
    Vec2 e2(1, 0), e3(0, 1);
    Vec3 b = flow_direction_in_body_frame(0.0, 0.3, e2);
    CHECK((b - Vec3(std::cos(0.3), std::sin(0.3), 0)).norm() < 1e-15);
    CHECK((flow_direction_in_body_frame(1.1, 0.0, e3) - Vec3(1, 0, 0)).norm() < 1e-15);
    // explicit transpose: Q(pi/2)^T e2 = -e3
    Vec3 r = flow_direction_in_body_frame(pi / 2, pi / 2, e2);
    CHECK((r - Vec3(0, 0, -1)).norm() < 1e-15);
    CHECK(flow_direction_in_body_frame(0.7, 0.4, Vec2(0.6, 0.8)).norm() == doctest::Approx(1.0));
}

TEST_CASE("coupling constants") {
    PhysicalParams p;
    p.lambda = 2;
    p.varpi = 0.25;
    BodyGeometry g;
    g.shape = Shape::rectangle(0.5, 0.5);  // area 1
    g.com_offset = Vec2::Zero();
    auto cc = coupling_constants(p, g);
    CHECK(cc.c == doctest::Approx(0.5));
    CHECK(cc.d == doctest::Approx(0.0));

    PhysicalParams q;
    q.lambda = 1;
    q.tau = 1;
    q.b_tilde = Vec2(0, 1);
    BodyGeometry e;
    e.shape = Shape::ellipse(0.8, 0.3);
    e.com_offset = Vec2(0.1, 0);
    auto ce = coupling_constants(q, e);
    CHECK(ce.d == doctest::Approx(pi * 0.8 * 0.3 * 0.1).epsilon(1e-12));

    // first moment by midpoint quadrature over a fine lattice
    double h = 1e-3, m2 = 0;
    for (double x = -1; x < 1; x += h)
        for (double y = -1; y < 1; y += h) {
            Vec2 pt(x + h / 2, y + h / 2);
            if (e.contains(pt)) m2 += pt[0] * h * h;
        }
    CHECK(m2 == doctest::Approx(e.first_moment()[0]).epsilon(1e-3));
}

TEST_CASE("forcing and its energy") {
    Forcing f;
    f.period_T = 2 * pi;
    f.cos_coeffs = {0.0};
    f.sin_coeffs = {1.0};
    CHECK(f.calV() == doctest::Approx(2 * pi).epsilon(1e-14));
    Forcing g;
    g.period_T = 3.0;
    g.cos_coeffs = {0.2, 0.0, 0.5};
    g.sin_coeffs = {1.0, -0.3};
    CHECK(g.calV() == doctest::Approx(forcing_energy_quadrature(g, 10000)).epsilon(1e-8));
    CHECK(g.derivative(0.7) == doctest::Approx((g.value(0.7 + 1e-6) - g.value(0.7 - 1e-6)) / 2e-6).epsilon(1e-7));
}

TEST_CASE("forcing normalization") {
    Forcing f;
    f.cos_coeffs = {0.0};
    f.sin_coeffs = {3.0};
    Forcing n = normalize_forcing(f);
    CHECK(n.sin_coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));
    Forcing nn = normalize_forcing(n);
    CHECK(nn.sin_coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));

    Forcing m;
    m.cos_coeffs = {0.0, 0.0, 0.5};
    m.sin_coeffs = {1.0};
    Forcing mn = normalize_forcing(m);
    double sup = 0;
    for (int i = 0; i <= 200000; ++i) sup = std::max(sup, std::abs(mn.value(mn.period_T * i / 200000.0)));
    CHECK(sup == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("body to inertial frame") {
    StructuralState s;
    s.delta = Vec2(0.3, -0.2);
    s.xi = Vec2(0.1, 0.4);
    auto q0 = body_to_inertial(s, 0.0, pi / 2, Vec2(0, 1));
    CHECK((q0.chi - s.delta).norm() < 1e-15);
    CHECK((q0.gamma - s.xi).norm() < 1e-15);
    s.theta = 1.3;
    auto q = body_to_inertial(s, 0.5, pi / 2, Vec2(0, 1));
    CHECK(q.chi.norm() == doctest::Approx(s.delta.norm()).epsilon(1e-14));
}

TEST_CASE("physical parameter validation") {
    PhysicalParams p;
    CHECK_NOTHROW(p.validate());
    p.stiffness_A(1, 1) = -1;
    CHECK_THROWS_AS(p.validate(), InvalidInput);
    PhysicalParams q;
    q.b_tilde = Vec2(1, 1);
    CHECK_THROWS_AS(q.validate(), InvalidInput);
    CHECK_THROWS_AS(Shape::polygon({}), InvalidInput);
}

namespace {

VacuumOrbit rotational_oracle(double k, double d, const Forcing& f, double theta0, double omega0) {
    PhysicalParams p;
    p.k = k;
    StructuralState s;
    s.theta = theta0;
    s.omega = omega0;
    return VacuumOrbit(p, CouplingConstants{0.5, d}, f, s);
}

}  // namespace

TEST_CASE("vacuum oracle closed forms") {
    // k = 4, d = 1, V = sin(2t): resonant, theta = t sin(2t) / 2 from rest
    Forcing f;
    f.period_T = pi;
    f.cos_coeffs = {0.0};
    f.sin_coeffs = {1.0};
    auto vo = rotational_oracle(4, 1, f, 0, 0);
    CHECK(vo.rotational_mode().resonant());
    for (double t : {0.3, 1.7, 9.2, 40.0}) CHECK(vo.eval(t).theta == doctest::Approx(0.5 * t * std::sin(2 * t)).epsilon(1e-12));

    // k = 4, d = 1, V = sin(t): theta = cos(t) / 3 when started on the particular solution
    Forcing g;
    g.period_T = 2 * pi;
    g.cos_coeffs = {0.0};
    g.sin_coeffs = {1.0};
    auto vg = rotational_oracle(4, 1, g, 1.0 / 3, 0);
    CHECK_FALSE(vg.rotational_mode().resonant());
    for (double t : {0.3, 1.7, 9.2}) CHECK(vg.eval(t).theta == doctest::Approx(std::cos(t) / 3).epsilon(1e-12));

    // free oscillator
    auto vf = rotational_oracle(2.5, 0, g, 1, 0);
    for (double t : {0.3, 4.0}) CHECK(vf.eval(t).theta == doctest::Approx(std::cos(std::sqrt(2.5) * t)).epsilon(1e-12));
}

TEST_CASE("vacuum oracle matches direct integration") {
    PhysicalParams p;
    BodyGeometry b;
    auto cc = coupling_constants(p, b);
    StructuralState s0;
    s0.xi = Vec2(0.02, -0.01);
    s0.delta = Vec2(0.01, 0.0);
    s0.omega = 0.05;
    s0.theta = 0.02;
    for (double T : {5.0, 2 * pi}) {
        Forcing f;
        f.period_T = T;
        f.cos_coeffs = {0.0, 0.2};
        f.sin_coeffs = {1.0};
        VacuumOrbit vo(p, cc, f, s0);
        StructuralState a = integrate_structure_vacuum(p, cc, f, s0, 0, 2 * T, 1e-4);
        StructuralState e = vo.body_state(2 * T);
        CHECK((a.xi - e.xi).norm() < 1e-8);
        CHECK((a.delta - e.delta).norm() < 1e-8);
        CHECK(std::abs(a.theta - e.theta) < 1e-8);
        CHECK(std::abs(a.omega - e.omega) < 1e-8);
    }
}
