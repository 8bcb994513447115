#include "fsi/lifting.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace fsi;
using namespace testing_support;

TEST_CASE("cutoff profile") {
    CutoffProfile psi;
    CHECK(psi(0.5) == 1.0);
    CHECK(psi(psi.r_inner()) == doctest::Approx(1.0));
    CHECK(psi(2.0) == doctest::Approx(0.0));
    CHECK(psi(3.0) == 0.0);
    double r = 1.5, e = 1e-6;
    CHECK(psi.derivative(r) == doctest::Approx((psi(r + e) - psi(r - e)) / (2 * e)).epsilon(1e-6));
}

TEST_CASE("lifting field") {
    Grid g = small_grid();
    CutoffProfile psi;
    FaceVec H;
    lifting_field_H(g, psi, Vec2::Zero(), 0, H);
    CHECK(max_abs(H) == 0.0);

    const Vec2 d(0.4, -0.3);
    const double th = 0.7;
    lifting_field_H(g, psi, d, th, H);
    CellVec div;
    divergence(g, H, div);
    CHECK(max_abs(div) * g.h < 1e-12 * max_abs(H));
    // rigid inside the region where the cutoff is 1
    double err = 0;
    for (int f = 0; f < g.nfaces(); ++f) {
        Vec2 x = g.face_pos(f);
        if (x.norm() + 2 * g.h >= psi.r_inner()) continue;
        Vec2 rigid = d + th * perp(x);
        err = std::max(err, std::abs(H[f] - rigid[g.face_comp(f)]));
    }
    CHECK(err < 1e-12);
    // compact support
    for (int f = 0; f < g.nfaces(); ++f)
        if (g.face_pos(f).norm() > psi.r_outer() + 2 * g.h) CHECK(H[f] == 0.0);

    lifting_field_H(g, psi, Vec2(1, 0), 0, H);
    int i = g.n / 2, j = g.n / 2;
    CHECK(H[g.id2(i, j)] == doctest::Approx(1.0));
    CHECK(H[g.id3(i, j)] == doctest::Approx(0.0));

    CutoffProfile wide;
    wide.R_star = 1.5;
    CHECK_THROWS_AS(lifting_field_H(g, wide, d, th, H), InvalidInput);
}

TEST_CASE("lifting basis") {
    Grid g = small_grid();
    Masks m = build_masks(g, small_ellipse());
    CutoffProfile psi;
    LiftingBasis L = make_lifting_basis(g, m, psi);
    FaceVec a, b;
    L.combine(Vec2(0.2, 0.1), -0.4, a);
    lifting_field_H(g, psi, Vec2(0.2, 0.1), -0.4, b);
    for (size_t f = 0; f < a.size(); ++f) CHECK(a[f] == doctest::Approx(b[f]).epsilon(1e-13));
    // Gram bound: ||H||^2 <= c1_l2 (|delta|^2 + theta^2) on the fluid
    CHECK(masked_dot(g, m.face_fluid, a, a) <= L.c1_l2 * (0.05 + 0.16) * (1 + 1e-12));
    CHECK(L.c1_sup >= 1.0);
}
