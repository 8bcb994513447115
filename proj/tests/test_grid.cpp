#include "fsi/grid.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace fsi;
using namespace testing_support;

TEST_CASE("grid construction") {
    Grid g = make_grid(6, 96, 1);
    CHECK(g.h == doctest::Approx(0.125));
    CHECK_THROWS_AS(make_grid(3, 96, 1), DomainTooSmall);
    CHECK_THROWS_AS(make_grid(6, 31, 1), InvalidInput);
}

TEST_CASE("body rasterization") {
    Grid g = make_grid(6, 96, 1);
    BodyGeometry b;
    b.shape = Shape::ellipse(0.8, 0.3);
    b.com_offset = Vec2::Zero();
    BodyRaster r = rasterize_body(g, b);
    CHECK(r.area == doctest::Approx(pi * 0.24).epsilon(0.05));

    BodyGeometry d;
    d.shape = Shape::disk(0.5);
    d.com_offset = Vec2::Zero();
    BodyRaster rd = rasterize_body(g, d);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) CHECK(rd.cell_body[g.idc(i, j)] == rd.cell_body[g.idc(g.n - 1 - i, g.n - 1 - j)]);
    CHECK(inradius(d) == doctest::Approx(0.5));
}

TEST_CASE("mollifier") {
    Grid g = small_grid();
    MollifierKernel k = make_mollifier(2 * g.h, g.h, 0.5);
    double s = 0;
    for (double w : k.w) s += w;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(make_mollifier(1.5 * g.h, g.h, 0.5), InvalidInput);
    CHECK_THROWS_AS(make_mollifier(0.6, g.h, 0.5), InvalidInput);

    FaceVec one(g.nfaces(), 2.5), out;
    mollify(g, k, one, out);
    for (int f = 0; f < g.nfaces(); ++f)
        if (g.face_pos(f).cwiseAbs().maxCoeff() < g.R - k.eta - 2 * g.h) CHECK(out[f] == doctest::Approx(2.5).epsilon(1e-14));

    // single spike: Cauchy-Schwarz on the stencil
    FaceVec spike(g.nfaces(), 0.0);
    spike[g.id2(20, 20)] = 3.0;
    mollify(g, k, spike, out);
    CHECK(max_abs(out) <= k.c_eta() * g.h * 3.0 * (1 + 1e-14));
}

TEST_CASE("mollifier error is second order on a smooth field") {
    auto error_at = [](int n) {
        Grid g = make_grid(3.2, n, 1);
        MollifierKernel k = make_mollifier(2 * g.h, g.h, 0);
        FaceVec u(g.nfaces()), out;
        for (int f = 0; f < g.nfaces(); ++f) {
            Vec2 x = g.face_pos(f);
            u[f] = std::sin(x[0]) * std::cos(0.5 * x[1]);
        }
        mollify(g, k, u, out);
        double e = 0;
        for (int f = 0; f < g.nfaces(); ++f)
            if (g.face_pos(f).cwiseAbs().maxCoeff() < 2.0) e = std::max(e, std::abs(out[f] - u[f]));
        return e;
    };
    double e1 = error_at(48), e2 = error_at(96);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("discrete operators") {
    Grid g = small_grid();
    Masks m = build_masks(g, small_disk());
    FaceVec u(g.nfaces());
    // deformation measured over pairs inside the body, away from the no-slip wall
    auto inside = [&](const GradientNorms& n) { return n.two_D_sq - n.two_D_sq_fluid; };
    auto inside_grad = [&](const GradientNorms& n) { return n.grad_sq - n.grad_sq_fluid; };
    rigid_field(g, Vec2(0.3, -0.2), 0.7, nullptr, u);
    CHECK(std::abs(inside(gradient_norms(g, m, u))) < 1e-20);
    // x^perp at (1, 0) is (0, 1)
    rigid_field(g, Vec2::Zero(), 1.0, nullptr, u);
    int i = (int)std::lround((1.0 + g.R) / g.h - 0.5);
    int j = (int)std::lround((0.0 + g.R) / g.h);
    CHECK(g.pos3(i, j)[0] == doctest::Approx(g.xc(i)));
    CHECK(u[g.id3(i, j)] == doctest::Approx(g.xc(i)));

    // (x2, -x3): divergence free, 2|D u|^2 = 4 and |grad u|^2 = 2 per unit area
    for (int f = 0; f < g.nfaces(); ++f) {
        Vec2 x = g.face_pos(f);
        u[f] = g.face_comp(f) == 0 ? x[0] : -x[1];
    }
    CellVec div;
    divergence(g, u, div);
    double dmax = 0;
    for (int c = 0; c < g.ncells(); ++c)
        if (m.cell_active[c]) dmax = std::max(dmax, std::abs(div[c]));
    CHECK(dmax < 1e-12);
    GradientNorms lin = gradient_norms(g, m, u);
    int cells = 0;  // cells whose opposite faces both lie in the body, counted per direction
    for (int jj = 0; jj < g.n; ++jj)
        for (int ii = 0; ii < g.n; ++ii) {
            cells += m.face_body[g.id2(ii, jj)] && m.face_body[g.id2(ii + 1, jj)];
            cells += m.face_body[g.id3(ii, jj)] && m.face_body[g.id3(ii, jj + 1)];
        }
    CHECK(inside(lin) == doctest::Approx(2.0 * cells * g.h * g.h).epsilon(1e-12));
    CHECK(inside_grad(lin) == doctest::Approx(inside(lin) / 2).epsilon(1e-12));
    CHECK(cells * g.h * g.h / 2 == doctest::Approx(m.body_area).epsilon(0.25));

    CellVec p(g.ncells(), 4.2);
    FaceVec gp;
    gradient(g, m, p, gp);
    CHECK(max_abs(gp) == 0.0);
}

namespace {
template <class V>
double rel_diff(const V& a, const V& b) {
    double d = 0, m = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        m = std::max(m, std::abs(b[i]));
    }
    return a.size() == b.size() ? d / m : INFINITY;
}
}  // namespace

TEST_CASE("parallel kernels agree with serial references") {
    Grid g = small_grid();
    Masks m = build_masks(g, small_ellipse());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    FaceVec u(g.nfaces()), a(g.nfaces());
    for (int f = 0; f < g.nfaces(); ++f) {
        u[f] = m.face_free[f] ? U(rng) : 0.0;
        a[f] = U(rng);
    }
    MollifierKernel k = make_mollifier(2 * g.h, g.h, 0);
    FaceVec x, y;
    mollify(g, k, u, x);
    mollify_serial(g, k, u, y);
    CHECK(rel_diff(x, y) < 1e-12);
    CellVec d1, d2;
    divergence(g, u, d1);
    divergence_serial(g, u, d2);
    CHECK(rel_diff(d1, d2) < 1e-12);
    helmholtz_apply(g, m, 0.3, u, x);
    helmholtz_apply_serial(g, m, 0.3, u, y);
    CHECK(rel_diff(x, y) < 1e-12);
    AdvectionFluxes fl;
    build_advection_fluxes(g, a, fl);
    advection_apply(g, m, fl, 2.0, 0.4, u, x);
    advection_apply_serial(g, m, fl, 2.0, 0.4, u, y);
    CHECK(rel_diff(x, y) < 1e-12);
    GradientNorms p = gradient_norms(g, m, u), q = gradient_norms_serial(g, m, u);
    CHECK(p.grad_sq == doctest::Approx(q.grad_sq).epsilon(1e-13));
    CHECK(p.two_D_sq == doctest::Approx(q.two_D_sq).epsilon(1e-13));
}

TEST_CASE("advection is skew on free faces") {
    Grid g = small_grid();
    Masks m = build_masks(g, small_ellipse());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1, 1);
    FaceVec u(g.nfaces(), 0.0), a(g.nfaces(), 0.0), out;
    for (int f = 0; f < g.nfaces(); ++f)
        if (m.face_free[f]) u[f] = U(rng);
    rigid_field(g, Vec2(0.2, 0.1), 0.3, nullptr, a);
    AdvectionFluxes fl;
    build_advection_fluxes(g, a, fl);
    advection_apply(g, m, fl, 1.0, 0.0, u, out);
    double uu = masked_dot(g, m.face_free, u, u);
    CHECK(std::abs(masked_dot(g, m.face_free, u, out)) < 1e-12 * uu);
}

TEST_CASE("face resampling reproduces linear fields") {
    Grid c = make_grid(3.2, 48, 1), f = make_grid(3.2, 96, 1);
    FaceVec u(c.nfaces()), out;
    auto lin = [](int comp, const Vec2& x) { return comp == 0 ? 0.3 + x[0] - 2 * x[1] : -0.1 + 0.5 * x[0] + x[1]; };
    for (int k = 0; k < c.nfaces(); ++k) u[k] = lin(c.face_comp(k), c.face_pos(k));
    resample_faces(c, u, f, out);
    double err = 0;
    for (int k = 0; k < f.nfaces(); ++k)
        if (f.face_pos(k).cwiseAbs().maxCoeff() < 3.0) err = std::max(err, std::abs(out[k] - lin(f.face_comp(k), f.face_pos(k))));
    CHECK(err < 1e-12);
}
