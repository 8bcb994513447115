#include "fsi/lifting.hpp"

#include <algorithm>
#include <cmath>

namespace fsi {

double CutoffProfile::operator()(double r) const {
    double a = r_inner(), b = r_outer();
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    double s = (r - a) / (b - a);
    return 1.0 - s * s * s * (10 - 15 * s + 6 * s * s);
}

double CutoffProfile::derivative(double r) const {
    double a = r_inner(), b = r_outer();
    if (r <= a || r >= b) return 0.0;
    double s = (r - a) / (b - a);
    return -30 * s * s * (1 - s) * (1 - s) / (b - a);
}

void CutoffProfile::validate() const {
    if (!(R_star > 0) || !(margin > 0) || !(r_inner() < r_outer()))
        throw InvalidInput("cutoff needs R_star > 0 and 0 < margin < 1");
}

void stream_field(const Grid& g, const std::function<double(const Vec2&)>& phi, FaceVec& out) {
    const int n = g.n;
    std::vector<double> nodes((size_t)(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) nodes[(size_t)j * (n + 1) + i] = phi(Vec2(g.xf(i), g.xf(j)));
    auto at = [&](int i, int j) { return nodes[(size_t)j * (n + 1) + i]; };
    out.assign(g.nfaces(), 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i) out[g.id2(i, j)] = (at(i, j + 1) - at(i, j)) / g.h;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i) out[g.id3(i, j)] = -(at(i + 1, j) - at(i, j)) / g.h;
}

void lifting_field_H(const Grid& g, const CutoffProfile& psi, const Vec2& delta, double theta,
                     FaceVec& out) {
    psi.validate();
    if (psi.r_outer() >= g.R - 2 * g.h) throw InvalidInput("cutoff support reaches the outer boundary");
    stream_field(
        g,
        [&](const Vec2& x) {
            double r2 = x.squaredNorm();
            return psi(std::sqrt(r2)) * (delta[0] * x[1] - delta[1] * x[0] - 0.5 * theta * r2);
        },
        out);
}

void LiftingBasis::combine(const Vec2& delta, double theta, FaceVec& out) const {
    out.resize(H2.size());
    for (size_t f = 0; f < H2.size(); ++f)
        out[f] = delta[0] * H2[f] + delta[1] * H3[f] + theta * Htheta[f];
}

LiftingBasis make_lifting_basis(const Grid& g, const Masks& m, const CutoffProfile& psi) {
    LiftingBasis b;
    lifting_field_H(g, psi, Vec2(1, 0), 0, b.H2);
    lifting_field_H(g, psi, Vec2(0, 1), 0, b.H3);
    lifting_field_H(g, psi, Vec2(0, 0), 1, b.Htheta);
    // per face |d2 H2 + d3 H3 + th Hth| <= (|d| + |th|) max(|(H2, H3)|, |Hth|), with equality attainable
    double sup = 0;
    for (int f = 0; f < g.nfaces(); ++f)
        sup = std::max({sup, std::hypot(b.H2[f], b.H3[f]), std::abs(b.Htheta[f])});
    b.c1_sup = sup;
    const FaceVec* v[3] = {&b.H2, &b.H3, &b.Htheta};
    Mat3 G;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) G(i, j) = masked_dot(g, m.face_fluid, *v[i], *v[j]);
    Eigen::SelfAdjointEigenSolver<Mat3> es(G, Eigen::EigenvaluesOnly);
    b.c1_l2 = es.eigenvalues()[2];
    return b;
}

}  // namespace fsi
