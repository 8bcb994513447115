#include "fsi/grid.hpp"

#include <algorithm>
#include <cmath>

namespace fsi {

Vec2 Grid::face_pos(int f) const {
    if (f < n2()) return pos2(f % (n + 1), f / (n + 1));
    int q = f - n2();
    return pos3(q % n, q / n);
}

Grid make_grid(double R, int n, double R_star) {
    if (!(R > 3 * R_star)) throw DomainTooSmall("truncation radius must exceed 3 R_star");
    if (n < 32 || n % 2 != 0) throw InvalidInput("grid needs an even cell count of at least 32");
    Grid g;
    g.R = R;
    g.n = n;
    g.h = 2 * R / n;
    return g;
}

BodyRaster rasterize_body(const Grid& g, const BodyGeometry& geom) {
    geom.validate();
    if (geom.max_radius() >= g.R) throw InvalidInput("body crosses the outer disk");
    BodyRaster r;
    r.cell_body.assign(g.ncells(), 0);
    int cnt = 0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            if (geom.contains(g.center(i, j))) {
                r.cell_body[g.idc(i, j)] = 1;
                ++cnt;
            }
    r.area = cnt * g.h * g.h;
    return r;
}

namespace {

Masks outer_masks(const Grid& g) {
    Masks m;
    const int n = g.n;
    m.cell_active.assign(g.ncells(), 0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (g.center(i, j).norm() < g.R) {
                m.cell_active[g.idc(i, j)] = 1;
                ++m.n_active;
            }
    auto active = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < n && j < n && m.cell_active[g.idc(i, j)];
    };
    m.face_free.assign(g.nfaces(), 0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i)
            m.face_free[g.id2(i, j)] = active(i - 1, j) && active(i, j);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i)
            m.face_free[g.id3(i, j)] = active(i, j - 1) && active(i, j);
    m.cell_body.assign(g.ncells(), 0);
    m.face_body.assign(g.nfaces(), 0);
    m.face_fluid = m.face_free;
    return m;
}

}  // namespace

Masks build_masks(const Grid& g) { return outer_masks(g); }

Masks build_masks(const Grid& g, const BodyGeometry& geom) {
    Masks m = outer_masks(g);
    BodyRaster r = rasterize_body(g, geom);
    m.cell_body = r.cell_body;
    m.body_area = r.area;
    for (int f = 0; f < g.nfaces(); ++f) {
        if (m.face_free[f] && geom.contains(g.face_pos(f))) {
            m.face_body[f] = 1;
            m.face_fluid[f] = 0;
        }
    }
    return m;
}

double inradius(const BodyGeometry& geom) {
    const Shape& s = geom.shape;
    if (s.kind != Shape::Kind::polygon) return std::min(s.a, s.b);
    // largest distance from an interior sample to the polygon edges
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& v : s.vertices) {
        xmin = std::min(xmin, v[0]);
        xmax = std::max(xmax, v[0]);
        ymin = std::min(ymin, v[1]);
        ymax = std::max(ymax, v[1]);
    }
    const int m = 200;
    double best = 0;
    for (int j = 0; j <= m; ++j)
        for (int i = 0; i <= m; ++i) {
            Vec2 y(xmin + (xmax - xmin) * i / m, ymin + (ymax - ymin) * j / m);
            if (!geom.contains(y + geom.com_offset)) continue;
            double d = 1e300;
            for (size_t e = 0; e < s.vertices.size(); ++e) {
                const Vec2& a = s.vertices[e];
                const Vec2& b = s.vertices[(e + 1) % s.vertices.size()];
                Vec2 ab = b - a;
                double t = std::clamp((y - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
                d = std::min(d, (y - a - t * ab).norm());
            }
            best = std::max(best, d);
        }
    return best;
}

double MollifierKernel::c_eta() const {
    double s = 0;
    for (double x : w) s += x * x;
    return std::sqrt(s) / h;
}

MollifierKernel make_mollifier(double eta, double h, double eta0) {
    if (!(h > 0)) throw InvalidInput("grid spacing must be positive");
    if (!(eta >= 2 * h * (1 - 1e-12))) throw InvalidInput("mollifier radius must be at least 2h");
    if (eta0 > 0 && !(eta < eta0)) throw InvalidInput("mollifier radius must be below eta0");
    MollifierKernel k;
    k.eta = eta;
    k.h = h;
    k.r = (int)std::ceil(eta / h);
    const int W = 2 * k.r + 1;
    k.w.assign(W * W, 0.0);
    double sum = 0;
    for (int dj = -k.r; dj <= k.r; ++dj)
        for (int di = -k.r; di <= k.r; ++di) {
            double rho2 = (di * di + dj * dj) * h * h / (eta * eta);
            if (rho2 < 1.0) {
                double v = std::exp(-1.0 / (1.0 - rho2));
                k.w[(dj + k.r) * W + (di + k.r)] = v;
                sum += v;
            }
        }
    for (double& x : k.w) x /= sum;
    return k;
}

// ---------------------------------------------------------------------------
// mollifier

namespace {

// Convolve one staggered component stored as rows x cols, zero-extended.
void convolve_rows(const MollifierKernel& k, const double* __restrict u, double* __restrict out,
                   int rows, int cols, int j) {
    const int r = k.r, W = 2 * r + 1;
    for (int i = 0; i < cols; ++i) {
        double s = 0;
        for (int dj = -r; dj <= r; ++dj) {
            int jj = j + dj;
            if (jj < 0 || jj >= rows) continue;
            const double* row = u + (size_t)jj * cols;
            const double* wr = &k.w[(dj + r) * W + r];
            int lo = std::max(-r, -i), hi = std::min(r, cols - 1 - i);
            for (int di = lo; di <= hi; ++di) s += wr[di] * row[i + di];
        }
        out[(size_t)j * cols + i] = s;
    }
}

}  // namespace

void mollify(const Grid& g, const MollifierKernel& k, const FaceVec& u, FaceVec& out) {
    out.resize(g.nfaces());
    const int n = g.n;
    const double* u2 = u.data();
    const double* u3 = u.data() + g.n2();
    double* o2 = out.data();
    double* o3 = out.data() + g.n2();
#pragma omp parallel for schedule(static)
    for (int j = 0; j < 2 * n + 1; ++j) {
        if (j < n)
            convolve_rows(k, u2, o2, n, n + 1, j);
        else
            convolve_rows(k, u3, o3, n + 1, n, j - n);
    }
}

void mollify_serial(const Grid& g, const MollifierKernel& k, const FaceVec& u, FaceVec& out) {
    out.assign(g.nfaces(), 0.0);
    const int n = g.n, r = k.r;
    for (int f = 0; f < g.nfaces(); ++f) {
        bool c2 = f < g.n2();
        int cols = c2 ? n + 1 : n, rows = c2 ? n : n + 1;
        int base = c2 ? 0 : g.n2();
        int q = f - base, i = q % cols, j = q / cols;
        double s = 0;
        for (int dj = -r; dj <= r; ++dj)
            for (int di = -r; di <= r; ++di) {
                int ii = i + di, jj = j + dj;
                if (ii < 0 || jj < 0 || ii >= cols || jj >= rows) continue;
                s += k.weight(di, dj) * u[base + jj * cols + ii];
            }
        out[f] = s;
    }
}

// ---------------------------------------------------------------------------
// divergence / gradient

void divergence(const Grid& g, const FaceVec& u, CellVec& div) {
    const int n = g.n;
    div.resize(g.ncells());
    const double ih = 1.0 / g.h;
    const double* u2 = u.data();
    const double* u3 = u.data() + g.n2();
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        const double* a = u2 + (size_t)j * (n + 1);
        const double* b0 = u3 + (size_t)j * n;
        const double* b1 = u3 + (size_t)(j + 1) * n;
        double* d = div.data() + (size_t)j * n;
        for (int i = 0; i < n; ++i) d[i] = (a[i + 1] - a[i] + b1[i] - b0[i]) * ih;
    }
}

void divergence_serial(const Grid& g, const FaceVec& u, CellVec& div) {
    div.assign(g.ncells(), 0.0);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            div[g.idc(i, j)] = (u[g.id2(i + 1, j)] - u[g.id2(i, j)] + u[g.id3(i, j + 1)] -
                                u[g.id3(i, j)]) / g.h;
}

void gradient(const Grid& g, const Masks& m, const CellVec& p, FaceVec& out) {
    const int n = g.n;
    out.assign(g.nfaces(), 0.0);
    const double ih = 1.0 / g.h;
#pragma omp parallel for schedule(static)
    for (int j = 0; j <= n; ++j) {
        if (j < n)
            for (int i = 1; i < n; ++i) {
                int f = g.id2(i, j);
                if (m.face_free[f]) out[f] = (p[g.idc(i, j)] - p[g.idc(i - 1, j)]) * ih;
            }
        if (j > 0 && j < n)
            for (int i = 0; i < n; ++i) {
                int f = g.id3(i, j);
                if (m.face_free[f]) out[f] = (p[g.idc(i, j)] - p[g.idc(i, j - 1)]) * ih;
            }
    }
}

// ---------------------------------------------------------------------------
// diffusion operator

namespace {

inline double at2(const Grid& g, const FaceVec& u, int i, int j) {
    return (i < 0 || j < 0 || i > g.n || j >= g.n) ? 0.0 : u[g.id2(i, j)];
}
inline double at3(const Grid& g, const FaceVec& u, int i, int j) {
    return (i < 0 || j < 0 || i >= g.n || j > g.n) ? 0.0 : u[g.id3(i, j)];
}

// five-point stencil of one component, rows x cols, zero outside
void helmholtz_rows(const double* __restrict u, const std::uint8_t* __restrict free,
                    double* __restrict out, int rows, int cols, int j, double c0, double c1) {
    const double* row = u + (size_t)j * cols;
    const double* up = j + 1 < rows ? u + (size_t)(j + 1) * cols : nullptr;
    const double* dn = j > 0 ? u + (size_t)(j - 1) * cols : nullptr;
    const std::uint8_t* fr = free + (size_t)j * cols;
    double* o = out + (size_t)j * cols;
    for (int i = 0; i < cols; ++i) {
        if (!fr[i]) {
            o[i] = 0.0;
            continue;
        }
        double nb = (i > 0 ? row[i - 1] : 0.0) + (i + 1 < cols ? row[i + 1] : 0.0) +
                    (up ? up[i] : 0.0) + (dn ? dn[i] : 0.0);
        o[i] = c0 * row[i] - c1 * nb;
    }
}

}  // namespace

void helmholtz_apply(const Grid& g, const Masks& m, double coef, const FaceVec& u, FaceVec& out) {
    const int n = g.n;
    out.resize(g.nfaces());
    const double c1 = coef / (g.h * g.h), c0 = 1.0 + 4.0 * c1;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < 2 * n + 1; ++j) {
        if (j < n)
            helmholtz_rows(u.data(), m.face_free.data(), out.data(), n, n + 1, j, c0, c1);
        else
            helmholtz_rows(u.data() + g.n2(), m.face_free.data() + g.n2(), out.data() + g.n2(),
                           n + 1, n, j - n, c0, c1);
    }
}

void helmholtz_apply_serial(const Grid& g, const Masks& m, double coef, const FaceVec& u,
                            FaceVec& out) {
    out.assign(g.nfaces(), 0.0);
    const double ih2 = 1.0 / (g.h * g.h);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i <= g.n; ++i) {
            int f = g.id2(i, j);
            if (!m.face_free[f]) continue;
            double lap = (at2(g, u, i + 1, j) + at2(g, u, i - 1, j) + at2(g, u, i, j + 1) +
                          at2(g, u, i, j - 1) - 4 * u[f]) * ih2;
            out[f] = u[f] - coef * lap;
        }
    for (int j = 0; j <= g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            int f = g.id3(i, j);
            if (!m.face_free[f]) continue;
            double lap = (at3(g, u, i + 1, j) + at3(g, u, i - 1, j) + at3(g, u, i, j + 1) +
                          at3(g, u, i, j - 1) - 4 * u[f]) * ih2;
            out[f] = u[f] - coef * lap;
        }
}

void laplacian(const Grid& g, const Masks& m, const FaceVec& u, FaceVec& out) {
    helmholtz_apply(g, m, -1.0, u, out);
    for (int f = 0; f < g.nfaces(); ++f) out[f] = m.face_free[f] ? out[f] - u[f] : 0.0;
}

// ---------------------------------------------------------------------------
// advection

void build_advection_fluxes(const Grid& g, const FaceVec& a, AdvectionFluxes& fl) {
    const int n = g.n;
    fl.fx.assign(g.nfaces(), 0.0);
    fl.fy.assign(g.nfaces(), 0.0);
    const double s = 0.5 / (2 * g.h);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < 2 * n + 1; ++j) {
        if (j < n) {
            // u2 control volume (i, j): east side at the cell center, north side at a node
            for (int i = 0; i <= n; ++i) {
                int f = g.id2(i, j);
                fl.fx[f] = s * (at2(g, a, i, j) + at2(g, a, i + 1, j));
                fl.fy[f] = s * (at3(g, a, i - 1, j + 1) + at3(g, a, i, j + 1));
            }
        } else {
            int jj = j - n;
            // u3 control volume (i, jj): east side at a node, north side at the cell center
            for (int i = 0; i < n; ++i) {
                int f = g.id3(i, jj);
                fl.fx[f] = s * (at2(g, a, i + 1, jj - 1) + at2(g, a, i + 1, jj));
                fl.fy[f] = s * (at3(g, a, i, jj) + at3(g, a, i, jj + 1));
            }
        }
    }
}

void advection_apply(const Grid& g, const Masks& m, const AdvectionFluxes& fl, double scale,
                     double omega, const FaceVec& u, FaceVec& out) {
    const int n = g.n;
    out.resize(g.nfaces());
    const int N2 = g.n2();
    const double* U = u.data();
    const double* FX = fl.fx.data();
    const double* FY = fl.fy.data();
    const std::uint8_t* fr = m.face_free.data();
#pragma omp parallel for schedule(static)
    for (int j = 0; j < 2 * n + 1; ++j) {
        if (j < n) {
            const int C = n + 1;
            for (int i = 0; i <= n; ++i) {
                int f = j * C + i;
                if (!fr[f]) {
                    out[f] = 0.0;
                    continue;
                }
                double adv = FX[f] * (i < n ? U[f + 1] : 0.0) - (i > 0 ? FX[f - 1] * U[f - 1] : 0.0) +
                             FY[f] * (j + 1 < n ? U[f + C] : 0.0) -
                             (j > 0 ? FY[f - C] * U[f - C] : 0.0);
                // u3 neighbours (i-1, j), (i, j), (i-1, j+1), (i, j+1)
                const double* r0 = U + N2 + (size_t)j * n;
                const double* r1 = r0 + n;
                double s3 = (i > 0 ? r0[i - 1] + r1[i - 1] : 0.0) + (i < n ? r0[i] + r1[i] : 0.0);
                out[f] = -scale * adv + omega * 0.25 * s3;
            }
        } else {
            const int jj = j - n, C = n;
            for (int i = 0; i < n; ++i) {
                int f = N2 + jj * C + i;
                if (!fr[f]) {
                    out[f] = 0.0;
                    continue;
                }
                double adv = FX[f] * (i + 1 < n ? U[f + 1] : 0.0) -
                             (i > 0 ? FX[f - 1] * U[f - 1] : 0.0) +
                             FY[f] * (jj < n ? U[f + C] : 0.0) -
                             (jj > 0 ? FY[f - C] * U[f - C] : 0.0);
                // u2 neighbours (i, jj-1), (i+1, jj-1), (i, jj), (i+1, jj)
                double s2 = 0;
                if (jj > 0) s2 += U[(size_t)(jj - 1) * (n + 1) + i] + U[(size_t)(jj - 1) * (n + 1) + i + 1];
                if (jj < n) s2 += U[(size_t)jj * (n + 1) + i] + U[(size_t)jj * (n + 1) + i + 1];
                out[f] = -scale * adv - omega * 0.25 * s2;
            }
        }
    }
}

void perp_field(const Grid& g, const Masks& m, const FaceVec& u, FaceVec& out) {
    out.assign(g.nfaces(), 0.0);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i <= g.n; ++i) {
            int f = g.id2(i, j);
            if (!m.face_free[f]) continue;
            out[f] = -0.25 * (at3(g, u, i - 1, j) + at3(g, u, i, j) + at3(g, u, i - 1, j + 1) +
                              at3(g, u, i, j + 1));
        }
    for (int j = 0; j <= g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            int f = g.id3(i, j);
            if (!m.face_free[f]) continue;
            out[f] = 0.25 * (at2(g, u, i, j - 1) + at2(g, u, i + 1, j - 1) + at2(g, u, i, j) +
                             at2(g, u, i + 1, j));
        }
}

void advection_apply_serial(const Grid& g, const Masks& m, const AdvectionFluxes& fl, double scale,
                            double omega, const FaceVec& u, FaceVec& out) {
    FaceVec up;
    perp_field(g, m, u, up);
    out.assign(g.nfaces(), 0.0);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i <= g.n; ++i) {
            int f = g.id2(i, j);
            if (!m.face_free[f]) continue;
            double adv = fl.fx[f] * at2(g, u, i + 1, j) -
                         (i > 0 ? fl.fx[g.id2(i - 1, j)] : 0.0) * at2(g, u, i - 1, j) +
                         fl.fy[f] * at2(g, u, i, j + 1) -
                         (j > 0 ? fl.fy[g.id2(i, j - 1)] : 0.0) * at2(g, u, i, j - 1);
            out[f] = -scale * adv - omega * up[f];
        }
    for (int j = 0; j <= g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            int f = g.id3(i, j);
            if (!m.face_free[f]) continue;
            double adv = fl.fx[f] * at3(g, u, i + 1, j) -
                         (i > 0 ? fl.fx[g.id3(i - 1, j)] : 0.0) * at3(g, u, i - 1, j) +
                         fl.fy[f] * at3(g, u, i, j + 1) -
                         (j > 0 ? fl.fy[g.id3(i, j - 1)] : 0.0) * at3(g, u, i, j - 1);
            out[f] = -scale * adv - omega * up[f];
        }
}

// ---------------------------------------------------------------------------
// reductions

double dot(const FaceVec& a, const FaceVec& b) {
    const long N = (long)a.size();
    const long B = 1024;
    const long nb = (N + B - 1) / B;
    std::vector<double> part(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (long k = 0; k < nb; ++k) {
        double s = 0;
        long e = std::min(N, (k + 1) * B);
        for (long i = k * B; i < e; ++i) s += a[i] * b[i];
        part[k] = s;
    }
    double s = 0;
    for (double x : part) s += x;
    return s;
}

double masked_dot(const Grid& g, const std::vector<std::uint8_t>& mask, const FaceVec& a,
                  const FaceVec& b) {
    double s = 0;
    for (size_t f = 0; f < a.size(); ++f)
        if (mask[f]) s += a[f] * b[f];
    return s * g.h * g.h;
}

double max_abs(const std::vector<double>& a) {
    double m = 0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

double max_abs_active(const Masks& m, const CellVec& c) {
    double r = 0;
    for (size_t i = 0; i < c.size(); ++i)
        if (m.cell_active[i]) r = std::max(r, std::abs(c[i]));
    return r;
}

namespace {

struct NormAcc {
    double grad = 0, twoD = 0, div = 0, grad_f = 0, twoD_f = 0;
    void add(const NormAcc& o) {
        grad += o.grad;
        twoD += o.twoD;
        div += o.div;
        grad_f += o.grad_f;
        twoD_f += o.twoD_f;
    }
};

inline std::uint8_t body2(const Grid& g, const Masks& m, int i, int j) {
    return (i < 0 || j < 0 || i > g.n || j >= g.n) ? 0 : m.face_body[g.id2(i, j)];
}
inline std::uint8_t body3(const Grid& g, const Masks& m, int i, int j) {
    return (i < 0 || j < 0 || i >= g.n || j > g.n) ? 0 : m.face_body[g.id3(i, j)];
}

// cell row j (if j < n) and node row j
NormAcc norms_row(const Grid& g, const Masks& m, const FaceVec& u, int j) {
    NormAcc a;
    const double ih = 1.0 / g.h;
    const int n = g.n;
    if (j < n)
        for (int i = 0; i < n; ++i) {
            double d22 = (u[g.id2(i + 1, j)] - u[g.id2(i, j)]) * ih;
            double d33 = (u[g.id3(i, j + 1)] - u[g.id3(i, j)]) * ih;
            double gs = d22 * d22 + d33 * d33;
            a.grad += gs;
            a.twoD += 2 * gs;
            a.div += (d22 + d33) * (d22 + d33);
            bool in2 = m.face_body[g.id2(i + 1, j)] && m.face_body[g.id2(i, j)];
            bool in3 = m.face_body[g.id3(i, j + 1)] && m.face_body[g.id3(i, j)];
            if (!in2) {
                a.grad_f += d22 * d22;
                a.twoD_f += 2 * d22 * d22;
            }
            if (!in3) {
                a.grad_f += d33 * d33;
                a.twoD_f += 2 * d33 * d33;
            }
        }
    for (int i = 0; i <= n; ++i) {
        double d32 = (at2(g, u, i, j) - at2(g, u, i, j - 1)) * ih;
        double d23 = (at3(g, u, i, j) - at3(g, u, i - 1, j)) * ih;
        a.grad += d32 * d32 + d23 * d23;
        a.twoD += (d32 + d23) * (d32 + d23);
        bool in2 = body2(g, m, i, j) && body2(g, m, i, j - 1);
        bool in3 = body3(g, m, i, j) && body3(g, m, i - 1, j);
        if (!in2) a.grad_f += d32 * d32;
        if (!in3) a.grad_f += d23 * d23;
        if (!(in2 && in3)) a.twoD_f += (d32 + d23) * (d32 + d23);
    }
    return a;
}

GradientNorms finish(const Grid& g, const NormAcc& a) {
    const double h2 = g.h * g.h;
    return {a.grad * h2, a.twoD * h2, a.div * h2, a.grad_f * h2, a.twoD_f * h2};
}

}  // namespace

GradientNorms gradient_norms(const Grid& g, const Masks& m, const FaceVec& u) {
    std::vector<NormAcc> rows(g.n + 1);
#pragma omp parallel for schedule(static)
    for (int j = 0; j <= g.n; ++j) rows[j] = norms_row(g, m, u, j);
    NormAcc a;
    for (const auto& r : rows) a.add(r);
    return finish(g, a);
}

GradientNorms gradient_norms_serial(const Grid& g, const Masks& m, const FaceVec& u) {
    NormAcc a;
    for (int j = 0; j <= g.n; ++j) a.add(norms_row(g, m, u, j));
    return finish(g, a);
}

double deformation_inner(const Grid& g, const Masks& m, const FaceVec& u, const FaceVec& v,
                         bool fluid_only) {
    const double ih = 1.0 / g.h;
    const int n = g.n;
    std::vector<double> rows(n + 1, 0.0);
#pragma omp parallel for schedule(static)
    for (int j = 0; j <= n; ++j) {
        double s = 0;
        if (j < n)
            for (int i = 0; i < n; ++i) {
                int a0 = g.id2(i, j), a1 = g.id2(i + 1, j), b0 = g.id3(i, j), b1 = g.id3(i, j + 1);
                if (!(fluid_only && m.face_body[a0] && m.face_body[a1]))
                    s += 2 * (u[a1] - u[a0]) * (v[a1] - v[a0]) * ih * ih;
                if (!(fluid_only && m.face_body[b0] && m.face_body[b1]))
                    s += 2 * (u[b1] - u[b0]) * (v[b1] - v[b0]) * ih * ih;
            }
        for (int i = 0; i <= n; ++i) {
            bool in = body2(g, m, i, j) && body2(g, m, i, j - 1) && body3(g, m, i, j) &&
                      body3(g, m, i - 1, j);
            if (fluid_only && in) continue;
            double su = (at2(g, u, i, j) - at2(g, u, i, j - 1) + at3(g, u, i, j) - at3(g, u, i - 1, j)) * ih;
            double sv = (at2(g, v, i, j) - at2(g, v, i, j - 1) + at3(g, v, i, j) - at3(g, v, i - 1, j)) * ih;
            s += su * sv;
        }
        rows[j] = s;
    }
    double s = 0;
    for (double x : rows) s += x;
    return s * g.h * g.h;
}

void rigid_field(const Grid& g, const Vec2& xi, double omega, const std::vector<std::uint8_t>* mask,
                 FaceVec& out) {
    out.assign(g.nfaces(), 0.0);
    for (int f = 0; f < g.nfaces(); ++f) {
        if (mask && !(*mask)[f]) continue;
        Vec2 x = g.face_pos(f);
        Vec2 v = xi + omega * perp(x);
        out[f] = v[g.face_comp(f)];
    }
}

void resample_faces(const Grid& from, const FaceVec& u, const Grid& to, FaceVec& out) {
    out.assign(to.nfaces(), 0.0);
    const int n = from.n;
    auto sample = [&](int comp, const Vec2& x) {
        // lattice coordinates of the component's face array
        double fi = (x[0] + from.R) / from.h - (comp == 0 ? 0.0 : 0.5);
        double fj = (x[1] + from.R) / from.h - (comp == 0 ? 0.5 : 0.0);
        const int cols = comp == 0 ? n + 1 : n, rows = comp == 0 ? n : n + 1;
        if (fi < -0.5 || fj < -0.5 || fi > cols - 0.5 || fj > rows - 0.5) return 0.0;
        fi = std::clamp(fi, 0.0, (double)(cols - 1));
        fj = std::clamp(fj, 0.0, (double)(rows - 1));
        int i0 = std::min((int)fi, cols - 2), j0 = std::min((int)fj, rows - 2);
        double a = fi - i0, b = fj - j0;
        auto at = [&](int i, int j) { return comp == 0 ? u[from.id2(i, j)] : u[from.id3(i, j)]; };
        return (1 - a) * (1 - b) * at(i0, j0) + a * (1 - b) * at(i0 + 1, j0) + (1 - a) * b * at(i0, j0 + 1) +
               a * b * at(i0 + 1, j0 + 1);
    };
#pragma omp parallel for schedule(static)
    for (int f = 0; f < to.nfaces(); ++f) out[f] = sample(to.face_comp(f), to.face_pos(f));
}

}  // namespace fsi
