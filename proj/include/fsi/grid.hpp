#pragma once

#include "fsi/common.hpp"
#include "fsi/model.hpp"

#include <cstdint>
#include <vector>

namespace fsi {

// MAC grid on [-R, R]^2. u2 lives on vertical faces (n rows x n+1 columns),
// u3 on horizontal faces (n+1 rows x n columns), p at cell centers.
// A velocity vector stores u2 first, then u3.
struct Grid {
    double R = 6.0;
    int n = 96;
    double h = 0.125;

    int n2() const { return n * (n + 1); }
    int n3() const { return (n + 1) * n; }
    int nfaces() const { return n2() + n3(); }
    int ncells() const { return n * n; }

    int id2(int i, int j) const { return j * (n + 1) + i; }       // i in [0,n], j in [0,n)
    int id3(int i, int j) const { return n2() + j * n + i; }      // i in [0,n), j in [0,n]
    int idc(int i, int j) const { return j * n + i; }

    double xc(int i) const { return (i + 0.5 - n / 2) * h; }
    double xf(int i) const { return (i - n / 2) * h; }

    Vec2 pos2(int i, int j) const { return {xf(i), xc(j)}; }
    Vec2 pos3(int i, int j) const { return {xc(i), xf(j)}; }
    Vec2 center(int i, int j) const { return {xc(i), xc(j)}; }
    Vec2 face_pos(int f) const;
    // component (0 for u2, 1 for u3) of a face index
    int face_comp(int f) const { return f < n2() ? 0 : 1; }
};

// R must exceed 3 R_star; n even and at least 32.
Grid make_grid(double R, int n, double R_star);

using FaceVec = std::vector<double>;
using CellVec = std::vector<double>;

struct Masks {
    std::vector<std::uint8_t> cell_active;  // center inside the open disk B_R
    std::vector<std::uint8_t> cell_body;    // center inside the body
    std::vector<std::uint8_t> face_free;    // both adjacent cells active
    std::vector<std::uint8_t> face_body;    // free face whose position lies inside the body
    std::vector<std::uint8_t> face_fluid;   // free and not body
    int n_active = 0;
    double body_area = 0;  // discrete area from cell_body
};

struct BodyRaster {
    std::vector<std::uint8_t> cell_body;
    double area = 0;
};

BodyRaster rasterize_body(const Grid& g, const BodyGeometry& geom);
Masks build_masks(const Grid& g, const BodyGeometry& geom);
// Masks for a domain without a body (tests, pure fluid work).
Masks build_masks(const Grid& g);

double inradius(const BodyGeometry& geom);

struct MollifierKernel {
    double eta = 0;
    double h = 0;
    int r = 0;                 // stencil half width in cells
    std::vector<double> w;     // (2r+1)^2 weights, row-major in (offset3, offset2)

    double weight(int di, int dj) const { return w[(dj + r) * (2 * r + 1) + (di + r)]; }
    // sup |k * u| <= c_eta * ||u||_2 for the discrete convolution
    double c_eta() const;
};

// eta0 is the largest admissible radius (inradius of the body); pass 0 to skip that check.
MollifierKernel make_mollifier(double eta, double h, double eta0);

// ---- kernels: OpenMP versions and serial references ----

void mollify(const Grid& g, const MollifierKernel& k, const FaceVec& u, FaceVec& out);
void mollify_serial(const Grid& g, const MollifierKernel& k, const FaceVec& u, FaceVec& out);

// Cell-centered MAC divergence; faces outside the free set are read as given (callers keep them 0).
void divergence(const Grid& g, const FaceVec& u, CellVec& div);
void divergence_serial(const Grid& g, const FaceVec& u, CellVec& div);

// Face gradient of a cell field on free faces, 0 elsewhere.
void gradient(const Grid& g, const Masks& m, const CellVec& p, FaceVec& out);

// out = u - coef * Laplacian(u) on free faces (pinned neighbors read as 0), 0 on non-free faces.
void helmholtz_apply(const Grid& g, const Masks& m, double coef, const FaceVec& u, FaceVec& out);
void helmholtz_apply_serial(const Grid& g, const Masks& m, double coef, const FaceVec& u,
                            FaceVec& out);
void laplacian(const Grid& g, const Masks& m, const FaceVec& u, FaceVec& out);

// Frozen advecting-velocity fluxes for the skew-symmetric form.
struct AdvectionFluxes {
    // For every face control volume: flux through its +x side and its +y side (scaled by 1/(2h)).
    FaceVec fx, fy;
};
void build_advection_fluxes(const Grid& g, const FaceVec& a, AdvectionFluxes& fl);
// out = -scale * N(a) u - omega * u^perp on free faces.
void advection_apply(const Grid& g, const Masks& m, const AdvectionFluxes& fl, double scale,
                     double omega, const FaceVec& u, FaceVec& out);
void advection_apply_serial(const Grid& g, const Masks& m, const AdvectionFluxes& fl, double scale,
                            double omega, const FaceVec& u, FaceVec& out);
// MAC interpolation of u^perp onto faces (symmetric four-point averages).
void perp_field(const Grid& g, const Masks& m, const FaceVec& u, FaceVec& out);

// ---- norms and inner products (deterministic ordered reductions) ----

double dot(const FaceVec& a, const FaceVec& b);
// h^2-weighted inner product over faces with the given mask.
double masked_dot(const Grid& g, const std::vector<std::uint8_t>& mask, const FaceVec& a,
                  const FaceVec& b);
double max_abs(const std::vector<double>& a);
double max_abs_active(const Masks& m, const CellVec& c);

struct GradientNorms {
    double grad_sq = 0;     // ||grad u||^2 over the whole disk
    double two_D_sq = 0;    // 2 ||D(u)||^2 over the whole disk
    double div_sq = 0;      // ||div u||^2
    double grad_sq_fluid = 0;  // ||grad u||^2 excluding differences with both ends in the body
    double two_D_sq_fluid = 0;
};
GradientNorms gradient_norms(const Grid& g, const Masks& m, const FaceVec& u);
GradientNorms gradient_norms_serial(const Grid& g, const Masks& m, const FaceVec& u);

// Bilinear form 2 (D(u), D(v)); with fluid_only, differences lying wholly in the body are dropped.
double deformation_inner(const Grid& g, const Masks& m, const FaceVec& u, const FaceVec& v,
                         bool fluid_only);

// Bilinear resampling of a face field onto another grid (either spacing or extent); values outside
// the source square read as 0.
void resample_faces(const Grid& from, const FaceVec& u, const Grid& to, FaceVec& out);

// Rigid field xi + omega x^perp sampled on faces in `mask` (all faces when mask is null).
void rigid_field(const Grid& g, const Vec2& xi, double omega, const std::vector<std::uint8_t>* mask,
                 FaceVec& out);

}  // namespace fsi
