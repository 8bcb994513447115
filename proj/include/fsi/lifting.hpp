#pragma once

#include "fsi/grid.hpp"

#include <functional>

namespace fsi {

// Radial C^2 cutoff: 1 for r <= R_star (1 + margin), 0 for r >= 2 R_star, quintic blend between.
struct CutoffProfile {
    double R_star = 1.0;
    double margin = 0.1;

    double r_inner() const { return R_star * (1 + margin); }
    double r_outer() const { return 2 * R_star; }
    double operator()(double r) const;
    double derivative(double r) const;
    void validate() const;
};

// Face field grad^perp(phi) = (d3 phi, -d2 phi) from a scalar sampled at grid nodes.
// Discretely divergence-free for any phi.
void stream_field(const Grid& g, const std::function<double(const Vec2&)>& phi, FaceVec& out);

// Fields spanning the lifting H = delta2 * H2 + delta3 * H3 + theta * Htheta.
struct LiftingBasis {
    FaceVec H2, H3, Htheta;
    double c1_sup = 0;  // sup |H| per unit (|delta| + |theta|)
    double c1_l2 = 0;   // largest eigenvalue of the fluid Gram matrix of the basis

    void combine(const Vec2& delta, double theta, FaceVec& out) const;
};

// Throws InvalidInput when the cutoff support reaches the outer boundary.
LiftingBasis make_lifting_basis(const Grid& g, const Masks& m, const CutoffProfile& psi);

// H for the given displacement and rotation, built directly from the stream function.
void lifting_field_H(const Grid& g, const CutoffProfile& psi, const Vec2& delta, double theta,
                     FaceVec& out);

}  // namespace fsi
