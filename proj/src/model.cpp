#include "fsi/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsi {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void PhysicalParams::validate() const {
    if (!(lambda > 0) || !(k > 0) || !(varpi > 0) || !(tau > 0))
        throw InvalidInput("lambda, k, varpi and tau must be positive");
    if (!finite(alpha)) throw InvalidInput("alpha must be finite");
    if (!stiffness_A.allFinite() || (stiffness_A - stiffness_A.transpose()).cwiseAbs().maxCoeff() >
                                        1e-12 * std::max(1.0, stiffness_A.cwiseAbs().maxCoeff()))
        throw InvalidInput("stiffness_A must be symmetric");
    if (rho1() <= 0) throw InvalidInput("stiffness_A must be positive definite");
    if (std::abs(b_tilde.norm() - 1.0) > 1e-12) throw InvalidInput("b_tilde must be a unit vector");
}

void PhysicalParams::validate_planar() const {
    validate();
    if (std::abs(alpha - pi / 2) > 1e-12)
        throw InvalidInput("the planar solver requires alpha = pi/2");
    if (stiffness_A(0, 1) != 0.0 || stiffness_A(0, 2) != 0.0)
        throw InvalidInput("the planar solver requires stiffness_A to decouple the e1 axis");
}

double PhysicalParams::rho1() const {
    Eigen::SelfAdjointEigenSolver<Mat3> es(stiffness_A, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

double PhysicalParams::rho2() const {
    Eigen::SelfAdjointEigenSolver<Mat3> es(stiffness_A, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[2];
}

Shape Shape::ellipse(double a, double b) {
    Shape s;
    s.kind = Kind::ellipse;
    s.a = a;
    s.b = b;
    return s;
}

Shape Shape::rectangle(double half_w2, double half_w3) {
    Shape s;
    s.kind = Kind::rectangle;
    s.a = half_w2;
    s.b = half_w3;
    return s;
}

Shape Shape::polygon(std::vector<Vec2> verts) {
    Shape s;
    s.kind = Kind::polygon;
    if (verts.size() < 3) throw InvalidInput("polygon needs at least three vertices");
    // shoelace area and centroid, then re-center on the centroid
    double A2 = 0;
    Vec2 c = Vec2::Zero();
    for (size_t i = 0; i < verts.size(); ++i) {
        const Vec2& p = verts[i];
        const Vec2& q = verts[(i + 1) % verts.size()];
        double cr = p[0] * q[1] - q[0] * p[1];
        A2 += cr;
        c += (p + q) * cr;
    }
    if (std::abs(A2) < 1e-14) throw InvalidInput("polygon has zero area");
    c /= 3.0 * A2;
    for (auto& v : verts) v -= c;
    s.vertices = std::move(verts);
    return s;
}

double BodyGeometry::area() const {
    switch (shape.kind) {
    case Shape::Kind::ellipse: return pi * shape.a * shape.b;
    case Shape::Kind::rectangle: return 4 * shape.a * shape.b;
    case Shape::Kind::polygon: {
        double A2 = 0;
        const auto& v = shape.vertices;
        for (size_t i = 0; i < v.size(); ++i) {
            const Vec2& p = v[i];
            const Vec2& q = v[(i + 1) % v.size()];
            A2 += p[0] * q[1] - q[0] * p[1];
        }
        return 0.5 * std::abs(A2);
    }
    }
    return 0;
}

Vec2 BodyGeometry::first_moment() const { return area() * com_offset; }

bool BodyGeometry::contains(const Vec2& x) const {
    Vec2 y = x - com_offset;
    switch (shape.kind) {
    case Shape::Kind::ellipse: {
        double s = y[0] / shape.a, t = y[1] / shape.b;
        return s * s + t * t < 1.0;
    }
    case Shape::Kind::rectangle: return std::abs(y[0]) < shape.a && std::abs(y[1]) < shape.b;
    case Shape::Kind::polygon: {
        bool in = false;
        const auto& v = shape.vertices;
        for (size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
            if ((v[i][1] > y[1]) != (v[j][1] > y[1])) {
                double xc = v[j][0] + (y[1] - v[j][1]) * (v[i][0] - v[j][0]) / (v[i][1] - v[j][1]);
                if (y[0] < xc) in = !in;
            }
        }
        return in;
    }
    }
    return false;
}

double BodyGeometry::max_radius() const {
    double r = 0;
    switch (shape.kind) {
    case Shape::Kind::ellipse: {
        const int m = 20000;
        for (int i = 0; i < m; ++i) {
            double t = 2 * pi * i / m;
            Vec2 p(shape.a * std::cos(t), shape.b * std::sin(t));
            r = std::max(r, (p + com_offset).norm());
        }
        // sampling slack for a smooth boundary
        r *= 1 + 1e-7;
        break;
    }
    case Shape::Kind::rectangle:
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                r = std::max(r, (Vec2(sx * shape.a, sy * shape.b) + com_offset).norm());
        break;
    case Shape::Kind::polygon:
        for (const auto& v : shape.vertices) r = std::max(r, (v + com_offset).norm());
        break;
    }
    return r;
}

void BodyGeometry::validate() const {
    if (shape.kind != Shape::Kind::polygon && !(shape.a > 0 && shape.b > 0))
        throw InvalidInput("body dimensions must be positive");
    if (shape.kind == Shape::Kind::polygon && shape.vertices.size() < 3)
        throw InvalidInput("polygon needs at least three vertices");
    if (!(area() > 0)) throw InvalidInput("body area must be positive");
    if (!(R_star > 0)) throw InvalidInput("R_star must be positive");
    if (max_radius() >= R_star) throw InvalidInput("body is not contained in the disk of radius R_star");
}

double Forcing::value(double t) const {
    double v = cos_coeffs.empty() ? 0.0 : cos_coeffs[0];
    int M = harmonics();
    for (int m = 1; m <= M; ++m) {
        double w = frequency(m) * t;
        if (m < (int)cos_coeffs.size()) v += cos_coeffs[m] * std::cos(w);
        if (m - 1 < (int)sin_coeffs.size()) v += sin_coeffs[m - 1] * std::sin(w);
    }
    return v;
}

double Forcing::derivative(double t) const {
    double v = 0;
    int M = harmonics();
    for (int m = 1; m <= M; ++m) {
        double nu = frequency(m), w = nu * t;
        if (m < (int)cos_coeffs.size()) v -= nu * cos_coeffs[m] * std::sin(w);
        if (m - 1 < (int)sin_coeffs.size()) v += nu * sin_coeffs[m - 1] * std::cos(w);
    }
    return v;
}

int Forcing::harmonics() const {
    return std::max<int>((int)cos_coeffs.size() - 1, (int)sin_coeffs.size());
}

double Forcing::calV() const {
    double a0 = cos_coeffs.empty() ? 0.0 : cos_coeffs[0];
    double s = period_T * a0 * a0;
    for (int m = 1; m <= harmonics(); ++m) {
        double am = m < (int)cos_coeffs.size() ? cos_coeffs[m] : 0.0;
        double bm = m - 1 < (int)sin_coeffs.size() ? sin_coeffs[m - 1] : 0.0;
        double nu = frequency(m);
        s += 0.5 * period_T * (am * am + bm * bm) * (1 + nu * nu);
    }
    return s;
}

bool Forcing::is_zero() const {
    for (double c : cos_coeffs)
        if (c != 0.0) return false;
    for (double c : sin_coeffs)
        if (c != 0.0) return false;
    return true;
}

double forcing_sup(const Forcing& f) {
    const int N = 10000;
    const double T = f.period_T, h = T / N;
    std::vector<double> vals(N);
    for (int i = 0; i < N; ++i) vals[i] = std::abs(f.value(i * h));
    double best = *std::max_element(vals.begin(), vals.end());
    // golden-section refinement around every sampled local maximum close to the top
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < N; ++i) {
        double prev = vals[(i + N - 1) % N], next = vals[(i + 1) % N];
        if (vals[i] < prev || vals[i] < next || vals[i] < 0.9 * best) continue;
        double a = (i - 1) * h, b = (i + 1) * h;
        double x1 = b - g * (b - a), x2 = a + g * (b - a);
        double f1 = std::abs(f.value(x1)), f2 = std::abs(f.value(x2));
        for (int it = 0; it < 80 && b - a > 1e-15 * T; ++it) {
            if (f1 > f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = std::abs(f.value(x1));
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = std::abs(f.value(x2));
            }
        }
        best = std::max({best, f1, f2});
    }
    return best;
}

Forcing normalize_forcing(const Forcing& f) {
    if (f.is_zero()) throw InvalidInput("cannot normalize a zero forcing profile");
    if (!(f.period_T > 0)) throw InvalidInput("forcing period must be positive");
    double s = forcing_sup(f);
    if (!(s > 0)) throw InvalidInput("cannot normalize a zero forcing profile");
    Forcing g = f;
    if (std::abs(s - 1.0) <= 1e-13) return g;
    for (auto& c : g.cos_coeffs) c /= s;
    for (auto& c : g.sin_coeffs) c /= s;
    return g;
}

double forcing_energy_quadrature(const Forcing& f, int samples) {
    // trapezoid on a periodic integrand: plain sum over a uniform grid
    double h = f.period_T / samples, s = 0;
    for (int i = 0; i < samples; ++i) {
        double t = i * h, v = f.value(t), vd = f.derivative(t);
        s += v * v + vd * vd;
    }
    return s * h;
}

Mat3 rotation_matrix(double theta) {
    if (!finite(theta)) throw InvalidInput("rotation angle must be finite");
    double c = std::cos(theta), s = std::sin(theta);
    Mat3 Q;
    Q << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return Q;
}

Mat2 rotation_planar(double theta) {
    if (!finite(theta)) throw InvalidInput("rotation angle must be finite");
    double c = std::cos(theta), s = std::sin(theta);
    Mat2 R;
    R << c, -s,
         s, c;
    return R;
}

Mat3 stiffness_in_body_frame(double theta, const Mat3& A) {
    PhysicalParams chk;
    chk.stiffness_A = A;
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()) ||
        chk.rho1() <= 0)
        throw InvalidInput("stiffness matrix must be symmetric positive definite");
    Mat3 Q = rotation_matrix(theta);
    Mat3 B = Q.transpose() * A * Q;
    return 0.5 * (B + B.transpose());
}

Mat2 stiffness_planar(double theta, const Mat3& A) {
    Mat2 R = rotation_planar(theta);
    Mat2 Ap = A.block<2, 2>(1, 1);
    Mat2 B = R.transpose() * Ap * R;
    return 0.5 * (B + B.transpose());
}

Vec3 flow_direction_in_body_frame(double theta, double alpha, const Vec2& b_tilde) {
    if (std::abs(b_tilde.norm() - 1.0) > 1e-12) throw InvalidInput("b_tilde must be a unit vector");
    Vec3 b(std::cos(alpha), std::sin(alpha) * b_tilde[0], std::sin(alpha) * b_tilde[1]);
    return rotation_matrix(theta).transpose() * b;
}

Vec2 flow_direction_planar(double theta, const Vec2& b_tilde) {
    return rotation_planar(theta).transpose() * b_tilde;
}

CouplingConstants coupling_constants(const PhysicalParams& p, const BodyGeometry& g) {
    double area = g.area();
    Vec2 M = g.first_moment();
    // b_tilde . int (-x3 e2 + x2 e3)
    double moment = p.b_tilde[0] * (-M[1]) + p.b_tilde[1] * M[0];
    return {1.0 - p.lambda * p.varpi * area, p.lambda * p.tau * std::sin(p.alpha) * moment};
}

InertialQuantities body_to_inertial(const StructuralState& s, double V, double alpha,
                                    const Vec2& b_tilde) {
    Mat2 R = rotation_planar(s.theta);
    InertialQuantities q;
    q.chi = R * s.delta;
    q.gamma = R * s.xi;
    q.b_inertial = Vec3(std::cos(alpha), std::sin(alpha) * b_tilde[0], std::sin(alpha) * b_tilde[1]);
    q.chi_dot = q.gamma - V * q.b_inertial.tail<2>();
    return q;
}

Vec2 inertial_fluid_velocity(const Vec2& u_body, double theta, double V, double alpha,
                             const Vec2& b_tilde) {
    return rotation_planar(theta) * u_body + V * std::sin(alpha) * b_tilde;
}

VacuumOrbit::VacuumOrbit(const PhysicalParams& p, const CouplingConstants& cc, const Forcing& f,
                         const StructuralState& s0)
    : params_(p), f_(f) {
    p.validate();
    b_inertial_ = Vec3(std::cos(p.alpha), std::sin(p.alpha) * p.b_tilde[0],
                       std::sin(p.alpha) * p.b_tilde[1]);
    InertialQuantities iq = body_to_inertial(s0, f.value(0.0), p.alpha, p.b_tilde);
    Vec3 chi0(0, iq.chi[0], iq.chi[1]);
    Vec3 chidot0 = Vec3(0, iq.gamma[0], iq.gamma[1]) - f.value(0.0) * b_inertial_;

    Eigen::SelfAdjointEigenSolver<Mat3> es(p.stiffness_A);
    for (int i = 0; i < 3; ++i) {
        Mode m;
        m.Omega = std::sqrt(es.eigenvalues()[i]);
        m.shape = es.eigenvectors().col(i);
        m.coupling = (cc.c - 1.0) * m.shape.dot(b_inertial_);
        setup_mode(m, m.shape.dot(chi0), m.shape.dot(chidot0));
        modes_.push_back(m);
    }
    rot_.Omega = std::sqrt(p.k);
    rot_.shape = Vec3::Zero();
    rot_.coupling = cc.d;
    setup_mode(rot_, s0.theta, s0.omega);
}

void VacuumOrbit::setup_mode(Mode& m, double q0, double qdot0) const {
    int M = f_.harmonics();
    m.part_cos.assign(M + 1, 0.0);
    m.part_sin.assign(M + 1, 0.0);
    const double O2 = m.Omega * m.Omega;
    for (int h = 1; h <= M; ++h) {
        double nu = f_.frequency(h);
        double am = h < (int)f_.cos_coeffs.size() ? f_.cos_coeffs[h] : 0.0;
        double bm = h - 1 < (int)f_.sin_coeffs.size() ? f_.sin_coeffs[h - 1] : 0.0;
        double C = m.coupling * bm * nu, S = -m.coupling * am * nu;
        if (std::abs(nu - m.Omega) <= 1e-9 * m.Omega) {
            if (am != 0.0 || bm != 0.0) m.resonant_harmonic = h;
            m.res_C = C;
            m.res_S = S;
        } else {
            m.part_cos[h] = C / (O2 - nu * nu);
            m.part_sin[h] = S / (O2 - nu * nu);
        }
    }
    m.hom_cos = 0;
    m.hom_sin = 0;
    auto [qp, qpd] = mode_value(m, 0.0);
    m.hom_cos = q0 - qp;
    m.hom_sin = (qdot0 - qpd) / m.Omega;
}

std::pair<double, double> VacuumOrbit::mode_value(const Mode& m, double t) const {
    double O = m.Omega;
    double c = std::cos(O * t), s = std::sin(O * t);
    double q = m.hom_cos * c + m.hom_sin * s;
    double qd = O * (-m.hom_cos * s + m.hom_sin * c);
    for (size_t h = 1; h < m.part_cos.size(); ++h) {
        if (m.part_cos[h] == 0.0 && m.part_sin[h] == 0.0) continue;
        double nu = f_.frequency((int)h);
        double ch = std::cos(nu * t), sh = std::sin(nu * t);
        q += m.part_cos[h] * ch + m.part_sin[h] * sh;
        qd += nu * (-m.part_cos[h] * sh + m.part_sin[h] * ch);
    }
    if (m.res_C != 0.0 || m.res_S != 0.0) {
        double g = m.res_C * s - m.res_S * c;
        q += t / (2 * O) * g;
        qd += g / (2 * O) + 0.5 * t * (m.res_C * c + m.res_S * s);
    }
    return {q, qd};
}

VacuumOrbit::Sample VacuumOrbit::eval(double t) const {
    Sample smp;
    smp.t = t;
    smp.chi.setZero();
    smp.chi_dot.setZero();
    for (const auto& m : modes_) {
        auto [q, qd] = mode_value(m, t);
        smp.chi += q * m.shape;
        smp.chi_dot += qd * m.shape;
    }
    auto [th, om] = mode_value(rot_, t);
    smp.theta = th;
    smp.omega = om;
    return smp;
}

StructuralState VacuumOrbit::body_state(double t) const {
    Sample smp = eval(t);
    Mat2 Rt = rotation_planar(smp.theta).transpose();
    Vec3 gamma = smp.chi_dot + f_.value(t) * b_inertial_;
    StructuralState s;
    s.delta = Rt * smp.chi.tail<2>();
    s.xi = Rt * gamma.tail<2>();
    s.theta = smp.theta;
    s.omega = smp.omega;
    return s;
}

bool VacuumOrbit::any_resonance() const {
    if (rot_.resonant()) return true;
    for (const auto& m : modes_)
        if (m.resonant()) return true;
    return false;
}

VacuumOrbit vacuum_solve(const PhysicalParams& p, const CouplingConstants& cc, const Forcing& f,
                         const StructuralState& initial, double t_end, int n_samples,
                         VacuumTrajectory* traj) {
    VacuumOrbit orb(p, cc, f, initial);
    if (traj && n_samples > 0) {
        traj->samples.clear();
        for (int i = 0; i <= n_samples; ++i) traj->samples.push_back(orb.eval(t_end * i / n_samples));
    }
    return orb;
}

namespace {

struct Deriv {
    Vec2 xi, delta;
    double omega, theta;
};

Deriv vacuum_rhs(const PhysicalParams& p, const CouplingConstants& cc, const Forcing& f,
                 const StructuralState& s, double t) {
    Vec2 b = flow_direction_planar(s.theta, p.b_tilde);
    Mat2 B = stiffness_planar(s.theta, p.stiffness_A);
    double V = f.value(t), Vd = f.derivative(t);
    Deriv d;
    d.xi = -s.omega * perp(s.xi) - B * s.delta + cc.c * Vd * b;
    d.delta = s.xi - V * b - s.omega * perp(s.delta);
    d.omega = -p.k * s.theta + cc.d * Vd;
    d.theta = s.omega;
    return d;
}

StructuralState axpy(const StructuralState& s, double a, const Deriv& d) {
    StructuralState r;
    r.xi = s.xi + a * d.xi;
    r.delta = s.delta + a * d.delta;
    r.omega = s.omega + a * d.omega;
    r.theta = s.theta + a * d.theta;
    return r;
}

}  // namespace

StructuralState integrate_structure_vacuum(const PhysicalParams& p, const CouplingConstants& cc,
                                           const Forcing& f, StructuralState s, double t0,
                                           double t1, double dt) {
    long nsteps = std::max(1L, std::lround(std::ceil((t1 - t0) / dt - 1e-9)));
    double h = (t1 - t0) / nsteps;
    for (long i = 0; i < nsteps; ++i) {
        double t = t0 + i * h;
        Deriv k1 = vacuum_rhs(p, cc, f, s, t);
        Deriv k2 = vacuum_rhs(p, cc, f, axpy(s, h / 2, k1), t + h / 2);
        Deriv k3 = vacuum_rhs(p, cc, f, axpy(s, h / 2, k2), t + h / 2);
        Deriv k4 = vacuum_rhs(p, cc, f, axpy(s, h, k3), t + h);
        s.xi += h / 6 * (k1.xi + 2 * k2.xi + 2 * k3.xi + k4.xi);
        s.delta += h / 6 * (k1.delta + 2 * k2.delta + 2 * k3.delta + k4.delta);
        s.omega += h / 6 * (k1.omega + 2 * k2.omega + 2 * k3.omega + k4.omega);
        s.theta += h / 6 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta);
    }
    return s;
}

}  // namespace fsi
