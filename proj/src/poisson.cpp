#include "fsi/poisson.hpp"

#include <cmath>

namespace fsi {

Preconditioner parse_preconditioner(const std::string& s) {
    if (s == "jacobi") return Preconditioner::jacobi;
    if (s == "cholesky") return Preconditioner::cholesky;
    throw InvalidInput("unknown preconditioner '" + s + "'");
}

std::string to_string(Preconditioner p) {
    return p == Preconditioner::jacobi ? "jacobi" : "cholesky";
}

PressureSolver::PressureSolver(const Grid& g, const Masks& m, const FaceVec& beta,
                               Preconditioner pc, int max_iter)
    : g_(g), pc_(pc), max_iter_(max_iter) {
    const int n = g.n;
    cell_to_row_.assign(g.ncells(), -1);
    for (int c = 0; c < g.ncells(); ++c)
        if (m.cell_active[c]) {
            cell_to_row_[c] = (int)row_to_cell_.size();
            row_to_cell_.push_back(c);
        }
    const int N = (int)row_to_cell_.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * N);
    auto couple = [&](int f, int c0, int c1) {
        if (!m.face_free[f]) return;
        double b = beta[f];
        int r0 = cell_to_row_[c0], r1 = cell_to_row_[c1];
        trip.emplace_back(r0, r0, b);
        trip.emplace_back(r1, r1, b);
        trip.emplace_back(r0, r1, -b);
        trip.emplace_back(r1, r0, -b);
    };
    for (int j = 0; j < n; ++j)
        for (int i = 1; i < n; ++i) couple(g.id2(i, j), g.idc(i - 1, j), g.idc(i, j));
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < n; ++i) couple(g.id3(i, j), g.idc(i, j - 1), g.idc(i, j));
    A_.resize(N, N);
    A_.setFromTriplets(trip.begin(), trip.end());
    A_.makeCompressed();
    diag_ = A_.diagonal();
    for (int r = 0; r < N; ++r)
        if (!(diag_[r] > 0)) throw InvalidInput("isolated active cell in pressure operator");
    if (pc_ == Preconditioner::cholesky) {
        // pin the constant mode through a single diagonal entry; exact for compatible right sides
        Eigen::SparseMatrix<double> Ap = A_;
        Ap.coeffRef(0, 0) += diag_[0];
        ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
        ldlt_->compute(Ap);
        if (ldlt_->info() != Eigen::Success) throw NumericalFailure("pressure factorization failed");
    }
    x_.resize(N);
    r_.resize(N);
    z_.resize(N);
    p_.resize(N);
    q_.resize(N);
}

void PressureSolver::apply(const CellVec& phi, CellVec& out) const {
    const int N = (int)row_to_cell_.size();
    Eigen::VectorXd x(N);
    for (int r = 0; r < N; ++r) x[r] = phi[row_to_cell_[r]];
    Eigen::VectorXd y = A_ * x;
    out.assign(g_.ncells(), 0.0);
    for (int r = 0; r < N; ++r) out[row_to_cell_[r]] = y[r];
}

int PressureSolver::solve(const CellVec& b, CellVec& phi, double abs_tol) {
    const int N = (int)row_to_cell_.size();
    phi.resize(g_.ncells(), 0.0);
    for (int r = 0; r < N; ++r) x_[r] = phi[row_to_cell_[r]];
    Eigen::VectorXd bb(N);
    for (int r = 0; r < N; ++r) bb[r] = b[row_to_cell_[r]];
    bb.array() -= bb.mean();
    r_.noalias() = bb - A_ * x_;

    auto precondition = [&]() {
        if (pc_ == Preconditioner::cholesky)
            z_ = ldlt_->solve(r_);
        else
            z_ = r_.cwiseQuotient(diag_);
        z_.array() -= z_.mean();
    };

    int it = 0;
    double res = r_.cwiseAbs().maxCoeff();
    if (!std::isfinite(res)) throw NumericalFailure("pressure right side is not finite", 0);
    if (res > abs_tol) {
        precondition();
        p_ = z_;
        double rz = r_.dot(z_);
        for (it = 1; it <= max_iter_; ++it) {
            q_.noalias() = A_ * p_;
            double pq = p_.dot(q_);
            if (!(pq > 0)) break;
            double alpha = rz / pq;
            x_ += alpha * p_;
            r_ -= alpha * q_;
            res = r_.cwiseAbs().maxCoeff();
            if (!std::isfinite(res)) throw NumericalFailure("pressure solve produced non-finite values", it);
            if (res <= abs_tol) break;
            precondition();
            double rz1 = r_.dot(z_);
            p_ = z_ + (rz1 / rz) * p_;
            rz = rz1;
        }
        if (res > abs_tol)
            throw NumericalFailure("pressure solve did not converge (residual " + std::to_string(res) +
                                       ")",
                                   it);
    }
    x_.array() -= x_.mean();
    for (int c = 0; c < g_.ncells(); ++c) phi[c] = 0.0;
    for (int r = 0; r < N; ++r) phi[row_to_cell_[r]] = x_[r];
    return it;
}

Projector::Projector(const Grid& g, const Masks& m, Preconditioner pc, double rel_tol)
    : g_(g), m_(m), solver_(g, m, FaceVec(g.nfaces(), 1.0), pc), rel_tol_(rel_tol) {}

ProjectionResult Projector::project(FaceVec& u, const CellVec* warm) {
    ProjectionResult res;
    for (int f = 0; f < g_.nfaces(); ++f)
        if (!m_.face_free[f]) u[f] = 0.0;
    divergence(g_, u, div_);
    // A phi = -h^2 div u, then u -= grad phi
    CellVec rhs(g_.ncells());
    const double h2 = g_.h * g_.h;
    for (int c = 0; c < g_.ncells(); ++c) rhs[c] = m_.cell_active[c] ? -h2 * div_[c] : 0.0;
    phi_ = warm ? *warm : CellVec(g_.ncells(), 0.0);
    double umax = max_abs(u);
    if (umax == 0.0) {
        res.p.assign(g_.ncells(), 0.0);
        return res;
    }
    res.iterations = solver_.solve(rhs, phi_, rel_tol_ * g_.h * umax);
    gradient(g_, m_, phi_, grad_);
    for (int f = 0; f < g_.nfaces(); ++f) u[f] -= grad_[f];
    res.p = phi_;
    divergence(g_, u, div_);
    res.div_rel = max_abs_active(m_, div_) * g_.h / umax;
    return res;
}

}  // namespace fsi
