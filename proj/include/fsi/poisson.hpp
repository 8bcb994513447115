#pragma once

#include "fsi/grid.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <string>

namespace fsi {

enum class Preconditioner { jacobi, cholesky };

Preconditioner parse_preconditioner(const std::string& s);
std::string to_string(Preconditioner p);

// Variable-coefficient cell Poisson operator on active cells:
//   (A phi)_c = sum over free faces f of c of beta_f (phi_c - phi_nb).
// Solved by preconditioned CG; the constant mode is removed from the result.
class PressureSolver {
public:
    PressureSolver(const Grid& g, const Masks& m, const FaceVec& beta, Preconditioner pc,
                   int max_iter = 5000);

    // Solves A phi = b. b must be compatible (sum zero over active cells); phi is used as warm start.
    // Stops when max |b - A phi| <= abs_tol. Returns iterations, throws NumericalFailure otherwise.
    int solve(const CellVec& b, CellVec& phi, double abs_tol);

    void apply(const CellVec& phi, CellVec& out) const;
    Preconditioner preconditioner() const { return pc_; }

private:
    const Grid g_;
    std::vector<int> cell_to_row_;
    std::vector<int> row_to_cell_;
    Eigen::SparseMatrix<double> A_;
    Eigen::VectorXd diag_;
    Preconditioner pc_;
    int max_iter_;
    std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
    Eigen::VectorXd x_, r_, z_, p_, q_;
};

struct ProjectionResult {
    CellVec p;         // potential whose face gradient was removed
    int iterations = 0;
    double div_rel = 0;  // max |div| * h / max |u| after projection
};

// Plain L2 projection onto discretely divergence-free fields (unit coefficients).
class Projector {
public:
    Projector(const Grid& g, const Masks& m, Preconditioner pc = Preconditioner::cholesky,
              double rel_tol = 1e-10);
    ProjectionResult project(FaceVec& u, const CellVec* warm = nullptr);

private:
    const Grid g_;
    const Masks& m_;
    PressureSolver solver_;
    double rel_tol_;
    CellVec div_, phi_;
    FaceVec grad_;
};

}  // namespace fsi
