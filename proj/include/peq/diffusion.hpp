#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <memory>
#include <stdexcept>

#include "peq/field.hpp"

namespace peq {

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Compact seven-point operator A f = -(vh d2/dx2 + vh d2/dy2 + vz d2/dz2) f with
/// the ghost rules of `bc` eliminated into the diagonal. A is symmetric positive
/// semidefinite in the cell-volume inner product and
///   <A f, f> = vnorm_sq(f)
/// (sum of squared face differences plus the Robin surface term).
class DiffusionOperator {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  DiffusionOperator(const Grid& g, const FieldBc& bc, double visc_h, double visc_z);

  const Grid& grid() const { return grid_; }
  const FieldBc& bc() const { return bc_; }
  const Matrix& matrix() const { return a_; }
  double visc_h() const { return visc_h_; }
  double visc_z() const { return visc_z_; }

  ScalarField apply(const ScalarField& f) const;

 private:
  Grid grid_;
  FieldBc bc_;
  double visc_h_;
  double visc_z_;
  Matrix a_;
};

/// Solver for (I + tau A) x = b by preconditioned conjugate gradients.
class ShiftedDiffusionSolver {
 public:
  ShiftedDiffusionSolver(const DiffusionOperator& op, double tau, double tolerance = 1e-10,
                         int max_iterations = 5000);
  ShiftedDiffusionSolver(const ShiftedDiffusionSolver&) = delete;
  ShiftedDiffusionSolver& operator=(const ShiftedDiffusionSolver&) = delete;

  double tau() const { return tau_; }

  /// Returns the solution with the operator's bc attached and ghosts filled.
  /// Throws SolveError if the relative residual does not reach the tolerance.
  ScalarField solve(const ScalarField& rhs) const;

  int last_iterations() const { return last_iterations_; }

 private:
  Grid grid_;
  FieldBc bc_;
  double tau_;
  Eigen::SparseMatrix<double> m_;
  std::unique_ptr<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>> cg_;
  mutable int last_iterations_ = 0;
};

/// One backward-Euler diffusion step: solves (I + dt A) f_new = f with f's bc.
ScalarField implicit_diffusion_step(const ScalarField& f, const Grid& g, double dt, double visc_h,
                                    double visc_z, double tolerance = 1e-10);

}  // namespace peq
