#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <array>

#include "peq/field.hpp"

namespace peq {

/// Centred 2D gradient of a surface field with mirror (Neumann) ghosts.
std::array<SurfaceField, 2> grad_2d(SurfaceField p, const Grid& g);

/// Centred 2D divergence of a horizontal vector field whose normal components
/// vanish on the lateral boundary (odd reflection).
SurfaceField div_2d(SurfaceField u, SurfaceField v, const Grid& g);

/// Solves div_2d(grad_2d(p)) = rhs over M with a mean-zero gauge.
/// The operator is the composition of the two centred stencils above, so the
/// projected velocity has a discretely vanishing divergence.
class PoissonSolver2D {
 public:
  explicit PoissonSolver2D(const Grid& g, double tolerance = 1e-10);
  PoissonSolver2D(const PoissonSolver2D&) = delete;
  PoissonSolver2D& operator=(const PoissonSolver2D&) = delete;

  /// rhs is projected onto the mean-zero subspace before solving.
  /// Throws SolveError when the relative residual exceeds the tolerance.
  SurfaceField solve(const SurfaceField& rhs) const;

  /// Matrix of div_2d(grad_2d(.)) on packed interior values.
  const Eigen::SparseMatrix<double>& laplacian() const { return lap_; }

 private:
  Grid grid_;
  double tolerance_;
  Eigen::SparseMatrix<double> lap_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace peq
