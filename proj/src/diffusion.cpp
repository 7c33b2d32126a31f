#include "peq/diffusion.hpp"

#include <string>
#include <vector>

#include "peq/stencil.hpp"

namespace peq {

namespace {

std::size_t cell_index(const Shape& s, int i, int j, int k) {
  return (std::size_t(i) * s.ny + std::size_t(j)) * std::size_t(s.nz) + std::size_t(k);
}

}  // namespace

DiffusionOperator::DiffusionOperator(const Grid& g, const FieldBc& bc, double visc_h, double visc_z)
    : grid_(g), bc_(bc), visc_h_(visc_h), visc_z_(visc_z) {
  const Shape s = g.shape;
  const std::size_t n = s.cells();
  const double coef[3] = {visc_h / (g.dx * g.dx), visc_h / (g.dy * g.dy), visc_z / (g.dz * g.dz)};
  const int extent[3] = {s.nx, s.ny, s.nz};

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n * 7);
  for (int i = 0; i < s.nx; ++i)
    for (int j = 0; j < s.ny; ++j)
      for (int k = 0; k < s.nz; ++k) {
        const std::size_t row = cell_index(s, i, j, k);
        double diag = 0.0;
        for (int d = 0; d < 3; ++d) {
          diag += 2.0 * coef[d];
          for (int side : {-1, 1}) {
            int nb[3] = {i, j, k};
            nb[d] += side;
            if (nb[d] < 0 || nb[d] >= extent[d]) {
              const Face face = static_cast<Face>(2 * d + (side > 0 ? 1 : 0));
              diag -= coef[d] * bc[face].factor();
            } else {
              trip.emplace_back(row, cell_index(s, nb[0], nb[1], nb[2]), -coef[d]);
            }
          }
        }
        trip.emplace_back(row, row, diag);
      }
  a_.resize(n, n);
  a_.setFromTriplets(trip.begin(), trip.end());
}

ScalarField DiffusionOperator::apply(const ScalarField& f) const {
  ScalarField out(f.shape());
  const Eigen::VectorXd x = f.interior();
  out.set_interior(a_ * x);
  return out;
}

ShiftedDiffusionSolver::ShiftedDiffusionSolver(const DiffusionOperator& op, double tau, double tolerance,
                                               int max_iterations)
    : grid_(op.grid()), bc_(op.bc()), tau_(tau) {
  const std::size_t n = grid_.shape.cells();
  Eigen::SparseMatrix<double> id(n, n);
  id.setIdentity();
  m_ = id + tau * Eigen::SparseMatrix<double>(op.matrix());
  m_.makeCompressed();
  cg_ = std::make_unique<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>>();
  cg_->setTolerance(tolerance);
  cg_->setMaxIterations(max_iterations);
  cg_->compute(m_);
}

ScalarField ShiftedDiffusionSolver::solve(const ScalarField& rhs) const {
  const Eigen::VectorXd b = rhs.interior();
  ScalarField out(rhs.shape(), bc_);
  if (b.squaredNorm() == 0.0) {
    last_iterations_ = 0;
    return out;
  }
  const Eigen::VectorXd x = cg_->solveWithGuess(b, b);
  if (cg_->info() != Eigen::Success) {
    throw SolveError("diffusion solve did not converge: relative residual " +
                     std::to_string(cg_->error()) + " after " + std::to_string(cg_->iterations()) +
                     " iterations");
  }
  last_iterations_ = int(cg_->iterations());
  out.set_interior(x);
  fill_ghost(out);
  return out;
}

ScalarField implicit_diffusion_step(const ScalarField& f, const Grid& g, double dt, double visc_h,
                                    double visc_z, double tolerance) {
  const DiffusionOperator op(g, f.bc(), visc_h, visc_z);
  const ShiftedDiffusionSolver solver(op, dt, tolerance);
  return solver.solve(f);
}

}  // namespace peq
