#include "peq/poisson.hpp"

#include <string>
#include <vector>

#include "peq/diffusion.hpp"

namespace peq {

std::array<SurfaceField, 2> grad_2d(SurfaceField p, const Grid& g) {
  p.fill_ghost(1.0, 1.0);
  std::array<SurfaceField, 2> out{SurfaceField(g.nx(), g.ny()), SurfaceField(g.nx(), g.ny())};
  const double rx = 0.5 / g.dx, ry = 0.5 / g.dy;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      out[0](i, j) = (p(i + 1, j) - p(i - 1, j)) * rx;
      out[1](i, j) = (p(i, j + 1) - p(i, j - 1)) * ry;
    }
  return out;
}

SurfaceField div_2d(SurfaceField u, SurfaceField v, const Grid& g) {
  u.fill_ghost(-1.0, 1.0);
  v.fill_ghost(1.0, -1.0);
  SurfaceField out(g.nx(), g.ny());
  const double rx = 0.5 / g.dx, ry = 0.5 / g.dy;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      out(i, j) = (u(i + 1, j) - u(i - 1, j)) * rx + (v(i, j + 1) - v(i, j - 1)) * ry;
  return out;
}

namespace {

// Centred first difference along one axis with mirror ghosts, as a matrix.
Eigen::SparseMatrix<double> gradient_matrix(const Grid& g, int axis) {
  const int nx = g.nx(), ny = g.ny();
  const std::size_t n = std::size_t(nx) * ny;
  const double r = 0.5 / (axis == 0 ? g.dx : g.dy);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * n);
  auto idx = [ny](int i, int j) { return std::size_t(i) * ny + std::size_t(j); };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      int ip = i, im = i, jp = j, jm = j;
      if (axis == 0) {
        ip = std::min(i + 1, nx - 1);
        im = std::max(i - 1, 0);
      } else {
        jp = std::min(j + 1, ny - 1);
        jm = std::max(j - 1, 0);
      }
      trip.emplace_back(idx(i, j), idx(ip, jp), r);
      trip.emplace_back(idx(i, j), idx(im, jm), -r);
    }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

PoissonSolver2D::PoissonSolver2D(const Grid& g, double tolerance) : grid_(g), tolerance_(tolerance) {
  const Eigen::SparseMatrix<double> gx = gradient_matrix(g, 0);
  const Eigen::SparseMatrix<double> gy = gradient_matrix(g, 1);
  // The odd-ghost divergence is the negative transpose of the mirror-ghost gradient.
  Eigen::SparseMatrix<double> gtg = Eigen::SparseMatrix<double>(gx.transpose()) * gx +
                                    Eigen::SparseMatrix<double>(gy.transpose()) * gy;
  lap_ = -gtg;
  lap_.makeCompressed();
  // Anchor one value so the factored matrix is definite; the mean is removed afterwards.
  gtg.coeffRef(0, 0) += 1.0;
  ldlt_.compute(gtg);
  if (ldlt_.info() != Eigen::Success) throw SolveError("surface pressure factorization failed");
}

SurfaceField PoissonSolver2D::solve(const SurfaceField& rhs) const {
  Eigen::VectorXd b = rhs.interior();
  b.array() -= b.mean();
  SurfaceField out(grid_.nx(), grid_.ny());
  const double bnorm = b.norm();
  if (bnorm == 0.0) return out;
  Eigen::VectorXd x = ldlt_.solve(-b);
  x.array() -= x.mean();
  const double residual = (lap_ * x - b).norm() / bnorm;
  if (!(residual <= tolerance_)) {
    throw SolveError("surface pressure solve residual " + std::to_string(residual) +
                     " exceeds tolerance");
  }
  out.set_interior(x);
  out.fill_ghost(1.0, 1.0);
  return out;
}

}  // namespace peq
