#include "peq/poincare.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <string>

#include "peq/diffusion.hpp"
#include "peq/solver.hpp"
#include "peq/stencil.hpp"

namespace peq {

namespace {

using Cg = Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>;

struct VelocityPair {
  ScalarField u;
  ScalarField v;
};

double dot(const VelocityPair& a, const VelocityPair& b) {
  return a.u.interior().dot(b.u.interior()) + a.v.interior().dot(b.v.interior());
}

}  // namespace

PoincareResult poincare_eigen(const Parameters& p, const Grid& g, const PoincareOptions& opt) {
  validate_parameters(p);
  const DiffusionOperator au(g, bc_velocity_x(), 1.0 / p.re1, 1.0 / p.re2);
  const DiffusionOperator av(g, bc_velocity_y(), 1.0 / p.re1, 1.0 / p.re2);
  const Eigen::SparseMatrix<double> mu(au.matrix()), mv(av.matrix());
  Cg cg_u, cg_v;
  for (Cg* cg : {&cg_u, &cg_v}) {
    cg->setTolerance(1e-12);
    cg->setMaxIterations(20000);
  }
  cg_u.compute(mu);
  cg_v.compute(mv);
  const PoissonSolver2D ps(g, 1e-10);

  auto project = [&](VelocityPair x) {
    x.u = with_ghosts(std::move(x.u), bc_velocity_x());
    x.v = with_ghosts(std::move(x.v), bc_velocity_y());
    ProjectionResult r = barotropic_projection(x.u, x.v, 1.0, ps, g);
    return VelocityPair{std::move(r.u), std::move(r.v)};
  };
  auto normalize = [](VelocityPair& x) {
    const double n = std::sqrt(dot(x, x));
    x.u *= 1.0 / n;
    x.v *= 1.0 / n;
  };
  auto rayleigh = [&](const VelocityPair& x) {
    const Eigen::VectorXd xu = x.u.interior(), xv = x.v.interior();
    return (xu.dot(mu * xu) + xv.dot(mv * xv)) / (xu.squaredNorm() + xv.squaredNorm());
  };

  // Deterministic start with components on every admissible mode.
  VelocityPair x{ScalarField(g.shape), ScalarField(g.shape)};
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) {
        const double s = std::sin(1.0 + 0.37 * i + 0.91 * j * j + 1.73 * k + 0.11 * i * k);
        x.u(i, j, k) = s;
        x.v(i, j, k) = std::cos(2.0 + 0.53 * i * j + 1.29 * k + 0.07 * j);
      }
  x = project(std::move(x));
  normalize(x);

  PoincareResult out;
  double rq = rayleigh(x);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    VelocityPair y{ScalarField(g.shape), ScalarField(g.shape)};
    y.u.set_interior(cg_u.solve(x.u.interior()));
    y.v.set_interior(cg_v.solve(x.v.interior()));
    if (cg_u.info() != Eigen::Success || cg_v.info() != Eigen::Success)
      throw SolveError("inverse iteration: inner solve did not converge");
    // A commutes with the projection, so re-projecting only removes round-off drift.
    x = project(std::move(y));
    normalize(x);
    const double next = rayleigh(x);
    const bool done = std::abs(next - rq) <= opt.tolerance * std::abs(next);
    rq = next;
    out.iterations = it;
    if (done) {
      out.eigenvalue = rq;
      const double cap = (1.0 - opt.cap_epsilon) / k2_constant(p);
      out.capped = rq > cap;
      out.lambda = out.capped ? cap : rq;
      return out;
    }
  }
  throw SolveError("inverse iteration did not converge after " + std::to_string(opt.max_iterations) +
                   " iterations");
}

}  // namespace peq
