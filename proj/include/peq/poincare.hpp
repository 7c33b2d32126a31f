#pragma once

#include "peq/grid.hpp"

namespace peq {

struct PoincareOptions {
  double tolerance = 1e-8;     // relative change of the Rayleigh quotient
  int max_iterations = 500;
  double cap_epsilon = 1e-6;
};

struct PoincareResult {
  double lambda = 0.0;         // min(eigenvalue, (1 - cap_epsilon)/K2)
  double eigenvalue = 0.0;     // smallest eigenvalue before capping
  int iterations = 0;
  bool capped = false;
};

/// Smallest eigenvalue of the discrete velocity V-norm operator on
/// constraint-satisfying fields, by inverse iteration. Throws SolveError when
/// the Rayleigh quotient has not settled after max_iterations.
PoincareResult poincare_eigen(const Parameters& p, const Grid& g, const PoincareOptions& opt = {});

inline double poincare_lambda(const Parameters& p, const Grid& g, const PoincareOptions& opt = {}) {
  return poincare_eigen(p, g, opt).lambda;
}

}  // namespace peq
