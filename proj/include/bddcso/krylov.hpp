#pragma once

#include "bddcso/linalg.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace bddcso {

using LinearOperator = std::function<void(Vector const&, Vector&)>;

struct PcgOptions
{
  double tol = 1e-6;   ///< relative reduction of the residual 2-norm
  int max_iters = 2000;
};

struct SolveReport
{
  int iterations = 0;
  std::vector<double> residual_history; ///< ||r_k||_2, starting with ||b||_2
  bool converged = false;
  double kappa_estimate = 1.0;
  std::pair<double, double> ritz_extremes{1.0, 1.0};
  std::vector<double> lanczos_diagonal;
  std::vector<double> lanczos_off_diagonal;
};

struct PcgResult
{
  Vector solution;
  SolveReport report;
};

/// Preconditioned conjugate gradients from a zero initial guess. The Lanczos
/// tridiagonal matrix is rebuilt from the step coefficients to estimate the extreme
/// eigenvalues of B A. Hitting max_iters is reported, not thrown.
PcgResult pcg(LinearOperator const& apply_a, LinearOperator const& apply_b, Vector const& b,
              PcgOptions const& options = {});

} // namespace bddcso
