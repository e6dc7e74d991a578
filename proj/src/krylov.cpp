#include "bddcso/krylov.hpp"

#include "bddcso/errors.hpp"

#include <cmath>
#include <string>

namespace bddcso {

PcgResult pcg(LinearOperator const& apply_a, LinearOperator const& apply_b, Vector const& b,
              PcgOptions const& options)
{
  PcgResult out;
  auto& rep = out.report;
  long const n = b.size();
  out.solution = Vector::Zero(n);

  Vector r = b;
  double const norm0 = r.norm();
  rep.residual_history.push_back(norm0);
  if (norm0 == 0.0) {
    rep.converged = true;
    return out;
  }

  Vector z(n), p(n), q(n);
  apply_b(r, z);
  double rz = r.dot(z);
  if (!(rz > 0.0))
    throw Error("preconditioner not SPD: <r, B r> = " + std::to_string(rz));
  p = z;

  std::vector<double> alphas, betas;
  while (rep.iterations < options.max_iters) {
    apply_a(p, q);
    double const pq = p.dot(q);
    if (!(pq > 0.0))
      throw Error("operator not SPD: <p, A p> = " + std::to_string(pq));
    double const alpha = rz / pq;
    out.solution.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    alphas.push_back(alpha);
    ++rep.iterations;

    double const rnorm = r.norm();
    rep.residual_history.push_back(rnorm);
    if (rnorm <= options.tol * norm0) {
      rep.converged = true;
      break;
    }

    apply_b(r, z);
    double const rz_new = r.dot(z);
    if (!(rz_new > 0.0))
      throw Error("preconditioner not SPD: <r, B r> = " + std::to_string(rz_new));
    double const beta = rz_new / rz;
    betas.push_back(beta);
    rz = rz_new;
    p = z + beta * p;
  }

  // T(k,k) = 1/alpha_k + beta_{k-1}/alpha_{k-1},  T(k,k+1) = sqrt(beta_k)/alpha_k.
  std::size_t const k = alphas.size();
  rep.lanczos_diagonal.resize(k);
  rep.lanczos_off_diagonal.resize(k > 0 ? k - 1 : 0);
  for (std::size_t j = 0; j < k; ++j) {
    rep.lanczos_diagonal[j] = 1.0 / alphas[j] + (j > 0 ? betas[j - 1] / alphas[j - 1] : 0.0);
    if (j + 1 < k)
      rep.lanczos_off_diagonal[j] = std::sqrt(betas[j]) / alphas[j];
  }
  if (k > 0) {
    rep.ritz_extremes = tridiag_eig(rep.lanczos_diagonal, rep.lanczos_off_diagonal);
    rep.kappa_estimate = rep.ritz_extremes.second / rep.ritz_extremes.first;
  }
  return out;
}

} // namespace bddcso
