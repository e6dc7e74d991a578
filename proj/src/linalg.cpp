#include "bddcso/linalg.hpp"

#include "bddcso/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bddcso {

LinalgTolerances& default_tolerances()
{
  static LinalgTolerances tol;
  return tol;
}

// ---------------------------------------------------------------------------
// SparseSym

SparseSym::SparseSym(SparseMatrix full) : mat_(std::move(full))
{
  if (mat_.rows() != mat_.cols())
    throw InvalidArgument("SparseSym: matrix is not square");
  mat_.makeCompressed();
}

SparseSym SparseSym::from_lower_triplets(long n, std::vector<Triplet> const& lower)
{
  SparseMatrix low(n, n);
  low.setFromTriplets(lower.begin(), lower.end());
  for (int k = 0; k < low.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(low, k); it; ++it)
      if (it.row() < it.col())
        throw InvalidArgument("SparseSym: upper-triangle triplet passed as lower");
  SparseMatrix strict = low.triangularView<Eigen::StrictlyLower>();
  SparseMatrix full = low + SparseMatrix(strict.transpose());
  return SparseSym(std::move(full));
}

Vector SparseSym::multiply(Vector const& x) const
{
  Vector y;
  multiply(x, y);
  return y;
}

void SparseSym::multiply(Vector const& x, Vector& y) const
{
  if (x.size() != mat_.cols())
    throw InvalidArgument("SparseSym::multiply: dimension mismatch");
  y.noalias() = mat_ * x;
}

double SparseSym::entry(long i, long j) const
{
  return mat_.coeff(static_cast<int>(i), static_cast<int>(j));
}

DenseMatrix SparseSym::to_dense() const
{
  return DenseMatrix(mat_);
}

SparseSym SparseSym::scaled(double c) const
{
  return SparseSym(SparseMatrix(c * mat_));
}

// ---------------------------------------------------------------------------
// SpdFactorization

SpdFactorization::SpdFactorization(SparseSym const& a, LinalgTolerances const& tol)
    : n_(a.dim())
{
  if (n_ == 0)
    return;
  auto solver = std::make_shared<Solver>();
  solver->compute(a.matrix());

  // Scan the pivots in elimination order; entries past a hard failure are not valid
  // but the first offending pivot always precedes them.
  auto const& d = solver->vectorD();
  auto const& pinv = solver->permutationPinv().indices();
  for (long k = 0; k < n_; ++k) {
    long const row = pinv(k);
    double const scale = std::abs(a.entry(row, row));
    if (!std::isfinite(d(k)) || d(k) <= tol.spd_pivot * scale || d(k) <= 0.0)
      throw NotSpdError("matrix not SPD: non-positive pivot at row " + std::to_string(row), row);
  }
  if (solver->info() != Eigen::Success)
    throw NotSpdError("matrix not SPD: factorization failed", -1);
  solver_ = std::move(solver);
}

Vector SpdFactorization::solve(Vector const& rhs) const
{
  if (rhs.size() != n_)
    throw InvalidArgument("SpdFactorization::solve: dimension mismatch");
  if (n_ == 0)
    return Vector();
  return solver_->solve(rhs);
}

DenseMatrix SpdFactorization::solve(DenseMatrix const& rhs) const
{
  if (rhs.rows() != n_)
    throw InvalidArgument("SpdFactorization::solve: dimension mismatch");
  if (n_ == 0)
    return DenseMatrix(0, rhs.cols());
  return solver_->solve(rhs);
}

// ---------------------------------------------------------------------------
// SaddleFactorization

SaddleFactorization::SaddleFactorization(SparseSym const& a, SparseMatrix const& c, long owner,
                                         LinalgTolerances const& tol)
    : c_(c), n_(a.dim()), m_(c.rows())
{
  if (c.cols() != n_)
    throw InvalidArgument("SaddleFactorization: constraint matrix has wrong column count");
  c_.makeCompressed();

  std::string const who = owner >= 0 ? " (subdomain " + std::to_string(owner) + ")" : std::string();

  if (m_ > 0) {
    DenseMatrix gram = DenseMatrix(c_ * SparseMatrix(c_.transpose()));
    Eigen::LDLT<DenseMatrix> ldlt(gram);
    double const dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
    double const dmin = ldlt.vectorD().minCoeff();
    if (!(dmax > 0.0) || dmin <= tol.constraint_rank * dmax)
      throw UnderconstrainedError("constraint rows are linearly dependent" + who, owner);
  }

  // R_k = mean(diag A over the row support) / ||c_k||^2, so each row adds an O(diag A)
  // contribution to K.
  penalty_ = Vector::Zero(m_);
  {
    Vector diag_sum = Vector::Zero(m_);
    Vector norm2 = Vector::Zero(m_);
    Vector count = Vector::Zero(m_);
    for (int k = 0; k < c_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(c_, k); it; ++it) {
        diag_sum(it.row()) += std::abs(a.entry(it.col(), it.col()));
        norm2(it.row()) += it.value() * it.value();
        count(it.row()) += 1.0;
      }
    for (long r = 0; r < m_; ++r) {
      double const mean_diag = count(r) > 0 ? diag_sum(r) / count(r) : 1.0;
      penalty_(r) = (mean_diag > 0 ? mean_diag : 1.0) / norm2(r);
    }
  }

  SparseMatrix ct = c_.transpose();
  SparseMatrix aug = a.matrix() + SparseMatrix(ct * penalty_.asDiagonal() * c_);
  // Mirror the lower triangle so the augmented matrix is bitwise symmetric.
  SparseMatrix low = aug.triangularView<Eigen::Lower>();
  SparseMatrix strict = aug.triangularView<Eigen::StrictlyLower>();
  SparseSym k(SparseMatrix(low + SparseMatrix(strict.transpose())));

  try {
    augmented_ = SpdFactorization(k, tol);
  } catch (NotSpdError const& e) {
    throw UnderconstrainedError("floating subdomain underconstrained" + who + ": " + e.what(), owner);
  }

  if (m_ > 0) {
    DenseMatrix z = augmented_.solve(DenseMatrix(ct));
    DenseMatrix s = c_ * z;
    s = 0.5 * (s + s.transpose()).eval();
    schur_.compute(s);
    if (schur_.info() != Eigen::Success)
      throw UnderconstrainedError("floating subdomain underconstrained" + who +
                                      ": singular constraint Schur complement",
                                  owner);
  }
}

std::pair<Vector, Vector> SaddleFactorization::solve(Vector const& f, Vector const& g) const
{
  if (f.size() != n_ || g.size() != m_)
    throw InvalidArgument("SaddleFactorization::solve: dimension mismatch");
  Vector rhs = f;
  if (m_ == 0)
    return {augmented_.solve(rhs), Vector()};
  rhs.noalias() += c_.transpose() * penalty_.cwiseProduct(g);
  Vector y = augmented_.solve(rhs);
  Vector lambda = schur_.solve(c_ * y - g);
  rhs.noalias() -= c_.transpose() * lambda;
  Vector u = augmented_.solve(rhs);
  // C u = g makes the penalty terms cancel, so lambda also solves A u + C^T lambda = f.
  return {std::move(u), std::move(lambda)};
}

Vector SaddleFactorization::solve_primal(Vector const& f) const
{
  return solve(f, Vector::Zero(m_)).first;
}

DenseMatrix SaddleFactorization::constrained_basis() const
{
  if (m_ == 0)
    return DenseMatrix(n_, 0);
  DenseMatrix z = augmented_.solve(DenseMatrix(c_.transpose()));
  DenseMatrix sinv = schur_.solve(DenseMatrix::Identity(m_, m_));
  return z * sinv;
}

// ---------------------------------------------------------------------------
// Eigenvalues

Vector dense_sym_eig(DenseMatrix const& a, LinalgTolerances const& tol)
{
  if (a.rows() != a.cols())
    throw InvalidArgument("dense_sym_eig: matrix is not square");
  if (a.size() == 0)
    return Vector();
  double const scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol.symmetry * scale)
    throw InvalidArgument("dense_sym_eig: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error("dense_sym_eig: eigensolver did not converge");
  return es.eigenvalues();
}

std::pair<double, double> tridiag_eig(std::vector<double> const& diagonal,
                                      std::vector<double> const& off_diagonal)
{
  if (diagonal.empty())
    throw InvalidArgument("tridiag_eig: empty matrix");
  if (off_diagonal.size() + 1 != diagonal.size())
    throw InvalidArgument("tridiag_eig: off-diagonal must have n-1 entries");
  long const n = static_cast<long>(diagonal.size());
  if (n == 1)
    return {diagonal[0], diagonal[0]};
  Vector d = Eigen::Map<Vector const>(diagonal.data(), n);
  Vector e = Eigen::Map<Vector const>(off_diagonal.data(), n - 1);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es;
  es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error("tridiag_eig: eigensolver did not converge");
  return {es.eigenvalues()(0), es.eigenvalues()(n - 1)};
}

} // namespace bddcso
