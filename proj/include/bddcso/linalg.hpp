#pragma once

/** @file linalg.hpp
    @brief Sparse symmetric storage, SPD and saddle-point factorizations, small dense eigensolvers.

    The sparse factorizations are thin wrappers around Eigen's simplicial LDLT with an
    AMD fill-reducing ordering. Both factorization types are immutable once constructed
    and solves only use per-call workspaces, so one factorization can serve several
    threads at once.
*/

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <utility>
#include <vector>

namespace bddcso {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Library-wide numerical thresholds. Defaults are the documented constants.
struct LinalgTolerances
{
  /// A pivot d_k is rejected when d_k <= spd_pivot * |a_kk|.
  double spd_pivot = 1e-13;
  /// Relative rank threshold applied to the Gram matrix C C^T of a constraint block.
  double constraint_rank = 1e-10;
  /// Relative asymmetry accepted by dense_sym_eig.
  double symmetry = 1e-12;
};

LinalgTolerances& default_tolerances();

/// Symmetric sparse matrix stored with both triangles.
class SparseSym
{
public:
  SparseSym() = default;

  /// Takes a matrix that is already symmetric (both triangles present).
  explicit SparseSym(SparseMatrix full);

  /// Builds from lower-triangle triplets (row >= col); duplicates are summed and the
  /// strictly lower part is mirrored, so entry(i,j) == entry(j,i) bit for bit.
  static SparseSym from_lower_triplets(long n, std::vector<Triplet> const& lower);

  long dim() const noexcept { return static_cast<long>(mat_.rows()); }
  long nonzeros() const noexcept { return static_cast<long>(mat_.nonZeros()); }

  Vector multiply(Vector const& x) const;
  void multiply(Vector const& x, Vector& y) const;

  double entry(long i, long j) const;
  DenseMatrix to_dense() const;
  SparseMatrix const& matrix() const noexcept { return mat_; }

  SparseSym scaled(double c) const;

private:
  SparseMatrix mat_;
};

/// Sparse LDL^T factorization of an SPD matrix with a deterministic AMD ordering.
class SpdFactorization
{
public:
  SpdFactorization() = default;

  /// Throws NotSpdError naming the first offending row if a pivot is not positive.
  explicit SpdFactorization(SparseSym const& a, LinalgTolerances const& tol = default_tolerances());

  long dim() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }

  Vector solve(Vector const& rhs) const;
  DenseMatrix solve(DenseMatrix const& rhs) const;

private:
  using Solver = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
  std::shared_ptr<Solver const> solver_;
  long n_ = 0;
};

/// Factorization of the symmetric indefinite block system
///
///     [ A  C^T ] [u]   [f]
///     [ C   0  ] [l] = [g]
///
/// where A is only positive semidefinite. The constraints are folded into the SPD
/// augmented matrix K = A + C^T R C (R diagonal, scaled to A) and the multipliers are
/// recovered through the dense Schur complement S = C K^{-1} C^T.
class SaddleFactorization
{
public:
  SaddleFactorization() = default;

  /// Throws UnderconstrainedError when C lacks full row rank or the constraints
  /// do not remove the kernel of A. `owner` is attached to the error.
  SaddleFactorization(SparseSym const& a, SparseMatrix const& c, long owner = -1,
                      LinalgTolerances const& tol = default_tolerances());

  long primal_dim() const noexcept { return n_; }
  long constraint_count() const noexcept { return m_; }

  /// Returns (u, lambda).
  std::pair<Vector, Vector> solve(Vector const& f, Vector const& g) const;

  /// Primal part only, for homogeneous constraints (g = 0).
  Vector solve_primal(Vector const& f) const;

  /// Energy-minimal basis Psi (n x m) with C Psi = I and A Psi + C^T Lambda = 0.
  DenseMatrix constrained_basis() const;

private:
  SpdFactorization augmented_;
  SparseMatrix c_;
  Vector penalty_;
  Eigen::LLT<DenseMatrix> schur_;
  long n_ = 0;
  long m_ = 0;
};

/// Eigenvalues of a dense symmetric matrix, ascending.
Vector dense_sym_eig(DenseMatrix const& a, LinalgTolerances const& tol = default_tolerances());

/// Extreme eigenvalues (min, max) of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal (size n-1).
std::pair<double, double> tridiag_eig(std::vector<double> const& diagonal,
                                      std::vector<double> const& off_diagonal);

} // namespace bddcso
