#pragma once

/** @file bddc.hpp
    @brief Standard BDDC and BDDC on subobjects (BDDC-SO).

    Both preconditioners share one implementation: the subdomain partition defines the
    local Neumann problems and the interface, while the refined partition stored in the
    Decomposition only decides which interface objects exist and how interface values
    are averaged. With the refined partition equal to the subdomain partition the
    operator is standard BDDC.

    Application is the symmetric interior-corrected form

        B = P_I + (I - P_I A) R_D^T A~^{-1} R_D (I - A P_I)

    with P_I the block-diagonal interior solves, R_D the weighted restriction to the
    partially assembled space and A~^{-1} the constrained local solves plus the coarse
    correction.
*/

#include "bddcso/linalg.hpp"
#include "bddcso/mesh.hpp"
#include "bddcso/partition.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bddcso {

enum class WeightingMode
{
  cardinality, ///< subsubdomain-count ratio
  counting,    ///< 1 / number of subdomains sharing the DOF
  coefficient  ///< coefficient sums over subsubdomains
};

WeightingMode parse_weighting(std::string const& text);
char const* to_string(WeightingMode mode);

/// Interface weights delta_i(xi) for every (subdomain, interface DOF) pair.
class WeightingOperator
{
public:
  WeightingMode mode() const noexcept { return mode_; }

  /// Weight of `subdomain` at `dof`: 1 for DOFs interior to it, 0 if it does not contain the DOF.
  double weight(long dof, int subdomain) const;

  /// Subdomains containing an interface DOF, aligned with weights(dof).
  std::span<int const> subdomains(long dof) const;
  std::span<double const> weights(long dof) const;

private:
  friend WeightingOperator compute_weights(Decomposition const&, WeightingMode, CoefficientField const*);
  WeightingMode mode_ = WeightingMode::cardinality;
  std::vector<long> offsets_;
  std::vector<int> subdomain_;
  std::vector<double> value_;
};

/// Builds delta for the chosen mode. Coefficient mode needs `coeff` and a coefficient
/// that is constant on each subsubdomain.
WeightingOperator compute_weights(Decomposition const& dec, WeightingMode mode,
                                  CoefficientField const* coeff = nullptr);

/// Exact cardinality weight as (numerator, denominator).
std::pair<long, long> cardinality_fraction(Decomposition const& dec, long dof, int subdomain);

/// Per-subsubdomain coefficient, or nullopt if it varies inside some subsubdomain.
std::optional<std::vector<double>> subsubdomain_coefficients(PartitionPair const& pair,
                                                            CoefficientField const& coeff);

struct CoarseConstraint
{
  int object = -1;      ///< source object, -1 for single-DOF constraints of the "full" recipe
  ObjectKind kind = ObjectKind::vertex;
  bool point = true;    ///< point value, otherwise arithmetic mean over `dofs`
  std::vector<long> dofs;
  std::vector<int> owners;
  std::vector<int> signature;
};

struct ConstraintSet
{
  ConstraintRecipe recipe;
  std::vector<CoarseConstraint> constraints;
  /// Neighbouring subsubdomain pairs (across the subdomain interface) not joined by an
  /// acceptable path of selected objects.
  std::vector<std::pair<int, int>> path_violations;

  long size() const noexcept { return static_cast<long>(constraints.size()); }
};

/// Turns a recipe into constraints. Throws UnderconstrainedError naming every floating
/// subdomain (no Dirichlet boundary) that would end up without a constraint.
ConstraintSet select_constraints(Decomposition const& dec, std::vector<InterfaceObject> const& objects,
                                 ConstraintRecipe recipe, CoefficientField const* coeff = nullptr);

/// Local data of one subdomain.
struct SubdomainOperator
{
  int id = 0;
  std::vector<long> local_to_global;
  std::vector<int> interior;          ///< local indices
  std::vector<int> interface;         ///< local indices
  std::vector<long> interior_global;
  std::vector<long> interface_global;
  std::vector<double> interface_weights;

  SparseSym neumann;                  ///< A_i with Dirichlet rows removed only on the outer boundary
  SpdFactorization interior_factor;   ///< A_II
  SparseMatrix interface_interior;    ///< A_GI (interface rows, interior columns)
  SparseMatrix constraints;           ///< C_i, one row per local coarse DOF
  SaddleFactorization saddle;         ///< [A_i C_i^T; C_i 0]
  std::vector<int> coarse_ids;
  DenseMatrix coarse_basis_interface; ///< interface rows of Psi_i
};

class BddcOperator
{
public:
  long dim() const noexcept { return n_; }
  long coarse_size() const noexcept { return coarse_n_; }
  std::vector<SubdomainOperator> const& subdomains() const noexcept { return subs_; }
  SparseSym const& coarse_matrix() const noexcept { return coarse_matrix_; }
  std::vector<long> const& interface_dofs() const noexcept { return interface_; }

  /// z = B r:
  ///  1. u1 = A_II^{-1} r_I
  ///  2. r' = r - A u1 (only the interface part is nonzero)
  ///  3. weighted restriction of r' to every subdomain
  ///  4. constrained local solves plus the coarse solve
  ///  5. weighted average on the interface, discrete harmonic extension inside
  ///  6. z = u1 + u2
  Vector apply(Vector const& r) const;
  void apply(Vector const& r, Vector& z) const;

  /// Extends the interface entries of `values` (other entries ignored) discrete
  /// harmonically into every subdomain interior.
  Vector harmonic_extension(Vector const& values) const;

private:
  friend BddcOperator build_bddc(Decomposition const&, CoefficientField const&, ConstraintSet const&,
                                 WeightingOperator const&);
  long n_ = 0;
  long coarse_n_ = 0;
  std::vector<long> interface_;
  std::vector<SubdomainOperator> subs_;
  SparseSym coarse_matrix_;
  SpdFactorization coarse_factor_;
};

/// Assembles local Neumann operators, factorizes them, builds the energy-minimal
/// coarse basis and the coarse matrix. Errors carry the subdomain id.
BddcOperator build_bddc(Decomposition const& dec, CoefficientField const& coeff,
                        ConstraintSet const& constraints, WeightingOperator const& weights);

} // namespace bddcso
