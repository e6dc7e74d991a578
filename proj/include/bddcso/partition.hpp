#pragma once

/** @file partition.hpp
    @brief Subdomain partitions, their refinements into subsubdomains, and the
    classification of interface DOFs into (sub)objects.

    The coarse partition (subdomains) and the refined partition (subsubdomains) are both
    cell maps. Every interface DOF carries the set of subsubdomains whose closure contains
    it; DOFs on the subdomain interface with identical sets form one object.
*/

#include "bddcso/mesh.hpp"

#include <span>
#include <string>
#include <vector>

namespace bddcso {

struct PartitionPair
{
  std::vector<int> theta;     ///< cell -> subdomain
  std::vector<int> theta_hat; ///< cell -> subsubdomain
  std::vector<int> parent;    ///< subsubdomain -> subdomain
  int num_subdomains = 0;
  int num_subsubdomains = 0;
};

/// Validates nesting (each subsubdomain inside one subdomain), dense ids and face
/// connectivity of every part, and derives the parent map.
PartitionPair make_partition_pair(StructuredMesh const& mesh, std::vector<int> theta,
                                  std::vector<int> theta_hat);

/// Block partition; subdomain ids are lexicographic in the subdomain grid (x fastest).
std::vector<int> partition_uniform(StructuredMesh const& mesh, std::span<int const> subdomains_per_dim);

/// Splits every (box-shaped) subdomain into split^dim equal blocks, numbered
/// subdomain-major and lexicographically inside each subdomain.
std::vector<int> refine_uniform(StructuredMesh const& mesh, std::span<int const> theta, int split);

/// Splits every subdomain into the face-connected components of its equal-coefficient
/// cell sets. Numbering is subdomain-major, then by lowest cell id.
std::vector<int> refine_by_coefficient(StructuredMesh const& mesh, std::span<int const> theta,
                                       CoefficientField const& coeff);

/// Number of face-connected components of the cells carrying `label` in `labels`.
int count_components(StructuredMesh const& mesh, std::span<int const> labels, int label);

/// Per free DOF, the sorted subdomain and subsubdomain ids whose closure contains it.
struct MembershipSets
{
  std::vector<std::vector<int>> on_gamma;
  std::vector<std::vector<int>> on_gamma_hat;

  bool on_interface(long dof) const { return on_gamma[dof].size() >= 2; }
  bool on_refined_interface(long dof) const { return on_gamma_hat[dof].size() >= 2; }
};

MembershipSets compute_membership(StructuredMesh const& mesh, DofMap const& dofs,
                                  PartitionPair const& pair);

enum class ObjectKind
{
  vertex,
  edge,
  face
};

char const* to_string(ObjectKind kind);

struct InterfaceObject
{
  int id = 0;
  ObjectKind kind = ObjectKind::vertex;
  std::vector<long> dofs;      ///< ascending free-DOF ids
  std::vector<int> signature;  ///< common subsubdomain set
  std::vector<int> owners;     ///< subdomains of the signature
};

/// Groups the DOFs of the subdomain interface by subsubdomain signature. Objects are
/// ordered lexicographically by signature.
std::vector<InterfaceObject> classify_objects(StructuredMesh const& mesh, PartitionPair const& pair,
                                              MembershipSets const& membership);

/// Which objects carry a coarse constraint. `all_dofs` pins every interface DOF.
struct ConstraintRecipe
{
  bool vertices = false;
  bool edges = false;
  bool faces = false;
  bool all_dofs = false;

  /// Accepts any combination of the letters v, e, f (e.g. "vef", "f") or "full".
  static ConstraintRecipe parse(std::string const& text);
  std::string name() const;
  bool selects(ObjectKind kind) const;
};

/// Coarse-space size of a uniform box partition refined with `split`, computed from
/// the grid combinatorics alone. `cells_per_subsubdomain` defaults to 4 per axis; it
/// only matters when subobjects shrink to a single DOF or vanish.
long count_coarse_dofs(std::span<int const> subdomains_per_dim, int split, ConstraintRecipe recipe,
                       std::span<int const> cells_per_subsubdomain = {});

/// Everything the preconditioner needs to know about mesh, DOFs and partitions.
struct Decomposition
{
  StructuredMesh mesh;
  DofMap dofs;
  PartitionPair partition;
  MembershipSets membership;
  std::vector<std::vector<long>> subdomain_cells;
  std::vector<char> touches_dirichlet; ///< per subdomain
  std::vector<long> interface_dofs;    ///< ascending DOFs with |on_gamma| >= 2

  int num_subdomains() const noexcept { return partition.num_subdomains; }
};

Decomposition make_decomposition(StructuredMesh mesh, PartitionPair pair);

} // namespace bddcso
