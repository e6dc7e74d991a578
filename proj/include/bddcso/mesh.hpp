#pragma once

/** @file mesh.hpp
    @brief Structured Q1 meshes of the unit box and variable-coefficient Poisson assembly.
*/

#include "bddcso/linalg.hpp"

#include <array>
#include <span>
#include <vector>

namespace bddcso {

/// Tensor-product grid of [0,1]^dim with lexicographic (x fastest) node and cell numbering.
class StructuredMesh
{
public:
  using Index = std::array<long, 3>;

  StructuredMesh() = default;
  StructuredMesh(int dim, std::vector<int> cells_per_dim);

  int dim() const noexcept { return dim_; }
  std::vector<int> const& cells_per_dim() const noexcept { return cells_; }
  int cells(int axis) const { return cells_[axis]; }
  double spacing(int axis) const { return 1.0 / cells_[axis]; }

  long node_count() const noexcept { return node_count_; }
  long cell_count() const noexcept { return cell_count_; }
  int nodes_per_cell() const noexcept { return 1 << dim_; }

  /// Node ids of a cell. Local node a has offset bit d = (a >> d) & 1 along axis d.
  std::array<long, 8> cell_nodes(long cell) const;

  Index cell_index(long cell) const;
  long cell_id(Index const& idx) const;
  Index node_index(long node) const;
  long node_id(Index const& idx) const;
  std::array<double, 3> node_coords(long node) const;

  bool is_boundary_node(long node) const;

private:
  int dim_ = 0;
  std::vector<int> cells_;
  long node_count_ = 0;
  long cell_count_ = 0;
};

StructuredMesh build_mesh(int dim, std::vector<int> cells_per_dim);

/// Piecewise-constant diffusion coefficient, one value per cell.
struct CoefficientField
{
  std::vector<double> alpha;
};

/// Q1 element matrix of alpha * grad(phi_a) . grad(phi_b) on a box with the given edge
/// lengths. Local node ordering matches StructuredMesh::cell_nodes.
DenseMatrix element_stiffness(std::span<double const> spacing, double alpha);
DenseMatrix element_stiffness(int dim, double h, double alpha);

/// Mesh node <-> free DOF numbering with Dirichlet nodes removed.
struct DofMap
{
  std::vector<long> node_to_dof; ///< -1 on Dirichlet nodes
  std::vector<long> dof_to_node;

  long size() const noexcept { return static_cast<long>(dof_to_node.size()); }
};

DofMap build_dof_map(StructuredMesh const& mesh);

struct AssembledSystem
{
  SparseSym matrix;
  Vector rhs;
  DofMap dofs;
};

/// Assembles the Dirichlet-eliminated stiffness matrix and the load of a constant source.
AssembledSystem assemble(StructuredMesh const& mesh, CoefficientField const& coeff, double source);

/// Sums the element matrices of `cells` into a matrix indexed by `node_to_local`
/// (entries < 0 are skipped). Used for both global and subdomain Neumann operators.
SparseSym assemble_cells(StructuredMesh const& mesh, CoefficientField const& coeff,
                         std::span<long const> cells, std::span<long const> node_to_local,
                         long local_size);

} // namespace bddcso
