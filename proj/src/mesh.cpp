#include "bddcso/mesh.hpp"

#include "bddcso/errors.hpp"

#include <numeric>
#include <string>

namespace bddcso {

StructuredMesh::StructuredMesh(int dim, std::vector<int> cells_per_dim)
    : dim_(dim), cells_(std::move(cells_per_dim))
{
  if (dim_ != 2 && dim_ != 3)
    throw InvalidArgument("mesh dimension must be 2 or 3, got " + std::to_string(dim_));
  if (static_cast<int>(cells_.size()) != dim_)
    throw InvalidArgument("mesh needs one cell count per axis");
  node_count_ = 1;
  cell_count_ = 1;
  for (int c : cells_) {
    if (c < 1)
      throw InvalidArgument("cell counts must be positive, got " + std::to_string(c));
    node_count_ *= c + 1;
    cell_count_ *= c;
  }
}

StructuredMesh build_mesh(int dim, std::vector<int> cells_per_dim)
{
  return StructuredMesh(dim, std::move(cells_per_dim));
}

StructuredMesh::Index StructuredMesh::cell_index(long cell) const
{
  Index idx{0, 0, 0};
  for (int d = 0; d < dim_; ++d) {
    idx[d] = cell % cells_[d];
    cell /= cells_[d];
  }
  return idx;
}

long StructuredMesh::cell_id(Index const& idx) const
{
  long id = 0;
  for (int d = dim_ - 1; d >= 0; --d)
    id = id * cells_[d] + idx[d];
  return id;
}

StructuredMesh::Index StructuredMesh::node_index(long node) const
{
  Index idx{0, 0, 0};
  for (int d = 0; d < dim_; ++d) {
    idx[d] = node % (cells_[d] + 1);
    node /= cells_[d] + 1;
  }
  return idx;
}

long StructuredMesh::node_id(Index const& idx) const
{
  long id = 0;
  for (int d = dim_ - 1; d >= 0; --d)
    id = id * (cells_[d] + 1) + idx[d];
  return id;
}

std::array<long, 8> StructuredMesh::cell_nodes(long cell) const
{
  std::array<long, 8> nodes{};
  Index const base = cell_index(cell);
  for (int a = 0; a < nodes_per_cell(); ++a) {
    Index idx = base;
    for (int d = 0; d < dim_; ++d)
      idx[d] += (a >> d) & 1;
    nodes[a] = node_id(idx);
  }
  return nodes;
}

std::array<double, 3> StructuredMesh::node_coords(long node) const
{
  Index const idx = node_index(node);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d)
    x[d] = static_cast<double>(idx[d]) / cells_[d];
  return x;
}

bool StructuredMesh::is_boundary_node(long node) const
{
  Index const idx = node_index(node);
  for (int d = 0; d < dim_; ++d)
    if (idx[d] == 0 || idx[d] == cells_[d])
      return true;
  return false;
}

DenseMatrix element_stiffness(std::span<double const> spacing, double alpha)
{
  int const dim = static_cast<int>(spacing.size());
  if (dim != 2 && dim != 3)
    throw InvalidArgument("element_stiffness: dimension must be 2 or 3");
  if (!(alpha > 0.0))
    throw InvalidArgument("element_stiffness: alpha must be positive");
  for (double h : spacing)
    if (!(h > 0.0))
      throw InvalidArgument("element_stiffness: cell size must be positive");

  // Tensor product of 1D P1 stiffness (1/h)[1 -1; -1 1] and mass (h/6)[2 1; 1 2].
  auto stiff1 = [](double h, int a, int b) { return (a == b ? 1.0 : -1.0) / h; };
  auto mass1 = [](double h, int a, int b) { return (a == b ? 2.0 : 1.0) * h / 6.0; };

  int const n = 1 << dim;
  DenseMatrix k = DenseMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double sum = 0.0;
      for (int d = 0; d < dim; ++d) {
        double term = stiff1(spacing[d], (a >> d) & 1, (b >> d) & 1);
        for (int e = 0; e < dim; ++e)
          if (e != d)
            term *= mass1(spacing[e], (a >> e) & 1, (b >> e) & 1);
        sum += term;
      }
      k(a, b) = alpha * sum;
    }
  return k;
}

DenseMatrix element_stiffness(int dim, double h, double alpha)
{
  std::vector<double> spacing(static_cast<std::size_t>(dim < 0 ? 0 : dim), h);
  return element_stiffness(spacing, alpha);
}

DofMap build_dof_map(StructuredMesh const& mesh)
{
  DofMap map;
  map.node_to_dof.assign(mesh.node_count(), -1);
  for (long n = 0; n < mesh.node_count(); ++n)
    if (!mesh.is_boundary_node(n)) {
      map.node_to_dof[n] = map.size();
      map.dof_to_node.push_back(n);
    }
  return map;
}

SparseSym assemble_cells(StructuredMesh const& mesh, CoefficientField const& coeff,
                         std::span<long const> cells, std::span<long const> node_to_local,
                         long local_size)
{
  if (static_cast<long>(coeff.alpha.size()) != mesh.cell_count())
    throw InvalidArgument("coefficient field has " + std::to_string(coeff.alpha.size()) +
                          " values for " + std::to_string(mesh.cell_count()) + " cells");
  std::vector<double> spacing;
  for (int d = 0; d < mesh.dim(); ++d)
    spacing.push_back(mesh.spacing(d));
  DenseMatrix const unit = element_stiffness(spacing, 1.0);

  int const npc = mesh.nodes_per_cell();
  std::vector<Triplet> lower;
  lower.reserve(cells.size() * static_cast<std::size_t>(npc * (npc + 1) / 2));
  for (long c : cells) {
    double const alpha = coeff.alpha[c];
    auto const nodes = mesh.cell_nodes(c);
    for (int a = 0; a < npc; ++a) {
      long const i = node_to_local[nodes[a]];
      if (i < 0)
        continue;
      for (int b = 0; b < npc; ++b) {
        long const j = node_to_local[nodes[b]];
        if (j < 0 || j > i)
          continue;
        lower.emplace_back(static_cast<int>(i), static_cast<int>(j), alpha * unit(a, b));
      }
    }
  }
  return SparseSym::from_lower_triplets(local_size, lower);
}

AssembledSystem assemble(StructuredMesh const& mesh, CoefficientField const& coeff, double source)
{
  for (double a : coeff.alpha)
    if (!(a > 0.0))
      throw InvalidArgument("coefficient must be positive on every cell");
  AssembledSystem sys;
  sys.dofs = build_dof_map(mesh);
  std::vector<long> all(static_cast<std::size_t>(mesh.cell_count()));
  std::iota(all.begin(), all.end(), 0L);
  sys.matrix = assemble_cells(mesh, coeff, all, sys.dofs.node_to_dof, sys.dofs.size());

  // int_cell f phi_a = f |cell| / 2^dim for Q1.
  double volume = 1.0;
  for (int d = 0; d < mesh.dim(); ++d)
    volume *= mesh.spacing(d);
  double const share = source * volume / mesh.nodes_per_cell();
  sys.rhs = Vector::Zero(sys.dofs.size());
  for (long c = 0; c < mesh.cell_count(); ++c)
    for (int a = 0; a < mesh.nodes_per_cell(); ++a) {
      long const i = sys.dofs.node_to_dof[mesh.cell_nodes(c)[a]];
      if (i >= 0)
        sys.rhs(i) += share;
    }
  return sys;
}

} // namespace bddcso
