#include "bddcso/partition.hpp"

#include "bddcso/errors.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace bddcso {

namespace {

template <class Visit>
void for_each_face_neighbor(StructuredMesh const& mesh, long cell, Visit&& visit)
{
  auto const idx = mesh.cell_index(cell);
  for (int d = 0; d < mesh.dim(); ++d) {
    for (int step : {-1, 1}) {
      auto n = idx;
      n[d] += step;
      if (n[d] < 0 || n[d] >= mesh.cells(d))
        continue;
      visit(mesh.cell_id(n));
    }
  }
}

// Breadth-first fill from `seed` across faces where same_part(current, neighbour) holds.
void flood(StructuredMesh const& mesh, long seed, std::vector<int>& comp, int id,
           auto&& same_part)
{
  std::deque<long> queue{seed};
  comp[seed] = id;
  while (!queue.empty()) {
    long const c = queue.front();
    queue.pop_front();
    for_each_face_neighbor(mesh, c, [&](long n) {
      if (comp[n] < 0 && same_part(c, n)) {
        comp[n] = id;
        queue.push_back(n);
      }
    });
  }
}

int dense_count(std::span<int const> labels, char const* what)
{
  int maxid = -1;
  for (int l : labels) {
    if (l < 0)
      throw InvalidArgument(std::string(what) + " contains a negative id");
    maxid = std::max(maxid, l);
  }
  std::vector<char> seen(static_cast<std::size_t>(maxid + 1), 0);
  for (int l : labels)
    seen[l] = 1;
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw InvalidArgument(std::string(what) + " id " + std::to_string(i) + " has no cells");
  return maxid + 1;
}

} // namespace

int count_components(StructuredMesh const& mesh, std::span<int const> labels, int label)
{
  std::vector<int> comp(labels.size(), -1);
  int n = 0;
  for (long c = 0; c < mesh.cell_count(); ++c)
    if (labels[c] == label && comp[c] < 0)
      flood(mesh, c, comp, n++, [&](long, long b) { return labels[b] == label; });
  return n;
}

PartitionPair make_partition_pair(StructuredMesh const& mesh, std::vector<int> theta,
                                  std::vector<int> theta_hat)
{
  if (static_cast<long>(theta.size()) != mesh.cell_count() ||
      static_cast<long>(theta_hat.size()) != mesh.cell_count())
    throw InvalidArgument("partition maps must have one entry per cell");

  PartitionPair pair;
  pair.num_subdomains = dense_count(theta, "subdomain partition");
  pair.num_subsubdomains = dense_count(theta_hat, "subsubdomain partition");
  pair.parent.assign(pair.num_subsubdomains, -1);
  for (long c = 0; c < mesh.cell_count(); ++c) {
    int& p = pair.parent[theta_hat[c]];
    if (p >= 0 && p != theta[c])
      throw InvalidArgument("subsubdomain " + std::to_string(theta_hat[c]) +
                            " spans subdomains " + std::to_string(p) + " and " +
                            std::to_string(theta[c]));
    p = theta[c];
  }

  auto check_connected = [&](std::vector<int> const& labels, int count, char const* what) {
    std::vector<int> comp(labels.size(), -1);
    std::vector<int> seen(count, 0);
    for (long c = 0; c < mesh.cell_count(); ++c) {
      if (comp[c] >= 0)
        continue;
      if (seen[labels[c]]++)
        throw InvalidArgument(std::string(what) + " " + std::to_string(labels[c]) +
                              " is not face-connected");
      flood(mesh, c, comp, labels[c], [&](long a, long b) { return labels[a] == labels[b]; });
    }
  };
  check_connected(theta, pair.num_subdomains, "subdomain");
  check_connected(theta_hat, pair.num_subsubdomains, "subsubdomain");

  pair.theta = std::move(theta);
  pair.theta_hat = std::move(theta_hat);
  return pair;
}

std::vector<int> partition_uniform(StructuredMesh const& mesh, std::span<int const> subdomains_per_dim)
{
  int const dim = mesh.dim();
  if (static_cast<int>(subdomains_per_dim.size()) != dim)
    throw InvalidArgument("partition_uniform: need one subdomain count per axis");
  std::array<long, 3> block{1, 1, 1};
  for (int d = 0; d < dim; ++d) {
    int const n = subdomains_per_dim[d];
    if (n < 1 || mesh.cells(d) % n != 0)
      throw InvalidArgument("partition_uniform: " + std::to_string(n) +
                            " subdomains do not divide " + std::to_string(mesh.cells(d)) +
                            " cells along axis " + std::to_string(d));
    block[d] = mesh.cells(d) / n;
  }
  std::vector<int> theta(static_cast<std::size_t>(mesh.cell_count()));
  for (long c = 0; c < mesh.cell_count(); ++c) {
    auto const idx = mesh.cell_index(c);
    long id = 0;
    for (int d = dim - 1; d >= 0; --d)
      id = id * subdomains_per_dim[d] + idx[d] / block[d];
    theta[c] = static_cast<int>(id);
  }
  return theta;
}

std::vector<int> refine_uniform(StructuredMesh const& mesh, std::span<int const> theta, int split)
{
  if (split < 1)
    throw InvalidArgument("refine_uniform: split must be positive");
  if (static_cast<long>(theta.size()) != mesh.cell_count())
    throw InvalidArgument("refine_uniform: partition has wrong size");
  int const dim = mesh.dim();
  int const nsub = dense_count(theta, "subdomain partition");

  using Box = std::array<long, 6>;
  std::vector<Box> box(nsub, Box{mesh.cell_count(), mesh.cell_count(), mesh.cell_count(), -1, -1, -1});
  std::vector<long> ncells(nsub, 0);
  for (long c = 0; c < mesh.cell_count(); ++c) {
    auto const idx = mesh.cell_index(c);
    auto& b = box[theta[c]];
    for (int d = 0; d < dim; ++d) {
      b[d] = std::min(b[d], idx[d]);
      b[3 + d] = std::max(b[3 + d], idx[d]);
    }
    ++ncells[theta[c]];
  }
  std::vector<std::array<long, 3>> blk(nsub);
  for (int i = 0; i < nsub; ++i) {
    long volume = 1;
    for (int d = 0; d < dim; ++d) {
      long const extent = box[i][3 + d] - box[i][d] + 1;
      volume *= extent;
      if (extent % split != 0)
        throw InvalidArgument("refine_uniform: split " + std::to_string(split) +
                              " does not divide extent " + std::to_string(extent) +
                              " of subdomain " + std::to_string(i));
      blk[i][d] = extent / split;
    }
    if (volume != ncells[i])
      throw InvalidArgument("refine_uniform: subdomain " + std::to_string(i) + " is not a box");
  }

  long per_sub = 1;
  for (int d = 0; d < dim; ++d)
    per_sub *= split;
  std::vector<int> theta_hat(theta.size());
  for (long c = 0; c < mesh.cell_count(); ++c) {
    int const i = theta[c];
    auto const idx = mesh.cell_index(c);
    long local = 0;
    for (int d = dim - 1; d >= 0; --d)
      local = local * split + (idx[d] - box[i][d]) / blk[i][d];
    theta_hat[c] = static_cast<int>(i * per_sub + local);
  }
  return theta_hat;
}

std::vector<int> refine_by_coefficient(StructuredMesh const& mesh, std::span<int const> theta,
                                       CoefficientField const& coeff)
{
  if (static_cast<long>(theta.size()) != mesh.cell_count() ||
      static_cast<long>(coeff.alpha.size()) != mesh.cell_count())
    throw InvalidArgument("refine_by_coefficient: size mismatch");
  int const nsub = dense_count(theta, "subdomain partition");
  std::vector<std::vector<long>> cells_of(nsub);
  for (long c = 0; c < mesh.cell_count(); ++c)
    cells_of[theta[c]].push_back(c);

  std::vector<int> comp(theta.size(), -1);
  int next = 0;
  for (int i = 0; i < nsub; ++i)
    for (long c : cells_of[i])
      if (comp[c] < 0)
        flood(mesh, c, comp, next++, [&](long a, long b) {
          return theta[a] == theta[b] && coeff.alpha[a] == coeff.alpha[b];
        });
  return comp;
}

MembershipSets compute_membership(StructuredMesh const& mesh, DofMap const& dofs,
                                  PartitionPair const& pair)
{
  MembershipSets m;
  m.on_gamma.resize(dofs.size());
  m.on_gamma_hat.resize(dofs.size());
  auto insert = [](std::vector<int>& set, int v) {
    auto it = std::lower_bound(set.begin(), set.end(), v);
    if (it == set.end() || *it != v)
      set.insert(it, v);
  };
  for (long c = 0; c < mesh.cell_count(); ++c) {
    auto const nodes = mesh.cell_nodes(c);
    for (int a = 0; a < mesh.nodes_per_cell(); ++a) {
      long const dof = dofs.node_to_dof[nodes[a]];
      if (dof < 0)
        continue;
      insert(m.on_gamma[dof], pair.theta[c]);
      insert(m.on_gamma_hat[dof], pair.theta_hat[c]);
    }
  }
  return m;
}

char const* to_string(ObjectKind kind)
{
  switch (kind) {
  case ObjectKind::vertex: return "vertex";
  case ObjectKind::edge: return "edge";
  case ObjectKind::face: return "face";
  }
  return "?";
}

std::vector<InterfaceObject> classify_objects(StructuredMesh const& mesh, PartitionPair const& pair,
                                              MembershipSets const& membership)
{
  std::map<std::vector<int>, std::vector<long>> groups;
  long const ndofs = static_cast<long>(membership.on_gamma.size());
  for (long dof = 0; dof < ndofs; ++dof)
    if (membership.on_interface(dof))
      groups[membership.on_gamma_hat[dof]].push_back(dof);

  std::vector<InterfaceObject> objects;
  objects.reserve(groups.size());
  for (auto& [sig, dofs] : groups) {
    InterfaceObject obj;
    obj.id = static_cast<int>(objects.size());
    obj.signature = sig;
    obj.dofs = std::move(dofs);
    for (int j : sig)
      obj.owners.push_back(pair.parent[j]);
    std::sort(obj.owners.begin(), obj.owners.end());
    obj.owners.erase(std::unique(obj.owners.begin(), obj.owners.end()), obj.owners.end());
    if (obj.dofs.size() == 1)
      obj.kind = ObjectKind::vertex;
    else if (mesh.dim() == 3 && sig.size() == 2)
      obj.kind = ObjectKind::face;
    else
      obj.kind = ObjectKind::edge;
    objects.push_back(std::move(obj));
  }
  return objects;
}

ConstraintRecipe ConstraintRecipe::parse(std::string const& text)
{
  ConstraintRecipe r;
  if (text == "full") {
    r.all_dofs = true;
    return r;
  }
  if (text.empty())
    throw InvalidArgument("empty constraint recipe");
  for (char ch : text) {
    switch (ch) {
    case 'v': r.vertices = true; break;
    case 'e': r.edges = true; break;
    case 'f': r.faces = true; break;
    default:
      throw InvalidArgument("unknown constraint recipe '" + text + "' (use letters v, e, f or 'full')");
    }
  }
  return r;
}

std::string ConstraintRecipe::name() const
{
  if (all_dofs)
    return "full";
  std::string s;
  if (vertices)
    s += 'v';
  if (edges)
    s += 'e';
  if (faces)
    s += 'f';
  return s;
}

bool ConstraintRecipe::selects(ObjectKind kind) const
{
  switch (kind) {
  case ObjectKind::vertex: return vertices;
  case ObjectKind::edge: return edges;
  case ObjectKind::face: return faces;
  }
  return false;
}

long count_coarse_dofs(std::span<int const> subdomains_per_dim, int split, ConstraintRecipe recipe,
                       std::span<int const> cells_per_subsubdomain)
{
  int const dim = static_cast<int>(subdomains_per_dim.size());
  if (dim != 2 && dim != 3)
    throw InvalidArgument("count_coarse_dofs: grid must be 2D or 3D");
  if (split < 1)
    throw InvalidArgument("count_coarse_dofs: split must be positive");
  if (!cells_per_subsubdomain.empty() && static_cast<int>(cells_per_subsubdomain.size()) != dim)
    throw InvalidArgument("count_coarse_dofs: need one L/h value per axis");

  std::array<long, 3> n{1, 1, 1}, m{1, 1, 1}, lh{4, 4, 4};
  for (int d = 0; d < dim; ++d) {
    n[d] = subdomains_per_dim[d];
    if (n[d] < 1)
      throw InvalidArgument("count_coarse_dofs: subdomain counts must be positive");
    m[d] = n[d] * split;
    if (!cells_per_subsubdomain.empty()) {
      lh[d] = cells_per_subsubdomain[d];
      if (lh[d] < 1)
        throw InvalidArgument("count_coarse_dofs: L/h must be positive");
    }
  }

  if (recipe.all_dofs) {
    long interior = 1, per_sub = 1, nsub = 1;
    for (int d = 0; d < dim; ++d) {
      long const b = split * lh[d];
      interior *= n[d] * b - 1;
      per_sub *= b - 1;
      nsub *= n[d];
    }
    return interior - nsub * per_sub;
  }

  long total = 0;
  // Adds `count` objects that hold `dofs` DOFs each and are geometrically of `kind`.
  auto add = [&](long count, long dofs, ObjectKind kind) {
    if (dofs <= 0 || count <= 0)
      return;
    if (recipe.selects(dofs == 1 ? ObjectKind::vertex : kind))
      total += count;
  };

  long all_pts = 1, off_gamma_pts = 1;
  for (int d = 0; d < dim; ++d) {
    all_pts *= m[d] - 1;
    off_gamma_pts *= m[d] - n[d];
  }
  add(all_pts - off_gamma_pts, 1, ObjectKind::vertex);

  if (dim == 2) {
    for (int d = 0; d < 2; ++d) {
      int const e = 1 - d;
      add((n[d] - 1) * m[e], lh[e] - 1, ObjectKind::edge);
    }
    return total;
  }

  for (int d = 0; d < 3; ++d) {
    int const e = (d + 1) % 3;
    int const f = (d + 2) % 3;
    long const lines = (m[e] - 1) * (m[f] - 1) - (m[e] - n[e]) * (m[f] - n[f]);
    add(lines * m[d], lh[d] - 1, ObjectKind::edge);
    add((n[d] - 1) * m[e] * m[f], (lh[e] - 1) * (lh[f] - 1), ObjectKind::face);
  }
  return total;
}

Decomposition make_decomposition(StructuredMesh mesh, PartitionPair pair)
{
  Decomposition dec;
  dec.dofs = build_dof_map(mesh);
  dec.membership = compute_membership(mesh, dec.dofs, pair);
  dec.subdomain_cells.resize(pair.num_subdomains);
  dec.touches_dirichlet.assign(pair.num_subdomains, 0);
  for (long c = 0; c < mesh.cell_count(); ++c) {
    int const i = pair.theta[c];
    dec.subdomain_cells[i].push_back(c);
    if (!dec.touches_dirichlet[i]) {
      auto const nodes = mesh.cell_nodes(c);
      for (int a = 0; a < mesh.nodes_per_cell(); ++a)
        if (dec.dofs.node_to_dof[nodes[a]] < 0)
          dec.touches_dirichlet[i] = 1;
    }
  }
  for (long dof = 0; dof < dec.dofs.size(); ++dof)
    if (dec.membership.on_interface(dof))
      dec.interface_dofs.push_back(dof);
  dec.mesh = std::move(mesh);
  dec.partition = std::move(pair);
  return dec;
}

} // namespace bddcso
