#include "bddcso/bddc.hpp"

#include "bddcso/errors.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace bddcso {

WeightingMode parse_weighting(std::string const& text)
{
  if (text == "cardinality")
    return WeightingMode::cardinality;
  if (text == "counting")
    return WeightingMode::counting;
  if (text == "coefficient")
    return WeightingMode::coefficient;
  throw InvalidArgument("unknown weighting mode '" + text + "' (cardinality | counting | coefficient)");
}

char const* to_string(WeightingMode mode)
{
  switch (mode) {
  case WeightingMode::cardinality: return "cardinality";
  case WeightingMode::counting: return "counting";
  case WeightingMode::coefficient: return "coefficient";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Weights

double WeightingOperator::weight(long dof, int subdomain) const
{
  auto const subs = subdomains(dof);
  auto const it = std::find(subs.begin(), subs.end(), subdomain);
  if (it == subs.end())
    return 0.0;
  return value_[offsets_[dof] + (it - subs.begin())];
}

std::span<int const> WeightingOperator::subdomains(long dof) const
{
  return {subdomain_.data() + offsets_[dof], subdomain_.data() + offsets_[dof + 1]};
}

std::span<double const> WeightingOperator::weights(long dof) const
{
  return {value_.data() + offsets_[dof], value_.data() + offsets_[dof + 1]};
}

std::optional<std::vector<double>> subsubdomain_coefficients(PartitionPair const& pair,
                                                            CoefficientField const& coeff)
{
  if (coeff.alpha.size() != pair.theta_hat.size())
    throw InvalidArgument("coefficient field does not match the partition");
  std::vector<double> alpha(pair.num_subsubdomains, -1.0);
  for (std::size_t c = 0; c < pair.theta_hat.size(); ++c) {
    double& a = alpha[pair.theta_hat[c]];
    if (a < 0)
      a = coeff.alpha[c];
    else if (a != coeff.alpha[c])
      return std::nullopt;
  }
  return alpha;
}

std::pair<long, long> cardinality_fraction(Decomposition const& dec, long dof, int subdomain)
{
  auto const& sig = dec.membership.on_gamma_hat[dof];
  long const inside = std::count_if(sig.begin(), sig.end(),
                                    [&](int j) { return dec.partition.parent[j] == subdomain; });
  return {inside, static_cast<long>(sig.size())};
}

WeightingOperator compute_weights(Decomposition const& dec, WeightingMode mode, CoefficientField const* coeff)
{
  std::vector<double> alpha;
  if (mode == WeightingMode::coefficient) {
    if (coeff == nullptr)
      throw InvalidArgument("coefficient weighting needs a coefficient field");
    auto a = subsubdomain_coefficients(dec.partition, *coeff);
    if (!a)
      throw InvalidArgument("coefficient weighting needs a coefficient that is constant on "
                            "every subsubdomain");
    alpha = std::move(*a);
  }

  WeightingOperator w;
  w.mode_ = mode;
  long const n = dec.dofs.size();
  w.offsets_.reserve(n + 1);
  w.offsets_.push_back(0);
  for (long dof = 0; dof < n; ++dof) {
    auto const& subs = dec.membership.on_gamma[dof];
    auto const& sig = dec.membership.on_gamma_hat[dof];
    double total = 0.0;
    if (mode == WeightingMode::coefficient)
      for (int j : sig)
        total += alpha[j];
    for (int i : subs) {
      double value = 1.0;
      if (subs.size() > 1) {
        switch (mode) {
        case WeightingMode::counting: value = 1.0 / static_cast<double>(subs.size()); break;
        case WeightingMode::cardinality: {
          auto const [num, den] = cardinality_fraction(dec, dof, i);
          value = static_cast<double>(num) / static_cast<double>(den);
          break;
        }
        case WeightingMode::coefficient: {
          double inside = 0.0;
          for (int j : sig)
            if (dec.partition.parent[j] == i)
              inside += alpha[j];
          value = inside / total;
          break;
        }
        }
      }
      w.subdomain_.push_back(i);
      w.value_.push_back(value);
    }
    w.offsets_.push_back(static_cast<long>(w.subdomain_.size()));
  }
  return w;
}

// ---------------------------------------------------------------------------
// Constraint selection

namespace {

struct DisjointSets
{
  std::vector<int> up;
  explicit DisjointSets(int n) : up(n) { std::iota(up.begin(), up.end(), 0); }
  int find(int x)
  {
    while (up[x] != x)
      x = up[x] = up[up[x]];
    return x;
  }
  void join(int a, int b) { up[find(a)] = find(b); }
};

// Pairs of subsubdomains in different subdomains that meet across the interface,
// together with every "link" (a set of mutually continuous subsubdomains).
void find_path_violations(Decomposition const& dec, std::vector<InterfaceObject> const& objects,
                          ConstraintSet& set, CoefficientField const* coeff)
{
  auto const& pair = dec.partition;
  int const nhat = pair.num_subsubdomains;

  std::vector<double> alpha(nhat, 1.0);
  if (coeff != nullptr)
    if (auto a = subsubdomain_coefficients(pair, *coeff))
      alpha = std::move(*a);

  std::vector<std::vector<int>> links;
  // Inside a subdomain the functions are continuous across the refined interface.
  {
    std::map<std::vector<int>, int> seen;
    for (long dof = 0; dof < dec.dofs.size(); ++dof)
      if (!dec.membership.on_interface(dof) && dec.membership.on_refined_interface(dof))
        if (seen.emplace(dec.membership.on_gamma_hat[dof], 0).second)
          links.push_back(dec.membership.on_gamma_hat[dof]);
  }
  for (auto const& c : set.constraints)
    links.push_back(c.signature);

  std::vector<std::pair<int, int>> neighbours;
  for (auto const& obj : objects)
    if (obj.signature.size() == 2 && pair.parent[obj.signature[0]] != pair.parent[obj.signature[1]])
      neighbours.emplace_back(obj.signature[0], obj.signature[1]);

  std::map<double, std::vector<std::pair<int, int>>> by_threshold;
  for (auto const& [j, k] : neighbours)
    by_threshold[std::min(alpha[j], alpha[k])].emplace_back(j, k);

  for (auto const& [threshold, pairs] : by_threshold) {
    DisjointSets sets(nhat);
    for (auto const& link : links) {
      int first = -1;
      for (int j : link) {
        if (alpha[j] < threshold)
          continue;
        if (first < 0)
          first = j;
        else
          sets.join(first, j);
      }
    }
    for (auto const& [j, k] : pairs)
      if (sets.find(j) != sets.find(k))
        set.path_violations.emplace_back(j, k);
  }
  std::sort(set.path_violations.begin(), set.path_violations.end());
}

} // namespace

ConstraintSet select_constraints(Decomposition const& dec, std::vector<InterfaceObject> const& objects,
                                 ConstraintRecipe recipe, CoefficientField const* coeff)
{
  ConstraintSet set;
  set.recipe = recipe;
  if (recipe.all_dofs) {
    for (long dof : dec.interface_dofs) {
      CoarseConstraint c;
      c.kind = ObjectKind::vertex;
      c.dofs = {dof};
      c.owners = dec.membership.on_gamma[dof];
      c.signature = dec.membership.on_gamma_hat[dof];
      set.constraints.push_back(std::move(c));
    }
  } else {
    for (auto const& obj : objects) {
      if (!recipe.selects(obj.kind))
        continue;
      CoarseConstraint c;
      c.object = obj.id;
      c.kind = obj.kind;
      c.point = obj.dofs.size() == 1;
      c.dofs = obj.dofs;
      c.owners = obj.owners;
      c.signature = obj.signature;
      set.constraints.push_back(std::move(c));
    }
  }

  std::vector<char> covered(dec.num_subdomains(), 0);
  for (auto const& c : set.constraints)
    for (int i : c.owners)
      covered[i] = 1;
  std::string floating;
  long first = -1;
  for (int i = 0; i < dec.num_subdomains(); ++i)
    if (!covered[i] && !dec.touches_dirichlet[i]) {
      floating += (floating.empty() ? "" : ", ") + std::to_string(i);
      if (first < 0)
        first = i;
    }
  if (first >= 0)
    throw UnderconstrainedError("recipe '" + recipe.name() +
                                    "' leaves floating subdomain(s) without constraints: " + floating,
                                first);

  find_path_violations(dec, objects, set, coeff);
  return set;
}

// ---------------------------------------------------------------------------
// Setup

namespace {

SubdomainOperator build_subdomain(Decomposition const& dec, CoefficientField const& coeff,
                                  int id, std::vector<int> const& my_constraints,
                                  ConstraintSet const& cs, WeightingOperator const& weights,
                                  std::vector<long>& node_to_local, std::vector<Triplet>& coarse)
{
  auto const& mesh = dec.mesh;
  SubdomainOperator sub;
  sub.id = id;
  auto const& cells = dec.subdomain_cells[id];

  for (long c : cells) {
    auto const nodes = mesh.cell_nodes(c);
    for (int a = 0; a < mesh.nodes_per_cell(); ++a) {
      long const dof = dec.dofs.node_to_dof[nodes[a]];
      if (dof >= 0)
        sub.local_to_global.push_back(dof);
    }
  }
  std::sort(sub.local_to_global.begin(), sub.local_to_global.end());
  sub.local_to_global.erase(std::unique(sub.local_to_global.begin(), sub.local_to_global.end()),
                            sub.local_to_global.end());
  long const n = static_cast<long>(sub.local_to_global.size());
  for (long l = 0; l < n; ++l)
    node_to_local[dec.dofs.dof_to_node[sub.local_to_global[l]]] = l;

  sub.neumann = assemble_cells(mesh, coeff, cells, node_to_local, n);
  for (long l = 0; l < n; ++l)
    node_to_local[dec.dofs.dof_to_node[sub.local_to_global[l]]] = -1;

  std::vector<int> position(n);
  for (int l = 0; l < n; ++l) {
    long const g = sub.local_to_global[l];
    if (dec.membership.on_interface(g)) {
      position[l] = static_cast<int>(sub.interface.size());
      sub.interface.push_back(l);
      sub.interface_global.push_back(g);
      sub.interface_weights.push_back(weights.weight(g, id));
    } else {
      position[l] = static_cast<int>(sub.interior.size());
      sub.interior.push_back(l);
      sub.interior_global.push_back(g);
    }
  }

  long const ni = static_cast<long>(sub.interior.size());
  long const ng = static_cast<long>(sub.interface.size());
  std::vector<Triplet> aii, agi;
  auto const& a = sub.neumann.matrix();
  for (int col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      bool const row_i = !dec.membership.on_interface(sub.local_to_global[it.row()]);
      bool const col_i = !dec.membership.on_interface(sub.local_to_global[col]);
      if (row_i && col_i && it.row() >= col)
        aii.emplace_back(position[it.row()], position[col], it.value());
      else if (!row_i && col_i)
        agi.emplace_back(position[it.row()], position[col], it.value());
    }
  try {
    sub.interior_factor = SpdFactorization(SparseSym::from_lower_triplets(ni, aii));
  } catch (NotSpdError const& e) {
    throw Error("subdomain " + std::to_string(id) + ": interior block: " + e.what());
  }
  sub.interface_interior.resize(static_cast<int>(ng), static_cast<int>(ni));
  sub.interface_interior.setFromTriplets(agi.begin(), agi.end());

  long const m = static_cast<long>(my_constraints.size());
  std::vector<Triplet> crows;
  for (long r = 0; r < m; ++r) {
    auto const& c = cs.constraints[my_constraints[r]];
    double const v = 1.0 / static_cast<double>(c.dofs.size());
    for (long g : c.dofs) {
      auto const it = std::lower_bound(sub.local_to_global.begin(), sub.local_to_global.end(), g);
      crows.emplace_back(static_cast<int>(r), static_cast<int>(it - sub.local_to_global.begin()), v);
    }
    sub.coarse_ids.push_back(my_constraints[r]);
  }
  sub.constraints.resize(static_cast<int>(m), static_cast<int>(n));
  sub.constraints.setFromTriplets(crows.begin(), crows.end());

  sub.saddle = SaddleFactorization(sub.neumann, sub.constraints, id);

  DenseMatrix const psi = sub.saddle.constrained_basis();
  DenseMatrix const apsi = a * psi;
  DenseMatrix local = psi.transpose() * apsi;
  local = 0.5 * (local + local.transpose()).eval();
  for (long r = 0; r < m; ++r)
    for (long s = 0; s < m; ++s) {
      int const gr = sub.coarse_ids[r];
      int const gs = sub.coarse_ids[s];
      if (gr >= gs)
        coarse.emplace_back(gr, gs, local(r, s));
    }

  sub.coarse_basis_interface.resize(ng, m);
  for (long k = 0; k < ng; ++k)
    sub.coarse_basis_interface.row(k) = psi.row(sub.interface[k]);
  return sub;
}

} // namespace

BddcOperator build_bddc(Decomposition const& dec, CoefficientField const& coeff,
                        ConstraintSet const& constraints, WeightingOperator const& weights)
{
  BddcOperator op;
  op.n_ = dec.dofs.size();
  op.coarse_n_ = constraints.size();
  op.interface_ = dec.interface_dofs;

  int const nsub = dec.num_subdomains();
  std::vector<std::vector<int>> per_sub(nsub);
  for (int k = 0; k < constraints.size(); ++k)
    for (int i : constraints.constraints[k].owners)
      per_sub[i].push_back(k);

  std::vector<long> node_to_local(dec.mesh.node_count(), -1);
  std::vector<Triplet> coarse;
  op.subs_.reserve(nsub);
  for (int i = 0; i < nsub; ++i)
    op.subs_.push_back(build_subdomain(dec, coeff, i, per_sub[i], constraints, weights, node_to_local, coarse));

  op.coarse_matrix_ = SparseSym::from_lower_triplets(op.coarse_n_, coarse);
  try {
    op.coarse_factor_ = SpdFactorization(op.coarse_matrix_);
  } catch (NotSpdError const& e) {
    throw Error(std::string("coarse problem: ") + e.what());
  }
  return op;
}

// ---------------------------------------------------------------------------
// Application

Vector BddcOperator::apply(Vector const& r) const
{
  Vector z;
  apply(r, z);
  return z;
}

void BddcOperator::apply(Vector const& r, Vector& z) const
{
  if (r.size() != n_)
    throw InvalidArgument("BddcOperator::apply: dimension mismatch");
  z = Vector::Zero(n_);

  // (1) interior correction, (2) interface residual r' = r - A u1.
  Vector rprime = Vector::Zero(n_);
  for (long g : interface_)
    rprime(g) = r(g);
  for (auto const& s : subs_) {
    Vector ri(static_cast<long>(s.interior_global.size()));
    for (std::size_t k = 0; k < s.interior_global.size(); ++k)
      ri(k) = r(s.interior_global[k]);
    Vector const ui = s.interior_factor.solve(ri);
    for (std::size_t k = 0; k < s.interior_global.size(); ++k)
      z(s.interior_global[k]) = ui(k);
    Vector const coupling = s.interface_interior * ui;
    for (std::size_t k = 0; k < s.interface_global.size(); ++k)
      rprime(s.interface_global[k]) -= coupling(k);
  }

  // (3) weighted restriction, (4) constrained local solves and coarse right-hand side.
  std::vector<Vector> local_gamma(subs_.size());
  Vector coarse_rhs = Vector::Zero(coarse_n_);
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    auto const& s = subs_[i];
    long const nl = static_cast<long>(s.local_to_global.size());
    Vector f = Vector::Zero(nl);
    Vector fg(static_cast<long>(s.interface.size()));
    for (std::size_t k = 0; k < s.interface.size(); ++k) {
      fg(k) = s.interface_weights[k] * rprime(s.interface_global[k]);
      f(s.interface[k]) = fg(k);
    }
    Vector const w = s.saddle.solve_primal(f);
    Vector wg(static_cast<long>(s.interface.size()));
    for (std::size_t k = 0; k < s.interface.size(); ++k)
      wg(k) = w(s.interface[k]);
    local_gamma[i] = std::move(wg);
    Vector const rc = s.coarse_basis_interface.transpose() * fg;
    for (std::size_t k = 0; k < s.coarse_ids.size(); ++k)
      coarse_rhs(s.coarse_ids[k]) += rc(k);
  }
  Vector const uc = coarse_factor_.solve(coarse_rhs);

  // (5) coarse correction, weighted average back onto the interface.
  Vector u2 = Vector::Zero(n_);
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    auto const& s = subs_[i];
    Vector ucl(static_cast<long>(s.coarse_ids.size()));
    for (std::size_t k = 0; k < s.coarse_ids.size(); ++k)
      ucl(k) = uc(s.coarse_ids[k]);
    Vector w = local_gamma[i];
    w.noalias() += s.coarse_basis_interface * ucl;
    for (std::size_t k = 0; k < s.interface.size(); ++k)
      u2(s.interface_global[k]) += s.interface_weights[k] * w(k);
  }

  // (6) discrete harmonic extension of u2 and the final sum.
  Vector const ext = harmonic_extension(u2);
  z += ext;
}

Vector BddcOperator::harmonic_extension(Vector const& values) const
{
  if (values.size() != n_)
    throw InvalidArgument("BddcOperator::harmonic_extension: dimension mismatch");
  Vector u = Vector::Zero(n_);
  for (long g : interface_)
    u(g) = values(g);
  for (auto const& s : subs_) {
    if (s.interior_global.empty())
      continue;
    Vector ug(static_cast<long>(s.interface_global.size()));
    for (std::size_t k = 0; k < s.interface_global.size(); ++k)
      ug(k) = u(s.interface_global[k]);
    Vector const rhs = -(s.interface_interior.transpose() * ug);
    Vector const ui = s.interior_factor.solve(rhs);
    for (std::size_t k = 0; k < s.interior_global.size(); ++k)
      u(s.interior_global[k]) = ui(k);
  }
  return u;
}

} // namespace bddcso
