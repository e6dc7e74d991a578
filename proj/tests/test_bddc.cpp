#include "bddcso/bddc.hpp"
#include "bddcso/errors.hpp"
#include "bddcso/krylov.hpp"
#include "bddcso/problems.hpp"

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bddcso;
using namespace bddcso::testing;

namespace {

double rel_diff(DenseMatrix const& a, DenseMatrix const& b)
{
  return (a - b).norm() / b.norm();
}

std::unique_ptr<Pipeline> uneven_setup(std::string const& recipe, WeightingMode mode)
{
  UnevenSplit fig;
  return make_setup(fig.mesh, make_constant(fig.mesh, 1.0), fig.theta, fig.theta_hat, recipe, mode);
}

} // namespace

TEST(Bddc, MatchesDenseOracle)
{
  std::vector<std::unique_ptr<Pipeline>> setups;
  setups.push_back(make_uniform_setup(2, 12, 3, 1, "ve"));
  setups.push_back(make_uniform_setup(2, 12, 3, 2, "ve"));
  setups.push_back(make_uniform_setup(2, 24, 3, 2, "e", WeightingMode::counting));
  setups.push_back(make_uniform_setup(2, 12, 3, 1, "full"));
  setups.push_back(make_uniform_setup(3, 8, 2, 2, "vef"));
  setups.push_back(make_uniform_setup(3, 9, 3, 1, "f"));
  setups.push_back(uneven_setup("ve", WeightingMode::cardinality));
  for (size_t k = 0; k < setups.size(); ++k) {
    auto const& s = *setups[k];
    auto b = dense_preconditioner(s.op);
    auto oracle = dense_bddc_oracle(s);
    EXPECT_LE(rel_diff(b, oracle), 1e-10) << "case " << k;
  }
}

TEST(Bddc, CoarseDimensionOfFourSubdomains)
{
  auto s = make_uniform_setup(2, 8, 2, 1, "ve");
  EXPECT_EQ(s->op.coarse_size(), 5);
  EXPECT_EQ(s->op.coarse_matrix().dim(), 5);
  auto only_v = make_uniform_setup(2, 8, 2, 1, "v");
  EXPECT_EQ(only_v->op.coarse_size(), 1);
}

TEST(Bddc, UnevenSplitCoarseSpace)
{
  auto s = uneven_setup("ve", WeightingMode::cardinality);
  EXPECT_EQ(s->op.coarse_size(), 13);
  auto std_s = make_uniform_setup(2, 20, 2, 1, "ve");
  EXPECT_EQ(std_s->op.coarse_size(), 5);
}

TEST(Bddc, ConstrainedBasisInvariants)
{
  auto s = make_uniform_setup(3, 8, 2, 2, "vef");
  for (auto const& sub : s->op.subdomains()) {
    DenseMatrix psi = sub.saddle.constrained_basis();
    long const m = sub.constraints.rows();
    ASSERT_EQ(static_cast<long>(sub.coarse_ids.size()), m);
    DenseMatrix cpsi = sub.constraints * psi;
    EXPECT_LE((cpsi - DenseMatrix::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-10) << sub.id;
    DenseMatrix local_coarse = psi.transpose() * (sub.neumann.matrix() * psi);
    EXPECT_LE((local_coarse - local_coarse.transpose()).norm(), 1e-10 * local_coarse.norm());
    EXPECT_GE(dense_sym_eig(0.5 * (local_coarse + local_coarse.transpose())).minCoeff(),
              -1e-10 * local_coarse.norm());
    // local to global is injective and ordered
    for (size_t k = 1; k < sub.local_to_global.size(); ++k)
      EXPECT_LT(sub.local_to_global[k - 1], sub.local_to_global[k]);
  }
  auto const& sc = s->op.coarse_matrix();
  Eigen::LLT<DenseMatrix> llt(sc.to_dense());
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Bddc, FullRecipeIsExactInverse)
{
  auto s = make_uniform_setup(2, 12, 3, 1, "full");
  EXPECT_EQ(s->op.coarse_size(), static_cast<long>(s->dec.interface_dofs.size()));
  auto res = s->solve(s->system.rhs, {1e-10, 50});
  EXPECT_EQ(res.report.iterations, 1);
  std::mt19937 rng(5);
  Vector x = random_vector(s->op.dim(), rng);
  EXPECT_LE((s->apply_b(s->apply_a(x)) - x).norm(), 1e-9 * x.norm());
}

TEST(Bddc, SymmetricApplication)
{
  std::vector<std::unique_ptr<Pipeline>> setups;
  setups.push_back(make_uniform_setup(2, 16, 2, 2, "ve"));
  setups.push_back(make_uniform_setup(3, 8, 2, 2, "vef"));
  for (auto const& setup : setups) {
    std::mt19937 rng(17);
    for (int t = 0; t < 20; ++t) {
      Vector u = random_vector(setup->op.dim(), rng);
      Vector v = random_vector(setup->op.dim(), rng);
      double const uv = u.dot(setup->apply_b(v));
      double const vu = v.dot(setup->apply_b(u));
      EXPECT_NEAR(uv, vu, 1e-9 * std::max(1.0, std::abs(uv)));
    }
  }
}

TEST(Bddc, SpectrumBoundedBelowByOne)
{
  auto s = make_uniform_setup(2, 16, 2, 1, "ve");
  auto eig = spectrum_ba(s->system.matrix, dense_preconditioner(s->op));
  EXPECT_GE(eig.minCoeff(), 1.0 - 1e-8);
  auto so = make_uniform_setup(2, 16, 2, 2, "ve");
  auto eig_so = spectrum_ba(so->system.matrix, dense_preconditioner(so->op));
  EXPECT_GE(eig_so.minCoeff(), 1.0 - 1e-8);
}

TEST(Bddc, MoreConstraintsNeverRaiseTheTopEigenvalue)
{
  double prev = std::numeric_limits<double>::infinity();
  for (std::string r : {"v", "ve", "vef"}) {
    auto s = make_uniform_setup(3, 8, 2, 1, r);
    auto eig = spectrum_ba(s->system.matrix, dense_preconditioner(s->op));
    EXPECT_LE(eig.maxCoeff(), prev * (1.0 + 1e-10)) << r;
    EXPECT_GE(eig.minCoeff(), 1.0 - 1e-8) << r;
    prev = eig.maxCoeff();
  }
  prev = std::numeric_limits<double>::infinity();
  for (std::string r : {"v", "ve"}) {
    auto s = make_uniform_setup(2, 12, 3, 1, r);
    auto eig = spectrum_ba(s->system.matrix, dense_preconditioner(s->op));
    EXPECT_LE(eig.maxCoeff(), prev * (1.0 + 1e-10)) << r;
    prev = eig.maxCoeff();
  }
}

TEST(Bddc, UnitSplitIsStandard)
{
  auto mesh = build_mesh(3, {8, 8, 8});
  std::vector<int> grid{2, 2, 2};
  auto theta = partition_uniform(mesh, grid);
  auto standard = make_setup(mesh, make_constant(mesh, 1.0), theta, theta, "vef");
  auto so = make_setup(mesh, make_constant(mesh, 1.0), theta, refine_uniform(mesh, theta, 1), "vef");
  // constant coefficient: splitting by coefficient changes nothing either
  auto by_coeff = make_setup(mesh, make_constant(mesh, 1.0), theta,
                             refine_by_coefficient(mesh, theta, make_constant(mesh, 1.0)), "vef",
                             WeightingMode::coefficient);
  EXPECT_EQ(so->op.coarse_size(), standard->op.coarse_size());
  std::mt19937 rng(8);
  for (int t = 0; t < 20; ++t) {
    Vector r = random_vector(standard->op.dim(), rng);
    Vector z = standard->apply_b(r);
    EXPECT_LE((so->apply_b(r) - z).norm(), 1e-12 * z.norm());
    EXPECT_LE((by_coeff->apply_b(r) - z).norm(), 1e-12 * z.norm());
  }
}

TEST(Bddc, HarmonicExtension)
{
  auto s = make_uniform_setup(2, 12, 3, 1, "ve");
  long const n = s->op.dim();
  EXPECT_EQ(s->op.harmonic_extension(Vector::Zero(n)).norm(), 0.0);

  // constants are discrete harmonic in the floating middle subdomain
  Vector ones = Vector::Ones(n);
  Vector ext = s->op.harmonic_extension(ones);
  auto const& middle = s->op.subdomains()[4];
  ASSERT_FALSE(s->dec.touches_dirichlet[4]);
  for (long d : middle.interior_global)
    EXPECT_NEAR(ext(d), 1.0, 1e-12);
  for (long d : s->dec.interface_dofs)
    EXPECT_EQ(ext(d), 1.0);

  std::mt19937 rng(31);
  std::vector<char> on_gamma(n, 0);
  for (long d : s->dec.interface_dofs)
    on_gamma[d] = 1;
  Vector g = random_vector(n, rng);
  Vector u = s->op.harmonic_extension(g);
  Vector au = s->apply_a(u);
  double const energy = u.dot(au);
  for (long d = 0; d < n; ++d)
    if (!on_gamma[d])
      EXPECT_NEAR(au(d), 0.0, 1e-10);
  for (int t = 0; t < 100; ++t) {
    Vector v = random_vector(n, rng);
    for (long d = 0; d < n; ++d)
      if (on_gamma[d])
        v(d) = 0.0;
    Vector w = u + v;
    EXPECT_GE(w.dot(s->apply_a(w)), energy * (1.0 - 1e-12));
  }
}

TEST(Bddc, VerticesOnlyLeavesEnclosedSubdomainFloating)
{
  auto mesh = build_mesh(3, {6, 6, 6});
  std::vector<int> theta(mesh.cell_count(), 0);
  for (long c = 0; c < mesh.cell_count(); ++c) {
    auto i = mesh.cell_index(c);
    bool inside = true;
    for (int d = 0; d < 3; ++d)
      inside = inside && i[d] >= 2 && i[d] < 4;
    theta[c] = inside ? 1 : 0;
  }
  auto dec = make_decomposition(mesh, make_partition_pair(mesh, theta, theta));
  auto objs = classify_objects(dec.mesh, dec.partition, dec.membership);
  ASSERT_EQ(objs.size(), 1u);
  EXPECT_EQ(objs[0].kind, ObjectKind::face);
  try {
    select_constraints(dec, objs, ConstraintRecipe::parse("v"));
    FAIL() << "expected UnderconstrainedError";
  } catch (UnderconstrainedError const& e) {
    EXPECT_EQ(e.subdomain(), 1);
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
  EXPECT_EQ(select_constraints(dec, objs, ConstraintRecipe::parse("f")).size(), 1);
}

TEST(Bddc, ConstraintRows)
{
  auto s = make_uniform_setup(3, 8, 2, 2, "vef");
  EXPECT_EQ(s->constraints.size(), count_coarse_dofs(std::vector<int>{2, 2, 2}, 2, ConstraintRecipe::parse("vef"),
                                                     std::vector<int>{2, 2, 2}));
  for (auto const& c : s->constraints.constraints) {
    EXPECT_EQ(c.point, c.kind == ObjectKind::vertex);
    EXPECT_GE(c.owners.size(), 2u);
  }
}

TEST(Bddc, FaceRecipeOnCoefficientSplit)
{
  auto mesh = build_mesh(3, {16, 16, 16});
  std::vector<int> grid{2, 2, 2};
  auto theta = partition_uniform(mesh, grid);
  auto coeff = make_channels(mesh, grid, {6.0, 4, 0});
  auto hat = refine_by_coefficient(mesh, theta, coeff);
  auto s = make_setup(mesh, coeff, theta, hat, "f", WeightingMode::coefficient);
  EXPECT_TRUE(s->constraints.path_violations.empty());
  auto res = s->solve(s->system.rhs, {1e-8, 200});
  EXPECT_TRUE(res.report.converged);
  EXPECT_LE(res.report.iterations, 20);
}

TEST(Bddc, CoefficientScalingInvariance)
{
  auto mesh = build_mesh(3, {8, 8, 8});
  std::vector<int> grid{2, 2, 2};
  auto theta = partition_uniform(mesh, grid);
  auto hat = refine_uniform(mesh, theta, 2);
  auto a = make_setup(mesh, make_constant(mesh, 1.0), theta, hat, "vef");
  auto b = make_setup(mesh, make_constant(mesh, 1e5), theta, hat, "vef");
  auto ra = a->solve(a->system.rhs, {1e-8, 100});
  auto rb = b->solve(b->system.rhs, {1e-8, 100});
  EXPECT_EQ(ra.report.iterations, rb.report.iterations);
  EXPECT_NEAR(ra.report.kappa_estimate, rb.report.kappa_estimate, 1e-8);
}
