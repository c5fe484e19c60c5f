#include <gtest/gtest.h>

#include "nonloc/povm_checker.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace nonloc;

TEST(MeasuringGroup, CyclicOrder) {
  const auto gs = measuring_groups({3, 4, 5});
  ASSERT_EQ(gs.size(), 3u);
  EXPECT_EQ(gs[0].name(), "BC");
  EXPECT_EQ(gs[1].name(), "CA");
  EXPECT_EQ(gs[2].name(), "AB");
  EXPECT_EQ(gs[1].member_dims, (Dims{5, 3}));
  EXPECT_EQ(gs[1].joint_dim, 15u);
  EXPECT_EQ(gs[1].to_group_order({1, 2}), (Coord{2, 1}));  // natural (A,C) -> (C,A)
  EXPECT_EQ(gs[1].joint_tuple(gs[1].joint_index({4, 2})), (Coord{4, 2}));
  EXPECT_THROW(measuring_group({3, 3}, 0), std::domain_error);
  EXPECT_THROW(measuring_group({3, 3, 3}, 3), std::domain_error);
}

TEST(GroupVector, MatchesKronecker) {
  const auto ops = fourpartite(3, 4, 3, 3);
  for (const auto& g : measuring_groups(ops.dims))
    for (std::size_t i = 0; i < ops.states.size(); i += 7) {
      const auto ref = oracle::expand(ops.states[i], g.parties);
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(ref.size());
      for (const auto& [k, a] : group_vector(ops.states[i], g)) v(static_cast<Eigen::Index>(k)) = a;
      EXPECT_LT((v - ref).norm(), 1e-12);
    }
}

TEST(SparseEliminator, RankAndNullVector) {
  SparseEliminator e(3, 1.0, 1e-8);
  EXPECT_TRUE(e.add_row({{0, 1.0}, {1, 1.0}}));
  EXPECT_TRUE(e.add_row({{1, 1.0}, {2, 1.0}}));
  EXPECT_FALSE(e.add_row({{0, 1.0}, {2, -1.0}}));  // dependent
  EXPECT_EQ(e.rank(), 2u);
  const auto free = e.free_columns();
  ASSERT_EQ(free.size(), 1u);
  const auto x = e.null_vector(free[0]);
  EXPECT_NEAR(x[0] + x[1], 0.0, 1e-14);
  EXPECT_NEAR(x[1] + x[2], 0.0, 1e-14);
  EXPECT_THROW(e.add_row({{5, 1.0}}), std::out_of_range);
}

TEST(SparseEliminator, FillBudget) {
  SparseEliminator e(4, 1.0, 1e-8, 3);
  e.add_row({{0, 1.0}, {1, 1.0}});
  EXPECT_THROW(e.add_row({{2, 1.0}, {3, 1.0}}), ResourceLimitError);
}

TEST(Assemble, PairCountAndIdentity) {
  const auto ops = tripartite(3, 3, 3);
  const auto g = measuring_group(ops.dims, 0);
  const auto cs = assemble(ops, g);
  EXPECT_EQ(cs.unknowns, 81u);
  std::size_t active = 0;
  for (std::size_t i = 0; i < ops.states.size(); ++i)
    for (std::size_t j = i + 1; j < ops.states.size(); ++j)
      active += std::abs(inner(ops.states[i].party(0), ops.states[j].party(0))) >= 1e-9;
  EXPECT_EQ(cs.rows.size(), 2 * active);
  EXPECT_LT(identity_residual(cs), 1e-12);
}

TEST(Nullity, ShippedAreTrivialAndMatchOracle) {
  for (const auto& ops : {tripartite(3, 3, 3), tripartite(3, 4, 3), tripartite(4, 3, 3)})
    for (const auto& g : measuring_groups(ops.dims)) {
      const auto v = check_group(ops, g);
      EXPECT_EQ(v.nullity, 1u) << ops.name << " " << g.name();
      EXPECT_TRUE(v.trivial);
      EXPECT_FALSE(v.witness.has_value());
      ASSERT_TRUE(v.dense_nullity.has_value());
      EXPECT_EQ(*v.dense_nullity, 1u);
      EXPECT_EQ(oracle::hermitian_nullity(ops, g.excluded), 1u);
    }
}

TEST(Nullity, ComputationalBasisLeavesDiagonalFree) {
  const auto ops = computational_basis({3, 3, 3});
  for (const auto& g : measuring_groups(ops.dims)) {
    const auto v = check_group(ops, g);
    EXPECT_EQ(v.nullity, 9u);
    EXPECT_FALSE(v.trivial);
    EXPECT_EQ(oracle::hermitian_nullity(ops, g.excluded), 9u);
    ASSERT_TRUE(v.witness.has_value());
    for (std::size_t r = 0; r < 9; ++r)
      for (std::size_t c = 0; c < 9; ++c)
        {
        if (r != c) { EXPECT_LT(std::abs(v.witness->at(r, c)), 1e-12); }
      }
  }
}

TEST(Nullity, PaddedEmbeddingHasWitnessOnNewDirection) {
  const auto ops = embed(tripartite(3, 3, 3), {4, 4, 4});
  const auto g = measuring_group(ops.dims, 0);
  const auto v = check_group(ops, g);
  EXPECT_GT(v.nullity, 1u);
  EXPECT_EQ(v.nullity, oracle::hermitian_nullity(ops, 0));
  ASSERT_TRUE(v.witness.has_value());
  const auto& w = *v.witness;
  bool touches = false;
  for (std::size_t r = 0; r < w.n; ++r)
    for (std::size_t c = 0; c < w.n; ++c) {
      EXPECT_LT(std::abs(w.at(r, c) - std::conj(w.at(c, r))), 1e-12);
      const auto tr = g.joint_tuple(r), tc = g.joint_tuple(c);
      const bool padded = tr[0] == 3 || tr[1] == 3 || tc[0] == 3 || tc[1] == 3;
      if (padded && std::abs(w.at(r, c)) > 1e-9) touches = true;
    }
  EXPECT_TRUE(touches);
  // The witness solves every active constraint and is not proportional to I.
  for (std::size_t i = 0; i < ops.states.size(); ++i)
    for (std::size_t j = i + 1; j < ops.states.size(); ++j) {
      if (std::abs(inner(ops.states[i].party(0), ops.states[j].party(0))) < 1e-9) continue;
      const auto a = oracle::expand(ops.states[i], g.parties), b = oracle::expand(ops.states[j], g.parties);
      std::complex<double> s = 0;
      for (std::size_t r = 0; r < w.n; ++r)
        for (std::size_t c = 0; c < w.n; ++c)
          s += std::conj(a(static_cast<Eigen::Index>(r))) * w.at(r, c) * b(static_cast<Eigen::Index>(c));
      EXPECT_LT(std::abs(s), 1e-9);
    }
  std::complex<double> trace = 0;
  for (std::size_t r = 0; r < w.n; ++r) trace += w.at(r, r);
  EXPECT_LT(std::abs(trace), 1e-9);
}

TEST(Nullity, GeneralParametrizationKeepsComplexScalars) {
  BruteOptions opts;
  opts.param = Parametrization::General;
  const auto ops = tripartite(3, 3, 3);
  for (const auto& g : measuring_groups(ops.dims)) {
    const auto v = check_group(ops, g, {}, opts);
    EXPECT_GE(v.nullity, 2u);
    EXPECT_LT(v.identity_residual, 1e-12);
  }
}

TEST(Nullity, DroppingStatesNeverShrinksSolutions) {
  const auto ops = tripartite(3, 3, 3);
  const auto g = measuring_group(ops.dims, 1);
  const auto base = nullity(assemble(ops, g));
  for (std::size_t i = 0; i < ops.states.size(); i += 5)
    EXPECT_GE(nullity(assemble(remove_state(ops, i), g)), base);
}

TEST(Nullity, PermutationCovariance) {
  const auto ops = embed(tripartite(3, 3, 3), {4, 3, 3});
  const std::vector<std::size_t> perm{1, 2, 0};
  const auto p = permute_parties(ops, perm);
  for (std::size_t e = 0; e < 3; ++e)
    EXPECT_EQ(nullity(assemble(ops, measuring_group(ops.dims, e))),
              nullity(assemble(p, measuring_group(p.dims, perm[e]))));
}

TEST(Nullity, FillBudgetAborts) {
  const auto ops = tripartite(3, 3, 3);
  BruteOptions opts;
  opts.max_nnz = 10;
  EXPECT_THROW(check_group(ops, measuring_group(ops.dims, 0), {}, opts), ResourceLimitError);
}

TEST(Properties, IdentityFeasibility) {
  const auto r = props::identity_feasibility(424242u, 12);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Properties, PhaseInvariance) {
  const auto r = props::phase_invariance(31337u, 12);
  EXPECT_TRUE(r.ok) << r.detail;
}
