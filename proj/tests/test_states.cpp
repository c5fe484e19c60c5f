#include <gtest/gtest.h>

#include <cstdlib>

#include "nonloc/states.hpp"
#include "properties.hpp"

using namespace nonloc;

TEST(RootOfUnity, QuarterTurnsAreExact) {
  EXPECT_EQ(root_of_unity(0, 4), complex(1, 0));
  EXPECT_EQ(root_of_unity(1, 4), complex(0, 1));
  EXPECT_EQ(root_of_unity(2, 4), complex(-1, 0));
  EXPECT_EQ(root_of_unity(3, 4), complex(0, -1));
  EXPECT_EQ(root_of_unity(-1, 2), complex(-1, 0));
  EXPECT_EQ(root_of_unity(7, 7), complex(1, 0));
}

TEST(Families, Eta3HasTwoLevelSupport) {
  const auto e0 = eta(0, 3), e1 = eta(1, 3);
  EXPECT_EQ(e0.dim(), 3);
  EXPECT_EQ(e0[0], complex(1, 0));
  EXPECT_EQ(e0[1], complex(1, 0));
  EXPECT_EQ(e0[2], complex(0, 0));
  EXPECT_EQ(e1[1], complex(-1, 0));
  EXPECT_EQ(e0.support(), (std::vector<int>{0, 1}));
}

TEST(Families, XiIsShiftedEta) {
  for (int d = 3; d <= 7; ++d)
    for (int s = 0; s <= d - 2; ++s) {
      const auto e = eta(s, d), x = xi(s, d);
      EXPECT_EQ(x[0], complex(0, 0));
      for (int t = 0; t <= d - 2; ++t) EXPECT_EQ(x[t + 1], e[t]);
    }
}

TEST(Families, OrthogonalUpToDMinusOne) {
  for (int d = 3; d <= 8; ++d)
    for (int s = 0; s <= d - 2; ++s)
      for (int t = 0; t <= d - 2; ++t) {
        const double expect = s == t ? d - 1.0 : 0.0;
        EXPECT_NEAR(std::abs(inner(eta(s, d), eta(t, d)) - expect), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(inner(xi(s, d), xi(t, d)) - expect), 0.0, 1e-12);
      }
}

TEST(Families, DomainErrors) {
  EXPECT_THROW(eta(0, 2), std::domain_error);
  EXPECT_THROW(xi(2, 3), std::domain_error);
  EXPECT_THROW(eta(-1, 4), std::domain_error);
}

TEST(Ket, RejectsEmptyAndZero) {
  EXPECT_THROW(Ket(std::vector<complex>{}), std::domain_error);
  EXPECT_THROW(Ket(std::vector<complex>{0.0, 0.0}), std::domain_error);
  EXPECT_THROW(Ket::basis(3, 3), std::domain_error);
}

TEST(Ket, InnerDimensionMismatch) {
  EXPECT_THROW(inner(Ket::basis(3, 0), Ket::basis(4, 0)), std::domain_error);
}

TEST(Ket, PaddingKeepsAmplitudes) {
  const auto k = eta(1, 3).padded(5);
  EXPECT_EQ(k.dim(), 5);
  EXPECT_EQ(k[1], complex(-1, 0));
  EXPECT_EQ(k[4], complex(0, 0));
  EXPECT_THROW(k.padded(4), std::domain_error);
}

TEST(ProductInner, FactorsMultiply) {
  const ProductState a({xi(0, 3), Ket::basis(3, 0), eta(0, 3)});
  const ProductState b({xi(0, 3), Ket::basis(3, 0), eta(1, 3)});
  EXPECT_NEAR(std::abs(product_inner(a, b)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(product_inner(a, a) - complex(4, 0)), 0.0, 1e-12);
}

TEST(ProductInner, PartyCountMismatch) {
  const ProductState a({Ket::basis(3, 0), Ket::basis(3, 0)});
  const ProductState b({Ket::basis(3, 0), Ket::basis(3, 0), Ket::basis(3, 0)});
  EXPECT_THROW(product_inner(a, b), std::domain_error);
}

TEST(StateLabel, RoundTrip) {
  const StateLabel l{"C1", {0, 1}};
  EXPECT_EQ(l.str(), "C1[0,1]");
  EXPECT_EQ(StateLabel::parse("C1[0,1]"), l);
  EXPECT_EQ(StateLabel::parse("D4[]").index.size(), 0u);
  EXPECT_THROW(StateLabel::parse("C1"), std::domain_error);
}

TEST(Tolerance, EnvironmentOverride) {
  ::setenv("NONLOC_TOL", "1e-7", 1);
  EXPECT_DOUBLE_EQ(TolerancePolicy::from_env().zero_tol, 1e-7);
  ::setenv("NONLOC_TOL", "abc", 1);
  EXPECT_THROW(TolerancePolicy::from_env(), std::domain_error);
  ::setenv("NONLOC_TOL", "2", 1);
  EXPECT_THROW(TolerancePolicy::from_env(), std::domain_error);
  ::unsetenv("NONLOC_TOL");
  EXPECT_DOUBLE_EQ(TolerancePolicy::from_env().zero_tol, 1e-9);
}

TEST(Properties, EtaXiOrthogonality) {
  const auto r = props::eta_xi_orthogonality(20240601u, 500);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Properties, ConjugateSymmetry) {
  const auto r = props::conjugate_symmetry(7u, 400);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Properties, KroneckerOracle) {
  const auto r = props::kronecker_oracle(11u, 400);
  EXPECT_TRUE(r.ok) << r.detail;
}
