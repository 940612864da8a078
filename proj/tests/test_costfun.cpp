#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cgbias/costfun.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

using namespace cgbias;

TEST(CostEval, Examples) {
  EXPECT_DOUBLE_EQ(CostModel::monomial(1.0, 2).eval(3.0), 9.0);
  const auto affine = CostModel::polynomial({2.0, 3.0});
  for (double x : {0.0, 0.5, 7.0}) EXPECT_DOUBLE_EQ(affine.deriv(x), 3.0);
  EXPECT_DOUBLE_EQ(CostModel::monomial(1.0, 1).integral(1.0), 0.5);
  EXPECT_DOUBLE_EQ(affine.integral(0.0), 0.0);
}

TEST(CostEval, NegativeLoadIsADomainError) {
  const auto c = CostModel::monomial(1.0, 2);
  EXPECT_THROW(c.eval(-1e-9), std::domain_error);
  EXPECT_THROW(c.deriv(-1.0), std::domain_error);
  EXPECT_THROW(c.integral(-1.0), std::domain_error);
}

TEST(CostModel, RejectsNegativeCoefficients) {
  EXPECT_THROW(CostModel::polynomial({1.0, -0.5}), std::invalid_argument);
}

TEST(CostModel, ShiftedPowerMatchesExpansion) {
  const auto c = CostModel::shifted_power(2.0, 0.5, 3);
  const auto p = CostModel::polynomial(c.expanded());
  for (double x : {0.0, 0.3, 1.0, 4.0}) {
    EXPECT_NEAR(c.eval(x), 2.0 * std::pow(x + 0.5, 3), 1e-12);
    EXPECT_NEAR(p.eval(x), c.eval(x), 1e-10);
    EXPECT_NEAR(c.integral(x), p.integral(x), 1e-10);
  }
}

TEST(CostModel, TableInterpolatesAndExtrapolatesFlat) {
  const auto t = CostModel::table({{0.0, 1.0}, {1.0, 3.0}});
  EXPECT_DOUBLE_EQ(t.eval(0.5), 2.0);
  EXPECT_DOUBLE_EQ(t.eval(5.0), 3.0);
  EXPECT_FALSE(t.differentiable());
  EXPECT_THROW(t.marginal(), std::logic_error);
  EXPECT_THROW(CostModel::table({{0.0, 2.0}, {1.0, 1.0}}), std::invalid_argument);
}

TEST(Marginal, Examples) {
  EXPECT_EQ(CostModel::monomial(1.0, 1).marginal().expanded(), (std::vector<double>{0.0, 2.0}));
  EXPECT_EQ(CostModel::monomial(1.0, 2).marginal().expanded(), (std::vector<double>{0.0, 0.0, 3.0}));
  EXPECT_EQ(CostModel::constant(4.0).marginal().expanded(), (std::vector<double>{4.0}));
}

TEST(Marginal, MatchesFiniteDifferenceOfTotalCost) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const auto c = randinst::poly(rng, randinst::pick(rng, 0, 4), 0.1);
    const auto m = c.marginal();
    const double x = randinst::uniform(rng, 0.01, 5.0);
    const double fd = oracle::central_diff([&](double y) { return y * c.eval(y); }, x);
    EXPECT_NEAR(m.eval(x), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Integral, IsAnAntiderivative) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    const auto c = randinst::poly(rng, randinst::pick(rng, 0, 4), 0.1);
    const double x = randinst::uniform(rng, 0.01, 5.0);
    const double fd = oracle::central_diff([&](double y) { return c.integral(y); }, x);
    EXPECT_NEAR(fd, c.eval(x), 1e-5 * std::max(1.0, c.eval(x)));
  }
}

TEST(ApplyBias, TaxOnAffine) {
  const double a = 2.0, b = 0.7;
  for (double beta : {0.0, 0.3, 1.0, 2.5}) {
    const auto bc = apply_bias(CostModel::polynomial({b, a}), BiasSpec::tax(beta));
    for (double x : {0.0, 0.4, 3.0}) EXPECT_NEAR(bc.eval(x), (1.0 + beta) * a * x + b, 1e-12);
  }
}

TEST(ApplyBias, PessimismOnQuadratic) {
  const double a = 1.5, b = 0.5, c0 = 2.0;
  for (double r : {1.0, 1.4, 3.0}) {
    const auto bc = apply_bias(CostModel::polynomial({c0, b, a}), BiasSpec::pessimism(r));
    for (double x : {0.0, 0.4, 3.0})
      EXPECT_NEAR(bc.eval(x), r * r * a * x * x + r * b * x + c0, 1e-12);
  }
}

TEST(ApplyBias, PessimismThreeOnSquareIsNineSquare) {
  const auto bc = apply_bias(CostModel::monomial(1.0, 2), BiasSpec::pessimism(3.0));
  ASSERT_TRUE(bc.closed_form().has_value());
  EXPECT_EQ(bc.closed_form()->expanded(), (std::vector<double>{0.0, 0.0, 9.0}));
}

TEST(ApplyBias, PessimismOnAffineEqualsTaxExactly) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 50; ++k) {
    const auto c = randinst::poly(rng, 1, 0.0);
    const double r = randinst::uniform(rng, 1.0, 5.0);
    const auto p = apply_bias(c, BiasSpec::pessimism(r)).closed_form();
    const auto t = apply_bias(c, BiasSpec::tax(r - 1.0)).closed_form();
    ASSERT_TRUE(p && t);
    const auto pc = p->expanded(), tc = t->expanded();
    ASSERT_EQ(pc.size(), tc.size());
    // a r and a (1 + (r - 1)) agree to one rounding.
    for (std::size_t i = 0; i < pc.size(); ++i) EXPECT_NEAR(pc[i], tc[i], 4e-16 * std::abs(pc[i]));
  }
}

TEST(ApplyBias, TaxOneIsTheMarginalCost) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 100; ++k) {
    const auto c = randinst::poly(rng, randinst::pick(rng, 0, 5), 0.1);
    const auto bc = apply_bias(c, BiasSpec::tax(1.0));
    const auto m = c.marginal();
    for (double x : {0.0, 0.25, 1.0, 2.0, 3.7})
      EXPECT_NEAR(bc.eval(x), m.eval(x), 1e-12 * std::max(1.0, m.eval(x)));
  }
}

TEST(ApplyBias, IdentityIsPointwiseEqual) {
  const auto c = CostModel::polynomial({0.3, 0.0, 2.0, 1.0});
  const auto bc = apply_bias(c, BiasSpec::identity());
  for (double x : {0.0, 0.5, 2.0}) EXPECT_EQ(bc.eval(x), c.eval(x));
}

TEST(ApplyBias, MeanVarAddsScaledVariance) {
  const auto c = CostModel::monomial(1.0, 2);
  const auto bc = apply_bias(c, BiasSpec::mean_var(2.0, CostModel::monomial(0.5, 1)));
  EXPECT_DOUBLE_EQ(bc.eval(3.0), 9.0 + 2.0 * 1.5);
  EXPECT_DOUBLE_EQ(bc.deriv(3.0), 6.0 + 1.0);
}

TEST(ApplyBias, MeanVarPerEdgeOverride) {
  const auto bias = BiasSpec::mean_var(1.0, CostModel::constant(1.0), std::nullopt,
                                       {{"special", CostModel::constant(5.0)}});
  const auto c = CostModel::constant(0.0);
  EXPECT_DOUBLE_EQ(apply_bias(c, bias, "plain").eval(0.0), 1.0);
  EXPECT_DOUBLE_EQ(apply_bias(c, bias, "special").eval(0.0), 5.0);
}

TEST(ApplyBias, OverrideLooksUpEdge) {
  const auto bias = BiasSpec::override_costs({{"e1", CostModel::constant(7.0)}});
  const auto c = CostModel::monomial(1.0, 1);
  EXPECT_DOUBLE_EQ(apply_bias(c, bias, "e1").eval(2.0), 7.0);
  EXPECT_DOUBLE_EQ(apply_bias(c, bias, "e2").eval(2.0), 2.0);
}

TEST(ApplyBias, RejectsOutOfRangeParameters) {
  EXPECT_THROW(BiasSpec::tax(-0.1), std::invalid_argument);
  EXPECT_THROW(BiasSpec::pessimism(0.9), std::invalid_argument);
  EXPECT_THROW(BiasSpec::mean_var(-1.0, CostModel()), std::invalid_argument);
  EXPECT_THROW(BiasSpec::capacity(1.0, 1.5, 1.0), std::invalid_argument);
  EXPECT_THROW(BiasSpec::capacity(-1.0, 0.5, 1.0), std::invalid_argument);
}

TEST(ApplyBias, CapacityIsContinuousAndPenalizesAtLimit) {
  const double L = 2.0, delta = 0.5, M = 10.0;
  const auto c = CostModel::polynomial({1.0, 1.0});  // c(L) = 3 >= 1
  const auto bc = apply_bias(c, BiasSpec::capacity(L, delta, M));
  const double knee = L - delta;
  EXPECT_DOUBLE_EQ(bc.eval(knee), c.eval(knee));
  EXPECT_NEAR(bc.eval(knee + 1e-9), c.eval(knee), 1e-7);
  EXPECT_DOUBLE_EQ(bc.eval(1.0), c.eval(1.0));
  EXPECT_GE(bc.eval(L), M * c.eval(L));
  // Integral agrees with quadrature across the knee.
  double quad = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) quad += bc.eval(3.0 * (k + 0.5) / n) * 3.0 / n;
  EXPECT_NEAR(bc.integral(3.0), quad, 1e-6 * quad);
}

TEST(BiasedCost, PerceivedCostsAreNondecreasing) {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 50; ++k) {
    const auto c = randinst::poly(rng, 3);
    for (const auto& b : {BiasSpec::tax(randinst::uniform(rng, 0, 3)),
                          BiasSpec::pessimism(randinst::uniform(rng, 1, 4))}) {
      const auto bc = apply_bias(c, b);
      double prev = bc.eval(0.0);
      for (int i = 1; i <= 100; ++i) {
        const double v = bc.eval(0.05 * i);
        EXPECT_GE(v, prev - 1e-12);
        prev = v;
      }
    }
  }
}

TEST(BiasedCost, IntegralsMatchFiniteDifferences) {
  std::mt19937_64 rng(16);
  for (int k = 0; k < 40; ++k) {
    const auto c = randinst::poly(rng, 3);
    for (const auto& b : {BiasSpec::tax(1.7), BiasSpec::pessimism(2.3),
                          BiasSpec::mean_var(0.5, CostModel::monomial(1.0, 1)),
                          BiasSpec::capacity(1.0, 0.4, 3.0)}) {
      const auto bc = apply_bias(c, b);
      const double x = randinst::uniform(rng, 0.05, 2.0);
      const double fd = oracle::central_diff([&](double y) { return bc.integral(y); }, x);
      EXPECT_NEAR(fd, bc.eval(x), 1e-5 * std::max(1.0, bc.eval(x))) << b.describe();
      const double dfd = oracle::central_diff([&](double y) { return bc.eval(y); }, x);
      EXPECT_NEAR(bc.deriv(x), dfd, 1e-5 * std::max(1.0, std::abs(dfd))) << b.describe();
    }
  }
}

TEST(SmallBiasFactor, Examples) {
  const auto lin = CostModel::monomial(1.0, 1);
  EXPECT_EQ(small_bias_factor(lin, apply_bias(lin, BiasSpec::identity())), 0.0);
  EXPECT_NEAR(small_bias_factor(lin, apply_bias(lin, BiasSpec::tax(0.1))), 0.1, 1e-12);
  const auto sq = CostModel::monomial(1.0, 2);
  EXPECT_NEAR(small_bias_factor(sq, apply_bias(sq, BiasSpec::pessimism(2.0))), 3.0, 1e-12);
  // Vanishing true cost with positive perceived cost.
  const auto bc = apply_bias(lin, BiasSpec::mean_var(1.0, CostModel::constant(1.0)));
  EXPECT_EQ(small_bias_factor(lin, bc), std::numeric_limits<double>::infinity());
}

TEST(SmallBiasFactor, GridOracle) {
  // Direct maximum of both ratios on the same grid.
  const auto c = CostModel::polynomial({1.0, 2.0, 0.5});
  const auto bc = apply_bias(c, BiasSpec::tax(0.4));
  double worst = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double x = 10.0 * k / 1000;
    worst = std::max({worst, bc.eval(x) / c.eval(x) - 1.0, c.eval(x) / bc.eval(x) - 1.0});
  }
  EXPECT_NEAR(small_bias_factor(c, bc), worst, 1e-14);
}
