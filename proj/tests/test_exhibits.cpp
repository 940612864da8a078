#include <gtest/gtest.h>

#include <cmath>

#include "cgbias/exhibits.hpp"
#include "cgbias/instance_io.hpp"
#include "cgbias/smoothbounds.hpp"

using namespace cgbias;

namespace {

double load(const Instance& inst, const FlowState& f, const std::string& edge) {
  return f.edge_load[inst.network().edge_index(edge)];
}

}  // namespace

TEST(Pigou, ShapeAndCertificate) {
  const auto g = gen_pigou(0.5, 3, BiasSpec::tax(0.2), 2.0);
  EXPECT_TRUE(g.network().is_dsp());
  EXPECT_EQ(g.network().num_edges(), 2u);
  EXPECT_DOUBLE_EQ(g.cost(0).eval(7.0), 1.0);
  EXPECT_DOUBLE_EQ(g.cost(1).eval(2.0), 4.0);
  EXPECT_DOUBLE_EQ(g.total_mass(), 2.0);
  EXPECT_THROW(gen_pigou(0.0, 1, BiasSpec::identity()), std::invalid_argument);
}

TEST(Pigou, UnitAffineBpoa) {
  EXPECT_NEAR(measured_bpoa(gen_pigou(1, 1, BiasSpec::identity())).measured_bpoa, 4.0 / 3.0, 1e-3);
}

TEST(Pigou, SmallTaxPolynomialEquilibriumUsesVariableLink) {
  for (double beta : {0.25, 0.5, 1.0}) {
    const auto g = gen_pigou(1.0 / (1.0 + 2.0 * beta), 2, BiasSpec::tax(beta));
    EXPECT_NEAR(solve_equilibrium(g, {1e-12, 20000}).flow.edge_load[1], 1.0, 1e-6);
  }
}

TEST(Pigou, LargeTaxAffineEquilibriumCostIsHalf) {
  for (double beta : {1.5, 2.0, 4.0}) {
    const auto g = gen_pigou(2 * beta / ((1 + beta) * (1 + beta)), 1, BiasSpec::tax(beta));
    EXPECT_NEAR(social_cost(g, solve_equilibrium(g, {1e-12, 20000}).flow), 0.5, 1e-6);
  }
}

TEST(BraessQuadratic, ShapeHasNoCertificate) {
  const auto g = gen_braess_quadratic(BiasSpec::identity());
  EXPECT_FALSE(g.network().is_dsp());
  EXPECT_EQ(g.network().num_edges(), 5u);
  EXPECT_DOUBLE_EQ(g.cost(g.network().edge_index("a-b")).eval(3.0), 0.0);
}

TEST(BraessQuadratic, UnbiasedEquilibriumTakesTheBridge) {
  const auto g = gen_braess_quadratic(BiasSpec::identity());
  const auto r = solve_equilibrium(g, {1e-12, 20000});
  EXPECT_NEAR(load(g, r.flow, "u-a"), 1.0, 1e-6);
  EXPECT_NEAR(social_cost(g, r.flow), 2.0, 1e-6);
}

TEST(BraessQuadratic, OptimalTaxEquilibrium) {
  const auto g = gen_braess_quadratic(BiasSpec::tax(1.0));
  const auto r = solve_equilibrium(g, {1e-12, 20000});
  EXPECT_NEAR(load(g, r.flow, "u-a"), 1.0 / std::sqrt(3.0), 1e-6);
  EXPECT_NEAR(social_cost(g, r.flow), 1.2302, 1e-4);
}

TEST(BraessAdversarial, UnbiasedPopulationSplitsEvenly) {
  const double eps = 0.1;
  const auto g = gen_braess_adversarial(eps, 60);
  // Nobody biased.
  const auto plain = g.unbiased();
  const auto r = solve_equilibrium(plain, {1e-10, 20000});
  EXPECT_NEAR(load(plain, r.flow, "u-a"), 0.5, 1e-6);
  EXPECT_NEAR(load(plain, r.flow, "a-b"), 0.0, 1e-6);
  EXPECT_NEAR(per_type_cost(plain, r.flow, 0), 1 - eps, 1e-6);
}

TEST(BraessAdversarial, BiasedFractionHarmsTheRest) {
  const double eps = 0.1;
  const auto g = gen_braess_adversarial(eps, 60);
  const auto r = solve_equilibrium(g, {1e-10, 20000});
  EXPECT_NEAR(load(g, r.flow, "u-a"), (1 + eps) / 2, 1e-6);
  EXPECT_NEAR(load(g, r.flow, "b-v"), (1 + eps) / 2, 1e-6);
  const double ratio = per_type_cost(g, r.flow, 0) / (1 - eps);
  EXPECT_NEAR(ratio, std::pow(1.1, 60), 1e-3 * std::pow(1.1, 60));
  EXPECT_GT(ratio, 5.0);
}

TEST(RiskUnbounded, SizeDerivation) {
  const auto z = risk_unbounded_size(0.1, 10.0);
  EXPECT_EQ(z.paths, 201);  // smallest integer above 2M/eps = 200
  EXPECT_EQ(z.degree, 11);  // smallest integer above max(log2(201) + 1, 10)
  EXPECT_DOUBLE_EQ(z.scale, std::pow(100.5, 11));
  const auto big = risk_unbounded_size(0.001, 1000.0);
  EXPECT_EQ(big.paths, 2000001);
  EXPECT_EQ(big.degree, static_cast<int>(std::floor(std::log2(2000001.0) + 1.0)) + 1);
  EXPECT_THROW(risk_unbounded_size(0.5, 10.0), std::invalid_argument);
  EXPECT_THROW(risk_unbounded_size(0.1, 0.5), std::invalid_argument);
}

TEST(RiskUnbounded, BudgetIsEnforced) {
  EXPECT_THROW(gen_risk_unbounded(0.1, 10.0, 1000), std::invalid_argument);
}

TEST(RiskUnbounded, ShapeAndLongPath) {
  const auto g = gen_risk_unbounded(0.25, 1.0);
  const auto z = risk_unbounded_size(0.25, 1.0);
  const auto& net = g.network();
  EXPECT_FALSE(net.is_dsp());
  EXPECT_TRUE(net.acyclic());
  EXPECT_EQ(net.num_edges(), static_cast<std::size_t>(4 * z.paths + 3));
  // The long path threads every middle edge.
  std::vector<std::string> chain{"in0", "in1"};
  for (int k = 1; k <= z.paths; ++k) {
    const auto tag = std::to_string(k);
    if (k > 1) chain.push_back("link" + tag);
    chain.push_back("mid" + tag);
  }
  chain.push_back("out1");
  chain.push_back("out0");
  const auto paths = enumerate_paths(net, "s", "t").as_ids(net);
  EXPECT_NE(std::find(paths.begin(), paths.end(), chain), paths.end());
  EXPECT_EQ(g.type(1).bias, BiasSpec::pessimism(8.0));
  EXPECT_DOUBLE_EQ(g.type(1).mass, 0.25);
}

TEST(RiskUnbounded, ProofConsequencesOnASmallInstance) {
  const double eps = 0.25, bound = 1.0;
  const auto g = gen_risk_unbounded(eps, bound);
  const auto rep = measured_bpoa(g, {1e-9, 20000});
  EXPECT_LT(rep.optimum_cost, eps / bound);
  EXPECT_GE(rep.equilibrium_cost, eps - 1e-3);
  EXPECT_GT(rep.measured_bpoa, bound);
  EXPECT_FALSE(rep.analytic_bound.has_value());
}

TEST(RiskUnbounded, DeterministicBytes) {
  EXPECT_EQ(serialize_instance(gen_risk_unbounded(0.2, 2.0)), serialize_instance(gen_risk_unbounded(0.2, 2.0)));
}

TEST(Tightness, Examples) {
  EXPECT_NEAR(tightness_scale(CostClass::affine(), BiasSpec::tax(0.5)), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(tightness_scale(CostClass::poly(2), BiasSpec::tax(2.0)), 36.0 / 125.0, 1e-15);
  EXPECT_NEAR(tightness_scale(CostClass::quadratic(), BiasSpec::pessimism(3.0)), 4.0 / 9.0, 1e-15);
  const auto g = gen_tightness(CostClass::poly(2), BiasSpec::tax(2.0));
  EXPECT_DOUBLE_EQ(g.cost(1).eval(1.0), 36.0 / 125.0);
  EXPECT_THROW(gen_tightness(CostClass::affine(), BiasSpec::mean_var(1.0, CostModel::constant(1.0), 1.0)),
               Unsupported);
  EXPECT_THROW(gen_tightness(CostClass::general(0.25), BiasSpec::tax(1.0)), Unsupported);
}

TEST(Generators, FlowsOfEveryExhibitValidate) {
  const std::vector<Instance> all{gen_pigou(1, 1, BiasSpec::identity()),
                                  gen_braess_quadratic(BiasSpec::pessimism(3.0)),
                                  gen_braess_adversarial(0.1, 5), gen_risk_unbounded(0.25, 1.0),
                                  gen_tightness(CostClass::poly(3), BiasSpec::tax(0.5))};
  for (const auto& g : all) {
    const auto r = solve_equilibrium(g, {1e-8, 20000});
    EXPECT_TRUE(validate_flow(g.network(), g.demands(), r.flow, 1e-9).valid) << g.name();
    if (auto cert = g.network().certificate()) {
      const auto again = Network::from_recipe(cert->recipe, cert->source, cert->target);
      EXPECT_EQ(again.num_edges(), g.network().num_edges());
    }
    EXPECT_EQ(serialize_instance(parse_instance(serialize_instance(g))), serialize_instance(g)) << g.name();
  }
}
