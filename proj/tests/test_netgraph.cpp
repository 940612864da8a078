#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cgbias/exhibits.hpp"
#include "cgbias/netgraph.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

using namespace cgbias;

namespace {

Network braess_network() {
  return Network({"u", "a", "b", "v"}, {{"u-a", "u", "a"},
                                        {"u-b", "u", "b"},
                                        {"a-v", "a", "v"},
                                        {"b-v", "b", "v"},
                                        {"a-b", "a", "b"}});
}

FlowState single(std::vector<double> row) {
  FlowState f;
  f.type_edge_flow = {std::move(row)};
  f.recompute_loads();
  return f;
}

}  // namespace

TEST(DspEdge, LeafHasTwoNodesOneEdge) {
  auto r = dsp_edge("e1");
  EXPECT_EQ(r.kind(), DspRecipe::Kind::Leaf);
  EXPECT_EQ(r.leaf_count(), 1u);
  EXPECT_EQ(r.node_count(), 2u);
  auto net = Network::from_recipe(r);
  EXPECT_EQ(net.num_nodes(), 2u);
  EXPECT_EQ(net.num_edges(), 1u);
}

TEST(DspEdge, SingleEdgeHasOnePath) {
  auto net = Network::from_recipe(dsp_edge("e1"));
  EXPECT_EQ(enumerate_paths(net, "s", "t").paths.size(), 1u);
}

TEST(DspEdge, ReplayThenRebuildIsIdempotent) {
  auto r = dsp_series(dsp_edge("a"), dsp_parallel(dsp_edge("b"), dsp_edge("c")));
  auto net = Network::from_recipe(r);
  Network again(net.nodes(), net.edges(), net.certificate());
  EXPECT_EQ(again.edges(), net.edges());
  EXPECT_EQ(again.nodes(), net.nodes());
  EXPECT_TRUE(again.is_dsp());
}

TEST(DspCompose, ParallelOfTwoEdgesIsPigouTopology) {
  auto net = Network::from_recipe(dsp_parallel(dsp_edge("e1"), dsp_edge("e2")));
  EXPECT_EQ(net.num_nodes(), 2u);
  EXPECT_EQ(enumerate_paths(net, "s", "t").paths.size(), 2u);
}

TEST(DspCompose, SeriesOfTwoEdges) {
  auto r = dsp_series(dsp_edge("e1"), dsp_edge("e2"));
  EXPECT_EQ(r.node_count(), 3u);
  EXPECT_DOUBLE_EQ(r.path_count(), 1.0);
  auto net = Network::from_recipe(r);
  EXPECT_EQ(net.num_nodes(), 3u);
  EXPECT_EQ(enumerate_paths(net, "s", "t").paths.size(), 1u);
}

TEST(DspCompose, ParallelOfChainsGivesOnePathPerChain) {
  for (int q : {1, 2, 5, 9}) {
    auto chain = [](int k) {
      const auto p = std::to_string(k);
      return dsp_series(dsp_series(dsp_edge("x" + p), dsp_edge("y" + p)), dsp_edge("z" + p));
    };
    DspRecipe r = chain(0);
    for (int k = 1; k < q; ++k) r = dsp_parallel(r, chain(k));
    auto net = Network::from_recipe(r);
    EXPECT_EQ(enumerate_paths(net, "s", "t").paths.size(), static_cast<std::size_t>(q));
    EXPECT_EQ(net.num_edges(), static_cast<std::size_t>(3 * q));
  }
}

TEST(DspCompose, NodeCountLaws) {
  auto a = dsp_series(dsp_edge("a1"), dsp_edge("a2"));
  auto b = dsp_parallel(dsp_edge("b1"), dsp_series(dsp_edge("b2"), dsp_edge("b3")));
  EXPECT_EQ(dsp_series(a, b).node_count(), a.node_count() + b.node_count() - 1);
  EXPECT_EQ(dsp_parallel(a, b).node_count(), a.node_count() + b.node_count() - 2);
  EXPECT_DOUBLE_EQ(dsp_series(a, b).path_count(), a.path_count() * b.path_count());
  EXPECT_DOUBLE_EQ(dsp_parallel(a, b).path_count(), a.path_count() + b.path_count());
}

TEST(DspCertificate, MismatchedEdgeSetIsRejected) {
  auto r = dsp_parallel(dsp_edge("e1"), dsp_edge("e2"));
  EXPECT_THROW(Network({"s", "t"}, {{"e1", "s", "t"}, {"e3", "s", "t"}}, DspCertificate{r, "s", "t"}),
               std::invalid_argument);
  EXPECT_THROW(Network({"s", "t"}, {{"e1", "s", "t"}, {"e2", "t", "s"}}, DspCertificate{r, "s", "t"}),
               std::invalid_argument);
}

TEST(DspCertificate, CertificateWithRenamedInternalNodesIsAccepted) {
  auto r = dsp_series(dsp_edge("e1"), dsp_edge("e2"));
  Network net({"s", "mid", "t"}, {{"e1", "s", "mid"}, {"e2", "mid", "t"}}, DspCertificate{r, "s", "t"});
  EXPECT_TRUE(net.is_dsp());
}

TEST(Network, RejectsDanglingEndpointsAndDuplicates) {
  EXPECT_THROW(Network({"s", "t"}, {{"e", "s", "x"}}), std::invalid_argument);
  EXPECT_THROW(Network({"s", "t"}, {{"e", "s", "t"}, {"e", "s", "t"}}), std::invalid_argument);
  EXPECT_THROW(Network({"s", "s"}, {}), std::invalid_argument);
}

TEST(Network, ParallelEdgesAllowed) {
  Network net({"s", "t"}, {{"p", "s", "t"}, {"q", "s", "t"}, {"r", "s", "t"}});
  EXPECT_EQ(enumerate_paths(net, "s", "t").paths.size(), 3u);
}

TEST(Network, CycleDetection) {
  Network cyc({"a", "b"}, {{"ab", "a", "b"}, {"ba", "b", "a"}});
  EXPECT_FALSE(cyc.acyclic());
  EXPECT_TRUE(braess_network().acyclic());
}

TEST(EnumeratePaths, BraessHasThreePaths) {
  auto ids = enumerate_paths(braess_network(), "u", "v").as_ids(braess_network());
  std::vector<std::vector<std::string>> expected{
      {"u-a", "a-b", "b-v"}, {"u-a", "a-v"}, {"u-b", "b-v"}};
  EXPECT_EQ(ids, expected);
}

TEST(EnumeratePaths, CapRaisesPathExplosion) {
  // 2^6 paths through six parallel pairs in series.
  DspRecipe r = dsp_parallel(dsp_edge("a0"), dsp_edge("b0"));
  for (int k = 1; k < 6; ++k)
    r = dsp_series(r, dsp_parallel(dsp_edge("a" + std::to_string(k)), dsp_edge("b" + std::to_string(k))));
  auto net = Network::from_recipe(r);
  EXPECT_EQ(enumerate_paths(net, "s", "t", 64).paths.size(), 64u);
  EXPECT_THROW(enumerate_paths(net, "s", "t", 63), PathExplosion);
}

TEST(EnumeratePaths, RiskNetworkWithFourRoutesMatchesDfsOracle) {
  auto inst = build_risk_network({4, 3, 8.0}, 0.1);
  const auto& net = inst.network();
  const auto expected = oracle::all_paths(net.edges(), "s", "t");
  EXPECT_EQ(enumerate_paths(net, "s", "t").as_ids(net), expected);
  EXPECT_DOUBLE_EQ(oracle::count_paths(net.edges(), "s", "t"), static_cast<double>(expected.size()));
  // Frozen from the oracle: 4 direct routes, 4 + 3 + 2 + 1 mixed ones, and 5 entering via s'.
  EXPECT_EQ(expected.size(), 19u);
}

TEST(EnumeratePaths, IndependentOfNodeAndEdgeInsertionOrder) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int counter = 1;
    auto r = randinst::recipe(rng, 5, counter);
    auto net = Network::from_recipe(r);
    auto nodes = net.nodes();
    auto edges = net.edges();
    std::shuffle(nodes.begin(), nodes.end(), rng);
    std::shuffle(edges.begin(), edges.end(), rng);
    Network shuffled(nodes, edges);
    EXPECT_EQ(enumerate_paths(net, "s", "t").as_ids(net),
              enumerate_paths(shuffled, "s", "t").as_ids(shuffled));
  }
}

TEST(DspProperty, RandomRecipesObeyCountingLawsAndEveryEdgeIsUsable) {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 200; ++trial) {
    int counter = 1;
    auto r = randinst::recipe(rng, 8, counter, 0.35);
    auto net = Network::from_recipe(r);
    ASSERT_TRUE(net.acyclic());
    EXPECT_EQ(r.leaf_count(), net.num_edges());
    EXPECT_EQ(r.node_count(), net.num_nodes());
    EXPECT_DOUBLE_EQ(r.path_count(), oracle::count_paths(net.edges(), "s", "t"));
    const auto s = net.node_index("s"), t = net.node_index("t");
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
      EXPECT_TRUE(net.reachable(s, net.edge_from(e)));
      EXPECT_TRUE(net.reachable(net.edge_to(e), t));
    }
  }
}

TEST(ValidateFlow, PigouEvenSplitIsValid) {
  auto net = Network::from_recipe(dsp_parallel(dsp_edge("e1"), dsp_edge("e2")));
  auto rep = validate_flow(net, {{"s", "t", 1.0}}, single({0.5, 0.5}));
  EXPECT_TRUE(rep.valid);
  EXPECT_TRUE(rep.violations.empty());
}

TEST(ValidateFlow, ExcessMassIsReported) {
  auto net = Network::from_recipe(dsp_parallel(dsp_edge("e1"), dsp_edge("e2")));
  auto rep = validate_flow(net, {{"s", "t", 1.0}}, single({0.6, 0.6}));
  EXPECT_FALSE(rep.valid);
  ASSERT_FALSE(rep.violations.empty());
  EXPECT_NE(rep.violations.front().find("mass"), std::string::npos);
}

TEST(ValidateFlow, BraessZigzagIsValid) {
  auto net = braess_network();
  // edges: u-a, u-b, a-v, b-v, a-b
  auto rep = validate_flow(net, {{"u", "v", 1.0}}, single({1.0, 0.0, 0.0, 1.0, 1.0}));
  EXPECT_TRUE(rep.valid);
}

TEST(ValidateFlow, ConservationNegativityAndLoadMismatch) {
  auto net = braess_network();
  auto broken = single({1.0, 0.0, 0.5, 0.0, 0.0});
  auto rep = validate_flow(net, {{"u", "v", 1.0}}, broken);
  EXPECT_FALSE(rep.valid);
  EXPECT_TRUE(std::any_of(rep.violations.begin(), rep.violations.end(), [](const std::string& v) {
    return v.find("conservation") != std::string::npos;
  }));
  auto neg = single({1.0, 0.0, 1.0, -0.1, 0.0});
  EXPECT_FALSE(validate_flow(net, {{"u", "v", 1.0}}, neg).valid);
  auto mismatch = single({1.0, 0.0, 1.0, 0.0, 0.0});
  mismatch.edge_load[0] += 1e-6;
  EXPECT_FALSE(validate_flow(net, {{"u", "v", 1.0}}, mismatch).valid);
}

TEST(DecomposePaths, RecoversPathFlows) {
  auto net = braess_network();
  std::vector<double> f{0.7, 0.3, 0.2, 0.8, 0.5};
  auto paths = decompose_paths(net, net.node_index("u"), net.node_index("v"), f);
  double total = 0.0;
  std::vector<double> rebuilt(net.num_edges(), 0.0);
  for (const auto& p : paths) {
    total += p.flow;
    for (auto e : p.edges) rebuilt[e] += p.flow;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (std::size_t e = 0; e < f.size(); ++e) EXPECT_NEAR(rebuilt[e], f[e], 1e-12);
}
