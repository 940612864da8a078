#pragma once
// Seeded generators for property tests and the acceptance suite.

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "cgbias/costfun.hpp"
#include "cgbias/flowsolve.hpp"
#include "cgbias/netgraph.hpp"

namespace randinst {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
inline int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline std::string edge_name(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "e%03d", k);
  return buf;
}

// Recipe of depth <= max_depth; `counter` numbers the leaves.
inline cgbias::DspRecipe recipe(Rng& rng, int max_depth, int& counter, double leaf_bias = 0.3) {
  if (max_depth == 0 || uniform(rng, 0.0, 1.0) < leaf_bias) return cgbias::dsp_edge(edge_name(counter++));
  auto a = recipe(rng, max_depth - 1, counter, leaf_bias);
  auto b = recipe(rng, max_depth - 1, counter, leaf_bias);
  return uniform(rng, 0.0, 1.0) < 0.5 ? cgbias::dsp_series(std::move(a), std::move(b))
                                      : cgbias::dsp_parallel(std::move(a), std::move(b));
}

// Nonnegative coefficients up to `degree`; constant with probability p_const, otherwise
// strictly increasing.
inline cgbias::CostModel poly(Rng& rng, int degree, double p_const = 0.15) {
  std::vector<double> a(degree + 1, 0.0);
  a[0] = uniform(rng, 0.0, 2.0);
  if (degree == 0 || uniform(rng, 0.0, 1.0) < p_const) return cgbias::CostModel::polynomial(a);
  bool any = false;
  for (int k = 1; k <= degree; ++k) {
    if (uniform(rng, 0.0, 1.0) < 0.7) {
      a[k] = uniform(rng, 0.1, 2.0);
      any = true;
    }
  }
  if (!any) a[pick(rng, 1, degree)] = uniform(rng, 0.1, 2.0);
  return cgbias::CostModel::polynomial(a);
}

inline cgbias::BiasSpec tax_or_pessimism(Rng& rng, bool allow_pessimism) {
  if (allow_pessimism && uniform(rng, 0.0, 1.0) < 0.5) return cgbias::BiasSpec::pessimism(uniform(rng, 1.0, 4.0));
  return cgbias::BiasSpec::tax(uniform(rng, 0.0, 3.0));
}

struct DspOptions {
  int max_depth = 6;
  int max_degree = 3;
  int min_types = 2;
  int max_types = 4;
  bool pessimism = true;
};

// Symmetric s->t instance on a random DSP network with 2-4 biased types of total mass 1.
inline cgbias::Instance dsp_instance(Rng& rng, const DspOptions& o = {}) {
  int counter = 1;
  auto r = recipe(rng, o.max_depth, counter);
  auto net = cgbias::Network::from_recipe(r, "s", "t");
  std::vector<cgbias::CostModel> costs;
  for (std::size_t e = 0; e < net.num_edges(); ++e) costs.push_back(poly(rng, pick(rng, 1, o.max_degree)));
  const int n = pick(rng, o.min_types, o.max_types);
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) total += (x = uniform(rng, 0.2, 1.0));
  std::vector<cgbias::AgentType> types;
  for (int i = 0; i < n; ++i)
    types.push_back({"s", "t", w[i] / total, tax_or_pessimism(rng, o.pessimism)});
  return cgbias::Instance(std::move(net), std::move(costs), std::move(types), "random-dsp");
}

}  // namespace randinst
