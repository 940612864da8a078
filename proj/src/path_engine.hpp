#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "cgbias/costfun.hpp"
#include "cgbias/flowsolve.hpp"
#include "cgbias/netgraph.hpp"

namespace cgbias::detail {

struct ShortestPath {
  std::vector<std::size_t> edges;
  double cost = 0.0;
};

// Cheapest source-target path under nonnegative weights. Among near-ties the
// path with the smallest edge-rank sequence wins.
ShortestPath shortest_path(const Network& net, const std::vector<double>& weight,
                           std::size_t source, std::size_t target);

struct Commodity {
  std::size_t type = 0;  // index in the caller's type list
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
  std::size_t cost_set = 0;
};

// Column-generation solver over path flows. In potential mode all commodities
// move together along one Frank-Wolfe direction; otherwise each commodity takes
// its own best-response step.
class PathEngine {
 public:
  PathEngine(const Network& net, std::vector<std::vector<BiasedCost>> cost_sets,
             std::vector<Commodity> commodities, bool potential);

  void init_shortest();
  void init_random(std::mt19937_64& rng);

  // Iterates until both the residual and the used-path spread are within tolerance.
  EquilibriumCertificate run(const SolverConfig& cfg);

  FlowState state(std::size_t num_types) const;
  const FlowState& best_state() const { return best_; }
  double best_metric() const { return best_metric_; }

 private:
  struct Column {
    std::vector<std::size_t> edges;
    double mass = 0.0;
  };

  double edge_cost(std::size_t k, std::size_t e, double x) const;
  double path_cost(std::size_t k, const std::vector<std::size_t>& edges) const;
  ShortestPath cheapest(std::size_t k) const;
  std::size_t add_column(std::size_t k, const std::vector<std::size_t>& edges);
  void rebuild_loads();
  void frank_wolfe_step(const std::vector<ShortestPath>& best, int iter, StepRule rule);
  bool equalize(std::size_t k, std::size_t from, std::size_t to);
  double sweep(std::size_t k, double target_spread);
  void measure(double& residual, double& spread, std::vector<ShortestPath>* best) const;

  const Network& net_;
  std::vector<std::vector<BiasedCost>> cost_sets_;
  std::vector<Commodity> com_;
  bool potential_;
  std::vector<std::vector<Column>> cols_;
  std::vector<std::vector<double>> flow_;  // [commodity][edge]
  std::vector<double> load_;
  FlowState best_;
  double best_metric_ = INFINITY;
  std::size_t num_types_ = 0;
};

}  // namespace cgbias::detail
