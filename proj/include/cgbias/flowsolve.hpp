#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgbias/costfun.hpp"
#include "cgbias/netgraph.hpp"

namespace cgbias {

struct AgentType {
  std::string source;
  std::string target;
  double mass = 1.0;
  BiasSpec bias;
};

// A network with true edge costs and a population of agent types.
class Instance {
 public:
  Instance() = default;
  // Validates sizes, masses, terminals and connectivity; throws std::invalid_argument.
  Instance(Network network, std::vector<CostModel> base_costs, std::vector<AgentType> types,
           std::string name = {});

  const Network& network() const { return network_; }
  const std::vector<CostModel>& base_costs() const { return costs_; }
  const CostModel& cost(std::size_t e) const { return costs_.at(e); }
  const std::vector<AgentType>& types() const { return types_; }
  const AgentType& type(std::size_t i) const { return types_.at(i); }
  std::size_t num_types() const { return types_.size(); }
  const std::string& name() const { return name_; }
  double total_mass() const;

  bool symmetric() const;
  bool uniform_bias() const;
  std::vector<Demand> demands() const;
  // Per-edge perceived costs of type i.
  std::vector<BiasedCost> perceived(std::size_t i) const;
  // Same instance with every bias replaced by the identity.
  Instance unbiased() const;
  // Non-fatal remarks gathered during validation (e.g. a declared variance bound that fails).
  const std::vector<std::string>& warnings() const { return warnings_; }
  // False when type i declares a variance bound that the instance violates.
  bool variance_bound_holds(std::size_t i) const { return kappa_ok_.at(i) != 0; }

 private:
  Network network_;
  std::vector<CostModel> costs_;
  std::vector<AgentType> types_;
  std::string name_;
  std::vector<std::string> warnings_;
  std::vector<char> kappa_ok_;
};

enum class StepRule { ExactLineSearch, Harmonic };

struct SolverConfig {
  double tolerance = 1e-8;
  int max_iters = 5000;
  StepRule step_rule = StepRule::ExactLineSearch;
  int restarts = 1;
  std::uint64_t seed = 0;
};

struct EquilibriumCertificate {
  double vi_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double per_type_path_cost_spread = 0.0;
  std::vector<double> residual_trajectory;
};

struct SolveResult {
  FlowState flow;
  EquilibriumCertificate certificate;
};

struct OptimumResult {
  FlowState flow;
  double social_cost = 0.0;
  EquilibriumCertificate certificate;
};

class NotConverged : public std::runtime_error {
 public:
  NotConverged(std::string what, SolveResult best);
  const SolveResult& best() const { return best_; }

 private:
  SolveResult best_;
};

class NoPath : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double social_cost(const Instance& inst, const FlowState& flow);
double per_type_cost(const Instance& inst, const FlowState& flow, std::size_t i);
// Sum of perceived cost paid minus the cheapest perceived alternative at frozen loads.
double vi_residual(const Instance& inst, const FlowState& flow);
// Largest gap between a used path's perceived cost and its commodity's cheapest path.
double path_cost_spread(const Instance& inst, const FlowState& flow);

SolveResult solve_equilibrium_uniform(const Instance& inst, const SolverConfig& cfg = {});
SolveResult solve_equilibrium_multitype(const Instance& inst, const SolverConfig& cfg = {});
// Uniform solver when all types share a bias without table costs, multitype otherwise.
SolveResult solve_equilibrium(const Instance& inst, const SolverConfig& cfg = {});
OptimumResult solve_social_optimum(const Instance& inst, const SolverConfig& cfg = {});

// Single-type instance carrying all the mass on type i's terminals, with either
// type i's bias or the identity.
Instance derive_homogeneous(const Instance& inst, std::size_t i, bool keep_bias);

}  // namespace cgbias
