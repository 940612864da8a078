#include "cgbias/flowsolve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "path_engine.hpp"

namespace cgbias {

namespace {

void check_edge_refs(const Network& net, const std::map<std::string, CostModel>& m,
                     const std::string& what) {
  for (const auto& [id, cost] : m)
    if (!net.find_edge(id)) throw std::invalid_argument(what + " names unknown edge '" + id + "'");
}

}  // namespace

Instance::Instance(Network network, std::vector<CostModel> base_costs, std::vector<AgentType> types,
                   std::string name)
    : network_(std::move(network)),
      costs_(std::move(base_costs)),
      types_(std::move(types)),
      name_(std::move(name)) {
  if (costs_.size() != network_.num_edges())
    throw std::invalid_argument("expected one cost per edge");
  if (types_.empty()) throw std::invalid_argument("instance needs at least one agent type");
  kappa_ok_.assign(types_.size(), 1);
  for (std::size_t i = 0; i < types_.size(); ++i) {
    const auto& t = types_[i];
    const std::string tag = "type " + std::to_string(i);
    if (!std::isfinite(t.mass) || t.mass < 0.0) throw std::invalid_argument(tag + ": mass must be >= 0");
    auto s = network_.find_node(t.source);
    auto v = network_.find_node(t.target);
    if (!s || !v) throw std::invalid_argument(tag + ": unknown terminal");
    if (*s == *v) throw std::invalid_argument(tag + ": source equals target");
    if (!network_.reachable(*s, *v))
      throw NoPath(tag + ": target unreachable from source");
    if (auto o = t.bias.get<OverrideBias>()) check_edge_refs(network_, o->costs, tag + " override");
    if (auto m = t.bias.get<MeanVarBias>()) {
      check_edge_refs(network_, m->per_edge, tag + " variance");
      if (m->kappa) {
        bool ok = true;
        for (std::size_t e = 0; e < costs_.size() && ok; ++e) {
          auto it = m->per_edge.find(network_.edge(e).id);
          const CostModel& var = it != m->per_edge.end() ? it->second : m->variance;
          for (int k = 0; k <= 100 && ok; ++k) {
            const double x = 0.1 * k;
            if (var.eval(x) > *m->kappa * costs_[e].eval(x) + 1e-12) ok = false;
          }
        }
        kappa_ok_[i] = ok ? 1 : 0;
        if (!ok)
          warnings_.push_back(tag + ": declared variance bound does not hold; treating it as unbounded");
      }
    }
    perceived(i);  // rejects bias/cost combinations that cannot be formed
  }
}

double Instance::total_mass() const {
  double n = 0.0;
  for (const auto& t : types_) n += t.mass;
  return n;
}

bool Instance::symmetric() const {
  return std::all_of(types_.begin(), types_.end(), [&](const AgentType& t) {
    return t.source == types_.front().source && t.target == types_.front().target;
  });
}

bool Instance::uniform_bias() const {
  return std::all_of(types_.begin(), types_.end(),
                     [&](const AgentType& t) { return t.bias == types_.front().bias; });
}

std::vector<Demand> Instance::demands() const {
  std::vector<Demand> d;
  for (const auto& t : types_) d.push_back({t.source, t.target, t.mass});
  return d;
}

std::vector<BiasedCost> Instance::perceived(std::size_t i) const {
  std::vector<BiasedCost> out;
  out.reserve(costs_.size());
  for (std::size_t e = 0; e < costs_.size(); ++e)
    out.push_back(apply_bias(costs_[e], types_.at(i).bias, network_.edge(e).id));
  return out;
}

Instance Instance::unbiased() const {
  auto types = types_;
  for (auto& t : types) t.bias = BiasSpec::identity();
  return Instance(network_, costs_, std::move(types), name_);
}

NotConverged::NotConverged(std::string what, SolveResult best)
    : std::runtime_error(std::move(what)), best_(std::move(best)) {}

namespace {

void require_valid(const Instance& inst, const FlowState& flow) {
  const double tol = 1e-9 * std::max(1.0, inst.total_mass());
  auto report = validate_flow(inst.network(), inst.demands(), flow, tol);
  if (!report.valid) throw std::invalid_argument("invalid flow: " + report.violations.front());
}

std::vector<double> loads_of(const FlowState& flow, std::size_t m) {
  std::vector<double> load(m, 0.0);
  for (const auto& row : flow.type_edge_flow)
    for (std::size_t e = 0; e < m; ++e) load[e] += row[e];
  return load;
}

std::vector<detail::Commodity> commodities(const Instance& inst, bool shared_costs) {
  std::vector<detail::Commodity> out;
  const auto& net = inst.network();
  for (std::size_t i = 0; i < inst.num_types(); ++i) {
    const auto& t = inst.type(i);
    if (t.mass <= 0.0) continue;
    out.push_back({i, net.node_index(t.source), net.node_index(t.target), t.mass,
                   shared_costs ? 0 : i});
  }
  return out;
}

SolveResult run_restarts(const Instance& inst, const std::vector<std::vector<BiasedCost>>& cost_sets,
                         bool potential, const SolverConfig& cfg) {
  if (cfg.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  const auto com = commodities(inst, potential);
  std::mt19937_64 rng(cfg.seed);
  std::optional<SolveResult> chosen;
  double chosen_cost = -INFINITY;
  std::optional<SolveResult> fallback;
  double fallback_metric = INFINITY;
  for (int r = 0; r < cfg.restarts; ++r) {
    detail::PathEngine engine(inst.network(), cost_sets, com, potential);
    if (r == 0)
      engine.init_shortest();
    else
      engine.init_random(rng);
    auto cert = engine.run(cfg);
    if (cert.converged) {
      SolveResult res{engine.state(inst.num_types()), std::move(cert)};
      const double sc = social_cost(inst, res.flow);
      if (sc > chosen_cost) {
        chosen_cost = sc;
        chosen = std::move(res);
      }
    } else if (engine.best_metric() < fallback_metric) {
      fallback_metric = engine.best_metric();
      auto best_cert = cert;
      fallback = SolveResult{engine.best_state(), std::move(best_cert)};
    }
  }
  if (chosen) return *chosen;
  std::ostringstream msg;
  msg << "solver did not converge within " << cfg.max_iters << " iterations (best residual "
      << fallback_metric << ")";
  throw NotConverged(msg.str(), std::move(*fallback));
}

}  // namespace

double social_cost(const Instance& inst, const FlowState& flow) {
  require_valid(inst, flow);
  const auto load = loads_of(flow, inst.network().num_edges());
  double sc = 0.0;
  for (std::size_t e = 0; e < load.size(); ++e) sc += load[e] * inst.cost(e).eval(load[e]);
  return sc;
}

double per_type_cost(const Instance& inst, const FlowState& flow, std::size_t i) {
  if (i >= inst.num_types()) throw std::out_of_range("type index out of range");
  const auto load = loads_of(flow, inst.network().num_edges());
  double c = 0.0;
  for (std::size_t e = 0; e < load.size(); ++e)
    c += flow.type_edge_flow.at(i)[e] * inst.cost(e).eval(load[e]);
  return c;
}

double vi_residual(const Instance& inst, const FlowState& flow) {
  require_valid(inst, flow);
  const auto& net = inst.network();
  const auto load = loads_of(flow, net.num_edges());
  double res = 0.0;
  for (std::size_t i = 0; i < inst.num_types(); ++i) {
    const auto& t = inst.type(i);
    if (t.mass <= 0.0) continue;
    const auto pc = inst.perceived(i);
    std::vector<double> w(net.num_edges());
    double paid = 0.0;
    for (std::size_t e = 0; e < w.size(); ++e) {
      w[e] = pc[e].eval(load[e]);
      paid += w[e] * flow.type_edge_flow[i][e];
    }
    auto sp = detail::shortest_path(net, w, net.node_index(t.source), net.node_index(t.target));
    res += paid - t.mass * sp.cost;
  }
  return std::max(0.0, res);
}

double path_cost_spread(const Instance& inst, const FlowState& flow) {
  const auto& net = inst.network();
  const auto load = loads_of(flow, net.num_edges());
  double spread = 0.0;
  for (std::size_t i = 0; i < inst.num_types(); ++i) {
    const auto& t = inst.type(i);
    if (t.mass <= 0.0) continue;
    const auto pc = inst.perceived(i);
    std::vector<double> w(net.num_edges());
    for (std::size_t e = 0; e < w.size(); ++e) w[e] = pc[e].eval(load[e]);
    const auto s = net.node_index(t.source), v = net.node_index(t.target);
    const auto sp = detail::shortest_path(net, w, s, v);
    auto paths = i < flow.type_paths.size() && !flow.type_paths[i].empty()
                     ? flow.type_paths[i]
                     : decompose_paths(net, s, v, flow.type_edge_flow[i]);
    for (const auto& p : paths) {
      if (p.flow <= 0.0) continue;
      double c = 0.0;
      for (auto e : p.edges) c += w[e];
      spread = std::max(spread, c - sp.cost);
    }
  }
  return spread;
}

SolveResult solve_equilibrium_uniform(const Instance& inst, const SolverConfig& cfg) {
  if (!inst.uniform_bias()) throw std::invalid_argument("types do not share one bias");
  auto pc = inst.perceived(0);
  for (const auto& c : pc)
    if (!c.integrable())
      throw std::invalid_argument("potential-based solver needs integrable perceived costs");
  return run_restarts(inst, {std::move(pc)}, true, cfg);
}

SolveResult solve_equilibrium_multitype(const Instance& inst, const SolverConfig& cfg) {
  std::vector<std::vector<BiasedCost>> sets;
  for (std::size_t i = 0; i < inst.num_types(); ++i) sets.push_back(inst.perceived(i));
  return run_restarts(inst, sets, false, cfg);
}

SolveResult solve_equilibrium(const Instance& inst, const SolverConfig& cfg) {
  if (inst.uniform_bias()) {
    const auto pc = inst.perceived(0);
    if (std::all_of(pc.begin(), pc.end(), [](const BiasedCost& c) { return c.integrable(); }))
      return solve_equilibrium_uniform(inst, cfg);
  }
  return solve_equilibrium_multitype(inst, cfg);
}

OptimumResult solve_social_optimum(const Instance& inst, const SolverConfig& cfg) {
  std::vector<BiasedCost> marginal;
  for (std::size_t e = 0; e < inst.base_costs().size(); ++e) {
    if (!inst.cost(e).differentiable())
      throw std::invalid_argument("social optimum needs differentiable true costs");
    marginal.push_back(apply_bias(inst.cost(e), BiasSpec::tax(1.0)));
  }
  auto once = cfg;
  once.restarts = 1;
  auto res = run_restarts(inst, {std::move(marginal)}, true, once);
  const double sc = social_cost(inst, res.flow);
  return {std::move(res.flow), sc, std::move(res.certificate)};
}

Instance derive_homogeneous(const Instance& inst, std::size_t i, bool keep_bias) {
  const auto& t = inst.type(i);
  AgentType only{t.source, t.target, inst.total_mass(), keep_bias ? t.bias : BiasSpec::identity()};
  std::string name = inst.name() + (keep_bias ? "/biased-" : "/true-") + std::to_string(i);
  return Instance(inst.network(), inst.base_costs(), {only}, std::move(name));
}

}  // namespace cgbias
