#include "path_engine.hpp"

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <cmath>
#include <limits>
#include <queue>

namespace cgbias::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distance from every node to the target.
std::vector<double> distance_to(const Network& net, const std::vector<double>& w,
                                std::size_t target) {
  std::vector<double> dt(net.num_nodes(), kInf);
  dt[target] = 0.0;
  if (net.acyclic()) {
    const auto& topo = net.topological_order();
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      const auto x = *it;
      if (x == target) continue;
      for (auto e : net.out_edges(x)) dt[x] = std::min(dt[x], w[e] + dt[net.edge_to(e)]);
    }
    return dt;
  }
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.push({0.0, target});
  while (!heap.empty()) {
    auto [d, y] = heap.top();
    heap.pop();
    if (d > dt[y]) continue;
    for (auto e : net.in_edges(y)) {
      const auto x = net.edge_from(e);
      const double nd = d + w[e];
      if (nd < dt[x]) {
        dt[x] = nd;
        heap.push({nd, x});
      }
    }
  }
  return dt;
}

}  // namespace

ShortestPath shortest_path(const Network& net, const std::vector<double>& w, std::size_t source,
                           std::size_t target) {
  const auto dt = distance_to(net, w, target);
  if (!std::isfinite(dt[source]))
    throw NoPath("no path from " + net.nodes()[source] + " to " + net.nodes()[target]);
  ShortestPath sp;
  std::vector<char> seen(net.num_nodes(), 0);
  auto x = source;
  seen[x] = 1;
  while (x != target) {
    double best = kInf;
    for (auto e : net.out_edges(x)) {
      const auto y = net.edge_to(e);
      if (!seen[y]) best = std::min(best, w[e] + dt[y]);
    }
    const double slack = 1e-12 * std::max(1.0, std::abs(best));
    std::size_t pick = SIZE_MAX;
    for (auto e : net.out_edges(x)) {  // rank order
      const auto y = net.edge_to(e);
      if (!seen[y] && w[e] + dt[y] <= best + slack) {
        pick = e;
        break;
      }
    }
    if (pick == SIZE_MAX) throw NoPath("shortest-path walk got stuck");
    sp.edges.push_back(pick);
    sp.cost += w[pick];
    x = net.edge_to(pick);
    seen[x] = 1;
  }
  return sp;
}

PathEngine::PathEngine(const Network& net, std::vector<std::vector<BiasedCost>> cost_sets,
                       std::vector<Commodity> commodities, bool potential)
    : net_(net),
      cost_sets_(std::move(cost_sets)),
      com_(std::move(commodities)),
      potential_(potential),
      cols_(com_.size()),
      flow_(com_.size(), std::vector<double>(net.num_edges(), 0.0)),
      load_(net.num_edges(), 0.0) {
  for (const auto& c : com_) num_types_ = std::max(num_types_, c.type + 1);
}

double PathEngine::edge_cost(std::size_t k, std::size_t e, double x) const {
  return cost_sets_[com_[k].cost_set][e].eval(std::max(0.0, x));
}

double PathEngine::path_cost(std::size_t k, const std::vector<std::size_t>& edges) const {
  double c = 0.0;
  for (auto e : edges) c += edge_cost(k, e, load_[e]);
  return c;
}

ShortestPath PathEngine::cheapest(std::size_t k) const {
  std::vector<double> w(net_.num_edges());
  for (std::size_t e = 0; e < w.size(); ++e) w[e] = edge_cost(k, e, load_[e]);
  auto sp = shortest_path(net_, w, com_[k].source, com_[k].target);
  sp.cost = path_cost(k, sp.edges);
  return sp;
}

std::size_t PathEngine::add_column(std::size_t k, const std::vector<std::size_t>& edges) {
  auto& cols = cols_[k];
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (cols[j].edges == edges) return j;
  cols.push_back({edges, 0.0});
  return cols.size() - 1;
}

void PathEngine::rebuild_loads() {
  std::fill(load_.begin(), load_.end(), 0.0);
  for (std::size_t k = 0; k < com_.size(); ++k) {
    auto& f = flow_[k];
    std::fill(f.begin(), f.end(), 0.0);
    for (const auto& c : cols_[k])
      if (c.mass > 0.0)
        for (auto e : c.edges) f[e] += c.mass;
    for (std::size_t e = 0; e < f.size(); ++e) load_[e] += f[e];
  }
}

void PathEngine::init_shortest() {
  std::fill(load_.begin(), load_.end(), 0.0);
  for (std::size_t k = 0; k < com_.size(); ++k) {
    cols_[k].clear();
    auto sp = cheapest(k);
    cols_[k].push_back({sp.edges, com_[k].mass});
  }
  rebuild_loads();
}

void PathEngine::init_random(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::fill(load_.begin(), load_.end(), 0.0);
  for (std::size_t k = 0; k < com_.size(); ++k) {
    cols_[k].clear();
    std::vector<double> share;
    for (int draw = 0; draw < 3; ++draw) {
      std::vector<double> w(net_.num_edges());
      for (std::size_t e = 0; e < w.size(); ++e) w[e] = unit(rng);
      auto sp = shortest_path(net_, w, com_[k].source, com_[k].target);
      auto j = add_column(k, sp.edges);
      share.resize(cols_[k].size(), 0.0);
      share[j] += expo(rng);
    }
    double total = 0.0;
    for (double s : share) total += s;
    for (std::size_t j = 0; j < cols_[k].size(); ++j)
      cols_[k][j].mass = com_[k].mass * share[j] / total;
  }
  rebuild_loads();
}

void PathEngine::measure(double& residual, double& spread, std::vector<ShortestPath>* best) const {
  residual = 0.0;
  spread = 0.0;
  for (std::size_t k = 0; k < com_.size(); ++k) {
    auto sp = cheapest(k);
    for (const auto& c : cols_[k]) {
      if (c.mass <= 0.0) continue;
      const double gap = std::max(0.0, path_cost(k, c.edges) - sp.cost);
      residual += c.mass * gap;
      spread = std::max(spread, gap);
    }
    if (best) best->push_back(std::move(sp));
  }
}

void PathEngine::frank_wolfe_step(const std::vector<ShortestPath>& best, int iter, StepRule rule) {
  const std::size_t m = net_.num_edges();
  auto apply = [&](std::size_t k, double w, std::size_t target_col) {
    if (w <= 0.0) return;
    for (auto& c : cols_[k]) c.mass *= (1.0 - w);
    cols_[k][target_col].mass += w * com_[k].mass;
  };
  if (potential_) {
    // One direction for all commodities; exact step on the shared potential.
    std::vector<double> target(m, 0.0);
    for (std::size_t k = 0; k < com_.size(); ++k)
      for (auto e : best[k].edges) target[e] += com_[k].mass;
    std::vector<std::size_t> touched;
    std::vector<double> dir(m, 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      dir[e] = target[e] - load_[e];
      if (dir[e] != 0.0) touched.push_back(e);
    }
    double w = 2.0 / (iter + 2.0);
    if (rule == StepRule::ExactLineSearch) {
      const auto& cs = cost_sets_[com_.front().cost_set];
      auto slope = [&](double t) {
        double g = 0.0;
        for (auto e : touched) g += cs[e].eval(std::max(0.0, load_[e] + t * dir[e])) * dir[e];
        return g;
      };
      w = 0.0;
      if (slope(0.0) < 0.0) {
        if (slope(1.0) <= 0.0) {
          w = 1.0;
        } else {
          double lo = 0.0, hi = 1.0;
          for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) < 0.0 ? lo : hi) = mid;
          }
          w = 0.5 * (lo + hi);
        }
      }
    }
    for (std::size_t k = 0; k < com_.size(); ++k) apply(k, w, add_column(k, best[k].edges));
    rebuild_loads();
    return;
  }
  for (std::size_t k = 0; k < com_.size(); ++k) {
    const auto j = add_column(k, best[k].edges);
    double w = 2.0 / (iter + 2.0);
    if (rule == StepRule::ExactLineSearch) {
      std::vector<double> dir(m, 0.0);
      for (auto e : best[k].edges) dir[e] += com_[k].mass;
      std::vector<std::size_t> touched;
      for (std::size_t e = 0; e < m; ++e) {
        dir[e] -= flow_[k][e];
        if (dir[e] != 0.0) touched.push_back(e);
      }
      auto slope = [&](double t) {
        double g = 0.0;
        for (auto e : touched) g += edge_cost(k, e, load_[e] + t * dir[e]) * dir[e];
        return g;
      };
      w = 0.0;
      if (slope(0.0) < 0.0) {
        if (slope(1.0) <= 0.0) {
          w = 1.0;
        } else {
          double lo = 0.0, hi = 1.0;
          for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) < 0.0 ? lo : hi) = mid;
          }
          w = 0.5 * (lo + hi);
        }
      }
    }
    apply(k, w, j);
    rebuild_loads();
  }
}

// Moves mass from column `from` to column `to` until their costs meet, or
// until `from` is empty. Returns true if anything moved.
bool PathEngine::equalize(std::size_t k, std::size_t from, std::size_t to) {
  auto& src = cols_[k][from];
  auto& dst = cols_[k][to];
  if (src.mass <= 0.0) return false;
  std::vector<std::size_t> a = src.edges, b = dst.edges;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> only_src, only_dst;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_src));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_dst));
  auto gap = [&](double t) {
    double g = 0.0;
    for (auto e : only_dst) g += edge_cost(k, e, load_[e] + t);
    for (auto e : only_src) g -= edge_cost(k, e, load_[e] - t);
    return g;
  };
  double f_lo = gap(0.0);
  if (f_lo >= 0.0) return false;
  const double cap = src.mass;
  double t = cap;
  double f_hi = gap(cap);
  if (f_hi > 0.0) {
    // Illinois variant of regula falsi: keeps the bracket, converges superlinearly.
    double lo = 0.0, hi = cap;
    int side = 0;
    for (int it = 0; it < 100; ++it) {
      double mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double f = gap(mid);
      if (f < 0.0) {
        lo = mid;
        f_lo = f;
        if (side == -1) f_hi *= 0.5;
        side = -1;
      } else if (f > 0.0) {
        hi = mid;
        f_hi = f;
        if (side == 1) f_lo *= 0.5;
        side = 1;
      } else {
        lo = hi = mid;
        break;
      }
      if (hi - lo <= 1e-15 * hi) break;
    }
    t = 0.5 * (lo + hi);
  }
  if (t <= 0.0) return false;
  for (auto e : only_dst) {
    load_[e] += t;
    flow_[k][e] += t;
  }
  for (auto e : only_src) {
    load_[e] = std::max(0.0, load_[e] - t);
    flow_[k][e] = std::max(0.0, flow_[k][e] - t);
  }
  if (t >= cap) {
    src.mass = 0.0;
  } else {
    src.mass -= t;
  }
  dst.mass += t;
  return true;
}

// Pairwise sweeps toward the cheapest column; returns the remaining spread.
double PathEngine::sweep(std::size_t k, double target_spread) {
  auto& cols = cols_[k];
  double spread = kInf;
  for (int pass = 0; pass < 30; ++pass) {
    std::vector<double> cost(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) cost[j] = path_cost(k, cols[j].edges);
    std::size_t q = 0;
    for (std::size_t j = 1; j < cols.size(); ++j)
      if (cost[j] < cost[q]) q = j;
    spread = 0.0;
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (cols[j].mass > 0.0) spread = std::max(spread, cost[j] - cost[q]);
    if (spread <= target_spread) break;
    bool moved = false;
    double cq = cost[q];
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j == q || cols[j].mass <= 0.0 || cost[j] - cq <= target_spread) continue;
      if (path_cost(k, cols[j].edges) - cq > target_spread && equalize(k, j, q)) {
        moved = true;
        cq = path_cost(k, cols[q].edges);
      }
    }
    if (!moved) break;
  }
  return spread;
}

EquilibriumCertificate PathEngine::run(const SolverConfig& cfg) {
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  EquilibriumCertificate cert;
  for (int iter = 0;; ++iter) {
    double residual = 0.0, spread = 0.0;
    std::vector<ShortestPath> best;
    measure(residual, spread, &best);
    cert.residual_trajectory.push_back(residual);
    cert.vi_residual = residual;
    cert.per_type_path_cost_spread = spread;
    cert.iterations = iter;
    const double metric = std::max(residual, spread);
    if (metric < 0.5 * best_metric_ || metric <= cfg.tolerance) {
      best_metric_ = metric;
      best_ = state(num_types_);
    }
    if (residual <= cfg.tolerance && spread <= cfg.tolerance) {
      cert.converged = true;
      return cert;
    }
    if (iter >= cfg.max_iters) return cert;
    frank_wolfe_step(best, iter, cfg.step_rule);
    for (std::size_t k = 0; k < com_.size(); ++k) add_column(k, best[k].edges);
    // Block sweeps; several rounds because commodities interact through shared edges.
    // Early iterations only need rough balance; tighten as the residual falls.
    const double target = std::max(0.01 * cfg.tolerance, 1e-3 * metric);
    for (int round = 0; round < 8; ++round) {
      double worst = 0.0;
      for (std::size_t k = 0; k < com_.size(); ++k) worst = std::max(worst, sweep(k, target));
      if (worst <= target) break;
    }
    rebuild_loads();
  }
}

FlowState PathEngine::state(std::size_t num_types) const {
  const std::size_t m = net_.num_edges();
  FlowState s = FlowState::zeros(num_types, m);
  for (std::size_t k = 0; k < com_.size(); ++k) {
    const auto t = com_[k].type;
    for (const auto& c : cols_[k]) {
      if (c.mass <= 0.0) continue;
      for (auto e : c.edges) s.type_edge_flow[t][e] += c.mass;
      s.type_paths[t].push_back({c.edges, c.mass});
    }
  }
  s.recompute_loads();
  return s;
}

}  // namespace cgbias::detail
