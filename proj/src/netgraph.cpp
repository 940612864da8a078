#include "cgbias/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace cgbias {

struct DspRecipe::Node {
  Kind kind;
  std::string edge_id;
  std::vector<DspRecipe> children;
  std::size_t leaves = 1;
  std::size_t nodes = 2;
  double paths = 1.0;
};

DspRecipe::DspRecipe(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

DspRecipe DspRecipe::edge(std::string edge_id) {
  if (edge_id.empty()) throw std::invalid_argument("dsp leaf needs an edge id");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Leaf;
  n->edge_id = std::move(edge_id);
  return DspRecipe(std::move(n));
}

DspRecipe DspRecipe::series(DspRecipe first, DspRecipe second) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Series;
  n->leaves = first.leaf_count() + second.leaf_count();
  n->nodes = first.node_count() + second.node_count() - 1;
  n->paths = first.path_count() * second.path_count();
  n->children = {std::move(first), std::move(second)};
  return DspRecipe(std::move(n));
}

DspRecipe DspRecipe::parallel(DspRecipe first, DspRecipe second) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Parallel;
  n->leaves = first.leaf_count() + second.leaf_count();
  n->nodes = first.node_count() + second.node_count() - 2;
  n->paths = first.path_count() + second.path_count();
  n->children = {std::move(first), std::move(second)};
  return DspRecipe(std::move(n));
}

DspRecipe dsp_edge(std::string edge_id) { return DspRecipe::edge(std::move(edge_id)); }
DspRecipe dsp_series(DspRecipe a, DspRecipe b) { return DspRecipe::series(std::move(a), std::move(b)); }
DspRecipe dsp_parallel(DspRecipe a, DspRecipe b) {
  return DspRecipe::parallel(std::move(a), std::move(b));
}

DspRecipe::Kind DspRecipe::kind() const { return node_->kind; }

const std::string& DspRecipe::edge_id() const {
  if (node_->kind != Kind::Leaf) throw std::logic_error("not a leaf recipe");
  return node_->edge_id;
}

const DspRecipe& DspRecipe::first() const {
  if (node_->kind == Kind::Leaf) throw std::logic_error("leaf recipe has no children");
  return node_->children[0];
}

const DspRecipe& DspRecipe::second() const {
  if (node_->kind == Kind::Leaf) throw std::logic_error("leaf recipe has no children");
  return node_->children[1];
}

std::size_t DspRecipe::leaf_count() const { return node_->leaves; }
std::size_t DspRecipe::node_count() const { return node_->nodes; }
double DspRecipe::path_count() const { return node_->paths; }

std::vector<std::string> DspRecipe::leaves() const {
  std::vector<std::string> out;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    if (n.kind == Kind::Leaf) {
      out.push_back(n.edge_id);
      return;
    }
    walk(*n.children[0].node_);
    walk(*n.children[1].node_);
  };
  walk(*node_);
  return out;
}

std::vector<EdgeSpec> DspRecipe::replay(const std::string& source, const std::string& target,
                                        std::vector<std::string>* internal_nodes) const {
  std::vector<EdgeSpec> edges;
  std::size_t counter = 0;
  std::function<void(const Node&, const std::string&, const std::string&)> build =
      [&](const Node& n, const std::string& u, const std::string& v) {
        switch (n.kind) {
          case Kind::Leaf:
            edges.push_back({n.edge_id, u, v});
            break;
          case Kind::Series: {
            std::string mid = "v" + std::to_string(++counter);
            if (internal_nodes) internal_nodes->push_back(mid);
            build(*n.children[0].node_, u, mid);
            build(*n.children[1].node_, mid, v);
            break;
          }
          case Kind::Parallel:
            build(*n.children[0].node_, u, v);
            build(*n.children[1].node_, u, v);
            break;
        }
      };
  build(*node_, source, target);
  return edges;
}

bool DspRecipe::operator==(const DspRecipe& other) const {
  std::function<bool(const Node&, const Node&)> eq = [&](const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::Leaf) return a.edge_id == b.edge_id;
    return eq(*a.children[0].node_, *b.children[0].node_) &&
           eq(*a.children[1].node_, *b.children[1].node_);
  };
  return eq(*node_, *other.node_);
}

Network::Network(std::vector<std::string> nodes, std::vector<EdgeSpec> edges,
                 std::optional<DspCertificate> certificate)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), certificate_(std::move(certificate)) {
  index();
  if (certificate_) check_certificate();
}

Network Network::from_recipe(const DspRecipe& recipe, const std::string& source,
                             const std::string& target) {
  if (source == target) throw std::invalid_argument("dsp terminals must differ");
  std::vector<std::string> internal;
  auto edges = recipe.replay(source, target, &internal);
  std::vector<std::string> nodes{source};
  nodes.insert(nodes.end(), internal.begin(), internal.end());
  nodes.push_back(target);
  return Network(std::move(nodes), std::move(edges), DspCertificate{recipe, source, target});
}

void Network::index() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_ix_.emplace(nodes_[i], i).second)
      throw std::invalid_argument("duplicate node '" + nodes_[i] + "'");
  }
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& spec = edges_[e];
    if (!edge_ix_.emplace(spec.id, e).second)
      throw std::invalid_argument("duplicate edge '" + spec.id + "'");
    auto f = node_ix_.find(spec.from);
    auto t = node_ix_.find(spec.to);
    if (f == node_ix_.end() || t == node_ix_.end())
      throw std::invalid_argument("edge '" + spec.id + "' references an unknown node");
    from_.push_back(f->second);
    to_.push_back(t->second);
    out_[f->second].push_back(e);
    in_[t->second].push_back(e);
  }
  std::vector<std::size_t> order(edges_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return edges_[a].id < edges_[b].id; });
  rank_.assign(edges_.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) rank_[order[r]] = r;
  auto by_rank = [&](std::size_t a, std::size_t b) { return rank_[a] < rank_[b]; };
  for (auto& v : out_) std::sort(v.begin(), v.end(), by_rank);
  for (auto& v : in_) std::sort(v.begin(), v.end(), by_rank);

  // Kahn's algorithm with a min-heap on node names keeps the order canonical.
  std::vector<std::size_t> indeg(nodes_.size(), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) ++indeg[to_[e]];
  auto cmp = [&](std::size_t a, std::size_t b) { return nodes_[a] > nodes_[b]; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> ready(cmp);
  for (std::size_t v = 0; v < nodes_.size(); ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<std::size_t> topo;
  while (!ready.empty()) {
    auto v = ready.top();
    ready.pop();
    topo.push_back(v);
    for (auto e : out_[v])
      if (--indeg[to_[e]] == 0) ready.push(to_[e]);
  }
  if (topo.size() == nodes_.size()) topo_ = std::move(topo);
}

void Network::check_certificate() const {
  const auto& cert = *certificate_;
  auto fail = [](const std::string& why) {
    throw std::invalid_argument("dsp certificate rejected: " + why);
  };
  if (!node_ix_.count(cert.source) || !node_ix_.count(cert.target))
    fail("terminals are not network nodes");
  if (cert.source == cert.target) fail("terminals coincide");
  auto replayed = cert.recipe.replay(cert.source, cert.target);
  if (replayed.size() != edges_.size()) fail("edge count differs from recipe");
  if (cert.recipe.node_count() != nodes_.size()) fail("node count differs from recipe");
  // Internal node names are free; the mapping is forced by the edge ids.
  std::map<std::string, std::string> to_net{{cert.source, cert.source}, {cert.target, cert.target}};
  std::set<std::string> used{cert.source, cert.target};
  auto bind = [&](const std::string& replay_node, const std::string& net_node) {
    auto it = to_net.find(replay_node);
    if (it != to_net.end()) {
      if (it->second != net_node) fail("endpoint mismatch at '" + net_node + "'");
      return;
    }
    if (!used.insert(net_node).second) fail("node '" + net_node + "' merges two recipe nodes");
    to_net.emplace(replay_node, net_node);
  };
  for (const auto& spec : replayed) {
    auto it = edge_ix_.find(spec.id);
    if (it == edge_ix_.end()) fail("recipe edge '" + spec.id + "' is missing");
    const auto& actual = edges_[it->second];
    bind(spec.from, actual.from);
    bind(spec.to, actual.to);
  }
  if (!acyclic()) fail("network has a cycle");
}

std::optional<std::size_t> Network::find_node(const std::string& name) const {
  auto it = node_ix_.find(name);
  if (it == node_ix_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Network::find_edge(const std::string& id) const {
  auto it = edge_ix_.find(id);
  if (it == edge_ix_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::node_index(const std::string& name) const {
  auto n = find_node(name);
  if (!n) throw std::out_of_range("unknown node '" + name + "'");
  return *n;
}

std::size_t Network::edge_index(const std::string& id) const {
  auto e = find_edge(id);
  if (!e) throw std::out_of_range("unknown edge '" + id + "'");
  return *e;
}

bool Network::reachable(std::size_t from, std::size_t to) const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<std::size_t> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    for (auto e : out_[v]) {
      auto w = to_[e];
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return false;
}

PathExplosion::PathExplosion(std::size_t cap)
    : std::runtime_error("more than " + std::to_string(cap) + " paths"), cap_(cap) {}

std::vector<std::vector<std::string>> PathSet::as_ids(const Network& net) const {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : paths) {
    std::vector<std::string> ids;
    for (auto e : p) ids.push_back(net.edge(e).id);
    out.push_back(std::move(ids));
  }
  return out;
}

PathSet enumerate_paths(const Network& net, const std::string& source, const std::string& target,
                        std::size_t cap) {
  if (cap == 0) throw std::invalid_argument("path cap must be positive");
  const auto u = net.node_index(source);
  const auto v = net.node_index(target);
  PathSet set{source, target, {}};
  std::vector<char> on_path(net.num_nodes(), 0);
  std::vector<std::size_t> current;
  // Out-edges are visited in rank order, so paths come out lexicographically sorted
  // by rank sequence without a final sort.
  std::function<void(std::size_t)> dfs = [&](std::size_t x) {
    if (x == v) {
      if (set.paths.size() == cap) throw PathExplosion(cap);
      set.paths.push_back(current);
      return;
    }
    on_path[x] = 1;
    for (auto e : net.out_edges(x)) {
      auto y = net.edge_to(e);
      if (on_path[y]) continue;
      current.push_back(e);
      dfs(y);
      current.pop_back();
    }
    on_path[x] = 0;
  };
  if (u != v) dfs(u);
  return set;
}

FlowState FlowState::zeros(std::size_t types, std::size_t edges) {
  FlowState s;
  s.type_edge_flow.assign(types, std::vector<double>(edges, 0.0));
  s.edge_load.assign(edges, 0.0);
  s.type_paths.assign(types, {});
  return s;
}

void FlowState::recompute_loads() {
  std::size_t m = type_edge_flow.empty() ? edge_load.size() : type_edge_flow.front().size();
  edge_load.assign(m, 0.0);
  for (const auto& row : type_edge_flow)
    for (std::size_t e = 0; e < m; ++e) edge_load[e] += row[e];
}

FlowReport validate_flow(const Network& net, const std::vector<Demand>& demands,
                         const FlowState& flow, double tolerance) {
  FlowReport report;
  auto violate = [&](std::string msg) {
    report.valid = false;
    report.violations.push_back(std::move(msg));
  };
  if (flow.type_edge_flow.size() != demands.size()) {
    violate("flow has " + std::to_string(flow.type_edge_flow.size()) + " type rows, expected " +
            std::to_string(demands.size()));
    return report;
  }
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const auto& row = flow.type_edge_flow[i];
    const auto& d = demands[i];
    std::string tag = "type " + std::to_string(i);
    if (row.size() != net.num_edges()) {
      violate(tag + ": edge count mismatch");
      continue;
    }
    auto s = net.find_node(d.source);
    auto t = net.find_node(d.target);
    if (!s || !t) {
      violate(tag + ": unknown terminal");
      continue;
    }
    for (std::size_t e = 0; e < row.size(); ++e)
      if (!(row[e] >= -tolerance)) violate(tag + ": negative flow on edge " + net.edge(e).id);
    for (std::size_t x = 0; x < net.num_nodes(); ++x) {
      double out = 0.0, in = 0.0;
      for (auto e : net.out_edges(x)) out += row[e];
      for (auto e : net.in_edges(x)) in += row[e];
      double expected = 0.0;
      if (x == *s && x != *t) expected = d.mass;
      if (x == *t && x != *s) expected = -d.mass;
      double net_out = out - in;
      if (std::abs(net_out - expected) > tolerance) {
        std::ostringstream msg;
        msg.precision(12);
        if (x == *s)
          msg << tag << ": mass " << net_out << " leaves source, expected " << d.mass;
        else if (x == *t)
          msg << tag << ": mass " << -net_out << " reaches target, expected " << d.mass;
        else
          msg << tag << ": conservation violated at node " << net.nodes()[x] << " (imbalance "
              << net_out << ")";
        violate(msg.str());
      }
    }
  }
  if (!flow.edge_load.empty()) {
    if (flow.edge_load.size() != net.num_edges()) {
      violate("edge load vector has wrong size");
    } else {
      for (std::size_t e = 0; e < net.num_edges(); ++e) {
        double sum = 0.0;
        for (const auto& row : flow.type_edge_flow) sum += row[e];
        if (std::abs(sum - flow.edge_load[e]) > 1e-12 * std::max(1.0, std::abs(sum)))
          violate("edge load on " + net.edge(e).id + " differs from the sum over types");
      }
    }
  }
  return report;
}

std::vector<PathFlow> decompose_paths(const Network& net, std::size_t source, std::size_t target,
                                      std::vector<double> edge_flow, double eps) {
  std::vector<PathFlow> out;
  if (source == target) return out;
  for (;;) {
    // Depth-first search restricted to edges that still carry flow.
    std::vector<std::size_t> via(net.num_nodes(), SIZE_MAX);
    std::vector<char> seen(net.num_nodes(), 0);
    std::vector<std::size_t> stack{source};
    seen[source] = 1;
    while (!stack.empty() && !seen[target]) {
      auto x = stack.back();
      stack.pop_back();
      for (auto e : net.out_edges(x)) {
        auto y = net.edge_to(e);
        if (seen[y] || edge_flow[e] <= eps) continue;
        seen[y] = 1;
        via[y] = e;
        stack.push_back(y);
      }
    }
    if (!seen[target]) break;
    PathFlow p;
    double bottleneck = INFINITY;
    for (auto x = target; x != source;) {
      auto e = via[x];
      p.edges.push_back(e);
      bottleneck = std::min(bottleneck, edge_flow[e]);
      x = net.edge_from(e);
    }
    std::reverse(p.edges.begin(), p.edges.end());
    for (auto e : p.edges) edge_flow[e] -= bottleneck;
    p.flow = bottleneck;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace cgbias
