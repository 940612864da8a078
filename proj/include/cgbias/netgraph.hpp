#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cgbias {

struct EdgeSpec {
  std::string id;
  std::string from;
  std::string to;
  bool operator==(const EdgeSpec&) const = default;
};

// Series/parallel composition tree. Leaves name edges; terminals are assigned
// when the recipe is built into a network.
class DspRecipe {
 public:
  enum class Kind { Leaf, Series, Parallel };

  static DspRecipe edge(std::string edge_id);
  static DspRecipe series(DspRecipe first, DspRecipe second);
  static DspRecipe parallel(DspRecipe first, DspRecipe second);

  Kind kind() const;
  const std::string& edge_id() const;  // Leaf only
  const DspRecipe& first() const;      // Series/Parallel only
  const DspRecipe& second() const;

  std::size_t leaf_count() const;
  std::size_t node_count() const;
  // Number of source-target paths, by the product/sum laws.
  double path_count() const;
  std::vector<std::string> leaves() const;

  // Replays the composition. Internal nodes are named v1, v2, ... in creation order.
  std::vector<EdgeSpec> replay(const std::string& source, const std::string& target,
                               std::vector<std::string>* internal_nodes = nullptr) const;

  bool operator==(const DspRecipe& other) const;

 private:
  struct Node;
  explicit DspRecipe(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

DspRecipe dsp_edge(std::string edge_id);
DspRecipe dsp_series(DspRecipe first, DspRecipe second);
DspRecipe dsp_parallel(DspRecipe first, DspRecipe second);

struct DspCertificate {
  DspRecipe recipe;
  std::string source;
  std::string target;
};

class Network {
 public:
  Network() = default;
  // Throws std::invalid_argument on dangling endpoints, duplicate ids, or a
  // certificate whose replay does not reproduce the edge set.
  Network(std::vector<std::string> nodes, std::vector<EdgeSpec> edges,
          std::optional<DspCertificate> certificate = std::nullopt);

  // Builds the network described by a recipe and attaches it as certificate.
  static Network from_recipe(const DspRecipe& recipe, const std::string& source = "s",
                             const std::string& target = "t");

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<EdgeSpec>& edges() const { return edges_; }
  const EdgeSpec& edge(std::size_t e) const { return edges_.at(e); }
  std::size_t edge_from(std::size_t e) const { return from_[e]; }
  std::size_t edge_to(std::size_t e) const { return to_[e]; }

  std::optional<std::size_t> find_node(const std::string& name) const;
  std::optional<std::size_t> find_edge(const std::string& id) const;
  std::size_t node_index(const std::string& name) const;  // throws std::out_of_range
  std::size_t edge_index(const std::string& id) const;

  // Outgoing/incoming edges of a node, sorted by edge rank.
  const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_[node]; }
  const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_[node]; }
  // Position of the edge id in lexicographic order of all ids.
  std::size_t rank(std::size_t e) const { return rank_[e]; }

  bool acyclic() const { return !topo_.empty() || nodes_.empty(); }
  const std::vector<std::size_t>& topological_order() const { return topo_; }
  bool reachable(std::size_t from, std::size_t to) const;

  const std::optional<DspCertificate>& certificate() const { return certificate_; }
  bool is_dsp() const { return certificate_.has_value(); }

 private:
  void index();
  void check_certificate() const;

  std::vector<std::string> nodes_;
  std::vector<EdgeSpec> edges_;
  std::optional<DspCertificate> certificate_;
  std::unordered_map<std::string, std::size_t> node_ix_;
  std::unordered_map<std::string, std::size_t> edge_ix_;
  std::vector<std::size_t> from_, to_, rank_;
  std::vector<std::vector<std::size_t>> out_, in_;
  std::vector<std::size_t> topo_;
};

class PathExplosion : public std::runtime_error {
 public:
  explicit PathExplosion(std::size_t cap);
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

struct PathSet {
  std::string source;
  std::string target;
  std::vector<std::vector<std::size_t>> paths;  // edge indices

  std::vector<std::vector<std::string>> as_ids(const Network& net) const;
};

PathSet enumerate_paths(const Network& net, const std::string& source, const std::string& target,
                        std::size_t cap = 10000);

struct Demand {
  std::string source;
  std::string target;
  double mass = 0.0;
};

struct PathFlow {
  std::vector<std::size_t> edges;
  double flow = 0.0;
};

struct FlowState {
  std::vector<std::vector<double>> type_edge_flow;  // [type][edge]
  std::vector<double> edge_load;                    // sum over types
  std::vector<std::vector<PathFlow>> type_paths;    // optional decomposition

  static FlowState zeros(std::size_t types, std::size_t edges);
  void recompute_loads();
};

struct FlowReport {
  bool valid = true;
  std::vector<std::string> violations;
};

FlowReport validate_flow(const Network& net, const std::vector<Demand>& demands,
                         const FlowState& flow, double tolerance = 1e-9);

// Splits a single commodity's edge flow into source-target paths. Flow that
// circulates on cycles is left undecomposed.
std::vector<PathFlow> decompose_paths(const Network& net, std::size_t source, std::size_t target,
                                      std::vector<double> edge_flow, double eps = 1e-15);

}  // namespace cgbias
