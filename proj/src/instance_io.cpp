#include "cgbias/instance_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cgbias {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

InputError::InputError(const std::string& message, std::string field, std::size_t line,
                       std::size_t column)
    : std::runtime_error(message), field_(std::move(field)), line_(line), column_(column) {}

namespace {

// Forward iterator over a char buffer that publishes how far the lexer has read.
struct CountingIter {
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  const char** furthest = nullptr;

  reference operator*() const { return *p; }
  CountingIter& operator++() {
    ++p;
    if (furthest && p > *furthest) *furthest = p;
    return *this;
  }
  CountingIter operator++(int) {
    auto old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIter& o) const { return p == o.p; }
  bool operator!=(const CountingIter& o) const { return p != o.p; }
};

// Builds the DOM while recording the byte offset of every object key and array element,
// keyed by JSON pointer.
class LocatingSax {
 public:
  LocatingSax(json& root, const char* begin, const char** cursor)
      : dom_(root, true), begin_(begin), cursor_(cursor) {}

  std::map<std::string, std::size_t> offsets;
  std::string duplicate;  // pointer of the first repeated key

  bool null() { return value([&] { return dom_.null(); }); }
  bool boolean(bool v) { return value([&] { return dom_.boolean(v); }); }
  bool number_integer(json::number_integer_t v) {
    return value([&] { return dom_.number_integer(v); });
  }
  bool number_unsigned(json::number_unsigned_t v) {
    return value([&] { return dom_.number_unsigned(v); });
  }
  bool number_float(json::number_float_t v, const std::string& s) {
    return value([&] { return dom_.number_float(v, s); });
  }
  bool string(std::string& v) { return value([&] { return dom_.string(v); }); }
  bool binary(json::binary_t& v) { return value([&] { return dom_.binary(v); }); }
  bool start_object(std::size_t n) {
    element();
    frames_.push_back({true, {}, 0, {}});
    return dom_.start_object(n);
  }
  bool key(std::string& k) {
    auto& f = frames_.back();
    if (!f.seen.insert(k).second && duplicate.empty()) duplicate = path() + "/" + escape(k);
    f.key = k;
    const std::size_t end = static_cast<std::size_t>(*cursor_ - begin_);
    offsets[path() + "/" + escape(k)] = end >= k.size() + 2 ? end - k.size() - 2 : 0;
    return dom_.key(k);
  }
  bool end_object() {
    frames_.pop_back();
    return dom_.end_object();
  }
  bool start_array(std::size_t n) {
    element();
    frames_.push_back({false, {}, 0, {}});
    return dom_.start_array(n);
  }
  bool end_array() {
    frames_.pop_back();
    return dom_.end_array();
  }
  bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& ex) {
    error_at = pos;
    error = ex.what();
    return false;
  }

  std::size_t error_at = 0;
  std::string error;

 private:
  struct Frame {
    bool object;
    std::string key;
    std::size_t next = 0;
    std::set<std::string> seen;
  };

  static std::string escape(const std::string& k) {
    std::string out;
    for (char c : k) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }
  std::string path() const {
    std::string p;
    // Every enclosing frame contributes the child currently open inside it.
    for (std::size_t i = 0; i + 1 < frames_.size(); ++i) {
      const auto& f = frames_[i];
      p += "/" + (f.object ? escape(f.key) : std::to_string(f.next - 1));
    }
    return p;
  }
  // Arrays record each element's position as it begins.
  void element() {
    if (frames_.empty() || frames_.back().object) return;
    auto& f = frames_.back();
    const std::size_t at = static_cast<std::size_t>(*cursor_ - begin_);
    offsets[path() + "/" + std::to_string(f.next)] = at > 0 ? at - 1 : 0;
    ++f.next;
  }
  template <class F>
  bool value(F&& f) {
    element();
    return f();
  }

  nlohmann::detail::json_sax_dom_parser<json> dom_;
  const char* begin_;
  const char** cursor_;
  std::vector<Frame> frames_;
};

struct Located {
  json doc;
  std::map<std::string, std::size_t> offsets;
  const std::string* text = nullptr;
  std::string origin;

  std::pair<std::size_t, std::size_t> line_col(std::size_t offset) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text->size(); ++i) {
      if ((*text)[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return {line, col};
  }

  // Nearest recorded ancestor of the pointer gives the position.
  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    std::string p = ptr;
    while (!p.empty() && !offsets.count(p)) p = p.substr(0, p.rfind('/'));
    std::size_t line = 1, col = 1;
    if (!p.empty()) std::tie(line, col) = line_col(offsets.at(p));
    const std::string field = ptr.empty() ? "/" : ptr;
    throw InputError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": field " +
                         field + ": " + msg,
                     field, line, col);
  }
};

Located locate(const std::string& text, const std::string& origin) {
  Located out;
  out.text = &text;
  out.origin = origin;
  const char* begin = text.data();
  const char* furthest = begin;
  CountingIter first{begin, &furthest}, last{begin + text.size(), nullptr};
  LocatingSax sax(out.doc, begin, &furthest);
  if (!json::sax_parse(first, last, &sax)) {
    auto [line, col] = out.line_col(sax.error_at > 0 ? sax.error_at - 1 : 0);
    std::string what = sax.error;
    const auto colon = what.find(": ", what.find(']'));
    if (colon != std::string::npos) what = what.substr(colon + 2);
    throw InputError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                         ": malformed JSON: " + what,
                     "", line, col);
  }
  out.offsets = std::move(sax.offsets);
  if (!sax.duplicate.empty()) out.fail(sax.duplicate, "duplicate key");
  return out;
}

// Typed accessors that report failures against the document.
class Reader {
 public:
  explicit Reader(const Located& loc) : loc_(loc) {}

  const json& at(const json& obj, const std::string& ptr, const std::string& key) const {
    if (!obj.contains(key)) loc_.fail(ptr, "missing required field \"" + key + "\"");
    return obj.at(key);
  }
  void object(const json& v, const std::string& ptr, std::initializer_list<const char*> allowed) const {
    if (!v.is_object()) loc_.fail(ptr, "expected an object");
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
        loc_.fail(ptr + "/" + it.key(), "unknown field \"" + it.key() + "\"");
    }
  }
  double number(const json& v, const std::string& ptr) const {
    if (!v.is_number()) loc_.fail(ptr, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) loc_.fail(ptr, "number is not finite");
    return x;
  }
  int integer(const json& v, const std::string& ptr) const {
    if (!v.is_number_integer()) loc_.fail(ptr, "expected an integer");
    const auto x = v.get<long long>();
    if (x < 0 || x > 1000) loc_.fail(ptr, "integer out of range [0, 1000]");
    return static_cast<int>(x);
  }
  std::string string(const json& v, const std::string& ptr) const {
    if (!v.is_string()) loc_.fail(ptr, "expected a string");
    return v.get<std::string>();
  }
  const json& array(const json& v, const std::string& ptr) const {
    if (!v.is_array()) loc_.fail(ptr, "expected an array");
    return v;
  }
  // Exactly one key; returns it.
  std::string tag(const json& v, const std::string& ptr, std::initializer_list<const char*> kinds,
                  const char* what) const {
    if (!v.is_object() || v.size() != 1) loc_.fail(ptr, std::string("expected a ") + what +
                                                            " object with exactly one key");
    const std::string k = v.begin().key();
    if (std::none_of(kinds.begin(), kinds.end(), [&](const char* a) { return k == a; })) {
      std::string list;
      for (auto* a : kinds) list += (list.empty() ? "" : ", ") + std::string(a);
      loc_.fail(ptr + "/" + k, "unknown " + std::string(what) + " kind \"" + k + "\" (expected " +
                                   list + ")");
    }
    return k;
  }
  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const { loc_.fail(ptr, msg); }

 private:
  const Located& loc_;
};

CostModel read_cost(const Reader& r, const json& v, const std::string& ptr) {
  const auto kind = r.tag(v, ptr, {"poly", "power", "table"}, "cost");
  const auto& body = v.at(kind);
  const auto bp = ptr + "/" + kind;
  try {
    if (kind == "poly") {
      std::vector<double> coeffs;
      for (std::size_t i = 0; i < r.array(body, bp).size(); ++i)
        coeffs.push_back(r.number(body[i], bp + "/" + std::to_string(i)));
      return CostModel::polynomial(std::move(coeffs));
    }
    if (kind == "power") {
      r.object(body, bp, {"a", "shift", "degree"});
      const double shift = body.contains("shift") ? r.number(body["shift"], bp + "/shift") : 0.0;
      return CostModel::shifted_power(r.number(r.at(body, bp, "a"), bp + "/a"), shift,
                                      r.integer(r.at(body, bp, "degree"), bp + "/degree"));
    }
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < r.array(body, bp).size(); ++i) {
      const auto pp = bp + "/" + std::to_string(i);
      const auto& pt = r.array(body[i], pp);
      if (pt.size() != 2) r.fail(pp, "table point must be [x, y]");
      pts.emplace_back(r.number(pt[0], pp + "/0"), r.number(pt[1], pp + "/1"));
    }
    return CostModel::table(std::move(pts));
  } catch (const std::invalid_argument& e) {
    r.fail(bp, e.what());
  }
}

BiasSpec read_bias(const Reader& r, const json& v, const std::string& ptr) {
  const auto kind =
      r.tag(v, ptr, {"identity", "tax", "pessimism", "meanvar", "capacity", "override"}, "bias");
  const auto& body = v.at(kind);
  const auto bp = ptr + "/" + kind;
  try {
    if (kind == "identity") {
      r.object(body, bp, {});
      return BiasSpec::identity();
    }
    if (kind == "tax") {
      r.object(body, bp, {"beta"});
      return BiasSpec::tax(r.number(r.at(body, bp, "beta"), bp + "/beta"));
    }
    if (kind == "pessimism") {
      r.object(body, bp, {"r"});
      return BiasSpec::pessimism(r.number(r.at(body, bp, "r"), bp + "/r"));
    }
    if (kind == "meanvar") {
      r.object(body, bp, {"gamma", "variance", "kappa", "per_edge"});
      std::optional<double> kappa;
      if (body.contains("kappa") && !body["kappa"].is_null())
        kappa = r.number(body["kappa"], bp + "/kappa");
      std::map<std::string, CostModel> per_edge;
      if (body.contains("per_edge")) {
        const auto& pe = body["per_edge"];
        if (!pe.is_object()) r.fail(bp + "/per_edge", "expected an object");
        for (auto it = pe.begin(); it != pe.end(); ++it)
          per_edge.emplace(it.key(), read_cost(r, it.value(), bp + "/per_edge/" + it.key()));
      }
      return BiasSpec::mean_var(r.number(r.at(body, bp, "gamma"), bp + "/gamma"),
                                read_cost(r, r.at(body, bp, "variance"), bp + "/variance"), kappa,
                                std::move(per_edge));
    }
    if (kind == "capacity") {
      r.object(body, bp, {"L", "delta", "M"});
      return BiasSpec::capacity(r.number(r.at(body, bp, "L"), bp + "/L"),
                                r.number(r.at(body, bp, "delta"), bp + "/delta"),
                                r.number(r.at(body, bp, "M"), bp + "/M"));
    }
    if (!body.is_object()) r.fail(bp, "expected an object");
    std::map<std::string, CostModel> costs;
    for (auto it = body.begin(); it != body.end(); ++it)
      costs.emplace(it.key(), read_cost(r, it.value(), bp + "/" + it.key()));
    return BiasSpec::override_costs(std::move(costs));
  } catch (const std::invalid_argument& e) {
    r.fail(bp, e.what());
  }
}

DspRecipe read_recipe(const Reader& r, const json& v, const std::string& ptr, int depth = 0) {
  if (depth > 200) r.fail(ptr, "recipe nested too deeply");
  const auto kind = r.tag(v, ptr, {"edge", "series", "parallel"}, "recipe");
  const auto bp = ptr + "/" + kind;
  if (kind == "edge") return dsp_edge(r.string(v.at(kind), bp));
  const auto& parts = r.array(v.at(kind), bp);
  if (parts.size() != 2) r.fail(bp, "composition takes exactly two parts");
  auto a = read_recipe(r, parts[0], bp + "/0", depth + 1);
  auto b = read_recipe(r, parts[1], bp + "/1", depth + 1);
  return kind == "series" ? dsp_series(std::move(a), std::move(b))
                          : dsp_parallel(std::move(a), std::move(b));
}

Instance read_instance(const Located& loc) {
  const Reader r(loc);
  const json& doc = loc.doc;
  r.object(doc, "", {"schema", "name", "nodes", "edges", "types", "dsp"});
  const auto& schema = r.at(doc, "", "schema");
  if (!schema.is_number_integer() || schema.get<long long>() != kInstanceSchema)
    r.fail("/schema", "unsupported schema version (expected " + std::to_string(kInstanceSchema) + ")");
  const std::string name = doc.contains("name") ? r.string(doc["name"], "/name") : std::string();

  std::vector<std::string> nodes;
  std::set<std::string> node_set;
  const auto& jn = r.array(r.at(doc, "", "nodes"), "/nodes");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const auto p = "/nodes/" + std::to_string(i);
    nodes.push_back(r.string(jn[i], p));
    if (!node_set.insert(nodes.back()).second) r.fail(p, "duplicate node \"" + nodes.back() + "\"");
  }

  std::vector<EdgeSpec> edges;
  std::vector<CostModel> costs;
  std::set<std::string> edge_set;
  const auto& je = r.array(r.at(doc, "", "edges"), "/edges");
  for (std::size_t i = 0; i < je.size(); ++i) {
    const auto p = "/edges/" + std::to_string(i);
    r.object(je[i], p, {"id", "from", "to", "cost"});
    EdgeSpec e{r.string(r.at(je[i], p, "id"), p + "/id"), r.string(r.at(je[i], p, "from"), p + "/from"),
               r.string(r.at(je[i], p, "to"), p + "/to")};
    if (!edge_set.insert(e.id).second) r.fail(p + "/id", "duplicate edge id \"" + e.id + "\"");
    if (!node_set.count(e.from)) r.fail(p + "/from", "unknown node \"" + e.from + "\"");
    if (!node_set.count(e.to)) r.fail(p + "/to", "unknown node \"" + e.to + "\"");
    costs.push_back(read_cost(r, r.at(je[i], p, "cost"), p + "/cost"));
    edges.push_back(std::move(e));
  }

  std::vector<AgentType> types;
  const auto& jt = r.array(r.at(doc, "", "types"), "/types");
  if (jt.empty()) r.fail("/types", "at least one agent type is required");
  for (std::size_t i = 0; i < jt.size(); ++i) {
    const auto p = "/types/" + std::to_string(i);
    r.object(jt[i], p, {"source", "target", "mass", "bias"});
    AgentType t;
    t.source = r.string(r.at(jt[i], p, "source"), p + "/source");
    t.target = r.string(r.at(jt[i], p, "target"), p + "/target");
    if (!node_set.count(t.source)) r.fail(p + "/source", "unknown node \"" + t.source + "\"");
    if (!node_set.count(t.target)) r.fail(p + "/target", "unknown node \"" + t.target + "\"");
    t.mass = jt[i].contains("mass") ? r.number(jt[i]["mass"], p + "/mass") : 1.0;
    if (t.mass < 0.0) r.fail(p + "/mass", "mass must be nonnegative");
    t.bias = jt[i].contains("bias") ? read_bias(r, jt[i]["bias"], p + "/bias") : BiasSpec::identity();
    if (auto ov = t.bias.get<OverrideBias>()) {
      for (const auto& [id, c] : ov->costs)
        if (!edge_set.count(id)) r.fail(p + "/bias/override/" + id, "unknown edge \"" + id + "\"");
    }
    if (auto mv = t.bias.get<MeanVarBias>()) {
      for (const auto& [id, c] : mv->per_edge)
        if (!edge_set.count(id))
          r.fail(p + "/bias/meanvar/per_edge/" + id, "unknown edge \"" + id + "\"");
    }
    types.push_back(std::move(t));
  }

  std::optional<DspCertificate> cert;
  if (doc.contains("dsp")) {
    const auto& jd = doc["dsp"];
    r.object(jd, "/dsp", {"source", "target", "recipe"});
    cert = DspCertificate{read_recipe(r, r.at(jd, "/dsp", "recipe"), "/dsp/recipe"),
                          r.string(r.at(jd, "/dsp", "source"), "/dsp/source"),
                          r.string(r.at(jd, "/dsp", "target"), "/dsp/target")};
  }

  Network net;
  try {
    net = Network(std::move(nodes), std::move(edges), std::move(cert));
  } catch (const std::invalid_argument& e) {
    r.fail(doc.contains("dsp") ? "/dsp" : "/edges", e.what());
  }
  try {
    return Instance(std::move(net), std::move(costs), std::move(types), name);
  } catch (const std::invalid_argument& e) {
    r.fail("/types", e.what());
  }
}

ordered cost_json(const CostModel& c) {
  switch (c.kind()) {
    case CostModel::Kind::Polynomial:
      return ordered{{"poly", c.coefficients()}};
    case CostModel::Kind::ShiftedPower:
      return ordered{{"power", ordered{{"a", c.scale()}, {"shift", c.shift()}, {"degree", c.degree()}}}};
    case CostModel::Kind::Table: {
      ordered pts = ordered::array();
      for (const auto& [x, y] : c.points()) pts.push_back(ordered::array({x, y}));
      return ordered{{"table", pts}};
    }
  }
  return {};
}

ordered bias_json(const BiasSpec& b) {
  if (b.is_identity()) return ordered{{"identity", ordered::object()}};
  if (auto t = b.get<TaxBias>()) return ordered{{"tax", ordered{{"beta", t->beta}}}};
  if (auto p = b.get<PessimismBias>()) return ordered{{"pessimism", ordered{{"r", p->r}}}};
  if (auto m = b.get<MeanVarBias>()) {
    ordered body{{"gamma", m->gamma}, {"variance", cost_json(m->variance)}};
    body["kappa"] = m->kappa ? ordered(*m->kappa) : ordered(nullptr);
    if (!m->per_edge.empty()) {
      ordered pe = ordered::object();
      for (const auto& [id, c] : m->per_edge) pe[id] = cost_json(c);
      body["per_edge"] = pe;
    }
    return ordered{{"meanvar", body}};
  }
  if (auto c = b.get<CapacityBias>())
    return ordered{{"capacity", ordered{{"L", c->limit}, {"delta", c->delta}, {"M", c->penalty}}}};
  const auto& ov = *b.get<OverrideBias>();
  ordered body = ordered::object();
  for (const auto& [id, c] : ov.costs) body[id] = cost_json(c);
  return ordered{{"override", body}};
}

ordered recipe_json(const DspRecipe& r) {
  switch (r.kind()) {
    case DspRecipe::Kind::Leaf:
      return ordered{{"edge", r.edge_id()}};
    case DspRecipe::Kind::Series:
      return ordered{{"series", ordered::array({recipe_json(r.first()), recipe_json(r.second())})}};
    case DspRecipe::Kind::Parallel:
      return ordered{{"parallel", ordered::array({recipe_json(r.first()), recipe_json(r.second())})}};
  }
  return {};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path, "", 0, 0);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

Instance parse_instance(const std::string& text, const std::string& origin) {
  return read_instance(locate(text, origin));
}

Instance load_instance(const std::string& path) { return parse_instance(read_file(path), path); }

std::string serialize_instance(const Instance& inst) {
  const auto& net = inst.network();
  ordered doc;
  doc["schema"] = kInstanceSchema;
  doc["name"] = inst.name();
  doc["nodes"] = net.nodes();
  ordered edges = ordered::array();
  for (std::size_t e = 0; e < net.num_edges(); ++e) {
    const auto& spec = net.edge(e);
    edges.push_back(ordered{{"id", spec.id}, {"from", spec.from}, {"to", spec.to},
                            {"cost", cost_json(inst.cost(e))}});
  }
  doc["edges"] = edges;
  ordered types = ordered::array();
  for (const auto& t : inst.types())
    types.push_back(ordered{{"source", t.source}, {"target", t.target}, {"mass", t.mass},
                            {"bias", bias_json(t.bias)}});
  doc["types"] = types;
  if (const auto& cert = net.certificate())
    doc["dsp"] = ordered{{"source", cert->source}, {"target", cert->target},
                         {"recipe", recipe_json(cert->recipe)}};
  return doc.dump(2) + "\n";
}

CostModel parse_cost_descriptor(const std::string& text) {
  const auto loc = locate(text, "<cost>");
  return read_cost(Reader(loc), loc.doc, "");
}

BiasSpec parse_bias_descriptor(const std::string& text) {
  const auto loc = locate(text, "<bias>");
  return read_bias(Reader(loc), loc.doc, "");
}

std::string serialize_cost(const CostModel& c) { return cost_json(c).dump(); }
std::string serialize_bias(const BiasSpec& b) { return bias_json(b).dump(); }

}  // namespace cgbias
