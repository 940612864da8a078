#include "cgbias/exhibits.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cgbias {

namespace {

std::string num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::string padded(int k, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*d", width, k);
  return buf;
}

}  // namespace

Instance gen_pigou(double a, int d, const BiasSpec& bias, double mass) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("pigou scale must be positive");
  if (d < 1) throw std::invalid_argument("pigou degree must be >= 1");
  auto net = Network::from_recipe(dsp_parallel(dsp_edge("e1"), dsp_edge("e2")), "s", "t");
  std::vector<CostModel> costs{CostModel::constant(1.0), CostModel::monomial(a, d)};
  return Instance(std::move(net), std::move(costs), {AgentType{"s", "t", mass, bias}},
                  "pigou(a=" + num(a) + ", d=" + std::to_string(d) + ")");
}

Instance gen_braess_quadratic(const BiasSpec& bias) {
  Network net({"u", "a", "b", "v"}, {{"u-a", "u", "a"},
                                     {"u-b", "u", "b"},
                                     {"a-v", "a", "v"},
                                     {"b-v", "b", "v"},
                                     {"a-b", "a", "b"}});
  std::vector<CostModel> costs{CostModel::monomial(1.0, 2), CostModel::constant(1.0),
                               CostModel::constant(1.0), CostModel::monomial(1.0, 2),
                               CostModel::constant(0.0)};
  return Instance(std::move(net), std::move(costs), {AgentType{"u", "v", 1.0, bias}},
                  "braess-quadratic");
}

Instance gen_braess_adversarial(double eps, int m_exp) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (m_exp < 1) throw std::invalid_argument("exponent must be >= 1");
  Network net({"u", "a", "b", "v"}, {{"u-a", "u", "a"},
                                     {"u-b", "u", "b"},
                                     {"a-v", "a", "v"},
                                     {"b-v", "b", "v"},
                                     {"a-b", "a", "b"}});
  const double big = m_exp;
  const auto steep = CostModel::shifted_power(std::pow(2.0, m_exp), 0.0, m_exp);  // (2x)^m
  std::vector<CostModel> costs{steep, CostModel::constant(0.0), CostModel::constant(0.0), steep,
                               CostModel::constant(big)};
  auto flat = [](double v) { return CostModel::table({{0.0, v}}); };
  auto lure = BiasSpec::override_costs({{"u-a", flat(0.0)},
                                        {"u-b", flat(big)},
                                        {"a-v", flat(big)},
                                        {"b-v", flat(0.0)},
                                        {"a-b", flat(0.0)}});
  std::vector<AgentType> types{{"u", "v", 1.0 - eps, BiasSpec::identity()}, {"u", "v", eps, lure}};
  return Instance(std::move(net), std::move(costs), std::move(types),
                  "braess-adversarial(eps=" + num(eps) + ", m=" + std::to_string(m_exp) + ")");
}

RiskNetworkSize risk_unbounded_size(double eps, double bound) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in (0, 0.5)");
  if (!(bound >= 1.0) || !std::isfinite(bound)) throw std::invalid_argument("bound must be >= 1");
  RiskNetworkSize z;
  // Smallest integers strictly above the thresholds; the nudge absorbs rounding in 2M/eps.
  const double q_min = 2.0 * bound / eps;
  if (q_min > 1e8) throw std::invalid_argument("parameters need too many routes");
  z.paths = static_cast<int>(std::floor(q_min + 1e-9)) + 1;
  const double d_min = std::max(std::log2(static_cast<double>(z.paths)) + 1.0, 10.0);
  z.degree = static_cast<int>(std::floor(d_min + 1e-9)) + 1;
  z.scale = std::pow(z.paths / 2.0, z.degree);
  return z;
}

Instance build_risk_network(const RiskNetworkSize& z, double eps, const std::string& name) {
  if (z.paths < 1 || z.degree < 1 || !(z.scale > 0.0))
    throw std::invalid_argument("risk network needs positive routes, degree and scale");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  const int width = static_cast<int>(std::to_string(z.paths).size());
  std::vector<std::string> nodes{"s", "s'"};
  std::vector<EdgeSpec> edges;
  std::vector<CostModel> costs;
  const auto outer = CostModel::monomial(z.scale, z.degree);
  const auto free = CostModel::constant(0.0);
  const auto middle = CostModel::monomial(1.0, 1);
  edges.push_back({"in0", "s", "s'"});
  costs.push_back(free);
  for (int k = 1; k <= z.paths; ++k) {
    const auto tag = padded(k, width);
    const auto head = "a" + tag, tail = "b" + tag;
    nodes.push_back(head);
    nodes.push_back(tail);
    edges.push_back({"src" + tag, "s", head});
    costs.push_back(outer);
    edges.push_back({"mid" + tag, head, tail});
    costs.push_back(middle);
    edges.push_back({"dst" + tag, tail, "t"});
    costs.push_back(outer);
    if (k == 1) {
      edges.push_back({"in1", "s'", head});
      costs.push_back(free);
    } else {
      edges.push_back({"link" + tag, "b" + padded(k - 1, width), head});
      costs.push_back(free);
    }
  }
  edges.push_back({"out1", "b" + padded(z.paths, width), "t'"});
  costs.push_back(free);
  edges.push_back({"out0", "t'", "t"});
  costs.push_back(free);
  nodes.push_back("t'");
  nodes.push_back("t");
  std::vector<AgentType> types{{"s", "t", 1.0 - eps, BiasSpec::pessimism(1.0)},
                               {"s", "t", eps, BiasSpec::pessimism(8.0)}};
  return Instance(Network(std::move(nodes), std::move(edges)), std::move(costs), std::move(types),
                  name);
}

Instance gen_risk_unbounded(double eps, double bound, std::size_t size_budget) {
  const auto z = risk_unbounded_size(eps, bound);
  if (static_cast<double>(z.paths) * z.degree > static_cast<double>(size_budget))
    throw std::invalid_argument("instance exceeds the size budget (" + std::to_string(z.paths) +
                                " routes x degree " + std::to_string(z.degree) + ")");
  return build_risk_network(z, eps, "risk-unbounded(eps=" + num(eps) + ", M=" + num(bound) + ")");
}

double tightness_scale(const CostClass& cls, const BiasSpec& bias) {
  const int d = cls.max_degree();
  if (d < 1) throw Unsupported("no tight construction for " + cls.describe());
  auto tax_scale = [d](double beta) {
    if (beta <= 1.0) return 1.0 / (1.0 + d * beta);
    if (d == 1) return 2.0 * beta / ((1.0 + beta) * (1.0 + beta));
    return std::pow(beta, d) * std::pow(d + 1.0, d) / std::pow(1.0 + d * beta, d + 1.0);
  };
  if (bias.is_identity()) return tax_scale(0.0);
  if (auto t = bias.get<TaxBias>()) return tax_scale(t->beta);
  if (auto p = bias.get<PessimismBias>()) {
    if (p->r == 1.0) return tax_scale(0.0);
    if (d == 1) return tax_scale(p->r - 1.0);
    if (d == 2 && p->r >= 2.0) return 4.0 / (p->r * p->r);
  }
  throw Unsupported("no tight construction for " + cls.describe() + " under " + bias.describe());
}

Instance gen_tightness(const CostClass& cls, const BiasSpec& bias) {
  return gen_pigou(tightness_scale(cls, bias), cls.max_degree(), bias, 1.0);
}

}  // namespace cgbias
