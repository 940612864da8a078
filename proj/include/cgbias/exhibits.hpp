#pragma once

#include <cstddef>

#include "cgbias/costfun.hpp"
#include "cgbias/flowsolve.hpp"
#include "cgbias/smoothbounds.hpp"

namespace cgbias {

// Two parallel links s->t: e1 costs 1, e2 costs a x^d. Carries a DSP certificate.
Instance gen_pigou(double a, int d, const BiasSpec& bias, double mass = 1.0);

// Braess network u, a, b, v with quadratic outer edges and a free bridge a-b.
Instance gen_braess_quadratic(const BiasSpec& bias);

// Braess network where a fraction eps of the agents sees flat override costs
// that push them onto the bridge path, and the outer edges cost (2x)^m_exp.
Instance gen_braess_adversarial(double eps, int m_exp);

struct RiskNetworkSize {
  int paths = 0;   // number of parallel three-edge routes
  int degree = 0;  // exponent of the outer edges
  double scale = 0.0;
};
RiskNetworkSize risk_unbounded_size(double eps, double bound);

// Parallel three-edge routes plus a zero-cost chain threading all middle edges.
// A fraction eps of the agents is pessimistic (r = 8). Rejects instances whose
// routes x degree exceed size_budget.
Instance gen_risk_unbounded(double eps, double bound, std::size_t size_budget = 1'000'000);
// The same wiring for explicit sizes.
Instance build_risk_network(const RiskNetworkSize& size, double eps, const std::string& name = {});

// Pigou instance on which the analytic bound for (class, bias) is attained.
Instance gen_tightness(const CostClass& cls, const BiasSpec& bias);
// The scale a of the link a x^d used by gen_tightness.
double tightness_scale(const CostClass& cls, const BiasSpec& bias);

}  // namespace cgbias
