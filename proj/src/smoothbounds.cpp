#include "cgbias/smoothbounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cgbias {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

SmoothnessParams make(double lambda, double mu, std::string tag) {
  SmoothnessParams p;
  p.lambda = lambda;
  p.mu = mu;
  p.tag = std::move(tag);
  return p;
}

// Pessimism factor below which (r^2/4, 0) fails for pure quadratics.
double quadratic_pessimism_threshold() {
  const double s = 3.0 * std::sqrt(3.0);
  return std::sqrt(s / (s - 4.0));
}

void tax_candidates(const CostClass& cls, double beta, const std::string& prefix,
                    std::vector<SmoothnessParams>& out) {
  const double mu = cls.standard_mu();
  const int d = cls.max_degree();
  if (d >= 1) {
    if (beta <= 1.0) {
      const double g = (1.0 + d * beta) / (1.0 + d);
      out.push_back(make(1.0, d * std::pow(g, (d + 1.0) / d) - d * beta,
                         prefix + "degree-" + std::to_string(d) + " tax, beta<=1"));
    }
    if (beta >= 1.0) {
      const double lam =
          std::pow(1.0 + d * beta, d + 1.0) / (std::pow(beta, d) * std::pow(d + 1.0, d + 1.0));
      out.push_back(make(lam, 0.0, prefix + "degree-" + std::to_string(d) + " tax, beta>=1"));
    }
  }
  if (beta <= 1.0) out.push_back(make(1.0, (1.0 - beta) * mu, prefix + "smooth-class tax, beta<=1"));
  if (beta >= 1.0) {
    if (cls.kind != CostClass::Kind::General)
      out.push_back(make(1.0 + (beta - 1.0) * mu, 0.0, prefix + "convex-class tax, beta>=1"));
    out.push_back(make(beta, 0.0, prefix + "any-cost tax, beta>=1"));
  }
}

}  // namespace

double poly_mu(int d) {
  if (d <= 0) return 0.0;
  return d * std::pow(d + 1.0, -(d + 1.0) / d);
}

int CostClass::max_degree() const {
  switch (kind) {
    case Kind::Affine:
      return 1;
    case Kind::Quadratic:
      return 2;
    case Kind::Poly:
      return degree;
    default:
      return -1;
  }
}

double CostClass::standard_mu() const {
  switch (kind) {
    case Kind::General:
    case Kind::Convex:
      return mu;
    default:
      return poly_mu(max_degree());
  }
}

std::string CostClass::describe() const {
  switch (kind) {
    case Kind::General:
      return "general(mu=" + fmt(mu) + ")";
    case Kind::Convex:
      return "convex(mu=" + fmt(mu) + ")";
    case Kind::Affine:
      return "affine";
    case Kind::Quadratic:
      return "quadratic";
    case Kind::Poly:
      return "poly(" + std::to_string(degree) + ")";
  }
  return "?";
}

double SmoothnessParams::bound() const { return mu >= 1.0 ? kInf : lambda / (1.0 - mu); }

std::vector<SmoothnessParams> analytic_candidates(const CostClass& cls, const BiasSpec& bias) {
  if (cls.kind == CostClass::Kind::Poly && cls.degree < 1)
    throw std::invalid_argument("polynomial class needs degree >= 1");
  if ((cls.kind == CostClass::Kind::General || cls.kind == CostClass::Kind::Convex) &&
      !(cls.mu >= 0.0 && cls.mu < 1.0))
    throw std::invalid_argument("class smoothness parameter must lie in [0, 1)");
  std::vector<SmoothnessParams> out;
  const double mu = cls.standard_mu();
  const bool quadratic = cls.max_degree() == 2;

  if (bias.is_identity()) {
    out.push_back(make(1.0, mu, "unbiased smoothness"));
  } else if (auto t = bias.get<TaxBias>()) {
    tax_candidates(cls, t->beta, "", out);
  } else if (auto p = bias.get<PessimismBias>()) {
    const double r = p->r;
    if (r == 1.0) {
      out.push_back(make(1.0, mu, "unbiased smoothness"));
    } else if (cls.max_degree() == 1) {
      tax_candidates(cls, r - 1.0, "pessimism as ", out);
    } else if (quadratic) {
      if (r <= 1.82) out.push_back(make(1.0, 0.842 - 0.457 * r, "quadratic pessimism, r<=1.82"));
      if (r >= 2.0) {
        auto q = make(r * r / 4.0, 0.0, "quadratic pessimism, r>=2");
        const double needed = 4.0 * std::pow(r, 6) / (27.0 * std::pow(r * r - 1.0, 2));
        if (needed > q.lambda) {
          q.notes.push_back("lambda raised from " + fmt(q.lambda) + " to " + fmt(needed) +
                            ": r^2/4 is too small for pure quadratics when r < " +
                            fmt(quadratic_pessimism_threshold()));
          q.lambda = needed;
        }
        out.push_back(q);
      }
    }
  } else if (auto m = bias.get<MeanVarBias>()) {
    if (m->kappa) out.push_back(make(1.0 + m->gamma * *m->kappa, mu, "mean-variance, bounded variance"));
  }
  std::stable_sort(out.begin(), out.end(), [](const SmoothnessParams& a, const SmoothnessParams& b) {
    return a.bound() < b.bound();
  });
  return out;
}

SmoothnessParams analytic_biased_smoothness(const CostClass& cls, const BiasSpec& bias) {
  auto all = analytic_candidates(cls, bias);
  if (all.empty())
    throw Unsupported("no analytic certificate for " + cls.describe() + " under " + bias.describe());
  auto best = all.front();
  for (std::size_t k = 1; k < all.size(); ++k)
    best.notes.push_back("also: " + all[k].tag + " (" + fmt(all[k].lambda) + ", " +
                         fmt(all[k].mu) + ")");
  return best;
}

namespace {

// Local pattern search for a maximum of f inside the box.
template <class F>
std::pair<double, std::pair<double, double>> climb(const F& f, double x, double y, double step,
                                                   Interval box_x, Interval box_y) {
  double best = f(x, y);
  const double floor = 1e-14 * std::max({1.0, box_x.hi, box_y.hi});
  static const int dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (int guard = 0; step > floor && guard < 20000; ++guard) {
    double bx = x, by = y, bv = best;
    for (const auto& d : dirs) {
      const double cx = std::clamp(x + d[0] * step, box_x.lo, box_x.hi);
      const double cy = std::clamp(y + d[1] * step, box_y.lo, box_y.hi);
      const double v = f(cx, cy);
      if (v > bv) {
        bv = v;
        bx = cx;
        by = cy;
      }
    }
    if (bv > best) {
      best = bv;
      x = bx;
      y = by;
    } else {
      step *= 0.5;
    }
  }
  return {best, {x, y}};
}

struct Candidate {
  double value;
  double x, y;
};

// Grid scan, ray scan along y = kx, and refinement of the strongest grid points.
template <class F>
Candidate maximize(const F& f, Interval dom, int grid, double x_floor) {
  if (grid < 2) throw std::invalid_argument("grid needs at least two points per axis");
  if (!(dom.hi > dom.lo) || dom.lo < 0.0) throw std::invalid_argument("bad certification domain");
  const double h = (dom.hi - dom.lo) / (grid - 1);
  std::vector<Candidate> top;
  const std::size_t keep = 8;
  auto offer = [&](double v, double x, double y) {
    if (!std::isfinite(v)) v = v > 0 ? kInf : -kInf;
    if (top.size() < keep) {
      top.push_back({v, x, y});
    } else {
      auto worst = std::min_element(top.begin(), top.end(),
                                    [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
      if (v > worst->value) *worst = {v, x, y};
    }
  };
  for (int i = 0; i < grid; ++i) {
    const double x = dom.lo + i * h;
    if (x < x_floor) continue;
    for (int j = 0; j < grid; ++j) {
      const double y = dom.lo + j * h;
      offer(f(x, y), x, y);
    }
  }
  Candidate best{-kInf, 0.0, 0.0};
  for (int k4 = 0; k4 <= 32; ++k4) {
    const double k = k4 / 4.0;
    for (int s = 1; s <= 2000; ++s) {
      const double x = dom.lo + (dom.hi - dom.lo) * s / 2000.0;
      const double y = k * x;
      if (x < x_floor || y > dom.hi || y < dom.lo) continue;
      const double v = f(x, y);
      if (v > best.value) best = {v, x, y};
    }
  }
  Interval bx{std::max(dom.lo, x_floor), dom.hi};
  for (const auto& c : top) {
    if (c.value > best.value) best = c;
    auto [v, pt] = climb(f, c.x, c.y, h, bx, dom);
    if (v > best.value) best = {v, pt.first, pt.second};
  }
  return best;
}

}  // namespace

Violation verify_biased_smoothness(const CostModel& c, const BiasedCost& bc,
                                   const SmoothnessParams& p, int grid) {
  auto f = [&](double x, double y) {
    const double cx = c.eval(x);
    return cx * x + bc.eval(x) * (y - x) - p.lambda * c.eval(y) * y - p.mu * cx * x;
  };
  auto best = maximize(f, p.domain, grid, p.domain.lo);
  return {best.value, best.x, best.y};
}

SmoothnessParams fit_mu_hat(const CostModel& c, const BiasedCost& bc, double lambda,
                            Interval domain, int grid) {
  // Smallest load where c(x)x is positive on the grid scale.
  const double h = (domain.hi - domain.lo) / std::max(1, grid - 1);
  double x_floor = domain.lo;
  while (x_floor <= domain.hi && c.eval(x_floor) * x_floor <= 0.0) x_floor += h;
  if (x_floor > domain.hi) throw std::invalid_argument("c(x)x vanishes on the whole domain");
  auto ratio = [&](double x, double y) {
    const double cx = c.eval(x) * x;
    if (cx <= 0.0) return -kInf;
    return (cx + bc.eval(x) * (y - x) - lambda * c.eval(y) * y) / cx;
  };
  auto best = maximize(ratio, domain, grid, x_floor);
  SmoothnessParams p;
  p.lambda = lambda;
  p.mu = best.value;
  p.domain = domain;
  p.provenance = SmoothnessParams::Provenance::Fitted;
  p.tag = "fitted on " + std::to_string(grid) + "x" + std::to_string(grid) + " grid over [" +
          fmt(domain.lo) + ", " + fmt(domain.hi) + "]";
  p.notes.push_back("worst point (" + fmt(best.x) + ", " + fmt(best.y) + ")");
  if (p.mu < 0.0) {
    p.notes.push_back("negative fit " + fmt(p.mu) + " clamped to 0");
    p.mu = 0.0;
  }
  if (p.mu >= 1.0) p.notes.push_back("unsmoothable at this lambda");
  return p;
}

double bpoa_upper_bound(const SmoothnessParams& p) {
  if (!(p.mu < 1.0)) throw Unbounded("mu >= 1: no finite bound");
  return p.lambda / (1.0 - p.mu);
}

double diverse_bound_sum(const std::vector<SmoothnessParams>& per_type) {
  if (per_type.empty()) throw std::invalid_argument("no types given");
  double total = 0.0;
  for (const auto& p : per_type) total += bpoa_upper_bound(p);
  return total;
}

double diverse_bound_weighted(const SmoothnessParams& base, const std::vector<TypeSmoothness>& types) {
  if (types.empty()) throw std::invalid_argument("no types given");
  if (!(base.mu < 0.5)) throw Unsupported("weighted bound needs mu < 1/2");
  double n = 0.0;
  for (const auto& t : types) {
    if (!(t.mass >= 0.0)) throw std::invalid_argument("negative type mass");
    if (!(t.mu < 1.0) || !(t.mu_hat < 1.0)) throw Unbounded("a type has mu >= 1");
    n += t.mass;
  }
  if (!(n > 0.0)) throw std::invalid_argument("total mass must be positive");
  double total = 0.0;
  for (const auto& t : types)
    total += (t.mass / n) * base.lambda * t.lambda * t.lambda_hat /
             ((1.0 - 2.0 * base.mu) * (1.0 - t.mu) * (1.0 - t.mu_hat));
  return total;
}

double adversarial_fraction_bound(const SmoothnessParams& p, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  return bpoa_upper_bound(p) / (1.0 - alpha);
}

double diverse_max_affine(const std::vector<double>& betas) {
  if (betas.empty()) throw std::invalid_argument("no tax sensitivities given");
  auto bound = [](double b) {
    if (b < 0.0) throw std::invalid_argument("tax sensitivity must be >= 0");
    return b <= 1.0 ? 4.0 / (4.0 * (1.0 + b) - (1.0 + b) * (1.0 + b)) : (1.0 + b) * (1.0 + b) / (4.0 * b);
  };
  const bool low = std::all_of(betas.begin(), betas.end(), [](double b) { return b <= 1.0; });
  const bool high = std::all_of(betas.begin(), betas.end(), [](double b) { return b >= 1.0; });
  if (low || high) {
    double m = 0.0;
    for (double b : betas) m = std::max(m, bound(b));
    return m;
  }
  return 4.0 / 3.0 * bound(*std::max_element(betas.begin(), betas.end()));
}

std::optional<CostClass> infer_cost_class(const Instance& inst) {
  int d = 0;
  for (const auto& c : inst.base_costs()) {
    if (!c.differentiable()) return std::nullopt;
    d = std::max(d, c.degree());
  }
  if (d <= 1) return CostClass::affine();
  if (d == 2) return CostClass::quadratic();
  return CostClass::poly(d);
}

namespace {

// The bias as the analysis sees it: a declared variance bound that fails on
// the instance is dropped.
BiasSpec analysis_bias(const Instance& inst, std::size_t i) {
  const auto& b = inst.type(i).bias;
  if (auto m = b.get<MeanVarBias>(); m && m->kappa && !inst.variance_bound_holds(i))
    return BiasSpec::mean_var(m->gamma, m->variance, std::nullopt, m->per_edge);
  return b;
}

// Smoothness of a type's perceived cost when it stays polynomial.
std::optional<std::pair<double, double>> perceived_smoothness(const Instance& inst, std::size_t i) {
  int d = 0;
  for (const auto& c : inst.perceived(i)) {
    auto form = c.closed_form();
    if (!form || !form->differentiable()) return std::nullopt;
    d = std::max(d, form->degree());
  }
  return std::make_pair(1.0, poly_mu(std::max(d, 1)));
}

}  // namespace

BoundReport measured_bpoa(const Instance& inst, const SolverConfig& cfg) {
  BoundReport rep;
  auto eq = solve_equilibrium(inst, cfg);
  auto opt = solve_social_optimum(inst, cfg);
  rep.equilibrium_cost = social_cost(inst, eq.flow);
  rep.optimum_cost = opt.social_cost;
  if (rep.optimum_cost > 0.0)
    rep.measured_bpoa = rep.equilibrium_cost / rep.optimum_cost;
  else
    rep.measured_bpoa = rep.equilibrium_cost > 0.0 ? kInf : 1.0;

  auto cls = infer_cost_class(inst);
  if (!cls) {
    rep.analytic_note = "no analytic bound: costs are not polynomial";
    return rep;
  }
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < inst.num_types(); ++i)
    if (inst.type(i).mass > 0.0) active.push_back(i);
  const bool one_bias = std::all_of(active.begin(), active.end(), [&](std::size_t i) {
    return inst.type(i).bias == inst.type(active.front()).bias;
  });
  try {
    if (one_bias) {
      auto p = analytic_biased_smoothness(*cls, analysis_bias(inst, active.front()));
      rep.analytic_bound = bpoa_upper_bound(p);
      rep.analytic_note = p.tag;
    } else if (!inst.network().is_dsp()) {
      rep.analytic_note = "unbounded (not DSPG)";
    } else if (!inst.symmetric()) {
      rep.analytic_note = "no bound for asymmetric diverse populations";
    } else {
      std::vector<SmoothnessParams> per;
      std::vector<TypeSmoothness> weighted;
      bool weighted_ok = cls->standard_mu() < 0.5;
      for (auto i : active) {
        per.push_back(analytic_biased_smoothness(*cls, analysis_bias(inst, i)));
        auto ps = perceived_smoothness(inst, i);
        if (!ps) weighted_ok = false;
        if (weighted_ok)
          weighted.push_back({inst.type(i).mass, ps->first, ps->second, per.back().lambda, per.back().mu});
      }
      double b = diverse_bound_sum(per);
      rep.analytic_note = "diverse population, sum of per-type bounds";
      if (weighted_ok) {
        const double w = diverse_bound_weighted(make(1.0, cls->standard_mu(), "base"), weighted);
        if (w < b) {
          b = w;
          rep.analytic_note = "diverse population, weighted bound";
        }
      }
      rep.analytic_bound = b;
    }
  } catch (const Unsupported& e) {
    rep.analytic_note = e.what();
  } catch (const Unbounded& e) {
    rep.analytic_note = e.what();
  }
  if (rep.analytic_bound) rep.slack = *rep.analytic_bound - rep.measured_bpoa;
  return rep;
}

bool AuditReport::failed() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const AuditRow& r) { return r.status == AuditRow::Status::Fail; });
}

const char* to_string(AuditRow::Status s) {
  switch (s) {
    case AuditRow::Status::Pass:
      return "PASS";
    case AuditRow::Status::Fail:
      return "FAIL";
    case AuditRow::Status::Skipped:
      return "SKIPPED";
    case AuditRow::Status::Info:
      return "INFO";
  }
  return "?";
}

namespace {

AuditRow row(std::string check, std::string scope, double lhs, double rhs, std::string detail) {
  AuditRow r;
  r.check = std::move(check);
  r.scope = std::move(scope);
  r.slack = rhs - lhs;
  const double tol = 1e-7 * std::max(1.0, std::abs(rhs));
  r.status = lhs <= rhs + tol ? AuditRow::Status::Pass : AuditRow::Status::Fail;
  r.detail = std::move(detail);
  return r;
}

AuditRow skipped(std::string check, std::string scope, std::string why) {
  AuditRow r;
  r.check = std::move(check);
  r.scope = std::move(scope);
  r.status = AuditRow::Status::Skipped;
  r.detail = std::move(why);
  return r;
}

}  // namespace

AuditReport audit_instance(const Instance& inst, const SolverConfig& cfg) {
  AuditReport rep;
  auto& rows = rep.rows;
  const auto& net = inst.network();
  const auto cls = infer_cost_class(inst);
  const bool dsp = net.is_dsp();
  const double n = inst.total_mass();

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < inst.num_types(); ++i)
    if (inst.type(i).mass > 0.0) active.push_back(i);

  std::vector<std::optional<SmoothnessParams>> hat(inst.num_types());
  std::vector<std::string> hat_why(inst.num_types());
  for (auto i : active) {
    if (!cls) {
      hat_why[i] = "costs are not polynomial";
      continue;
    }
    try {
      hat[i] = analytic_biased_smoothness(*cls, analysis_bias(inst, i));
    } catch (const std::exception& e) {
      hat_why[i] = e.what();
    }
  }

  // (a) pointwise ratio bounds between perceived, true and marginal costs.
  for (auto i : active) {
    const std::string scope = "type " + std::to_string(i);
    if (!hat[i]) {
      rows.push_back(skipped("perceived/true ratio bounds", scope, hat_why[i]));
      continue;
    }
    const auto pc = inst.perceived(i);
    double worst_low = kInf, worst_high = kInf;
    std::string where_low, where_high;
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
      const auto& c = inst.cost(e);
      for (int k = 1; k <= 200; ++k) {
        const double x = 0.05 * k;
        const double cx = c.eval(x);
        if (cx <= 0.0) continue;
        const double chat = pc[e].eval(x);
        const double low = chat / cx - (1.0 - hat[i]->mu);
        const double high = hat[i]->lambda - chat / (cx + x * c.deriv(x));
        if (low < worst_low) {
          worst_low = low;
          where_low = net.edge(e).id + " at x=" + fmt(x);
        }
        if (high < worst_high) {
          worst_high = high;
          where_high = net.edge(e).id + " at x=" + fmt(x);
        }
      }
    }
    rows.push_back(row("perceived >= (1-mu_hat) true", scope, -worst_low, 0.0, "tightest " + where_low));
    rows.push_back(row("perceived <= lambda_hat marginal", scope, -worst_high, 0.0,
                       "tightest " + where_high));
  }

  // (b) marginal cost bounded by the convex smoothness factor.
  if (!cls) {
    rows.push_back(skipped("marginal <= lambda/(1-2mu) true", "edges", "costs are not polynomial"));
  } else if (!(cls->standard_mu() < 0.5)) {
    rows.push_back(skipped("marginal <= lambda/(1-2mu) true", "edges",
                           "class smoothness mu=" + fmt(cls->standard_mu()) + " is not below 1/2"));
  } else {
    const double factor = 1.0 / (1.0 - 2.0 * cls->standard_mu());
    double worst = kInf;
    std::string where;
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
      const auto& c = inst.cost(e);
      for (int k = 0; k <= 200; ++k) {
        const double x = 0.05 * k;
        const double gap = factor * c.eval(x) - (c.eval(x) + x * c.deriv(x));
        if (gap < worst) {
          worst = gap;
          where = net.edge(e).id + " at x=" + fmt(x);
        }
      }
    }
    rows.push_back(row("marginal <= lambda/(1-2mu) true", "edges", -worst, 0.0,
                       "factor " + fmt(factor) + ", tightest " + where));
  }

  // Solved flows shared by the remaining checks.
  auto eq = solve_equilibrium(inst, cfg);
  auto opt = solve_social_optimum(inst, cfg);
  const double sc_eq = social_cost(inst, eq.flow);
  {
    AuditRow r;
    r.check = "measured BPoA";
    r.scope = "instance";
    r.status = AuditRow::Status::Info;
    r.detail = fmt(opt.social_cost > 0 ? sc_eq / opt.social_cost : 1.0, 10) + " (equilibrium cost " +
               fmt(sc_eq, 10) + ", optimum " + fmt(opt.social_cost, 10) + ")";
    rows.push_back(r);
  }

  std::vector<SolveResult> own(inst.num_types());
  std::vector<double> opt_own(inst.num_types(), 0.0);
  if (dsp) {
    for (auto i : active) {
      own[i] = solve_equilibrium(derive_homogeneous(inst, i, true), cfg);
      opt_own[i] = solve_social_optimum(derive_homogeneous(inst, i, false), cfg).social_cost;
    }
  }

  // (c) per-type cost bounds.
  for (auto i : active) {
    const std::string scope = "type " + std::to_string(i);
    const double sci = per_type_cost(inst, eq.flow, i);
    if (!dsp) {
      rows.push_back(skipped("per-type cost, fraction-independent", scope, "not DSPG: no certificate"));
      rows.push_back(skipped("per-type cost, fraction-dependent", scope, "not DSPG: no certificate"));
      continue;
    }
    if (!hat[i]) {
      rows.push_back(skipped("per-type cost, fraction-independent", scope, hat_why[i]));
      rows.push_back(skipped("per-type cost, fraction-dependent", scope, hat_why[i]));
      continue;
    }
    const double bi = hat[i]->bound();
    rows.push_back(row("per-type cost, fraction-independent", scope, sci, bi * opt_own[i],
                       "bound " + fmt(bi) + " x optimum " + fmt(opt_own[i], 10) + ", cost " + fmt(sci, 10)));
    auto ps = perceived_smoothness(inst, i);
    if (!ps) {
      rows.push_back(skipped("per-type cost, fraction-dependent", scope, "perceived cost not polynomial"));
    } else if (!(cls->standard_mu() < 0.5)) {
      rows.push_back(skipped("per-type cost, fraction-dependent", scope, "class mu is not below 1/2"));
    } else {
      const double mu = cls->standard_mu();
      const double factor = (inst.type(i).mass / n) * ps->first * hat[i]->lambda /
                            ((1.0 - 2.0 * mu) * (1.0 - ps->second) * (1.0 - hat[i]->mu));
      rows.push_back(row("per-type cost, fraction-dependent", scope, sci, factor * opt_own[i],
                         "factor " + fmt(factor)));
    }
  }

  // (d) edge monotonicity between the mixed and the all-type-i equilibria.
  for (auto i : active) {
    const std::string scope = "type " + std::to_string(i);
    if (!dsp) {
      rows.push_back(skipped("used-edge monotonicity", scope, "not DSPG: no certificate"));
      continue;
    }
    double worst = kInf;
    std::string where = "no used edges";
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
      if (eq.flow.type_edge_flow[i][e] <= 1e-9) continue;
      const double gap = own[i].flow.edge_load[e] - eq.flow.edge_load[e];
      if (gap < worst) {
        worst = gap;
        where = net.edge(e).id;
      }
    }
    if (!std::isfinite(worst)) worst = 0.0;
    rows.push_back(row("used-edge monotonicity", scope, -worst, 1e-6, "tightest " + where));
  }

  // (e) population bounds on the measured ratio.
  if (!dsp || !inst.symmetric()) {
    rows.push_back(skipped("diverse bound (sum)", "instance", dsp ? "population is not symmetric" : "not DSPG: no certificate"));
    rows.push_back(skipped("diverse bound (weighted)", "instance", dsp ? "population is not symmetric" : "not DSPG: no certificate"));
  } else {
    const double measured = opt.social_cost > 0 ? sc_eq / opt.social_cost : 1.0;
    std::vector<SmoothnessParams> per;
    std::vector<TypeSmoothness> weighted;
    std::string why;
    bool weighted_ok = cls && cls->standard_mu() < 0.5;
    if (!weighted_ok) why = "class mu is not below 1/2";
    for (auto i : active) {
      if (!hat[i]) {
        why = hat_why[i];
        per.clear();
        weighted_ok = false;
        break;
      }
      per.push_back(*hat[i]);
      auto ps = perceived_smoothness(inst, i);
      if (!ps) {
        weighted_ok = false;
        why = "perceived cost not polynomial";
      } else if (weighted_ok) {
        weighted.push_back({inst.type(i).mass, ps->first, ps->second, hat[i]->lambda, hat[i]->mu});
      }
    }
    if (per.empty())
      rows.push_back(skipped("diverse bound (sum)", "instance", why));
    else {
      const double b = diverse_bound_sum(per);
      rows.push_back(row("diverse bound (sum)", "instance", measured, b, "bound " + fmt(b)));
    }
    if (!weighted_ok)
      rows.push_back(skipped("diverse bound (weighted)", "instance", why));
    else {
      const double b = diverse_bound_weighted(make(1.0, cls->standard_mu(), "base"), weighted);
      rows.push_back(row("diverse bound (weighted)", "instance", measured, b, "bound " + fmt(b)));
    }
  }
  return rep;
}

}  // namespace cgbias
