#include "cgbias/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cgbias/exhibits.hpp"
#include "cgbias/instance_io.hpp"
#include "cgbias/sweep.hpp"

namespace cgbias {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v))
    throw InputError("invalid number \"" + s + "\" in " + what, what);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Interval parse_domain(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) throw InputError("domain must be lo:hi", "--domain");
  Interval d{parse_number(parts[0], "--domain"), parse_number(parts[1], "--domain")};
  if (!(d.lo >= 0.0 && d.hi > d.lo)) throw InputError("domain needs 0 <= lo < hi", "--domain");
  return d;
}

// Writes to --out when given, otherwise to the stream.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path, "--out");
  f << text;
}

struct SolverFlags {
  double tol = 1e-8;
  int max_iters = 5000;
  int restarts = 1;
  std::uint64_t seed = 0;
  std::string step = "exact";

  void attach(CLI::App* app) {
    app->add_option("--tol", tol, "convergence tolerance")->capture_default_str();
    app->add_option("--max-iters", max_iters, "iteration cap")->capture_default_str();
    app->add_option("--restarts", restarts, "random restarts for the equilibrium")->capture_default_str();
    app->add_option("--seed", seed, "seed for restart initializations")->capture_default_str();
    app->add_option("--step", step, "step rule: exact or harmonic")
        ->check(CLI::IsMember({"exact", "harmonic"}))
        ->capture_default_str();
  }
  SolverConfig config() const {
    if (!(tol > 0.0)) throw InputError("--tol must be positive", "--tol");
    if (max_iters < 1) throw InputError("--max-iters must be >= 1", "--max-iters");
    if (restarts < 1) throw InputError("--restarts must be >= 1", "--restarts");
    SolverConfig c;
    c.tolerance = tol;
    c.max_iters = max_iters;
    c.restarts = restarts;
    c.seed = seed;
    c.step_rule = step == "harmonic" ? StepRule::Harmonic : StepRule::ExactLineSearch;
    return c;
  }
};

std::string type_label(const Instance& inst, std::size_t i) {
  const auto& t = inst.type(i);
  return "type " + std::to_string(i) + " (" + t.source + "->" + t.target + ", mass " + num(t.mass) +
         ", " + t.bias.describe() + ")";
}

std::string flow_report(const Instance& inst, const FlowState& flow,
                        const EquilibriumCertificate& cert, const std::string& mode) {
  std::ostringstream s;
  s << "instance: " << inst.name() << "\n";
  s << "mode: " << mode << "\n";
  s << "converged: " << (cert.converged ? "yes" : "no") << " (iterations " << cert.iterations
    << ")\n";
  s << "edge loads:\n";
  const auto& net = inst.network();
  for (std::size_t e = 0; e < net.num_edges(); ++e)
    s << "  " << net.edge(e).id << " " << num(flow.edge_load[e]) << "\n";
  s << "type costs:\n";
  for (std::size_t i = 0; i < inst.num_types(); ++i) {
    const double c = per_type_cost(inst, flow, i);
    const double m = inst.type(i).mass;
    s << "  " << type_label(inst, i) << ": total " << num(c) << ", per unit "
      << (m > 0.0 ? num(c / m) : std::string("n/a")) << "\n";
  }
  s << "social cost: " << num(social_cost(inst, flow)) << "\n";
  s << "vi residual: " << num(cert.vi_residual) << "\n";
  s << "path cost spread: " << num(cert.per_type_path_cost_spread) << "\n";
  return s.str();
}

std::vector<CostModel> class_members(const CostClass& cls) {
  const int d = cls.max_degree();
  if (d < 0)
    throw InputError("class " + cls.describe() + " has no canonical members; pass --cost", "--class");
  std::vector<CostModel> out;
  // The inequality is linear in the cost, so monomials cover every nonnegative combination.
  for (int k = 0; k <= d; ++k) out.push_back(CostModel::monomial(1.0, k));
  return out;
}

int cmd_solve(const std::string& file, bool true_costs, const SolverFlags& flags,
              const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto loaded = load_instance(file);
  const Instance inst = true_costs ? loaded.unbiased() : loaded;
  for (const auto& w : inst.warnings()) err << "warning: " << w << "\n";
  const std::string mode = true_costs ? "equilibrium under true costs" : "biased equilibrium";
  try {
    const auto res = solve_equilibrium(inst, flags.config());
    emit(flow_report(inst, res.flow, res.certificate, mode), out_path, out);
    return kExitOk;
  } catch (const NotConverged& e) {
    emit(flow_report(inst, e.best().flow, e.best().certificate, mode), out_path, out);
    err << "error: " << e.what() << "\n";
    return kExitNotConverged;
  }
}

int cmd_opt(const std::string& file, const SolverFlags& flags, const std::string& out_path,
            std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(file);
  try {
    const auto res = solve_social_optimum(inst, flags.config());
    emit(flow_report(inst, res.flow, res.certificate, "social optimum"), out_path, out);
    return kExitOk;
  } catch (const NotConverged& e) {
    emit(flow_report(inst, e.best().flow, e.best().certificate, "social optimum"), out_path, out);
    err << "error: " << e.what() << "\n";
    return kExitNotConverged;
  }
}

int cmd_bpoa(const std::string& file, const SolverFlags& flags, const std::string& out_path,
             std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(file);
  for (const auto& w : inst.warnings()) err << "warning: " << w << "\n";
  const auto rep = measured_bpoa(inst, flags.config());
  std::ostringstream s;
  s << "instance: " << inst.name() << "\n";
  s << "equilibrium social cost: " << num(rep.equilibrium_cost) << "\n";
  s << "optimum social cost: " << num(rep.optimum_cost) << "\n";
  s << "measured BPoA: " << num(rep.measured_bpoa) << "\n";
  if (rep.analytic_bound)
    s << "analytic bound: " << num(*rep.analytic_bound) << " (" << rep.analytic_note << ")\n";
  else
    s << "analytic bound: " << rep.analytic_note << "\n";
  if (rep.slack) s << "slack: " << num(*rep.slack) << "\n";
  s << "measured_bpoa,analytic_bound,slack\n";
  s << full(rep.measured_bpoa) << "," << (rep.analytic_bound ? full(*rep.analytic_bound) : "")
    << "," << (rep.slack ? full(*rep.slack) : "") << "\n";
  emit(s.str(), out_path, out);
  return kExitOk;
}

int cmd_sweep(const std::string& cls_text, const std::string& family, double from, double to,
              double step, const SolverFlags& flags, const std::string& out_path,
              std::ostream& out) {
  const auto cls = parse_cost_class(cls_text);
  const auto grid = sweep_grid(from, to, step);
  const auto rows = run_sweep(cls, family, grid, flags.config(), sweep_threads_from_env());
  emit(sweep_csv(rows), out_path, out);
  return kExitOk;
}

struct SmoothFlags {
  std::string mode;
  std::string cls;
  std::string cost;
  std::string bias = "identity";
  std::optional<double> lambda;
  std::optional<double> mu;
  std::string domain = "0:10";
  int grid = 201;
};

int cmd_smooth(const SmoothFlags& f, const std::string& out_path, std::ostream& out) {
  if (f.cls.empty() && f.cost.empty()) throw InputError("pass --class or --cost", "--class");
  if (f.grid < 3 || f.grid > 5001) throw InputError("--grid must lie in [3, 5001]", "--grid");
  const auto domain = parse_domain(f.domain);
  const auto arg = parse_bias_arg(f.bias);
  std::optional<CostClass> cls;
  if (!f.cls.empty()) cls = parse_cost_class(f.cls);
  const auto members = f.cost.empty() ? class_members(*cls)
                                      : std::vector<CostModel>{parse_cost_descriptor(f.cost)};
  // The short meanvar form applies to whichever cost is being checked.
  auto resolve_for = [&](const CostModel& c) {
    if (!arg.relative_variance) return apply_bias(c, arg.spec, "");
    return apply_bias(c, BiasSpec::mean_var(arg.gamma, scale_cost(c, arg.kappa), arg.kappa), "");
  };

  std::ostringstream s;
  if (f.mode == "fit") {
    const double lambda = f.lambda.value_or(1.0);
    SmoothnessParams worst;
    std::string worst_cost;
    bool first = true;
    for (const auto& c : members) {
      auto p = fit_mu_hat(c, resolve_for(c), lambda, domain, f.grid);
      if (first || p.mu > worst.mu) {
        worst = p;
        worst_cost = c.describe();
        first = false;
      }
    }
    s << "fitted certificate: lambda=" << num(worst.lambda) << " mu=" << num(worst.mu)
      << " bound=" << num(worst.bound()) << "\n";
    s << "binding cost: " << worst_cost << "\n";
    s << "domain: [" << num(domain.lo) << ", " << num(domain.hi) << "], grid " << f.grid << "\n";
    for (const auto& n : worst.notes) s << "note: " << n << "\n";
    emit(s.str(), out_path, out);
    return kExitOk;
  }

  SmoothnessParams cert;
  if (f.lambda || f.mu) {
    if (!f.lambda || !f.mu) throw InputError("verify needs both --lambda and --mu", "--mu");
    cert.lambda = *f.lambda;
    cert.mu = *f.mu;
    cert.tag = "user certificate";
  } else {
    if (!cls) throw InputError("verify without --lambda/--mu needs --class", "--class");
    BiasSpec class_bias = arg.spec;
    if (arg.relative_variance)
      class_bias = BiasSpec::mean_var(arg.gamma, CostModel(), arg.kappa);
    cert = analytic_biased_smoothness(*cls, class_bias);
  }
  cert.domain = domain;
  Violation worst;
  std::string worst_cost;
  bool first = true;
  for (const auto& c : members) {
    const auto v = verify_biased_smoothness(c, resolve_for(c), cert, f.grid);
    if (first || v.value > worst.value) {
      worst = v;
      worst_cost = c.describe();
      first = false;
    }
  }
  const bool pass = worst.holds();
  s << "certificate: lambda=" << num(cert.lambda) << " mu=" << num(cert.mu)
    << " bound=" << num(cert.bound()) << " (" << cert.tag << ")\n";
  s << "worst point: cost " << worst_cost << " at (x, x') = (" << num(worst.x) << ", "
    << num(worst.x_prime) << "), excess " << num(worst.value) << "\n";
  s << "result: " << (pass ? "PASS" : "FAIL") << "\n";
  emit(s.str(), out_path, out);
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_audit(const std::string& file, const SolverFlags& flags, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(file);
  for (const auto& w : inst.warnings()) err << "warning: " << w << "\n";
  const auto rep = audit_instance(inst, flags.config());
  std::ostringstream s;
  s << "instance: " << inst.name() << "\n";
  for (const auto& r : rep.rows) {
    s << to_string(r.status) << "  " << r.check << " [" << r.scope << "]";
    if (r.status == AuditRow::Status::Pass || r.status == AuditRow::Status::Fail)
      s << " slack " << num(r.slack);
    if (!r.detail.empty()) s << ": " << r.detail;
    s << "\n";
  }
  s << "result: " << (rep.failed() ? "FAIL" : "PASS") << "\n";
  emit(s.str(), out_path, out);
  return rep.failed() ? kExitCheckFailed : kExitOk;
}

struct GenerateFlags {
  std::string family;
  double a = 1.0;
  int degree = 1;
  double mass = 1.0;
  std::string bias = "identity";
  double eps = 0.1;
  int m_exp = 60;
  double bound = 10.0;
  double budget = 1e6;
  std::string cls = "affine";
};

const std::vector<std::string> kGenerateFamilies{"pigou", "braess", "braess-adversarial",
                                                 "risk-unbounded", "tightness"};

int cmd_generate(const GenerateFlags& f, const std::string& out_path, std::ostream& out) {
  Instance inst;
  if (f.family == "pigou") {
    const auto arg = parse_bias_arg(f.bias);
    inst = with_bias(gen_pigou(f.a, f.degree, arg.spec, f.mass), arg);
  } else if (f.family == "braess") {
    const auto arg = parse_bias_arg(f.bias);
    inst = with_bias(gen_braess_quadratic(arg.spec), arg);
  } else if (f.family == "braess-adversarial") {
    inst = gen_braess_adversarial(f.eps, f.m_exp);
  } else if (f.family == "risk-unbounded") {
    if (!(f.budget >= 1.0 && f.budget <= 1e12)) throw InputError("--budget out of range", "--budget");
    inst = gen_risk_unbounded(f.eps, f.bound, static_cast<std::size_t>(f.budget));
  } else {
    const auto arg = parse_bias_arg(f.bias);
    inst = with_bias(gen_tightness(parse_cost_class(f.cls), arg.spec), arg);
  }
  emit(serialize_instance(inst), out_path, out);
  return kExitOk;
}

}  // namespace

CostClass parse_cost_class(const std::string& text) {
  const auto parts = split(text, ':');
  const auto& k = parts[0];
  if (parts.size() == 1 && k == "affine") return CostClass::affine();
  if (parts.size() == 1 && k == "quadratic") return CostClass::quadratic();
  if (parts.size() == 2 && k == "poly") {
    const double d = parse_number(parts[1], "--class");
    if (d != std::floor(d) || d < 1 || d > 50) throw InputError("poly degree must be in 1..50", "--class");
    return CostClass::poly(static_cast<int>(d));
  }
  if (parts.size() == 2 && (k == "convex" || k == "general")) {
    const double mu = parse_number(parts[1], "--class");
    if (!(mu >= 0.0 && mu < 1.0)) throw InputError("class mu must lie in [0, 1)", "--class");
    return k == "convex" ? CostClass::convex(mu) : CostClass::general(mu);
  }
  throw InputError("unknown cost class \"" + text +
                       "\" (expected affine, quadratic, poly:<d>, convex:<mu>, general:<mu>)",
                   "--class");
}

BiasArg parse_bias_arg(const std::string& text) {
  BiasArg arg;
  if (!text.empty() && text.front() == '{') {
    arg.spec = parse_bias_descriptor(text);
    return arg;
  }
  const auto parts = split(text, ':');
  const auto& k = parts[0];
  auto need = [&](std::size_t n) {
    if (parts.size() != n + 1)
      throw InputError("bias \"" + k + "\" takes " + std::to_string(n) + " parameter(s)", "--bias");
  };
  auto p = [&](std::size_t i) { return parse_number(parts[i], "--bias"); };
  try {
    if (k == "identity") {
      need(0);
      arg.spec = BiasSpec::identity();
    } else if (k == "tax") {
      need(1);
      arg.spec = BiasSpec::tax(p(1));
    } else if (k == "pessimism") {
      need(1);
      arg.spec = BiasSpec::pessimism(p(1));
    } else if (k == "capacity") {
      need(3);
      arg.spec = BiasSpec::capacity(p(1), p(2), p(3));
    } else if (k == "meanvar") {
      need(2);
      arg.relative_variance = true;
      arg.gamma = p(1);
      arg.kappa = p(2);
      if (!(arg.kappa >= 0.0)) throw InputError("meanvar kappa must be nonnegative", "--bias");
      arg.spec = BiasSpec::mean_var(arg.gamma, CostModel(), arg.kappa);
    } else {
      throw InputError("unknown bias \"" + text +
                           "\" (expected identity, tax:<beta>, pessimism:<r>, "
                           "capacity:<L>:<delta>:<M>, meanvar:<gamma>:<kappa>, or a JSON descriptor)",
                       "--bias");
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what(), "--bias");
  }
  return arg;
}

CostModel scale_cost(const CostModel& c, double k) {
  switch (c.kind()) {
    case CostModel::Kind::Polynomial: {
      auto v = c.coefficients();
      for (auto& a : v) a *= k;
      return CostModel::polynomial(std::move(v));
    }
    case CostModel::Kind::ShiftedPower:
      return CostModel::shifted_power(c.scale() * k, c.shift(), c.degree());
    case CostModel::Kind::Table: {
      auto pts = c.points();
      for (auto& pt : pts) pt.second *= k;
      return CostModel::table(std::move(pts));
    }
  }
  return c;
}

BiasSpec resolve_bias(const BiasArg& arg, const std::map<std::string, CostModel>& edge_costs) {
  if (!arg.relative_variance) return arg.spec;
  std::map<std::string, CostModel> per_edge;
  for (const auto& [id, c] : edge_costs) per_edge.emplace(id, scale_cost(c, arg.kappa));
  return BiasSpec::mean_var(arg.gamma, CostModel(), arg.kappa, std::move(per_edge));
}

Instance with_bias(const Instance& inst, const BiasArg& arg) {
  std::map<std::string, CostModel> costs;
  for (std::size_t e = 0; e < inst.network().num_edges(); ++e)
    costs.emplace(inst.network().edge(e).id, inst.cost(e));
  const auto bias = resolve_bias(arg, costs);
  auto types = inst.types();
  for (auto& t : types) t.bias = bias;
  return Instance(inst.network(), inst.base_costs(), std::move(types), inst.name());
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibria, social optima and price-of-anarchy bounds for routing games with biased agents",
               "cgbias"};
  app.require_subcommand(1);
  std::string out_path;
  SolverFlags flags;

  auto* solve = app.add_subcommand("solve", "biased (or true-cost) equilibrium of an instance");
  std::string file;
  bool biased = false, true_costs = false;
  solve->add_option("file", file, "instance document")->required();
  solve->add_flag("--biased", biased, "solve the biased game (default)");
  solve->add_flag("--true", true_costs, "solve with every bias removed");
  solve->add_option("--out", out_path, "write the report to a file");
  flags.attach(solve);

  auto* opt = app.add_subcommand("opt", "social optimum of an instance");
  opt->add_option("file", file, "instance document")->required();
  opt->add_option("--out", out_path, "write the report to a file");
  flags.attach(opt);

  auto* bpoa = app.add_subcommand("bpoa", "measured BPoA next to the analytic bound");
  bpoa->add_option("file", file, "instance document")->required();
  bpoa->add_option("--out", out_path, "write the report to a file");
  flags.attach(bpoa);

  auto* sweep = app.add_subcommand("sweep", "bound vs. measured BPoA over a bias parameter, as CSV");
  std::string sweep_class = "affine", family = "tax";
  double from = 0.0, to = 1.0, step = 0.25;
  sweep->add_option("--class", sweep_class, "cost class")->capture_default_str();
  sweep->add_option("--bias-family", family, "tax or pessimism")->capture_default_str();
  sweep->add_option("--from", from)->capture_default_str();
  sweep->add_option("--to", to)->capture_default_str();
  sweep->add_option("--step", step)->capture_default_str();
  sweep->add_option("--out", out_path, "write the CSV to a file");
  sweep->add_option("--tol", flags.tol, "solver tolerance")->capture_default_str();
  sweep->add_option("--max-iters", flags.max_iters, "iteration cap")->capture_default_str();

  auto* smooth = app.add_subcommand("smooth", "fit or verify a biased-smoothness certificate");
  SmoothFlags sf;
  smooth->add_option("mode", sf.mode, "fit or verify")->required()->check(CLI::IsMember({"fit", "verify"}));
  smooth->add_option("--class", sf.cls, "cost class");
  smooth->add_option("--cost", sf.cost, "JSON cost descriptor");
  smooth->add_option("--bias", sf.bias, "bias argument")->capture_default_str();
  smooth->add_option("--lambda", sf.lambda, "lambda of the certificate");
  smooth->add_option("--mu", sf.mu, "mu of the certificate (verify)");
  smooth->add_option("--domain", sf.domain, "load box lo:hi")->capture_default_str();
  smooth->add_option("--grid", sf.grid, "grid points per axis")->capture_default_str();
  smooth->add_option("--out", out_path, "write the report to a file");

  auto* audit = app.add_subcommand("audit", "check the per-instance bound suite");
  audit->add_option("file", file, "instance document")->required();
  audit->add_option("--out", out_path, "write the table to a file");
  flags.attach(audit);

  auto* gen = app.add_subcommand("generate", "emit a named instance as a JSON document");
  GenerateFlags gf;
  gen->add_option("family", gf.family, "pigou, braess, braess-adversarial, risk-unbounded, tightness")
      ->required()
      ->check(CLI::IsMember(kGenerateFamilies));
  gen->add_option("--a", gf.a, "pigou: scale of the variable link")->capture_default_str();
  gen->add_option("--degree", gf.degree, "pigou: degree of the variable link")->capture_default_str();
  gen->add_option("--mass", gf.mass, "pigou: demand")->capture_default_str();
  gen->add_option("--bias", gf.bias, "pigou, braess, tightness: bias argument")->capture_default_str();
  gen->add_option("--eps", gf.eps, "fraction of biased agents")->capture_default_str();
  gen->add_option("--m-exp", gf.m_exp, "braess-adversarial: exponent")->capture_default_str();
  gen->add_option("--bound", gf.bound, "risk-unbounded: target BPoA")->capture_default_str();
  gen->add_option("--budget", gf.budget, "risk-unbounded: routes x degree cap")->capture_default_str();
  gen->add_option("--class", gf.cls, "tightness: cost class")->capture_default_str();
  gen->add_option("--out", out_path, "write the document to a file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    if (dynamic_cast<const CLI::RequiredError*>(&e) && args.empty()) err << app.help();
    return kExitInput;
  }

  try {
    if (*solve) {
      if (biased && true_costs) throw InputError("--biased and --true are exclusive", "--true");
      return cmd_solve(file, true_costs, flags, out_path, out, err);
    }
    if (*opt) return cmd_opt(file, flags, out_path, out, err);
    if (*bpoa) return cmd_bpoa(file, flags, out_path, out, err);
    if (*sweep) return cmd_sweep(sweep_class, family, from, to, step, flags, out_path, out);
    if (*smooth) return cmd_smooth(sf, out_path, out);
    if (*audit) return cmd_audit(file, flags, out_path, out, err);
    return cmd_generate(gf, out_path, out);
  } catch (const NotConverged& e) {
    err << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace cgbias
