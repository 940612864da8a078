#include "cgbias/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cgbias/exhibits.hpp"

namespace cgbias {

const std::vector<std::string>& sweep_families() {
  static const std::vector<std::string> names{"tax", "pessimism"};
  return names;
}

BiasSpec sweep_bias(const std::string& family, double param) {
  if (family == "tax") return BiasSpec::tax(param);
  if (family == "pessimism") return BiasSpec::pessimism(param);
  std::string list;
  for (const auto& f : sweep_families()) list += (list.empty() ? "" : ", ") + f;
  throw Unsupported("unsupported bias family \"" + family + "\" (supported: " + list + ")");
}

std::vector<double> sweep_grid(double from, double to, double step) {
  if (!std::isfinite(from) || !std::isfinite(to) || !std::isfinite(step))
    throw std::invalid_argument("sweep bounds must be finite");
  if (!(step > 0.0)) throw std::invalid_argument("sweep step must be positive");
  if (to < from) throw std::invalid_argument("sweep range is empty");
  const double n = std::floor((to - from) / step + 1e-9);
  if (n > 1e6) throw std::invalid_argument("sweep has too many rows");
  std::vector<double> out;
  // Multiply rather than accumulate so every row's parameter is exact to one rounding.
  for (long k = 0; k <= static_cast<long>(n); ++k) out.push_back(from + static_cast<double>(k) * step);
  return out;
}

namespace {

SweepRow sweep_row(const CostClass& cls, const std::string& family, double param,
                   const SolverConfig& cfg) {
  const auto bias = sweep_bias(family, param);
  SweepRow row;
  row.param = param;
  row.analytic_bound = bpoa_upper_bound(analytic_biased_smoothness(cls, bias));
  const auto inst = gen_tightness(cls, bias);
  auto eq = solve_equilibrium(inst, cfg);
  auto opt = solve_social_optimum(inst, cfg);
  row.measured_bpoa = social_cost(inst, eq.flow) / opt.social_cost;
  row.slack = row.analytic_bound - row.measured_bpoa;
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const CostClass& cls, const std::string& family,
                                const std::vector<double>& params, const SolverConfig& cfg,
                                unsigned threads) {
  sweep_bias(family, 1.0);  // reject unknown families before spawning work
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, params.size())));

  std::vector<SweepRow> rows(params.size());
  std::vector<std::exception_ptr> errors(params.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < params.size();) {
      try {
        rows[k] = sweep_row(cls, family, params[k], cfg);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

unsigned sweep_threads_from_env() {
  const char* v = std::getenv("CGBIAS_THREADS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0 || n > 4096)
    throw std::invalid_argument("CGBIAS_THREADS must be an integer in [0, 4096]");
  return static_cast<unsigned>(n);
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "param,analytic_bound,measured_bpoa,slack\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.param, r.analytic_bound,
                  r.measured_bpoa, r.slack);
    out += buf;
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "param,analytic_bound,measured_bpoa,slack")
    throw std::invalid_argument("sweep CSV: missing or wrong header");
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v[4];
    const char* p = line.c_str();
    for (int k = 0; k < 4; ++k) {
      char* end = nullptr;
      v[k] = std::strtod(p, &end);
      const char want = k < 3 ? ',' : '\0';
      if (end == p || *end != want)
        throw std::invalid_argument("sweep CSV: bad field on line " + std::to_string(lineno));
      p = end + (k < 3 ? 1 : 0);
    }
    rows.push_back({v[0], v[1], v[2], v[3]});
  }
  return rows;
}

}  // namespace cgbias
