#pragma once

#include <string>
#include <vector>

#include "cgbias/costfun.hpp"
#include "cgbias/flowsolve.hpp"
#include "cgbias/smoothbounds.hpp"

namespace cgbias {

struct SweepRow {
  double param = 0.0;
  double analytic_bound = 0.0;
  double measured_bpoa = 0.0;
  double slack = 0.0;  // analytic_bound - measured_bpoa
  bool operator==(const SweepRow&) const = default;
};

// Bias families that have tight instances: "tax" (beta) and "pessimism" (r).
const std::vector<std::string>& sweep_families();
BiasSpec sweep_bias(const std::string& family, double param);

// from, from + step, ... up to `to` (inclusive within a 1e-9 step fraction).
std::vector<double> sweep_grid(double from, double to, double step);

// One row per grid value, computed on up to `threads` workers (0 = hardware concurrency).
// Rows come back in grid order.
std::vector<SweepRow> run_sweep(const CostClass& cls, const std::string& family,
                                const std::vector<double>& params, const SolverConfig& cfg = {},
                                unsigned threads = 1);

// Worker count from CGBIAS_THREADS; unset or 0 means hardware concurrency.
unsigned sweep_threads_from_env();

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

}  // namespace cgbias
