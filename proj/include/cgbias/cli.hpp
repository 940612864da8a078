#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cgbias/costfun.hpp"
#include "cgbias/flowsolve.hpp"
#include "cgbias/smoothbounds.hpp"

namespace cgbias {

// Stable process exit codes.
enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNotConverged = 2, kExitCheckFailed = 3 };

// "affine", "quadratic", "poly:<d>", "convex:<mu>", "general:<mu>".
CostClass parse_cost_class(const std::string& text);

// Bias argument: a JSON descriptor, or "identity", "tax:<beta>", "pessimism:<r>",
// "capacity:<L>:<delta>:<M>", "meanvar:<gamma>:<kappa>". The short meanvar form sets each
// edge's variance to kappa times its true cost, so it needs the costs it will be applied to.
struct BiasArg {
  BiasSpec spec;
  bool relative_variance = false;
  double gamma = 0.0, kappa = 0.0;
};
BiasArg parse_bias_arg(const std::string& text);
// Resolves a relative mean-variance argument against concrete edge costs.
BiasSpec resolve_bias(const BiasArg& arg, const std::map<std::string, CostModel>& edge_costs);
// Same instance with every type's bias replaced by `arg` resolved on the instance's costs.
Instance with_bias(const Instance& inst, const BiasArg& arg);

CostModel scale_cost(const CostModel& c, double k);

// Runs the command line (without the program name). Output goes to `out` unless --out names a
// file; diagnostics go to `err`. Returns one of the ExitCode values.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cgbias
