#pragma once
// Reference computations written independently of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cgbias/netgraph.hpp"

namespace oracle {

// All simple source->target paths by DFS over a plain edge list, sorted by id sequence.
inline std::vector<std::vector<std::string>> all_paths(const std::vector<cgbias::EdgeSpec>& edges,
                                                       const std::string& s, const std::string& t) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> path, visited{s};
  std::function<void(const std::string&)> dfs = [&](const std::string& at) {
    if (at == t) {
      out.push_back(path);
      return;
    }
    for (const auto& e : edges) {
      if (e.from != at || std::find(visited.begin(), visited.end(), e.to) != visited.end()) continue;
      visited.push_back(e.to);
      path.push_back(e.id);
      dfs(e.to);
      path.pop_back();
      visited.pop_back();
    }
  };
  dfs(s);
  std::sort(out.begin(), out.end());
  return out;
}

// Path count in a DAG by memoized recursion on the edge list.
inline double count_paths(const std::vector<cgbias::EdgeSpec>& edges, const std::string& s,
                          const std::string& t) {
  std::map<std::string, double> memo;
  std::function<double(const std::string&)> go = [&](const std::string& at) -> double {
    if (at == t) return 1.0;
    if (auto it = memo.find(at); it != memo.end()) return it->second;
    double n = 0.0;
    for (const auto& e : edges)
      if (e.from == at) n += go(e.to);
    return memo[at] = n;
  };
  return go(s);
}

inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iters; ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Root of an increasing function on [lo, hi] with f(lo) <= 0 <= f(hi).
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Plain grid maximum of c(x)x + bc(x)(x'-x) - lambda c(x')x' - mu c(x)x.
inline double grid_violation(const std::function<double(double)>& c,
                             const std::function<double(double)>& bc, double lambda, double mu,
                             double hi, int n) {
  double worst = -1e300;
  for (int i = 0; i < n; ++i) {
    const double x = hi * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double y = hi * j / (n - 1);
      worst = std::max(worst, c(x) * x + bc(x) * (y - x) - lambda * c(y) * y - mu * c(x) * x);
    }
  }
  return worst;
}

// sup over a grid of (c(x)x + bc(x)(x'-x) - lambda c(x')x') / (c(x)x).
inline double grid_mu(const std::function<double(double)>& c, const std::function<double(double)>& bc,
                      double lambda, double hi, int n) {
  double worst = -1e300;
  for (int i = 1; i < n; ++i) {
    const double x = hi * i / (n - 1);
    const double cx = c(x) * x;
    if (cx <= 0.0) continue;
    for (int j = 0; j < n; ++j) {
      const double y = hi * j / (n - 1);
      worst = std::max(worst, (cx + bc(x) * (y - x) - lambda * c(y) * y) / cx);
    }
  }
  return worst;
}

// Closed forms typed from the bound tables.
inline double affine_tax_bpoa(double beta) {
  return beta <= 1.0 ? 4.0 / (4.0 * (beta + 1.0) - (beta + 1.0) * (beta + 1.0))
                     : (1.0 + beta) * (1.0 + beta) / (4.0 * beta);
}
inline double quadratic_tax_bpoa(double beta) {
  if (beta <= 1.0) {
    const double g = std::sqrt(1.0 + 2.0 * beta);
    return 1.0 / (g * g - 2.0 / (3.0 * std::sqrt(3.0)) * g * g * g);
  }
  return std::pow(1.0 + 2.0 * beta, 3) / (27.0 * beta * beta);
}

}  // namespace oracle
