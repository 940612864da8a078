#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgbias/costfun.hpp"
#include "cgbias/flowsolve.hpp"

namespace cgbias {

struct CostClass {
  enum class Kind { General, Convex, Affine, Poly, Quadratic };
  Kind kind = Kind::Affine;
  double mu = 0.25;  // smoothness parameter for General/Convex
  int degree = 1;    // for Poly

  static CostClass general(double mu) { return {Kind::General, mu, 0}; }
  static CostClass convex(double mu) { return {Kind::Convex, mu, 0}; }
  static CostClass affine() { return {Kind::Affine, 0.25, 1}; }
  static CostClass quadratic() { return {Kind::Quadratic, 0.0, 2}; }
  static CostClass poly(int d) { return {Kind::Poly, 0.0, d}; }

  // Polynomial degree bound, or -1 for General/Convex.
  int max_degree() const;
  // The standard (1, mu) smoothness parameter of the class.
  double standard_mu() const;
  std::string describe() const;
};

// mu_d = d (d+1)^{-(d+1)/d}: the smoothness parameter of degree-d polynomials.
double poly_mu(int d);

struct SmoothnessParams {
  enum class Provenance { Analytic, Fitted };
  double lambda = 1.0;
  double mu = 0.0;
  Interval domain{0.0, 10.0};
  Provenance provenance = Provenance::Analytic;
  std::string tag;
  std::vector<std::string> notes;

  double bound() const;  // lambda / (1 - mu), infinity when mu >= 1
};

class Unsupported : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Unbounded : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Every analytic certificate that applies, sharpest first.
std::vector<SmoothnessParams> analytic_candidates(const CostClass& cls, const BiasSpec& bias);
// The sharpest certificate; the others are listed in its notes. Throws Unsupported.
SmoothnessParams analytic_biased_smoothness(const CostClass& cls, const BiasSpec& bias);

struct Violation {
  double value = 0.0;  // max of c(x)x + bc(x)(x'-x) - lambda c(x')x' - mu c(x)x
  double x = 0.0;
  double x_prime = 0.0;
  bool holds(double tol = 1e-9) const { return value <= tol; }
};

Violation verify_biased_smoothness(const CostModel& c, const BiasedCost& bc,
                                   const SmoothnessParams& p, int grid = 201);

SmoothnessParams fit_mu_hat(const CostModel& c, const BiasedCost& bc, double lambda = 1.0,
                            Interval domain = {}, int grid = 201);

double bpoa_upper_bound(const SmoothnessParams& p);
double diverse_bound_sum(const std::vector<SmoothnessParams>& per_type);

struct TypeSmoothness {
  double mass = 0.0;
  double lambda = 1.0, mu = 0.0;          // smoothness of the perceived cost
  double lambda_hat = 1.0, mu_hat = 0.0;  // biased smoothness of the true cost
};
double diverse_bound_weighted(const SmoothnessParams& base, const std::vector<TypeSmoothness>& types);
double adversarial_fraction_bound(const SmoothnessParams& p, double alpha);
double diverse_max_affine(const std::vector<double>& betas);

struct BoundReport {
  std::optional<double> analytic_bound;
  std::string analytic_note;
  double measured_bpoa = 0.0;
  std::optional<double> slack;
  double equilibrium_cost = 0.0;
  double optimum_cost = 0.0;
};

// Cost class covering every true edge cost, if all are polynomial.
std::optional<CostClass> infer_cost_class(const Instance& inst);
BoundReport measured_bpoa(const Instance& inst, const SolverConfig& cfg = {});

struct AuditRow {
  enum class Status { Pass, Fail, Skipped, Info };
  std::string check;
  std::string scope;
  Status status = Status::Skipped;
  double slack = 0.0;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditRow> rows;
  bool failed() const;
};

const char* to_string(AuditRow::Status s);
AuditReport audit_instance(const Instance& inst, const SolverConfig& cfg = {});

}  // namespace cgbias
