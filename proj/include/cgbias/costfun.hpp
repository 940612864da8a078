#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cgbias {

// One-dimensional nondecreasing latency on [0, inf). All evaluators throw
// std::domain_error for negative loads.
class CostModel {
 public:
  enum class Kind { Polynomial, ShiftedPower, Table };

  CostModel();  // the zero polynomial
  static CostModel polynomial(std::vector<double> coefficients);  // a0 + a1 x + ...
  static CostModel constant(double value);
  static CostModel monomial(double a, int degree);
  // a * (x + shift)^degree with a, shift >= 0.
  static CostModel shifted_power(double a, double shift, int degree);
  // Piecewise-linear through sorted (x, y) points, flat outside the range.
  static CostModel table(std::vector<std::pair<double, double>> points);

  Kind kind() const { return kind_; }
  bool differentiable() const { return kind_ != Kind::Table; }
  int degree() const;

  double eval(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;
  double integral(double x) const;  // from 0 to x

  // x -> c(x) + x c'(x)
  CostModel marginal() const;
  // Expanded coefficients for Polynomial and ShiftedPower kinds.
  std::vector<double> expanded() const;

  const std::vector<double>& coefficients() const { return coeffs_; }
  double scale() const { return a_; }
  double shift() const { return shift_; }
  const std::vector<std::pair<double, double>>& points() const { return table_; }

  bool operator==(const CostModel& other) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Polynomial;
  std::vector<double> coeffs_;
  double a_ = 0.0, shift_ = 0.0;
  int d_ = 0;
  std::vector<std::pair<double, double>> table_;
};

struct IdentityBias {
  bool operator==(const IdentityBias&) const = default;
};
struct TaxBias {
  double beta = 0.0;
  bool operator==(const TaxBias&) const = default;
};
struct PessimismBias {
  double r = 1.0;
  bool operator==(const PessimismBias&) const = default;
};
struct MeanVarBias {
  double gamma = 0.0;
  CostModel variance;                          // default per-edge variance model
  std::map<std::string, CostModel> per_edge;   // overrides by edge id
  std::optional<double> kappa;                 // declared v <= kappa * c, or unbounded
  bool operator==(const MeanVarBias&) const = default;
};
struct CapacityBias {
  double limit = 1.0;
  double delta = 0.5;
  double penalty = 1.0;
  bool operator==(const CapacityBias&) const = default;
};
struct OverrideBias {
  std::map<std::string, CostModel> costs;  // edge id -> perceived cost
  bool operator==(const OverrideBias&) const = default;
};

class BiasSpec {
 public:
  using Variant =
      std::variant<IdentityBias, TaxBias, PessimismBias, MeanVarBias, CapacityBias, OverrideBias>;

  BiasSpec() = default;
  static BiasSpec identity();
  static BiasSpec tax(double beta);
  static BiasSpec pessimism(double r);
  static BiasSpec mean_var(double gamma, CostModel variance, std::optional<double> kappa = {},
                           std::map<std::string, CostModel> per_edge = {});
  static BiasSpec capacity(double limit, double delta, double penalty);
  static BiasSpec override_costs(std::map<std::string, CostModel> costs);

  const Variant& variant() const { return v_; }
  template <class T>
  const T* get() const {
    return std::get_if<T>(&v_);
  }
  bool is_identity() const { return std::holds_alternative<IdentityBias>(v_); }
  std::string describe() const;
  bool operator==(const BiasSpec& other) const = default;

 private:
  explicit BiasSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// Perceived cost of one edge for one agent type.
class BiasedCost {
 public:
  BiasedCost() = default;
  BiasedCost(CostModel base, BiasSpec bias, const std::string& edge_id = {});

  double eval(double x) const;
  double deriv(double x) const;
  double integral(double x) const;
  bool differentiable() const;
  bool integrable() const { return differentiable(); }

  const CostModel& base() const { return base_; }
  const BiasSpec& bias() const { return bias_; }
  // Perceived cost as a plain cost model where one exists in closed form.
  std::optional<CostModel> closed_form() const;

 private:
  enum class Form { Exact, Tax, Pessimism, MeanVar, Capacity };
  CostModel base_;
  BiasSpec bias_;
  Form form_ = Form::Exact;
  CostModel exact_;     // Exact form, or the variance model for MeanVar
  double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
};

BiasedCost apply_bias(const CostModel& c, const BiasSpec& bias, const std::string& edge_id = {});

struct Interval {
  double lo = 0.0;
  double hi = 10.0;
};

// Smallest eps with max(bc/c, c/bc) <= 1 + eps on a uniform grid over the domain.
// Points where both costs vanish are skipped; infinity if only one vanishes.
double small_bias_factor(const CostModel& c, const BiasedCost& bc, Interval domain = {},
                         int grid = 1001);

}  // namespace cgbias
