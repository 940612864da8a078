#include "cgbias/costfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cgbias {

namespace {

void check_load(double x) {
  if (!(x >= 0.0)) throw std::domain_error("cost evaluated at negative load");
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double horner(const std::vector<double>& a, double x) {
  double v = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) v = v * x + *it;
  return v;
}

std::vector<double> poly_deriv(const std::vector<double>& a) {
  std::vector<double> d;
  for (std::size_t k = 1; k < a.size(); ++k) d.push_back(a[k] * static_cast<double>(k));
  return d;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Coefficients of p(x0 + u) in u.
std::vector<double> taylor_shift(const std::vector<double>& a, double x0) {
  std::vector<double> b(a.size(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t j = 0; j <= k; ++j)
      b[j] += a[k] * binomial(static_cast<int>(k), static_cast<int>(j)) *
              std::pow(x0, static_cast<double>(k - j));
  return b;
}

double poly_integral(const std::vector<double>& a, double x) {
  double v = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) v = v * x + a[k] / static_cast<double>(k + 1);
  return v * x;
}

void check_finite_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0)
    throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
}

}  // namespace

CostModel::CostModel() : coeffs_{0.0} {}

CostModel CostModel::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) coefficients.push_back(0.0);
  for (double a : coefficients) check_finite_nonneg(a, "polynomial coefficient");
  CostModel c;
  c.kind_ = Kind::Polynomial;
  c.coeffs_ = std::move(coefficients);
  return c;
}

CostModel CostModel::constant(double value) { return polynomial({value}); }

CostModel CostModel::monomial(double a, int degree) {
  if (degree < 0) throw std::invalid_argument("negative degree");
  std::vector<double> co(static_cast<std::size_t>(degree) + 1, 0.0);
  co.back() = a;
  return polynomial(std::move(co));
}

CostModel CostModel::shifted_power(double a, double shift, int degree) {
  check_finite_nonneg(a, "power scale");
  check_finite_nonneg(shift, "power shift");
  if (degree < 0) throw std::invalid_argument("negative degree");
  CostModel c;
  c.kind_ = Kind::ShiftedPower;
  c.coeffs_.clear();
  c.a_ = a;
  c.shift_ = shift;
  c.d_ = degree;
  return c;
}

CostModel CostModel::table(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw std::invalid_argument("table cost needs at least one point");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].first) || points[i].first < 0.0)
      throw std::invalid_argument("table abscissa must be finite and nonnegative");
    check_finite_nonneg(points[i].second, "table value");
    if (i > 0 && !(points[i].first > points[i - 1].first))
      throw std::invalid_argument("table abscissae must be strictly increasing");
    if (i > 0 && points[i].second < points[i - 1].second)
      throw std::invalid_argument("table values must be nondecreasing");
  }
  CostModel c;
  c.kind_ = Kind::Table;
  c.coeffs_.clear();
  c.table_ = std::move(points);
  return c;
}

int CostModel::degree() const {
  switch (kind_) {
    case Kind::Polynomial: {
      for (std::size_t k = coeffs_.size(); k-- > 0;)
        if (coeffs_[k] != 0.0) return static_cast<int>(k);
      return 0;
    }
    case Kind::ShiftedPower:
      return a_ == 0.0 ? 0 : d_;
    case Kind::Table:
      return -1;
  }
  return -1;
}

double CostModel::eval(double x) const {
  check_load(x);
  switch (kind_) {
    case Kind::Polynomial:
      return horner(coeffs_, x);
    case Kind::ShiftedPower:
      return a_ * std::pow(x + shift_, d_);
    case Kind::Table: {
      if (x <= table_.front().first) return table_.front().second;
      if (x >= table_.back().first) return table_.back().second;
      auto it = std::upper_bound(table_.begin(), table_.end(), x,
                                 [](double v, const auto& p) { return v < p.first; });
      const auto& [x1, y1] = *it;
      const auto& [x0, y0] = *(it - 1);
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  }
  return 0.0;
}

double CostModel::deriv(double x) const {
  check_load(x);
  switch (kind_) {
    case Kind::Polynomial:
      return horner(poly_deriv(coeffs_), x);
    case Kind::ShiftedPower:
      return d_ == 0 ? 0.0 : a_ * d_ * std::pow(x + shift_, d_ - 1);
    case Kind::Table:
      break;
  }
  throw std::logic_error("table cost has no derivative");
}

double CostModel::deriv2(double x) const {
  check_load(x);
  switch (kind_) {
    case Kind::Polynomial:
      return horner(poly_deriv(poly_deriv(coeffs_)), x);
    case Kind::ShiftedPower:
      return d_ < 2 ? 0.0 : a_ * d_ * (d_ - 1) * std::pow(x + shift_, d_ - 2);
    case Kind::Table:
      break;
  }
  throw std::logic_error("table cost has no derivative");
}

double CostModel::integral(double x) const {
  check_load(x);
  switch (kind_) {
    case Kind::Polynomial:
      return poly_integral(coeffs_, x);
    case Kind::ShiftedPower:
      if (shift_ == 0.0) return a_ * std::pow(x, d_ + 1) / (d_ + 1);
      return a_ * (std::pow(x + shift_, d_ + 1) - std::pow(shift_, d_ + 1)) / (d_ + 1);
    case Kind::Table:
      break;
  }
  throw std::logic_error("table cost has no integral");
}

std::vector<double> CostModel::expanded() const {
  switch (kind_) {
    case Kind::Polynomial:
      return coeffs_;
    case Kind::ShiftedPower: {
      std::vector<double> co(static_cast<std::size_t>(d_) + 1, 0.0);
      for (int k = 0; k <= d_; ++k) co[k] = a_ * binomial(d_, k) * std::pow(shift_, d_ - k);
      return co;
    }
    case Kind::Table:
      break;
  }
  throw std::logic_error("table cost has no polynomial form");
}

CostModel CostModel::marginal() const {
  if (kind_ == Kind::ShiftedPower && shift_ == 0.0) return shifted_power(a_ * (d_ + 1), 0.0, d_);
  auto co = expanded();
  for (std::size_t k = 0; k < co.size(); ++k) co[k] *= static_cast<double>(k + 1);
  return polynomial(std::move(co));
}

bool CostModel::operator==(const CostModel& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::Polynomial:
      return coeffs_ == o.coeffs_;
    case Kind::ShiftedPower:
      return a_ == o.a_ && shift_ == o.shift_ && d_ == o.d_;
    case Kind::Table:
      return table_ == o.table_;
  }
  return false;
}

std::string CostModel::describe() const {
  std::ostringstream s;
  s.precision(6);
  switch (kind_) {
    case Kind::Polynomial: {
      bool first = true;
      for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        if (coeffs_[k] == 0.0) continue;
        if (!first) s << " + ";
        first = false;
        s << coeffs_[k];
        if (k >= 1) s << "x";
        if (k >= 2) s << "^" << k;
      }
      if (first) s << "0";
      break;
    }
    case Kind::ShiftedPower:
      s << a_ << "(x+" << shift_ << ")^" << d_;
      break;
    case Kind::Table:
      s << "table[" << table_.size() << "]";
      break;
  }
  return s.str();
}

BiasSpec BiasSpec::identity() { return BiasSpec(IdentityBias{}); }

BiasSpec BiasSpec::tax(double beta) {
  if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("tax sensitivity must be >= 0");
  return BiasSpec(TaxBias{beta});
}

BiasSpec BiasSpec::pessimism(double r) {
  if (!std::isfinite(r) || r < 1.0) throw std::invalid_argument("pessimism factor must be >= 1");
  return BiasSpec(PessimismBias{r});
}

BiasSpec BiasSpec::mean_var(double gamma, CostModel variance, std::optional<double> kappa,
                            std::map<std::string, CostModel> per_edge) {
  if (!std::isfinite(gamma) || gamma < 0.0) throw std::invalid_argument("risk weight must be >= 0");
  if (kappa && (!std::isfinite(*kappa) || *kappa < 0.0))
    throw std::invalid_argument("variance bound must be >= 0");
  return BiasSpec(MeanVarBias{gamma, std::move(variance), std::move(per_edge), kappa});
}

BiasSpec BiasSpec::capacity(double limit, double delta, double penalty) {
  if (!(limit > 0.0) || !std::isfinite(limit)) throw std::invalid_argument("capacity limit must be > 0");
  if (!(delta > 0.0 && delta < limit)) throw std::invalid_argument("capacity margin must lie in (0, L)");
  if (!(penalty > 0.0) || !std::isfinite(penalty))
    throw std::invalid_argument("capacity penalty must be > 0");
  return BiasSpec(CapacityBias{limit, delta, penalty});
}

BiasSpec BiasSpec::override_costs(std::map<std::string, CostModel> costs) {
  return BiasSpec(OverrideBias{std::move(costs)});
}

std::string BiasSpec::describe() const {
  std::ostringstream s;
  s.precision(6);
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, IdentityBias>) s << "identity";
        if constexpr (std::is_same_v<T, TaxBias>) s << "tax(beta=" << b.beta << ")";
        if constexpr (std::is_same_v<T, PessimismBias>) s << "pessimism(r=" << b.r << ")";
        if constexpr (std::is_same_v<T, MeanVarBias>) {
          s << "meanvar(gamma=" << b.gamma;
          if (b.kappa) s << ", kappa=" << *b.kappa;
          s << ")";
        }
        if constexpr (std::is_same_v<T, CapacityBias>)
          s << "capacity(L=" << b.limit << ", delta=" << b.delta << ", M=" << b.penalty << ")";
        if constexpr (std::is_same_v<T, OverrideBias>) s << "override(" << b.costs.size() << " edges)";
      },
      v_);
  return s.str();
}

BiasedCost::BiasedCost(CostModel base, BiasSpec bias, const std::string& edge_id)
    : base_(std::move(base)), bias_(std::move(bias)) {
  using K = CostModel::Kind;
  const auto kind = base_.kind();
  exact_ = base_;
  if (auto t = bias_.get<TaxBias>()) {
    if (kind == K::Table) throw std::invalid_argument("tax bias needs a differentiable cost");
    const double beta = t->beta;
    if (kind == K::Polynomial) {
      auto co = base_.coefficients();
      for (std::size_t k = 0; k < co.size(); ++k) co[k] *= 1.0 + beta * static_cast<double>(k);
      exact_ = CostModel::polynomial(std::move(co));
    } else if (base_.shift() == 0.0) {
      exact_ = CostModel::shifted_power(base_.scale() * (1.0 + beta * base_.degree()), 0.0,
                                        base_.degree());
    } else {
      form_ = Form::Tax;
      p1_ = beta;
    }
  } else if (auto p = bias_.get<PessimismBias>()) {
    const double r = p->r;
    if (kind == K::Polynomial) {
      auto co = base_.coefficients();
      double rk = 1.0;
      for (auto& a : co) {
        a *= rk;
        rk *= r;
      }
      exact_ = CostModel::polynomial(std::move(co));
    } else if (kind == K::ShiftedPower) {
      const int d = base_.degree();
      exact_ = CostModel::shifted_power(base_.scale() * std::pow(r, d), base_.shift() / r, d);
    } else {
      form_ = Form::Pessimism;
      p1_ = r;
    }
  } else if (auto m = bias_.get<MeanVarBias>()) {
    auto it = m->per_edge.find(edge_id);
    const CostModel& v = it != m->per_edge.end() ? it->second : m->variance;
    if (kind == K::Polynomial && v.kind() == K::Polynomial) {
      auto a = base_.coefficients();
      const auto& b = v.coefficients();
      a.resize(std::max(a.size(), b.size()), 0.0);
      for (std::size_t k = 0; k < b.size(); ++k) a[k] += m->gamma * b[k];
      exact_ = CostModel::polynomial(std::move(a));
    } else {
      form_ = Form::MeanVar;
      exact_ = v;
      p1_ = m->gamma;
    }
  } else if (auto c = bias_.get<CapacityBias>()) {
    form_ = Form::Capacity;
    p1_ = c->limit;
    p2_ = c->delta;
    p3_ = c->penalty;
  } else if (auto o = bias_.get<OverrideBias>()) {
    auto it = o->costs.find(edge_id);
    if (it != o->costs.end()) exact_ = it->second;
  }
}

bool BiasedCost::differentiable() const {
  switch (form_) {
    case Form::Exact:
      return exact_.differentiable();
    case Form::MeanVar:
      return base_.differentiable() && exact_.differentiable();
    default:
      return base_.differentiable();
  }
}

double BiasedCost::eval(double x) const {
  switch (form_) {
    case Form::Exact:
      return exact_.eval(x);
    case Form::Tax:
      return base_.eval(x) + p1_ * x * base_.deriv(x);
    case Form::Pessimism:
      check_load(x);
      return base_.eval(p1_ * x);
    case Form::MeanVar:
      return base_.eval(x) + p1_ * exact_.eval(x);
    case Form::Capacity: {
      const double x0 = p1_ - p2_;
      if (x <= x0) return base_.eval(x);
      const double y = (x - x0) / p2_;
      return base_.eval(x) * (1.0 + (y * p3_ + 1.0) * y * y);
    }
  }
  return 0.0;
}

double BiasedCost::deriv(double x) const {
  switch (form_) {
    case Form::Exact:
      return exact_.deriv(x);
    case Form::Tax:
      return (1.0 + p1_) * base_.deriv(x) + p1_ * x * base_.deriv2(x);
    case Form::Pessimism:
      check_load(x);
      return p1_ * base_.deriv(p1_ * x);
    case Form::MeanVar:
      return base_.deriv(x) + p1_ * exact_.deriv(x);
    case Form::Capacity: {
      const double x0 = p1_ - p2_;
      if (x <= x0) return base_.deriv(x);
      const double y = (x - x0) / p2_;
      const double g = 1.0 + (y * p3_ + 1.0) * y * y;
      const double dg = (2.0 * y + 3.0 * p3_ * y * y) / p2_;
      return base_.deriv(x) * g + base_.eval(x) * dg;
    }
  }
  return 0.0;
}

double BiasedCost::integral(double x) const {
  switch (form_) {
    case Form::Exact:
      return exact_.integral(x);
    case Form::Tax:
      // Integration by parts: int (c + b t c') = (1 - b) C(x) + b x c(x).
      return (1.0 - p1_) * base_.integral(x) + p1_ * x * base_.eval(x);
    case Form::Pessimism:
      check_load(x);
      return base_.integral(p1_ * x) / p1_;
    case Form::MeanVar:
      return base_.integral(x) + p1_ * exact_.integral(x);
    case Form::Capacity: {
      const double x0 = p1_ - p2_;
      if (x <= x0) return base_.integral(x);
      // Exact: expand c around x0 and multiply by the penalty polynomial in u = t - x0.
      const auto shifted = taylor_shift(base_.expanded(), x0);
      const double d = p2_;
      const std::vector<double> g{1.0, 0.0, 1.0 / (d * d), p3_ / (d * d * d)};
      return base_.integral(x0) + poly_integral(poly_mul(shifted, g), x - x0);
    }
  }
  return 0.0;
}

std::optional<CostModel> BiasedCost::closed_form() const {
  if (form_ == Form::Exact) return exact_;
  return std::nullopt;
}

BiasedCost apply_bias(const CostModel& c, const BiasSpec& bias, const std::string& edge_id) {
  return BiasedCost(c, bias, edge_id);
}

double small_bias_factor(const CostModel& c, const BiasedCost& bc, Interval domain, int grid) {
  if (grid < 2) throw std::invalid_argument("grid needs at least two points");
  if (!(domain.hi >= domain.lo) || domain.lo < 0.0) throw std::invalid_argument("bad domain");
  double worst = 1.0;
  for (int k = 0; k < grid; ++k) {
    const double x = domain.lo + (domain.hi - domain.lo) * k / (grid - 1);
    const double a = c.eval(x);
    const double b = bc.eval(x);
    if (a == 0.0 && b == 0.0) continue;
    if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max({worst, a / b, b / a});
  }
  return worst - 1.0;
}

}  // namespace cgbias
