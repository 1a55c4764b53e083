#include "riemap/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>

#include "riemap/errors.hpp"

namespace riemap {

namespace {

void enumerate(int dim, int degree, int var, MultiIndex& current, std::vector<MultiIndex>& out) {
  if (var == dim - 1) {
    current[var] = degree;
    out.push_back(current);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[var] = e;
    enumerate(dim, degree - e, var + 1, current, out);
  }
  current[var] = 0;
}

}  // namespace

JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 0) throw Error(ErrorKind::Dimension, "jet dimension must be non-negative");
  if (order < 0) throw Error(ErrorKind::OrderExceeded, "jet order must be non-negative");
  if (order > kMaxJetOrder) {
    throw Error(ErrorKind::OrderTooLarge,
                "jet order " + std::to_string(order) + " exceeds cap " + std::to_string(kMaxJetOrder));
  }
  if (dim == 0) {
    indices_.push_back({});
  } else {
    MultiIndex current(dim, 0);
    for (int d = 0; d <= order; ++d) enumerate(dim, d, 0, current, indices_);
  }
  degrees_.reserve(indices_.size());
  for (const auto& a : indices_) degrees_.push_back(std::accumulate(a.begin(), a.end(), 0));

  std::size_t table = 1;
  for (int v = 0; v < dim; ++v) table *= static_cast<std::size_t>(order + 1);
  lookup_.assign(table, -1);
  for (std::size_t k = 0; k < indices_.size(); ++k) lookup_[key(indices_[k])] = static_cast<std::int32_t>(k);

  for (std::size_t i = 0; i < indices_.size(); ++i) {
    for (std::size_t j = 0; j < indices_.size(); ++j) {
      if (degrees_[i] + degrees_[j] > order) continue;
      MultiIndex sum(dim);
      for (int v = 0; v < dim; ++v) sum[v] = indices_[i][v] + indices_[j][v];
      products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                           static_cast<std::uint32_t>(lookup_[key(sum)])});
    }
  }
  std::stable_sort(products_.begin(), products_.end(),
                   [](const Product& a, const Product& b) { return a.out < b.out; });

  derivative_.resize(dim);
  if (order > 0) {
    const std::size_t target_size = size_up_to(order - 1);
    for (int v = 0; v < dim; ++v) {
      derivative_[v].resize(target_size);
      for (std::size_t t = 0; t < target_size; ++t) {
        MultiIndex raised = indices_[t];
        raised[v] += 1;
        derivative_[v][t] = {static_cast<std::uint32_t>(lookup_[key(raised)]),
                             static_cast<double>(raised[v])};
      }
    }
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(int dim, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{dim, order}];
  if (!slot) slot = std::make_shared<const JetSpace>(dim, order);
  return slot;
}

std::size_t JetSpace::key(const MultiIndex& alpha) const {
  std::size_t k = 0;
  for (int v = 0; v < dim_; ++v) k = k * static_cast<std::size_t>(order_ + 1) + static_cast<std::size_t>(alpha[v]);
  return k;
}

std::size_t JetSpace::position(const MultiIndex& alpha) const {
  if (static_cast<int>(alpha.size()) != dim_) {
    throw Error(ErrorKind::Dimension, "multi-index has " + std::to_string(alpha.size()) +
                                          " entries, jet has " + std::to_string(dim_) + " variables");
  }
  int total = 0;
  for (int a : alpha) {
    if (a < 0) throw Error(ErrorKind::Dimension, "multi-index entries must be non-negative");
    total += a;
  }
  if (total > order_) {
    throw Error(ErrorKind::OrderExceeded, "multi-index of degree " + std::to_string(total) +
                                              " exceeds jet order " + std::to_string(order_));
  }
  return static_cast<std::size_t>(lookup_[key(alpha)]);
}

std::size_t JetSpace::size_up_to(int degree) const {
  if (degree < 0) return 0;
  if (degree >= order_) return indices_.size();
  // Graded order: count monomials with degree <= `degree`.
  return static_cast<std::size_t>(
      std::upper_bound(degrees_.begin(), degrees_.end(), degree) - degrees_.begin());
}

// ---------------------------------------------------------------------------

Jet::Jet(std::shared_ptr<const JetSpace> space, double value) : space_(std::move(space)) {
  coeffs_.assign(space_->size(), 0.0);
  coeffs_[0] = value;
}

Jet Jet::constant(int dim, int order, double value) { return Jet(JetSpace::get(dim, order), value); }

Jet Jet::variable(int dim, int order, int var, double value) {
  Jet j = constant(dim, order, value);
  if (order > 0) {
    MultiIndex e(dim, 0);
    e[var] = 1;
    j.coeffs_[j.space_->position(e)] = 1.0;
  }
  return j;
}

double Jet::coefficient(const MultiIndex& alpha) const { return coeffs_[space_->position(alpha)]; }

double Jet::derivative(const MultiIndex& alpha) const {
  double factorial = 1.0;
  for (int a : alpha)
    for (int k = 2; k <= a; ++k) factorial *= k;
  return factorial * coefficient(alpha);
}

Jet Jet::truncated(int order) const {
  if (order >= this->order()) return *this;
  if (order < 0) throw Error(ErrorKind::OrderExceeded, "cannot truncate a jet to negative order");
  Jet out;
  out.space_ = JetSpace::get(dim(), order);
  out.coeffs_.assign(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(out.space_->size()));
  return out;
}

Jet Jet::partial(int var) const {
  if (order() == 0) {
    throw Error(ErrorKind::OrderExceeded, "derivative of an order-0 jet is not available");
  }
  Jet out;
  out.space_ = JetSpace::get(dim(), order() - 1);
  const auto& map = space_->derivative_map(var);
  out.coeffs_.resize(map.size());
  for (std::size_t t = 0; t < map.size(); ++t) out.coeffs_[t] = map[t].factor * coeffs_[map[t].source];
  return out;
}

bool Jet::is_constant() const {
  for (std::size_t k = 1; k < coeffs_.size(); ++k)
    if (coeffs_[k] != 0.0) return false;
  return true;
}

namespace {

void check_compatible(const Jet& a, const Jet& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::Dimension, "arithmetic on an empty jet");
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::Dimension, "jets over " + std::to_string(a.dim()) + " and " +
                                          std::to_string(b.dim()) + " variables cannot be combined");
  }
}

}  // namespace

Jet& Jet::operator+=(const Jet& other) {
  check_compatible(*this, other);
  if (other.order() < order()) *this = truncated(other.order());
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& other) {
  check_compatible(*this, other);
  if (other.order() < order()) *this = truncated(other.order());
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Jet& Jet::operator+=(double s) {
  coeffs_[0] += s;
  return *this;
}

Jet operator-(Jet a) { return a *= -1.0; }

Jet operator*(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  const auto& space = a.order() <= b.order() ? a.space_ : b.space_;
  Jet out(space, 0.0);
  const double* x = a.coeffs_.data();
  const double* y = b.coeffs_.data();
  double* z = out.coeffs_.data();
  for (const auto& p : space->products()) z[p.out] += x[p.lhs] * y[p.rhs];
  return out;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

namespace {

/// f(x0 + h) = sum_n taylor[n] h^n with h the nilpotent part of x.
Jet apply_series(const Jet& x, const std::vector<double>& taylor) {
  Jet h = x;
  h.coefficients()[0] = 0.0;
  const int order = x.order();
  Jet result(x.space(), taylor[static_cast<std::size_t>(order)]);
  for (int n = order - 1; n >= 0; --n) {
    result = result * h;
    result += taylor[static_cast<std::size_t>(n)];
  }
  return result;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v && std::fabs(v) < 1e9; }

Jet integer_power(const Jet& x, long long n) {
  Jet result(x.space(), 1.0);
  Jet base = x;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

}  // namespace

Jet exp(const Jet& x) {
  const double e = std::exp(x.value());
  std::vector<double> t(static_cast<std::size_t>(x.order()) + 1);
  for (int n = 0; n <= x.order(); ++n) t[n] = e / factorial(n);
  return apply_series(x, t);
}

Jet log(const Jet& x) {
  const double a = x.value();
  if (!(a > 0.0)) throw DomainError("log", a);
  std::vector<double> t(static_cast<std::size_t>(x.order()) + 1);
  t[0] = std::log(a);
  double p = 1.0;
  for (int n = 1; n <= x.order(); ++n) {
    p *= a;
    t[n] = ((n % 2 == 1) ? 1.0 : -1.0) / (n * p);
  }
  return apply_series(x, t);
}

Jet sin(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> t(static_cast<std::size_t>(x.order()) + 1);
  for (int n = 0; n <= x.order(); ++n) t[n] = cycle[n % 4] / factorial(n);
  return apply_series(x, t);
}

Jet cos(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  const double cycle[4] = {c, -s, -c, s};
  std::vector<double> t(static_cast<std::size_t>(x.order()) + 1);
  for (int n = 0; n <= x.order(); ++n) t[n] = cycle[n % 4] / factorial(n);
  return apply_series(x, t);
}

Jet sqrt(const Jet& x) {
  const double a = x.value();
  if (a < 0.0 || (a == 0.0 && x.order() > 0)) throw DomainError("sqrt", a);
  if (a == 0.0) return Jet(x.space(), 0.0);
  return pow(x, 0.5);
}

Jet reciprocal(const Jet& x) {
  if (x.value() == 0.0) throw DomainError("division", 0.0);
  return pow(x, -1.0);
}

Jet pow(const Jet& x, double exponent) {
  const double a = x.value();
  if (is_integer(exponent) && exponent >= 0.0) return integer_power(x, static_cast<long long>(exponent));
  if (is_integer(exponent)) {
    if (a == 0.0) throw DomainError("pow", a);
  } else if (!(a > 0.0)) {
    throw DomainError("pow", a);
  }
  // Binomial series: (a + h)^c = sum_n C(c, n) a^(c - n) h^n.
  std::vector<double> t(static_cast<std::size_t>(x.order()) + 1);
  double falling = 1.0;
  for (int n = 0; n <= x.order(); ++n) {
    if (n > 0) falling *= (exponent - (n - 1));
    t[n] = falling / factorial(n) * std::pow(a, exponent - n);
  }
  return apply_series(x, t);
}

Jet pow(const Jet& x, const Jet& y) {
  if (y.is_constant()) return pow(x, y.value());
  if (!(x.value() > 0.0)) throw DomainError("pow", x.value());
  return exp(y * log(x));
}

Jet compose(const Jet& outer, std::span<const Jet> inner) {
  if (static_cast<int>(inner.size()) != outer.dim()) {
    throw Error(ErrorKind::Dimension, "composition needs one inner jet per outer variable");
  }
  if (inner.empty()) return outer;
  int order = outer.order();
  for (const auto& j : inner) {
    check_compatible(inner[0], j);
    order = std::min(order, j.order());
  }
  const auto space = JetSpace::get(inner[0].dim(), order);
  const int n = outer.dim();

  // powers[v][e] = (inner_v - value_v)^e
  std::vector<std::vector<Jet>> powers(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    Jet h = inner[v].truncated(order);
    h.coefficients()[0] = 0.0;
    powers[v].reserve(static_cast<std::size_t>(order) + 1);
    powers[v].emplace_back(space, 1.0);
    for (int e = 1; e <= order; ++e) powers[v].push_back(powers[v].back() * h);
  }

  const auto& outer_space = *outer.space();
  const std::size_t terms = outer_space.size_up_to(order);
  Jet result(space, 0.0);
  const auto c = outer.coefficients();
  for (std::size_t k = 0; k < terms; ++k) {
    if (c[k] == 0.0) continue;
    const MultiIndex& beta = outer_space.index(k);
    Jet term(space, c[k]);
    for (int v = 0; v < n; ++v)
      if (beta[v] > 0) term = term * powers[v][static_cast<std::size_t>(beta[v])];
    result += term;
  }
  return result;
}

}  // namespace riemap
