#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace riemap {

/// Exponent vector of a monomial; entry v is the power of variable v.
using MultiIndex = std::vector<int>;

/// Largest order accepted when building jet spaces.
inline constexpr int kMaxJetOrder = 8;

/// Monomial bookkeeping for truncated Taylor polynomials in `dim` variables
/// up to total degree `order`.
///
/// Monomials are stored in graded order (by total degree, then
/// lexicographically), so the coefficients of a lower-order jet are a prefix
/// of the coefficients of a higher-order one.  Instances are shared and
/// immutable; obtain them through get().
class JetSpace {
 public:
  struct Product {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  struct DerivativeEntry {
    std::uint32_t source;
    double factor;
  };

  static std::shared_ptr<const JetSpace> get(int dim, int order);

  int dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return indices_.size(); }

  const MultiIndex& index(std::size_t position) const { return indices_[position]; }
  int degree(std::size_t position) const { return degrees_[position]; }

  /// Position of `alpha`; throws OrderExceeded when |alpha| > order.
  std::size_t position(const MultiIndex& alpha) const;

  /// Number of monomials with total degree <= `degree`.
  std::size_t size_up_to(int degree) const;

  /// All (lhs, rhs, out) with index(lhs) + index(rhs) == index(out).
  const std::vector<Product>& products() const noexcept { return products_; }

  /// For the partial derivative along `var`: entry t gives the source
  /// coefficient and the factor producing coefficient t of the derivative
  /// (which lives in the space of order - 1).
  const std::vector<DerivativeEntry>& derivative_map(int var) const { return derivative_[var]; }

  JetSpace(int dim, int order);

 private:
  int dim_;
  int order_;
  std::vector<MultiIndex> indices_;
  std::vector<int> degrees_;
  std::vector<std::int32_t> lookup_;
  std::vector<Product> products_;
  std::vector<std::vector<DerivativeEntry>> derivative_;

  std::size_t key(const MultiIndex& alpha) const;
};

/// Truncated multivariate Taylor expansion at a base point.
///
/// Coefficient alpha stores d^alpha f / alpha!.  Arithmetic between jets of
/// different orders is carried out at the smaller order.
class Jet {
 public:
  Jet() = default;
  Jet(std::shared_ptr<const JetSpace> space, double value);

  static Jet constant(int dim, int order, double value);
  /// The coordinate function x_var expanded at `value`.
  static Jet variable(int dim, int order, int var, double value);

  bool empty() const noexcept { return space_ == nullptr; }
  int dim() const noexcept { return space_->dim(); }
  int order() const noexcept { return space_->order(); }
  const std::shared_ptr<const JetSpace>& space() const noexcept { return space_; }

  double value() const { return coeffs_[0]; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }
  std::span<double> coefficients() noexcept { return coeffs_; }

  double coefficient(const MultiIndex& alpha) const;
  /// alpha! * coefficient(alpha), i.e. the raw partial derivative.
  double derivative(const MultiIndex& alpha) const;

  Jet truncated(int order) const;
  /// Partial derivative along variable `var`; the result has order - 1.
  Jet partial(int var) const;
  /// True when every coefficient of positive degree vanishes.
  bool is_constant() const;

  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator*=(double s);
  Jet& operator+=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator-(Jet a);
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }

 private:
  std::shared_ptr<const JetSpace> space_;
  std::vector<double> coeffs_;
};

Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet sqrt(const Jet& x);
Jet reciprocal(const Jet& x);
/// x^c for a real constant exponent.  Integer exponents accept any base
/// (non-zero when negative); other exponents need a positive base.
Jet pow(const Jet& x, double exponent);
/// x^y; a constant y falls back to pow(x, double), otherwise exp(y log x).
Jet pow(const Jet& x, const Jet& y);

/// Substitutes `inner` (one jet per variable of outer's space, all over a
/// common space) into the Taylor polynomial `outer`.  The expansion point of
/// `outer` must equal the values of `inner`; the result has the smaller of
/// the two orders.
Jet compose(const Jet& outer, std::span<const Jet> inner);

}  // namespace riemap
