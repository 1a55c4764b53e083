#pragma once

#include <map>
#include <string>
#include <vector>

#include "riemap/expr.hpp"
#include "riemap/fields.hpp"

namespace riemap {

using Bindings = std::map<std::string, double>;

inline constexpr double kDefaultPdTol = 1e-10;

/// A manifold covered by a single chart.  The metric entries are expressions
/// over the coordinates followed by the declared parameter names; parameters
/// are bound per evaluation.
class ChartManifold {
 public:
  ChartManifold() = default;
  /// Throws Schema on a non-symmetric or mis-shaped metric, SyntaxError or
  /// UnknownIdentifier on bad entries.
  ChartManifold(std::string name, std::vector<std::string> coords, std::vector<std::string> parameters,
                const std::vector<std::vector<std::string>>& metric);

  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return static_cast<int>(coords_.size()); }
  const std::vector<std::string>& coords() const noexcept { return coords_; }
  const std::vector<std::string>& parameters() const noexcept { return parameters_; }
  /// coords followed by parameters; the scope for every expression on this chart.
  const std::vector<std::string>& scope() const noexcept { return scope_; }
  const Expression& metric(int i, int j) const { return metric_[static_cast<std::size_t>(i * dim() + j)]; }

  /// Parses a list of expressions over scope().
  std::vector<Expression> parse_field(const std::vector<std::string>& components) const;

 private:
  std::string name_;
  std::vector<std::string> coords_;
  std::vector<std::string> parameters_;
  std::vector<std::string> scope_;
  std::vector<Expression> metric_;
};

struct MetricSample {
  Vec point;
  Mat g;
  Mat g_inv;
  std::vector<Mat> dg;                 // dg[k](i,j) = d_k g_ij
  std::vector<std::vector<Mat>> d2g;   // d2g[k][l](i,j) = d_k d_l g_ij
};

/// Gamma[k](i,j) = Gamma^k_ij.
using Christoffel = std::vector<Mat>;

/// Components R^l_ijk of R(d_i, d_j) d_k.
class Riemann {
 public:
  Riemann() = default;
  explicit Riemann(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n * n), 0.0) {}

  int dim() const noexcept { return n_; }
  double& operator()(int l, int i, int j, int k) { return data_[index(l, i, j, k)]; }
  double operator()(int l, int i, int j, int k) const { return data_[index(l, i, j, k)]; }

  /// R(X, Y) Z.
  Vec apply(const Vec& x, const Vec& y, const Vec& z) const;
  /// R_ijkl = g_lm R^m_ijk.
  double lowered(const Mat& g, int i, int j, int k, int l) const;

 private:
  int n_ = 0;
  std::vector<double> data_;
  std::size_t index(int l, int i, int j, int k) const {
    return static_cast<std::size_t>(((l * n_ + i) * n_ + j) * n_ + k);
  }
};

struct CurvatureSample {
  MetricSample metric;
  Christoffel gamma;
  Riemann riemann;
  Mat ricci;
  double scalar = 0.0;
};

/// Metric and its jets up to `order` around a point, plus Christoffel jets.
struct MetricField {
  JetMat g;
  JetMat g_inv;
  std::vector<JetMat> gamma;  // gamma[k](i,j), one order lower than g
  int dim() const { return g.rows(); }
};

/// Throws NotPositiveDefinite when the smallest eigenvalue is <= pd_tol.
void check_positive_definite(const Mat& g, double pd_tol);

MetricSample metric_sample(const ChartManifold& m, const Vec& p, const Bindings& bindings = {},
                           double pd_tol = kDefaultPdTol);
Christoffel christoffel(const MetricSample& ms);
CurvatureSample curvature_sample(const ChartManifold& m, const Vec& p, const Bindings& bindings = {},
                                 double pd_tol = kDefaultPdTol);

/// Jet-level metric data of the given order (>= 1).
MetricField metric_field(const ChartManifold& m, const Vec& p, int order, const Bindings& bindings = {},
                         double pd_tol = kDefaultPdTol);
/// Christoffel jets from metric jets.
std::vector<JetMat> christoffel(const JetMat& g, const JetMat& g_inv);
/// Riemann tensor at the base point from Christoffel jets of order >= 1.
Riemann riemann_from_christoffel(const std::vector<JetMat>& gamma);
Mat ricci_from_riemann(const Riemann& r);

/// Jets of expression components at p (p covers the coordinates; parameters
/// come from bindings).
JetVec eval_field(const std::vector<Expression>& components, const Vec& p, int order,
                  const Bindings& bindings = {});

/// nabla_X Y for jet fields: X(Y) + Gamma(X, Y).
JetVec covariant(const std::vector<JetMat>& gamma, const JetVec& x, const JetVec& y);
JetVec covariant(const std::vector<JetMat>& gamma, const Vec& x, const JetVec& y);
/// Gamma(X, Y) with constant vectors.
Vec contract(const Christoffel& gamma, const Vec& x, const Vec& y);

Vec covariant_derivative(const ChartManifold& m, const Vec& p, const Vec& x, const std::vector<Expression>& y,
                         const Bindings& bindings = {});
/// (L_xi g)_ij = g(nabla_i xi, d_j) + g(nabla_j xi, d_i).
Mat lie_derivative_metric(const ChartManifold& m, const Vec& p, const std::vector<Expression>& xi,
                          const Bindings& bindings = {});
Mat lie_derivative_metric(const MetricField& field, const JetVec& xi);
Vec gradient(const ChartManifold& m, const Vec& p, const Expression& f, const Bindings& bindings = {});
/// c { g(Y,Z) X - g(X,Z) Y }.
Vec space_form_curvature(double c, const Mat& g, const Vec& x, const Vec& y, const Vec& z);
inline Vec space_form_curvature(double c, const MetricSample& ms, const Vec& x, const Vec& y, const Vec& z) {
  return space_form_curvature(c, ms.g, x, y, z);
}

/// Modified Gram-Schmidt of the columns of `vectors` in the inner product g.
Mat orthonormalize(const Mat& g, const Mat& vectors);

/// Worst residuals of the algebraic curvature identities at one sample.
struct CurvatureIdentities {
  double symmetry = 0.0;       // R_ijkl antisymmetry in each pair and pair exchange
  double bianchi = 0.0;        // first Bianchi identity
  double compatibility = 0.0;  // X g(Y,Z) = g(nabla_X Y, Z) + g(Y, nabla_X Z), Y and Z coordinate-constant
  double frame = 0.0;          // Ricci traced in the frames e1, e2 and in coordinates
};
CurvatureIdentities curvature_identities(const CurvatureSample& cs, const Vec& x, const Vec& y, const Vec& z,
                                         const Mat& e1, const Mat& e2);

}  // namespace riemap
