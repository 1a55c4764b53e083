#include "riemap/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "riemap/errors.hpp"

namespace riemap {

namespace {

MultiIndex unit_index(int dim, int var) {
  MultiIndex alpha(static_cast<std::size_t>(dim), 0);
  alpha[static_cast<std::size_t>(var)] = 1;
  return alpha;
}

MultiIndex pair_index(int dim, int a, int b) {
  MultiIndex alpha(static_cast<std::size_t>(dim), 0);
  alpha[static_cast<std::size_t>(a)] += 1;
  alpha[static_cast<std::size_t>(b)] += 1;
  return alpha;
}

std::vector<double> point_values(const Vec& p) { return {p.data(), p.data() + p.size()}; }

}  // namespace

ChartManifold::ChartManifold(std::string name, std::vector<std::string> coords, std::vector<std::string> parameters,
                             const std::vector<std::vector<std::string>>& metric)
    : name_(std::move(name)), coords_(std::move(coords)), parameters_(std::move(parameters)) {
  if (coords_.empty()) throw Error(ErrorKind::Schema, name_ + ": manifold needs at least one coordinate");
  scope_ = coords_;
  scope_.insert(scope_.end(), parameters_.begin(), parameters_.end());
  const int m = dim();
  if (static_cast<int>(metric.size()) != m) throw Error(ErrorKind::Schema, name_ + ": metric must have one row per coordinate");
  for (const auto& row : metric) {
    if (static_cast<int>(row.size()) != m) throw Error(ErrorKind::Schema, name_ + ": metric must be square");
    for (const auto& entry : row) metric_.push_back(parse_expression(entry, scope_));
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (this->metric(i, j).render() != this->metric(j, i).render()) {
        std::ostringstream os;
        os << name_ << ": metric-symmetry violated at (" << coords_[static_cast<std::size_t>(i)] << ", "
           << coords_[static_cast<std::size_t>(j)] << ")";
        throw Error(ErrorKind::Schema, os.str());
      }
    }
  }
}

std::vector<Expression> ChartManifold::parse_field(const std::vector<std::string>& components) const {
  if (static_cast<int>(components.size()) != dim()) {
    throw Error(ErrorKind::Schema, name_ + ": vector field needs " + std::to_string(dim()) + " components");
  }
  std::vector<Expression> out;
  for (const auto& c : components) out.push_back(parse_expression(c, scope_));
  return out;
}

Vec Riemann::apply(const Vec& x, const Vec& y, const Vec& z) const {
  Vec out = Vec::Zero(n_);
  for (int l = 0; l < n_; ++l)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) out[l] += (*this)(l, i, j, k) * x[i] * y[j] * z[k];
  return out;
}

double Riemann::lowered(const Mat& g, int i, int j, int k, int l) const {
  double acc = 0.0;
  for (int m = 0; m < n_; ++m) acc += g(l, m) * (*this)(m, i, j, k);
  return acc;
}

void check_positive_definite(const Mat& g, double pd_tol) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(g, Eigen::EigenvaluesOnly);
  const double smallest = solver.eigenvalues().minCoeff();
  if (!(smallest > pd_tol)) {
    std::ostringstream os;
    os.precision(17);
    os << "metric not positive definite: smallest eigenvalue " << smallest;
    throw Error(ErrorKind::NotPositiveDefinite, os.str());
  }
}

JetVec eval_field(const std::vector<Expression>& components, const Vec& p, int order, const Bindings& bindings) {
  const auto point = point_values(p);
  JetVec out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(eval_jet(c, point, order, bindings, kMaxJetOrder));
  return out;
}

MetricSample metric_sample(const ChartManifold& m, const Vec& p, const Bindings& bindings, double pd_tol) {
  const int n = m.dim();
  if (p.size() != n) throw Error(ErrorKind::Dimension, m.name() + ": point has wrong dimension");
  const auto point = point_values(p);
  MetricSample ms;
  ms.point = p;
  ms.g = Mat::Zero(n, n);
  ms.dg.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
  ms.d2g.assign(static_cast<std::size_t>(n), std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(n, n)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Jet jet = eval_jet(m.metric(i, j), point, 2, bindings, kMaxJetOrder);
      ms.g(i, j) = jet.value();
      for (int k = 0; k < n; ++k) {
        ms.dg[static_cast<std::size_t>(k)](i, j) = jet.derivative(unit_index(n, k));
        for (int l = 0; l < n; ++l)
          ms.d2g[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)](i, j) = jet.derivative(pair_index(n, k, l));
      }
    }
  }
  check_positive_definite(ms.g, pd_tol);
  ms.g_inv = ms.g.inverse();
  return ms;
}

Christoffel christoffel(const MetricSample& ms) {
  const int n = static_cast<int>(ms.g.rows());
  Christoffel gamma(static_cast<std::size_t>(n), Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) {
          acc += ms.g_inv(k, l) * (ms.dg[static_cast<std::size_t>(i)](j, l) + ms.dg[static_cast<std::size_t>(j)](i, l) -
                                   ms.dg[static_cast<std::size_t>(l)](i, j));
        }
        gamma[static_cast<std::size_t>(k)](i, j) = 0.5 * acc;
      }
  return gamma;
}

CurvatureSample curvature_sample(const ChartManifold& m, const Vec& p, const Bindings& bindings, double pd_tol) {
  CurvatureSample cs;
  cs.metric = metric_sample(m, p, bindings, pd_tol);
  const auto& ms = cs.metric;
  const int n = m.dim();
  cs.gamma = christoffel(ms);
  // d_a g^{kl} = -g^{kb} d_a g_bc g^{cl}
  std::vector<Mat> dginv(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) dginv[static_cast<std::size_t>(a)] = -ms.g_inv * ms.dg[static_cast<std::size_t>(a)] * ms.g_inv;
  // dgamma[a][k](i,j) = d_a Gamma^k_ij
  std::vector<std::vector<Mat>> dgamma(static_cast<std::size_t>(n), std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(n, n)));
  for (int a = 0; a < n; ++a) {
    const auto& d2 = ms.d2g[static_cast<std::size_t>(a)];
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int l = 0; l < n; ++l) {
            const double first = ms.dg[static_cast<std::size_t>(i)](j, l) + ms.dg[static_cast<std::size_t>(j)](i, l) -
                                 ms.dg[static_cast<std::size_t>(l)](i, j);
            const double second = d2[static_cast<std::size_t>(i)](j, l) + d2[static_cast<std::size_t>(j)](i, l) -
                                  d2[static_cast<std::size_t>(l)](i, j);
            acc += dginv[static_cast<std::size_t>(a)](k, l) * first + ms.g_inv(k, l) * second;
          }
          dgamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)](i, j) = 0.5 * acc;
        }
  }
  cs.riemann = Riemann(n);
  const auto& G = cs.gamma;
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = dgamma[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)](j, k) -
                     dgamma[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)](i, k);
          for (int q = 0; q < n; ++q) {
            v += G[static_cast<std::size_t>(l)](i, q) * G[static_cast<std::size_t>(q)](j, k) -
                 G[static_cast<std::size_t>(l)](j, q) * G[static_cast<std::size_t>(q)](i, k);
          }
          cs.riemann(l, i, j, k) = v;
        }
  cs.ricci = ricci_from_riemann(cs.riemann);
  cs.scalar = (ms.g_inv.cwiseProduct(cs.ricci)).sum();
  return cs;
}

Mat ricci_from_riemann(const Riemann& r) {
  const int n = r.dim();
  Mat ric = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) ric(j, k) += r(i, i, j, k);
  return ric;
}

std::vector<JetMat> christoffel(const JetMat& g, const JetMat& g_inv) {
  const int n = g.rows();
  std::vector<JetMat> dg;
  dg.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) dg.push_back(partial(g, k));
  const Jet zero = dg[0](0, 0) * 0.0;
  std::vector<JetMat> gamma(static_cast<std::size_t>(n), JetMat(n, n, zero));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet acc = zero;
        for (int l = 0; l < n; ++l) {
          acc += g_inv(k, l) * (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                                dg[static_cast<std::size_t>(l)](i, j));
        }
        acc *= 0.5;
        gamma[static_cast<std::size_t>(k)](i, j) = acc;
        gamma[static_cast<std::size_t>(k)](j, i) = acc;
      }
  return gamma;
}

MetricField metric_field(const ChartManifold& m, const Vec& p, int order, const Bindings& bindings, double pd_tol) {
  const int n = m.dim();
  if (p.size() != n) throw Error(ErrorKind::Dimension, m.name() + ": point has wrong dimension");
  if (order < 1) throw Error(ErrorKind::OrderTooLarge, "metric field needs jet order >= 1");
  const auto point = point_values(p);
  MetricField field;
  field.g = JetMat(n, n, zero_jet(n, order));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) field.g(i, j) = eval_jet(m.metric(i, j), point, order, bindings, kMaxJetOrder);
  check_positive_definite(field.g.values(), pd_tol);
  field.g_inv = inverse(field.g);
  field.gamma = christoffel(field.g, field.g_inv);
  return field;
}

Riemann riemann_from_christoffel(const std::vector<JetMat>& gamma) {
  const int n = static_cast<int>(gamma.size());
  Riemann r(n);
  auto G = [&](int k, int i, int j) { return gamma[static_cast<std::size_t>(k)](i, j).value(); };
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = gamma[static_cast<std::size_t>(l)](j, k).partial(i).value() -
                     gamma[static_cast<std::size_t>(l)](i, k).partial(j).value();
          for (int q = 0; q < n; ++q) v += G(l, i, q) * G(q, j, k) - G(l, j, q) * G(q, i, k);
          r(l, i, j, k) = v;
        }
  return r;
}

JetVec covariant(const std::vector<JetMat>& gamma, const JetVec& x, const JetVec& y) {
  JetVec out = directional(y, x);
  const int n = static_cast<int>(gamma.size());
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(k)] +=
            gamma[static_cast<std::size_t>(k)](i, j) * x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
  return out;
}

JetVec covariant(const std::vector<JetMat>& gamma, const Vec& x, const JetVec& y) {
  JetVec out = directional(y, x);
  const int n = static_cast<int>(gamma.size());
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (x[i] == 0.0) continue;
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(k)] += x[i] * (gamma[static_cast<std::size_t>(k)](i, j) * y[static_cast<std::size_t>(j)]);
    }
  return out;
}

Vec contract(const Christoffel& gamma, const Vec& x, const Vec& y) {
  const int n = static_cast<int>(gamma.size());
  Vec out(n);
  for (int k = 0; k < n; ++k) out[k] = x.dot(gamma[static_cast<std::size_t>(k)] * y);
  return out;
}

Vec covariant_derivative(const ChartManifold& m, const Vec& p, const Vec& x, const std::vector<Expression>& y,
                         const Bindings& bindings) {
  const MetricSample ms = metric_sample(m, p, bindings);
  const Christoffel gamma = christoffel(ms);
  const JetVec yj = eval_field(y, p, 1, bindings);
  const int n = m.dim();
  Vec out = contract(gamma, x, values(yj));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) out[k] += x[i] * yj[static_cast<std::size_t>(k)].derivative(unit_index(n, i));
  return out;
}

Mat lie_derivative_metric(const MetricField& field, const JetVec& xi) {
  const int n = field.dim();
  const Mat g = field.g.values();
  // nabla_i xi^k
  Mat nabla(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      double v = xi[static_cast<std::size_t>(k)].partial(i).value();
      for (int l = 0; l < n; ++l) v += field.gamma[static_cast<std::size_t>(k)](i, l).value() * xi[static_cast<std::size_t>(l)].value();
      nabla(i, k) = v;
    }
  }
  const Mat lowered = nabla * g;  // (i, j) -> g_jk nabla_i xi^k
  return lowered + lowered.transpose();
}

Mat lie_derivative_metric(const ChartManifold& m, const Vec& p, const std::vector<Expression>& xi,
                          const Bindings& bindings) {
  const MetricField field = metric_field(m, p, 1, bindings);
  return lie_derivative_metric(field, eval_field(xi, p, 1, bindings));
}

Vec gradient(const ChartManifold& m, const Vec& p, const Expression& f, const Bindings& bindings) {
  const MetricSample ms = metric_sample(m, p, bindings);
  const Jet fj = eval_jet(f, point_values(p), 1, bindings, kMaxJetOrder);
  const int n = m.dim();
  Vec df(n);
  for (int i = 0; i < n; ++i) df[i] = fj.derivative(unit_index(n, i));
  return ms.g_inv * df;
}

Vec space_form_curvature(double c, const Mat& g, const Vec& x, const Vec& y, const Vec& z) {
  return c * (y.dot(g * z) * x - x.dot(g * z) * y);
}

Mat orthonormalize(const Mat& g, const Mat& vectors) {
  Mat out = vectors;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) out.col(j) -= out.col(i).dot(g * out.col(j)) * out.col(i);
    const double norm = std::sqrt(out.col(j).dot(g * out.col(j)));
    if (norm <= 0.0) throw Error(ErrorKind::RankUnstable, "cannot orthonormalize dependent vectors");
    out.col(j) /= norm;
  }
  return out;
}

CurvatureIdentities curvature_identities(const CurvatureSample& cs, const Vec& x, const Vec& y, const Vec& z,
                                         const Mat& e1, const Mat& e2) {
  const Mat& g = cs.metric.g;
  const Riemann& r = cs.riemann;
  const int n = r.dim();
  CurvatureIdentities out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = r.lowered(g, i, j, k, l);
          out.symmetry = std::max({out.symmetry, std::fabs(v + r.lowered(g, j, i, k, l)),
                                   std::fabs(v + r.lowered(g, i, j, l, k)), std::fabs(v - r.lowered(g, k, l, i, j))});
          out.bianchi = std::max(out.bianchi, std::fabs(r(l, i, j, k) + r(l, j, k, i) + r(l, k, i, j)));
        }

  double xg = 0.0;
  for (int a = 0; a < n; ++a) xg += x[a] * y.dot(cs.metric.dg[static_cast<std::size_t>(a)] * z);
  const Vec ny = contract(cs.gamma, x, y), nz = contract(cs.gamma, x, z);
  out.compatibility = std::fabs(xg - ny.dot(g * z) - y.dot(g * nz));

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Vec va = Vec::Unit(n, a), vb = Vec::Unit(n, b);
      double r1 = 0.0, r2 = 0.0;
      for (int c = 0; c < n; ++c) {
        r1 += r.apply(e1.col(c), va, vb).dot(g * e1.col(c));
        r2 += r.apply(e2.col(c), va, vb).dot(g * e2.col(c));
      }
      out.frame = std::max({out.frame, std::fabs(r1 - r2), std::fabs(r1 - cs.ricci(a, b))});
    }
  return out;
}

}  // namespace riemap
