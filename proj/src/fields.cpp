#include "riemap/fields.hpp"

#include <algorithm>
#include <cmath>

#include "riemap/errors.hpp"

namespace riemap {

JetVec JetMat::column(int j) const {
  JetVec out;
  out.reserve(static_cast<std::size_t>(rows_));
  for (int i = 0; i < rows_; ++i) out.push_back((*this)(i, j));
  return out;
}

JetMat JetMat::transpose() const {
  JetMat t;
  t.rows_ = cols_;
  t.cols_ = rows_;
  t.data_.resize(data_.size());
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Mat JetMat::values() const {
  Mat out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).value();
  return out;
}

int JetMat::order() const {
  int o = kMaxJetOrder;
  for (const auto& j : data_) o = std::min(o, j.order());
  return o;
}

Jet zero_jet(int dim, int order) { return Jet::constant(dim, order, 0.0); }

JetVec constant_field(const Vec& v, int dim, int order) {
  JetVec out;
  out.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(Jet::constant(dim, order, v[i]));
  return out;
}

Vec values(const JetVec& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].value();
  return out;
}

int order_of(const JetVec& v) {
  int o = kMaxJetOrder;
  for (const auto& j : v) o = std::min(o, j.order());
  return o;
}

JetVec truncated(const JetVec& v, int order) {
  JetVec out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.truncated(order));
  return out;
}

JetVec operator+(const JetVec& a, const JetVec& b) {
  JetVec out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

JetVec operator-(const JetVec& a, const JetVec& b) {
  JetVec out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

JetVec operator*(const Jet& s, const JetVec& v) {
  JetVec out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(s * x);
  return out;
}

JetVec operator*(double s, const JetVec& v) {
  JetVec out = v;
  for (auto& x : out) x *= s;
  return out;
}

JetVec operator*(const JetMat& a, const JetVec& v) {
  JetVec out;
  out.reserve(static_cast<std::size_t>(a.rows()));
  for (int i = 0; i < a.rows(); ++i) {
    Jet acc = a(i, 0) * v[0];
    for (int j = 1; j < a.cols(); ++j) acc += a(i, j) * v[static_cast<std::size_t>(j)];
    out.push_back(std::move(acc));
  }
  return out;
}

JetMat operator*(const JetMat& a, const JetMat& b) {
  JetMat out(a.rows(), b.cols(), a(0, 0));
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      Jet acc = a(i, 0) * b(0, j);
      for (int k = 1; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = std::move(acc);
    }
  }
  return out;
}

JetMat operator-(const JetMat& a, const JetMat& b) {
  JetMat out = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) -= b(i, j);
  return out;
}

Jet inner(const JetMat& g, const JetVec& a, const JetVec& b) {
  Jet acc = g(0, 0) * a[0] * b[0];
  bool first = true;
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) {
      if (first) {
        first = false;
        continue;
      }
      acc += g(i, j) * a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
    }
  }
  return acc;
}

JetMat inverse(const JetMat& a) {
  const int n = a.rows();
  const Jet zero = a(0, 0) * 0.0;
  JetMat work = a;
  JetMat inv(n, n, zero);
  for (int i = 0; i < n; ++i) inv(i, i) = zero + 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(work(r, col).value()) > std::fabs(work(pivot, col).value())) pivot = r;
    if (work(pivot, col).value() == 0.0) throw Error(ErrorKind::NotPositiveDefinite, "singular jet matrix");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(work(pivot, c), work(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    const Jet scale = reciprocal(work(col, col));
    for (int c = 0; c < n; ++c) {
      work(col, c) = work(col, c) * scale;
      inv(col, c) = inv(col, c) * scale;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet factor = work(r, col);
      for (int c = 0; c < n; ++c) {
        work(r, c) -= factor * work(col, c);
        inv(r, c) -= factor * inv(col, c);
      }
    }
  }
  return inv;
}

JetVec partial(const JetVec& v, int var) {
  JetVec out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.partial(var));
  return out;
}

JetVec directional(const JetVec& v, const JetVec& x) {
  JetVec out = x[0] * partial(v, 0);
  for (std::size_t i = 1; i < x.size(); ++i) out = out + x[i] * partial(v, static_cast<int>(i));
  return out;
}

JetVec directional(const JetVec& v, const Vec& x) {
  JetVec out = x[0] * partial(v, 0);
  for (Eigen::Index i = 1; i < x.size(); ++i) out = out + x[i] * partial(v, static_cast<int>(i));
  return out;
}

JetMat partial(const JetMat& m, int var) {
  JetMat out(m.rows(), m.cols(), m(0, 0).partial(var));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).partial(var);
  return out;
}

std::vector<JetVec> pivoted_gram_schmidt(const JetMat& g, const std::vector<JetVec>& candidates, int count,
                                         const std::vector<JetVec>& against) {
  std::vector<JetVec> basis = against;
  std::vector<JetVec> chosen;
  std::vector<bool> used(candidates.size(), false);
  for (int step = 0; step < count; ++step) {
    int best = -1;
    double best_norm = -1.0;
    JetVec best_residual;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      JetVec r = candidates[c];
      for (const auto& e : basis) r = r - inner(g, r, e) * e;
      const double norm = std::sqrt(std::max(0.0, inner(g, r, r).value()));
      if (norm > best_norm) {
        best_norm = norm;
        best = static_cast<int>(c);
        best_residual = std::move(r);
      }
    }
    if (best < 0 || best_norm <= 0.0) {
      throw Error(ErrorKind::RankUnstable, "not enough independent directions for an orthonormal frame");
    }
    used[static_cast<std::size_t>(best)] = true;
    // Second projection pass for numerical orthogonality.
    for (const auto& e : basis) best_residual = best_residual - inner(g, best_residual, e) * e;
    const Jet inv_norm = pow(inner(g, best_residual, best_residual), -0.5);
    JetVec e = inv_norm * best_residual;
    basis.push_back(e);
    chosen.push_back(std::move(e));
  }
  return chosen;
}

JetMat projector(const JetMat& g, const std::vector<JetVec>& orthonormal, int dim) {
  const Jet zero = g(0, 0) * 0.0;
  JetMat p(dim, dim, zero);
  for (const auto& e : orthonormal) {
    const JetVec ge = g * e;  // lowered
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) p(a, b) += e[static_cast<std::size_t>(a)] * ge[static_cast<std::size_t>(b)];
  }
  return p;
}

}  // namespace riemap
