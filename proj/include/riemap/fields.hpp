#pragma once

#include <Eigen/Dense>
#include <vector>

#include "riemap/jet.hpp"

namespace riemap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A vector field near a point, one jet per component.
using JetVec = std::vector<Jet>;

/// Dense matrix of jets over a common space (row-major).
class JetMat {
 public:
  JetMat() = default;
  JetMat(int rows, int cols, const Jet& fill)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  Jet& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
  const Jet& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * cols_ + j)]; }

  JetVec column(int j) const;
  JetMat transpose() const;
  Mat values() const;
  int order() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Jet> data_;
};

Jet zero_jet(int dim, int order);
JetVec constant_field(const Vec& v, int dim, int order);
Vec values(const JetVec& v);
int order_of(const JetVec& v);
JetVec truncated(const JetVec& v, int order);

JetVec operator+(const JetVec& a, const JetVec& b);
JetVec operator-(const JetVec& a, const JetVec& b);
JetVec operator*(const Jet& s, const JetVec& v);
JetVec operator*(double s, const JetVec& v);
JetVec operator*(const JetMat& a, const JetVec& v);
JetMat operator*(const JetMat& a, const JetMat& b);
JetMat operator-(const JetMat& a, const JetMat& b);

/// a^T g b
Jet inner(const JetMat& g, const JetVec& a, const JetVec& b);
/// Jet-valued inverse by Gauss-Jordan elimination with value pivoting.
JetMat inverse(const JetMat& a);

JetVec partial(const JetVec& v, int var);
/// sum_i x^i d_i v, the directional derivative along the field x.
JetVec directional(const JetVec& v, const JetVec& x);
/// Same for a direction given only at the base point.
JetVec directional(const JetVec& v, const Vec& x);
JetMat partial(const JetMat& m, int var);

/// Gram-Schmidt in the metric g with value-based pivoting.  Picks `count`
/// vectors from `candidates` (largest remaining norm first, lowest index on
/// ties), projects out `against` (assumed g-orthonormal), and returns the
/// orthonormalised fields in selection order.
std::vector<JetVec> pivoted_gram_schmidt(const JetMat& g, const std::vector<JetVec>& candidates, int count,
                                         const std::vector<JetVec>& against = {});

/// Projector sum_j e_j e_j^T g onto the span of g-orthonormal fields.
JetMat projector(const JetMat& g, const std::vector<JetVec>& orthonormal, int dim);

}  // namespace riemap
