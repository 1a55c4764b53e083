#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riemap/geometry.hpp"

namespace riemap {

struct MapOptions {
  int jet_order = 4;
  double rank_tol = 1e-8;
  double pd_tol = kDefaultPdTol;
};

/// A smooth map between two chart manifolds.
///
/// Target metric parameters are bound, per source point, to expressions over
/// the source coordinates.  Optional ambient extensions are vector fields on
/// the target (expressions over the target scope) that extend the range and
/// normal frames off the image.
class SmoothMap {
 public:
  SmoothMap(ChartManifold source, ChartManifold target, const std::vector<std::string>& components,
            const std::vector<std::pair<std::string, std::string>>& parameters = {},
            const std::vector<std::vector<std::string>>& range_extensions = {},
            const std::vector<std::vector<std::string>>& normal_extensions = {});

  const ChartManifold& source() const noexcept { return source_; }
  const ChartManifold& target() const noexcept { return target_; }
  const std::vector<Expression>& components() const noexcept { return components_; }
  /// One expression per target parameter, in target().parameters() order.
  const std::vector<Expression>& parameters() const noexcept { return parameters_; }
  const std::vector<std::vector<Expression>>& range_extensions() const noexcept { return range_ext_; }
  const std::vector<std::vector<Expression>>& normal_extensions() const noexcept { return normal_ext_; }
  bool has_extensions() const noexcept { return !range_ext_.empty() || !normal_ext_.empty(); }

  Bindings target_bindings(const Vec& p) const;
  Vec image(const Vec& p) const;

 private:
  ChartManifold source_;
  ChartManifold target_;
  std::vector<Expression> components_;
  std::vector<Expression> parameters_;
  std::vector<std::vector<Expression>> range_ext_;
  std::vector<std::vector<Expression>> normal_ext_;
};

struct MapSample {
  Vec point;
  Vec image;
  Mat jacobian;  // n x m
  Mat adjoint;   // m x n, g_M^{-1} J^T g_N
  Mat g_source;
  Mat g_target;
};

MapSample map_sample(const SmoothMap& map, const Vec& p, const MapOptions& options = {});

struct SplitBases {
  int rank = 0;
  Vec singular_values;
  Mat vertical;    // m x r
  Mat horizontal;  // m x rank
  Mat range;       // n x rank
  Mat normal;      // n x n1
  Mat projector;   // n x n, onto the range
};

/// Jet-level description of a map near one source point.  All jets are over
/// the source coordinates.  Frame fields are orthonormal fields near p:
/// horizontal fields are lifts of range fields through the adjoint, vertical
/// fields are the projected coordinate fields, normal fields are projected
/// normal extensions (or target coordinate fields).
///
/// The connection along the map is the target Levi-Civita connection at the
/// frozen parameter values, plus the term that keeps the pulled-back metric
/// parallel when parameters vary with the source point.
class MapPoint {
 public:
  MapPoint(const SmoothMap& map, const Vec& p, const MapOptions& options = {});
  // Holds a pointer to the map, so temporaries are rejected.
  MapPoint(SmoothMap&&, const Vec&, const MapOptions& = {}) = delete;

  const SmoothMap& map() const noexcept { return *map_; }
  const MapOptions& options() const noexcept { return options_; }
  int m() const noexcept { return m_; }
  int n() const noexcept { return n_; }
  int rank() const noexcept { return rank_; }
  int kernel_dim() const noexcept { return m_ - rank_; }
  int normal_dim() const noexcept { return n_ - rank_; }
  int order() const noexcept { return options_.jet_order; }

  const Vec& point() const noexcept { return point_; }
  const Vec& image() const noexcept { return image_; }
  const Bindings& target_bindings() const noexcept { return bindings_; }
  const MetricField& source_metric() const noexcept { return source_; }
  const JetMat& jacobian() const noexcept { return jacobian_; }
  const JetMat& target_metric() const noexcept { return h_; }
  const JetMat& adjoint() const noexcept { return adjoint_; }
  const JetMat& projector() const noexcept { return projector_; }
  const Vec& singular_values() const noexcept { return singular_values_; }

  const std::vector<JetVec>& horizontal() const noexcept { return horizontal_; }
  const std::vector<JetVec>& vertical() const noexcept { return vertical_; }
  /// Images of the horizontal fields.
  const std::vector<JetVec>& range() const noexcept { return range_; }
  const std::vector<JetVec>& normal() const noexcept { return normal_; }

  SplitBases split() const;

  JetVec constant(const Vec& v) const;
  /// Composes target-scope expressions with (F, parameters).
  JetVec along(const std::vector<Expression>& target_field) const;

  JetVec push(const JetVec& x) const { return jacobian_ * x; }
  Vec push(const Vec& x) const { return jacobian_.values() * x; }
  Vec lift(const Vec& u) const { return adjoint_.values() * u; }

  Jet source_inner(const JetVec& a, const JetVec& b) const { return inner(source_.g, a, b); }
  Jet target_inner(const JetVec& a, const JetVec& b) const { return inner(h_, a, b); }
  double source_inner(const Vec& a, const Vec& b) const { return a.dot(source_.g.values() * b); }
  double target_inner(const Vec& a, const Vec& b) const { return a.dot(h_.values() * b); }
  double target_norm(const Vec& a) const { return std::sqrt(std::max(0.0, target_inner(a, a))); }
  double source_norm(const Vec& a) const { return std::sqrt(std::max(0.0, source_inner(a, a))); }

  /// Source Levi-Civita connection.
  JetVec nabla(const JetVec& x, const JetVec& y) const { return covariant(source_.gamma, x, y); }
  JetVec nabla(const Vec& x, const JetVec& y) const { return covariant(source_.gamma, x, y); }

  /// Connection along the map applied to a field W along F.
  JetVec pullback(const JetVec& x, const JetVec& w) const;
  JetVec pullback(const Vec& x, const JetVec& w) const;

  /// D_X (F_* Y) - F_*(nabla_X Y).
  JetVec second_fundamental(const JetVec& x, const JetVec& y) const;
  JetVec second_fundamental(const Vec& x, const Vec& y) const { return second_fundamental(constant(x), constant(y)); }

  /// S_V F_* X = -P D_X V, for V a normal field and X a source direction.
  JetVec shape(const JetVec& v, const JetVec& x) const;
  JetVec shape(const JetVec& v, const Vec& x) const;
  /// (I - P) D_X V.
  JetVec normal_connection(const JetVec& v, const JetVec& x) const;
  JetVec normal_connection(const JetVec& v, const Vec& x) const;

  /// S_v u for a normal vector v and a range vector u at the point, by
  /// expansion of v in the normal frame.
  Vec shape_at(const Vec& v, const Vec& u) const;

  JetVec range_part(const JetVec& w) const { return projector_ * w; }
  JetVec normal_part(const JetVec& w) const { return w - projector_ * w; }
  Vec range_part(const Vec& w) const { return projector_.values() * w; }
  Vec normal_part(const Vec& w) const { return w - projector_.values() * w; }
  /// Orthogonal projection onto the horizontal frame.
  JetVec horizontal_part(const JetVec& w) const;
  JetVec vertical_part(const JetVec& w) const { return w - horizontal_part(w); }

 private:
  const SmoothMap* map_;
  MapOptions options_;
  int m_ = 0, n_ = 0, q_ = 0, rank_ = 0;
  Vec point_, image_;
  Bindings bindings_;
  MetricField source_;
  JetVec f_;       // components
  JetVec inputs_;  // components followed by parameters
  JetMat jacobian_;
  JetMat h_, h_inv_;
  JetMat adjoint_;
  std::vector<JetMat> omega_;  // omega_[i](a, c)
  Vec singular_values_;
  std::vector<JetVec> horizontal_, vertical_, range_, normal_;
  JetMat projector_;
};

/// Vector fields on the target around F(p) with the parameters frozen at
/// their values for p.  Jets are over the target coordinates.
class AmbientFrame {
 public:
  /// Throws ExtensionRequired when the normal space is non-trivial and the
  /// map declares no extensions, or when the extensions disagree with the
  /// range at F(p) beyond `agreement_tol`.
  explicit AmbientFrame(const MapPoint& point, double agreement_tol = 1e-8);

  int dim() const noexcept { return metric_.dim(); }
  const MetricField& metric() const noexcept { return metric_; }
  const Riemann& curvature() const noexcept { return riemann_; }
  const JetMat& projector() const noexcept { return projector_; }
  /// Orthonormalised range extensions and normal extensions.
  const std::vector<JetVec>& range() const noexcept { return range_; }
  const std::vector<JetVec>& normal() const noexcept { return normal_; }
  /// Largest entry of the difference between the ambient and along-map range projectors.
  double agreement() const noexcept { return agreement_; }

  JetVec field(const std::vector<Expression>& components) const;
  JetVec constant(const Vec& v) const;
  /// Range field with constant frame coefficients, equal to u at F(p).
  JetVec range_field(const Vec& u) const;
  /// Normal field with constant frame coefficients, equal to v at F(p).
  JetVec normal_field(const Vec& v) const;

  double inner(const Vec& a, const Vec& b) const { return a.dot(metric_.g.values() * b); }
  Jet inner(const JetVec& a, const JetVec& b) const { return riemap::inner(metric_.g, a, b); }

  JetVec nabla(const JetVec& x, const JetVec& y) const { return covariant(metric_.gamma, x, y); }
  JetVec nabla(const Vec& x, const JetVec& y) const { return covariant(metric_.gamma, x, y); }
  JetVec range_part(const JetVec& w) const { return projector_ * w; }
  JetVec normal_part(const JetVec& w) const { return w - projector_ * w; }
  Vec range_part(const Vec& w) const { return projector_.values() * w; }
  Vec normal_part(const Vec& w) const { return w - projector_.values() * w; }

  /// -P nabla_Z V
  JetVec shape(const JetVec& v, const JetVec& z) const { return -1.0 * range_part(nabla(z, v)); }
  JetVec shape(const JetVec& v, const Vec& z) const { return -1.0 * range_part(nabla(z, v)); }
  /// (I - P) nabla_Z V
  JetVec perp(const JetVec& v, const JetVec& z) const { return normal_part(nabla(z, v)); }
  JetVec perp(const JetVec& v, const Vec& z) const { return normal_part(nabla(z, v)); }
  /// S_v z for a normal vector v at F(p), expanded in the normal fields.
  Vec shape_at(const Vec& v, const Vec& z) const;

  /// sum_j g(R(E_j, a) b, E_j) over the range frame.
  double ricci_range(const Vec& a, const Vec& b) const;
  /// sum_k g(R(N_k, a) b, N_k) over the normal frame.
  double ricci_normal(const Vec& a, const Vec& b) const;
  double ricci(const Vec& a, const Vec& b) const;

 private:
  MetricField metric_;
  Riemann riemann_;
  Mat ricci_;
  std::vector<JetVec> range_, normal_;
  JetMat projector_;
  double agreement_ = 0.0;
  Bindings bindings_;
  Vec image_;
  int order_ = 0;
};

double verify_riemannian(const MapPoint& point);

Vec pullback_connection(const MapPoint& point, const Vec& x, const JetVec& w);
Vec second_fundamental_form(const MapPoint& point, const Vec& x, const Vec& y);

struct ShapeResult {
  Vec shape;   // S_V F_* X
  Vec normal;  // normal connection
};
ShapeResult shape_and_normal(const MapPoint& point, const Vec& x, const JetVec& v);

/// F_*(nabla_X *F_*(S_V F_* Y)) - S_{nabla^perp_X V} F_* Y - S_V P D_X F_* Y.
Vec nabla_tilde_shape(const MapPoint& point, const Vec& x, const JetVec& v, const JetVec& y);
/// The same quantity for horizontal X and range fields, evaluated with ambient fields.
Vec nabla_tilde_shape(const AmbientFrame& frame, const Vec& fx, const JetVec& v, const JetVec& fy);

struct MixedCurvature {
  double full = 0.0;    // residual of R(F_*X, V)W against its expansion
  double normal = 0.0;  // residual of the normal component
  double assumption = 0.0;
};
MixedCurvature curvature_mixed_check(const AmbientFrame& frame, const Vec& fx, const JetVec& v, const JetVec& w);

struct TotallyGeodesic {
  double a_tensor = 0.0;
  double t_tensor = 0.0;
  double shape = 0.0;
  std::optional<double> normal_geodesic;  // needs ambient extensions
};
TotallyGeodesic totally_geodesic_checks(const MapPoint& point, const AmbientFrame* frame = nullptr);
/// max ||P nabla_{e_k} e_l|| over the ambient normal frame.
double normal_distribution_geodesic(const AmbientFrame& frame);

struct UmbilicFit {
  double f = 0.0;
  double residual = 0.0;
  double second_form_residual = 0.0;  // max || B(X_i, X_j) - g(X_i, X_j) H_2 ||
  bool degenerate = false;
};
UmbilicFit umbilic_fit(const MapPoint& point, double tol = 1e-9);

}  // namespace riemap
