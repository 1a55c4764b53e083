#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riemap/rmap.hpp"

namespace riemap {

inline constexpr double kDefaultClassTol = 1e-7;

enum class Classification { Shrinking, Steady, Expanding };

Classification classify(double lambda, double class_tol = kDefaultClassTol);
const char* to_string(Classification c);

/// A point of a chart manifold together with its parameter values.
struct ChartPoint {
  Vec point;
  Bindings bindings;
};

/// Least-squares fit of kappa in T + kappa I = 0 over symmetric matrices
/// given in orthonormal frames.  With a fixed value the fit is skipped.
struct EinsteinFit {
  double kappa = 0.0;
  double residual = 0.0;
  int dim = 0;
  int points = 0;
  bool fitted = false;
  bool degenerate = false;  // one-dimensional restriction
  Classification classification = Classification::Steady;
};

EinsteinFit fit_constant(const std::vector<Mat>& tensors, std::optional<double> fixed = std::nullopt,
                         double class_tol = kDefaultClassTol);

/// Ricci tensor of a chart manifold in an orthonormal frame at a point.
Mat ricci_on_frame(const ChartManifold& m, const ChartPoint& p, double pd_tol = kDefaultPdTol);
/// 1/2 L_xi g + Ric in an orthonormal frame.  An empty field means xi = 0.
Mat soliton_tensor(const ChartManifold& m, const std::vector<Expression>& xi, const ChartPoint& p,
                   double pd_tol = kDefaultPdTol);

/// Ricci soliton check 1/2 L_xi g + Ric + lambda g = 0; lambda is fitted when not given.
EinsteinFit soliton_fit(const ChartManifold& m, const std::vector<Expression>& xi, const std::vector<ChartPoint>& points,
                        std::optional<double> lambda = std::nullopt, double class_tol = kDefaultClassTol,
                        double pd_tol = kDefaultPdTol);

/// max |(L_xi g)(E_a, E_b)| over orthonormal frames at the points.
double killing_residual(const ChartManifold& m, const std::vector<Expression>& xi, const std::vector<ChartPoint>& points,
                        double pd_tol = kDefaultPdTol);

enum class Restriction { Full, Range, Normal };

/// Ricci tensor restricted to a distribution, as frame sums over that distribution.
Mat restricted_ricci(const AmbientFrame& frame, Restriction which);

/// Einstein fit of full-N Ricci (same system as soliton_fit with xi = 0) or of a restricted Ricci tensor.
EinsteinFit einstein_check(const std::vector<Mat>& ricci, std::optional<double> kappa = std::nullopt,
                           double class_tol = kDefaultClassTol);

struct Term {
  std::string name;
  double value = 0.0;
};

/// lhs against a sum of signed terms.
struct DecompositionReport {
  double lhs = 0.0;
  std::vector<Term> terms;
  double rhs() const;
  double residual() const;
};

/// Ric(F_*X, F_*Y) against its expansion through range Ricci sums and shape operators.
DecompositionReport ricci_range_range(const AmbientFrame& frame, const Vec& fx, const Vec& fy);
/// Ric(V, W) for normal vectors, in the form after the metric-compatibility rewrite.
DecompositionReport ricci_normal_normal(const AmbientFrame& frame, const Vec& v, const Vec& w);
/// The same pair before the rewrite, with the covariant derivative of S kept.
DecompositionReport ricci_normal_normal_unreduced(const AmbientFrame& frame, const Vec& v, const Vec& w);
/// Ric(F_*X, V) for a range vector and a normal vector.
DecompositionReport ricci_mixed(const AmbientFrame& frame, const Vec& fx, const Vec& v);

struct ScalarDecomposition {
  DecompositionReport report;  // lhs = s^N; terms: s_range, s_normal, then five corrections
  double correction = 0.0;
};
ScalarDecomposition scalar_decomposition(const AmbientFrame& frame);

/// -2 (f + f^2)(m - r), reported next to the actual correction for umbilical maps.
inline double umbilic_scalar_correction(double f, int horizontal_dim) { return -2.0 * (f + f * f) * horizontal_dim; }

/// Potential field for leaf checks: zero, a target field (expressions over the
/// target scope, parameters frozen) or the image F_*Z of a source field Z.
struct Potential {
  enum class Kind { Zero, Target, Push };
  Kind kind = Kind::Zero;
  std::vector<Expression> field;
};

/// Per-point leaf data; matrices are in the orthonormal frame of the leaf
/// distribution and exclude the lambda term.
struct LeafPoint {
  int dim = 0;
  std::optional<Mat> soliton;  // 1/2 Lie term + restricted Ricci
  Mat einstein;                // restricted Ricci
  std::optional<Mat> intrinsic;  // Gauss-assembled intrinsic Ricci of the leaf
  double hypothesis = 0.0;     // worst totally-geodesic residual the theorem relies on
  double potential_off = 0.0;  // component of xi outside the distribution it is declared in
};

LeafPoint leaf_point(const MapPoint& point, const AmbientFrame& frame, Restriction which, const Potential& xi);

struct LeafReport {
  Restriction which = Restriction::Range;
  int dim = 0;
  double lambda = 0.0;
  bool fitted = false;
  std::optional<double> soliton_residual;
  double einstein_residual = 0.0;
  std::optional<double> intrinsic_residual;
  double scalar = 0.0;  // worst-case restricted leaf scalar curvature
  double scalar_residual = 0.0;  // max |s_leaf + lambda dim|
  Classification classification = Classification::Steady;
  double hypothesis = 0.0;
  double potential_off = 0.0;
};

LeafReport leaf_summary(const std::vector<LeafPoint>& points, Restriction which,
                        std::optional<double> lambda = std::nullopt, double class_tol = kDefaultClassTol);

/// mu = 2f + f^2 - lambda.
inline double almost_mu(double f, double lambda) { return 2.0 * f + f * f - lambda; }

/// max |1/2 L_{F_*Z} g + Ric^range - (f + f^2 - lambda) g| over range frame pairs.
double almost_soliton_residual(const MapPoint& point, const AmbientFrame& frame, const Potential& z, double f,
                               double lambda);

}  // namespace riemap
