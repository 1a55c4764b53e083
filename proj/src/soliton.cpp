#include "riemap/soliton.hpp"

#include <cmath>
#include <numeric>

#include "riemap/errors.hpp"

namespace riemap {

namespace {

Mat identity_frame(const Mat& g) { return orthonormalize(g, Mat::Identity(g.rows(), g.cols())); }

/// Derivative of a scalar jet along a vector at the base point.
double along(const Jet& f, const Vec& v) {
  double out = 0.0;
  for (Eigen::Index a = 0; a < v.size(); ++a)
    if (v[a] != 0.0) out += v[a] * f.partial(static_cast<int>(a)).value();
  return out;
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::vector<Vec> frame_values(const std::vector<JetVec>& fields) {
  std::vector<Vec> out;
  for (const auto& f : fields) out.push_back(values(f));
  return out;
}

/// Gauss assembly of the intrinsic Ricci tensor of a leaf from the restricted
/// sums and the leaf's second fundamental form `b(a, c)`.
template <class B>
Mat intrinsic_ricci(const AmbientFrame& frame, const std::vector<Vec>& e, const Mat& restricted, B&& b) {
  const int d = static_cast<int>(e.size());
  Mat out = restricted;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j)
        out(i, k) += frame.inner(b(e[i], e[k]), b(e[j], e[j])) - frame.inner(b(e[j], e[k]), b(e[i], e[j]));
  return out;
}

}  // namespace

Classification classify(double lambda, double class_tol) {
  if (std::abs(lambda) < class_tol) return Classification::Steady;
  return lambda < 0 ? Classification::Shrinking : Classification::Expanding;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Shrinking: return "shrinking";
    case Classification::Steady: return "steady";
    case Classification::Expanding: return "expanding";
  }
  return "?";
}

EinsteinFit fit_constant(const std::vector<Mat>& tensors, std::optional<double> fixed, double class_tol) {
  EinsteinFit fit;
  fit.points = static_cast<int>(tensors.size());
  if (tensors.empty()) return fit;
  fit.dim = static_cast<int>(tensors.front().rows());
  if (fit.dim == 0) throw Error(ErrorKind::EmptyDistribution, "restricted frame is empty");
  fit.degenerate = fit.dim == 1;
  if (fixed) {
    fit.kappa = *fixed;
  } else {
    double trace = 0.0;
    for (const auto& t : tensors) trace += t.trace();
    fit.kappa = -trace / (static_cast<double>(tensors.size()) * fit.dim);
    fit.fitted = true;
  }
  for (const auto& t : tensors)
    fit.residual = std::max(fit.residual, max_abs(t + fit.kappa * Mat::Identity(fit.dim, fit.dim)));
  fit.classification = classify(fit.kappa, class_tol);
  return fit;
}

Mat ricci_on_frame(const ChartManifold& m, const ChartPoint& p, double pd_tol) {
  const CurvatureSample cs = curvature_sample(m, p.point, p.bindings, pd_tol);
  const Mat e = identity_frame(cs.metric.g);
  return e.transpose() * cs.ricci * e;
}

Mat soliton_tensor(const ChartManifold& m, const std::vector<Expression>& xi, const ChartPoint& p, double pd_tol) {
  const CurvatureSample cs = curvature_sample(m, p.point, p.bindings, pd_tol);
  const Mat e = identity_frame(cs.metric.g);
  Mat t = cs.ricci;
  if (!xi.empty()) {
    const MetricField field = metric_field(m, p.point, 1, p.bindings, pd_tol);
    t += 0.5 * lie_derivative_metric(field, eval_field(xi, p.point, 1, p.bindings));
  }
  return e.transpose() * t * e;
}

EinsteinFit soliton_fit(const ChartManifold& m, const std::vector<Expression>& xi, const std::vector<ChartPoint>& points,
                        std::optional<double> lambda, double class_tol, double pd_tol) {
  std::vector<Mat> tensors;
  tensors.reserve(points.size());
  for (const auto& p : points) tensors.push_back(soliton_tensor(m, xi, p, pd_tol));
  return fit_constant(tensors, lambda, class_tol);
}

double killing_residual(const ChartManifold& m, const std::vector<Expression>& xi, const std::vector<ChartPoint>& points,
                        double pd_tol) {
  if (xi.empty()) return 0.0;
  double worst = 0.0;
  for (const auto& p : points) {
    const MetricField field = metric_field(m, p.point, 1, p.bindings, pd_tol);
    const Mat e = identity_frame(field.g.values());
    worst = std::max(worst, max_abs(e.transpose() * lie_derivative_metric(field, eval_field(xi, p.point, 1, p.bindings)) * e));
  }
  return worst;
}

Mat restricted_ricci(const AmbientFrame& frame, Restriction which) {
  std::vector<Vec> e;
  switch (which) {
    case Restriction::Full:
      e = frame_values(frame.range());
      for (const auto& v : frame_values(frame.normal())) e.push_back(v);
      break;
    case Restriction::Range: e = frame_values(frame.range()); break;
    case Restriction::Normal: e = frame_values(frame.normal()); break;
  }
  const int d = static_cast<int>(e.size());
  if (d == 0) throw Error(ErrorKind::EmptyDistribution, "restricted frame is empty");
  Mat out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      switch (which) {
        case Restriction::Full: out(i, j) = frame.ricci(e[i], e[j]); break;
        case Restriction::Range: out(i, j) = frame.ricci_range(e[i], e[j]); break;
        case Restriction::Normal: out(i, j) = frame.ricci_normal(e[i], e[j]); break;
      }
    }
  return out;
}

EinsteinFit einstein_check(const std::vector<Mat>& ricci, std::optional<double> kappa, double class_tol) {
  return fit_constant(ricci, kappa, class_tol);
}

double DecompositionReport::rhs() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.value;
  return s;
}

double DecompositionReport::residual() const { return std::abs(lhs - rhs()); }

DecompositionReport ricci_range_range(const AmbientFrame& frame, const Vec& fx, const Vec& fy) {
  const JetVec fxf = frame.range_field(fx);
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  for (const auto& ek : frame.normal()) {
    const Vec e = values(ek);
    t1 += frame.inner(frame.shape_at(values(frame.perp(ek, e)), fx), fy);
    t2 += frame.inner(values(frame.nabla(e, frame.shape(ek, fxf))), fy);
    t3 += frame.inner(values(frame.shape(ek, fx)), values(frame.shape(ek, fy)));
    t4 += frame.inner(values(frame.nabla(e, fxf)), values(frame.shape(ek, fy)));
  }
  DecompositionReport r;
  r.lhs = frame.ricci(fx, fy);
  r.terms = {{"ricci_range", frame.ricci_range(fx, fy)},
             {"shape_normal_connection", -t1},
             {"derivative_of_shape", t2},
             {"shape_product", -t3},
             {"derivative_against_shape", -t4}};
  return r;
}

DecompositionReport ricci_normal_normal(const AmbientFrame& frame, const Vec& v, const Vec& w) {
  const JetVec vf = frame.normal_field(v), wf = frame.normal_field(w);
  const Vec nvw = values(frame.perp(wf, v));
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  for (const auto& xj : frame.range()) {
    const Vec x = values(xj);
    const Vec sw = values(frame.shape(wf, x));
    t1 += frame.inner(frame.shape_at(nvw, x), x);
    t2 += frame.inner(values(frame.shape(vf, x)), sw);
    t3 += along(frame.inner(frame.shape(wf, xj), xj), v);
    t4 += 2.0 * frame.inner(sw, values(frame.nabla(v, xj)));
  }
  DecompositionReport r;
  r.lhs = frame.ricci(v, w);
  r.terms = {{"ricci_normal", frame.ricci_normal(v, w)},
             {"shape_normal_connection", -t1},
             {"shape_product", -t2},
             {"derivative_of_pairing", t3},
             {"shape_against_derivative", -t4}};
  return r;
}

DecompositionReport ricci_normal_normal_unreduced(const AmbientFrame& frame, const Vec& v, const Vec& w) {
  const JetVec vf = frame.normal_field(v), wf = frame.normal_field(w);
  const Vec nvw = values(frame.perp(wf, v));
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  for (const auto& xj : frame.range()) {
    const Vec x = values(xj);
    t1 += frame.inner(frame.shape_at(nvw, x), x);
    t2 += frame.inner(values(frame.nabla(v, frame.shape(wf, xj))), x);
    t3 += frame.inner(values(frame.shape(vf, x)), values(frame.shape(wf, x)));
    t4 += frame.inner(values(frame.shape(wf, values(frame.nabla(v, xj)))), x);
  }
  DecompositionReport r;
  r.lhs = frame.ricci(v, w);
  r.terms = {{"ricci_normal", frame.ricci_normal(v, w)},
             {"shape_normal_connection", -t1},
             {"derivative_of_shape", t2},
             {"shape_product", -t3},
             {"shape_of_derivative", -t4}};
  return r;
}

DecompositionReport ricci_mixed(const AmbientFrame& frame, const Vec& fx, const Vec& v) {
  const JetVec fxf = frame.range_field(fx);
  const JetVec vf = frame.normal_field(v);
  double codazzi = 0.0;
  for (const auto& xj : frame.range()) {
    const Vec x = values(xj);
    codazzi += frame.inner(nabla_tilde_shape(frame, fx, vf, xj), x);
    codazzi -= frame.inner(nabla_tilde_shape(frame, x, vf, fxf), x);
  }
  double normal = 0.0;
  for (const auto& ek : frame.normal()) {
    const Vec e = values(ek);
    const Vec b1 = values(frame.perp(frame.perp(vf, ek), fx));
    const Vec b2 = values(frame.perp(frame.perp(vf, fxf), e));
    const Vec b3 = values(frame.perp(vf, values(frame.perp(ek, fx))));
    const Vec b4 = values(frame.perp(vf, frame.range_part(values(frame.shape(ek, fx)))));
    const Vec b5 = values(frame.perp(vf, frame.range_part(values(frame.nabla(e, fxf)))));
    normal += frame.inner(b1 - b2 - b3 + b4 + b5, e);
  }
  DecompositionReport r;
  r.lhs = frame.ricci(fx, v);
  r.terms = {{"codazzi", codazzi}, {"normal_curvature", -normal}};
  return r;
}

ScalarDecomposition scalar_decomposition(const AmbientFrame& frame) {
  double s_n = 0.0, s_range = 0.0, s_normal = 0.0;
  for (const auto& e : frame_values(frame.range())) {
    s_n += frame.ricci(e, e);
    s_range += frame.ricci_range(e, e);
  }
  for (const auto& e : frame_values(frame.normal())) {
    s_n += frame.ricci(e, e);
    s_normal += frame.ricci_normal(e, e);
  }
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0;
  for (const auto& xj : frame.range()) {
    const Vec x = values(xj);
    for (const auto& ek : frame.normal()) {
      const Vec e = values(ek);
      const Vec s = values(frame.shape(ek, x));
      c1 += frame.inner(frame.shape_at(values(frame.perp(ek, e)), x), x);
      c2 += frame.inner(values(frame.nabla(e, frame.shape(ek, xj))), x);
      c3 += frame.inner(s, s);
      c4 += frame.inner(values(frame.nabla(e, xj)), s);
      c5 += along(frame.inner(frame.shape(ek, xj), xj), e);
    }
  }
  ScalarDecomposition out;
  out.report.lhs = s_n;
  out.report.terms = {{"scalar_range", s_range},
                      {"scalar_normal", s_normal},
                      {"shape_normal_connection", -2.0 * c1},
                      {"derivative_of_shape", c2},
                      {"shape_square", -2.0 * c3},
                      {"derivative_against_shape", -3.0 * c4},
                      {"derivative_of_pairing", c5}};
  out.correction = -2.0 * c1 + c2 - 2.0 * c3 - 3.0 * c4 + c5;
  return out;
}

LeafPoint leaf_point(const MapPoint& point, const AmbientFrame& frame, Restriction which, const Potential& xi) {
  if (which == Restriction::Full) throw Error(ErrorKind::Schema, "leaf checks need the range or normal distribution");
  LeafPoint out;
  const TotallyGeodesic tg = totally_geodesic_checks(point, &frame);
  out.hypothesis = std::max({tg.a_tensor, tg.t_tensor, tg.shape});

  JetVec xi_field;
  Vec xi_value;
  if (xi.kind == Potential::Kind::Target) {
    xi_field = frame.field(xi.field);
    xi_value = values(xi_field);
  }

  if (which == Restriction::Range) {
    std::vector<Vec> e = frame_values(point.range());
    const int d = static_cast<int>(e.size());
    out.dim = d;
    out.einstein = Mat(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.einstein(i, j) = frame.ricci_range(e[i], e[j]);
    Mat lie = Mat::Zero(d, d);
    if (xi.kind == Potential::Kind::Target) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) lie(i, j) = frame.inner(values(frame.nabla(e[i], xi_field)), e[j]);
      out.potential_off = std::sqrt(std::max(0.0, frame.inner(frame.range_part(xi_value), frame.range_part(xi_value))));
    } else if (xi.kind == Potential::Kind::Push) {
      const JetVec w = point.push(eval_field(xi.field, point.point(), point.order()));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          lie(i, j) = point.target_inner(values(point.pullback(values(point.horizontal()[static_cast<std::size_t>(i)]), w)), e[j]);
    }
    out.soliton = Mat(symmetrize(lie) + out.einstein);
    if (d >= 2)
      out.intrinsic = intrinsic_ricci(frame, e, out.einstein, [&](const Vec& a, const Vec& b) {
        return values(frame.normal_part(frame.nabla(a, frame.range_field(b))));
      });
  } else {
    std::vector<Vec> e = frame_values(frame.normal());
    const int d = static_cast<int>(e.size());
    if (d == 0) throw Error(ErrorKind::EmptyDistribution, "normal distribution is empty");
    out.dim = d;
    out.hypothesis = std::max(out.hypothesis, tg.normal_geodesic.value_or(0.0));
    out.einstein = Mat(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.einstein(i, j) = frame.ricci_normal(e[i], e[j]);
    if (xi.kind == Potential::Kind::Push) {
      // A range-tangent potential only feeds the Einstein branch.
    } else {
      Mat lie = Mat::Zero(d, d);
      if (xi.kind == Potential::Kind::Target) {
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) lie(i, j) = frame.inner(values(frame.perp(xi_field, e[i])), e[j]);
        out.potential_off = std::sqrt(std::max(0.0, frame.inner(frame.range_part(xi_value), frame.range_part(xi_value))));
      }
      out.soliton = Mat(symmetrize(lie) + out.einstein);
    }
    if (d >= 2)
      out.intrinsic = intrinsic_ricci(frame, e, out.einstein, [&](const Vec& a, const Vec& b) {
        return values(frame.range_part(frame.nabla(a, frame.normal_field(b))));
      });
  }
  return out;
}

LeafReport leaf_summary(const std::vector<LeafPoint>& points, Restriction which, std::optional<double> lambda,
                        double class_tol) {
  LeafReport r;
  r.which = which;
  if (points.empty()) return r;
  r.dim = points.front().dim;
  const bool have_soliton = std::all_of(points.begin(), points.end(), [](const LeafPoint& p) { return p.soliton.has_value(); });
  std::vector<Mat> basis;
  for (const auto& p : points) basis.push_back(have_soliton ? *p.soliton : p.einstein);
  const EinsteinFit fit = fit_constant(basis, lambda, class_tol);
  r.lambda = fit.kappa;
  r.fitted = fit.fitted;
  r.classification = fit.classification;
  const Mat shift = r.lambda * Mat::Identity(r.dim, r.dim);
  const bool have_intrinsic = std::all_of(points.begin(), points.end(), [](const LeafPoint& p) { return p.intrinsic.has_value(); });
  if (have_soliton) r.soliton_residual = 0.0;
  if (have_intrinsic) r.intrinsic_residual = 0.0;
  double scalar_sum = 0.0;
  for (const auto& p : points) {
    if (have_soliton) r.soliton_residual = std::max(*r.soliton_residual, max_abs(*p.soliton + shift));
    if (have_intrinsic) r.intrinsic_residual = std::max(*r.intrinsic_residual, max_abs(*p.intrinsic + shift));
    r.einstein_residual = std::max(r.einstein_residual, max_abs(p.einstein + shift));
    const double s = p.einstein.trace();
    scalar_sum += s;
    r.scalar_residual = std::max(r.scalar_residual, std::abs(s + r.lambda * r.dim));
    r.hypothesis = std::max(r.hypothesis, p.hypothesis);
    r.potential_off = std::max(r.potential_off, p.potential_off);
  }
  r.scalar = scalar_sum / static_cast<double>(points.size());
  return r;
}

double almost_soliton_residual(const MapPoint& point, const AmbientFrame& frame, const Potential& z, double f,
                               double lambda) {
  const std::vector<Vec> e = frame_values(point.range());
  const int d = static_cast<int>(e.size());
  Mat lie = Mat::Zero(d, d);
  if (z.kind == Potential::Kind::Push) {
    const JetVec w = point.push(eval_field(z.field, point.point(), point.order()));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        lie(i, j) = point.target_inner(values(point.pullback(values(point.horizontal()[static_cast<std::size_t>(i)]), w)), e[j]);
  } else if (z.kind == Potential::Kind::Target) {
    const JetVec xi = frame.field(z.field);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) lie(i, j) = frame.inner(values(frame.nabla(e[i], xi)), e[j]);
  }
  Mat t = symmetrize(lie);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t(i, j) += frame.ricci_range(e[i], e[j]);
  t -= (f + f * f - lambda) * Mat::Identity(d, d);
  return max_abs(t);
}

}  // namespace riemap
