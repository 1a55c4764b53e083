#include "riemap/harmonicity.hpp"

#include <cmath>

#include "riemap/errors.hpp"

namespace riemap {

namespace {

JetVec zero_field(const MapPoint& point, int dim, int order) {
  return constant_field(Vec::Zero(dim), point.m(), std::max(order, 0));
}

JetVec vertical_mean(const MapPoint& point) {
  const int r = point.kernel_dim();
  const int order = point.order() - 2;
  if (r == 0) return zero_field(point, point.m(), order);
  JetVec sum = zero_field(point, point.m(), order);
  for (const auto& u : point.vertical()) sum = sum + point.nabla(u, u);
  return (1.0 / r) * point.horizontal_part(sum);
}

JetVec range_mean(const MapPoint& point) {
  JetVec sum = zero_field(point, point.n(), point.order() - 2);
  for (const auto& x : point.horizontal()) sum = sum + point.second_fundamental(x, x);
  return (1.0 / point.rank()) * point.normal_part(sum);
}

/// Y -> *F_*(S_{H_2} F_* Y), lifting F_* Y back through the adjoint.
JetVec lifted_shape(const MapPoint& point, const JetVec& h2, const JetVec& y) {
  return point.adjoint() * point.shape(h2, point.adjoint() * point.push(y));
}

void require_order(const MapPoint& point, const char* what) {
  if (point.order() < 4)
    throw Error(ErrorKind::OrderTooLarge, std::string(what) + " needs jets of order 4 (got " +
                                              std::to_string(point.order()) + ")");
}

}  // namespace

MeanCurvatures mean_curvatures(const MapPoint& point) {
  MeanCurvatures out;
  out.r = point.kernel_dim();
  out.horizontal_dim = point.rank();
  out.h = values(vertical_mean(point));
  out.h2 = values(range_mean(point));
  return out;
}

MeanCurvatures mean_curvatures(const MapPoint& point, const Mat& vertical, const Mat& horizontal) {
  MeanCurvatures out;
  out.r = point.kernel_dim();
  out.horizontal_dim = point.rank();
  out.h = Vec::Zero(point.m());
  for (Eigen::Index i = 0; i < vertical.cols(); ++i) {
    const JetVec u = point.vertical_part(point.constant(vertical.col(i)));
    out.h += values(point.horizontal_part(point.nabla(u, u)));
  }
  if (out.r > 0) out.h /= static_cast<double>(out.r);
  out.h2 = Vec::Zero(point.n());
  for (Eigen::Index j = 0; j < horizontal.cols(); ++j)
    out.h2 += second_fundamental_form(point, horizontal.col(j), horizontal.col(j));
  out.h2 = point.normal_part(Vec(out.h2 / static_cast<double>(out.horizontal_dim)));
  return out;
}

JetVec tension_field(const MapPoint& point) {
  JetVec sum = zero_field(point, point.n(), point.order() - 2);
  for (const auto& u : point.vertical()) sum = sum + point.second_fundamental(u, u);
  for (const auto& x : point.horizontal()) sum = sum + point.second_fundamental(x, x);
  return sum;
}

TensionReport tension(const MapPoint& point) {
  TensionReport out;
  out.tau = values(tension_field(point));
  const MeanCurvatures mc = mean_curvatures(point);
  const Vec d = out.tau + static_cast<double>(mc.r) * point.push(mc.h) - static_cast<double>(mc.horizontal_dim) * mc.h2;
  out.identity_residual = point.target_norm(d);
  out.norm = point.target_norm(out.tau);
  return out;
}

void check_space_form(const MapPoint& point, double c, double tol) {
  const CurvatureSample cs =
      curvature_sample(point.map().target(), point.image(), point.target_bindings(), point.options().pd_tol);
  const int n = point.n();
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d) {
        const Vec ea = Vec::Unit(n, a), eb = Vec::Unit(n, b), ed = Vec::Unit(n, d);
        const Vec diff = cs.riemann.apply(ea, eb, ed) - space_form_curvature(c, cs.metric.g, ea, eb, ed);
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
      }
  if (worst > tol)
    throw Error(ErrorKind::NotSpaceForm,
                "target curvature differs from constant curvature " + std::to_string(c) + " by " + std::to_string(worst));
}

BitensionConditions bitension_conditions(const MapPoint& point, double c) {
  require_order(point, "biharmonicity conditions");
  check_space_form(point, c);
  const double r = point.kernel_dim();
  const double k = point.rank();
  const JetVec h = vertical_mean(point);
  const JetVec h2 = range_mean(point);
  const Vec zero_n = Vec::Zero(point.n());

  // Traces run over a full orthonormal frame of T_pM.
  std::vector<JetVec> frame = point.vertical();
  frame.insert(frame.end(), point.horizontal().begin(), point.horizontal().end());

  Vec t1 = zero_n, t2 = zero_n, t3 = zero_n, t4 = zero_n;
  Vec u1 = zero_n, u2 = zero_n, u3 = zero_n, u4 = zero_n;
  for (const auto& e : frame) {
    const JetVec ne = point.nabla(e, e);
    // D_e B(e, H) split by the range projector; its range part is -S_{B(e,H)} F_* e.
    const JetVec d = point.pullback(values(e), point.second_fundamental(e, h));
    t1 -= point.range_part(values(d));
    u1 += point.normal_part(values(d)) - values(point.second_fundamental(ne, h));
    t2 += point.push(values(point.nabla(e, point.nabla(e, h)) - point.nabla(ne, h)));
    u2 += values(point.second_fundamental(e, point.nabla(e, h)));

    const JetVec y = lifted_shape(point, h2, e);
    t3 += point.push(values(point.nabla(e, y)) - values(lifted_shape(point, h2, ne)));
    u3 += values(point.second_fundamental(e, y));
    // S_{nabla^perp_e H2} F_* e = -P D_e (nabla^perp_e H2).
    const JetVec perp = point.normal_connection(h2, e);
    t4 -= point.range_part(values(point.pullback(values(e), perp)));
    u4 += values(point.normal_connection(perp, e)) - values(point.normal_connection(h2, values(ne)));
  }
  const Vec fh = point.push(values(h));

  BitensionConditions out;
  out.c = c;
  out.tangential_terms = {{"shape_of_mixed_form", r * t1},
                          {"second_derivative_of_h", -r * t2},
                          {"derivative_of_lifted_shape", -k * t3},
                          {"shape_of_normal_derivative", -k * t4},
                          {"curvature", -r * c * (k - 1) * fh}};
  out.normal_terms = {{"normal_derivative_of_mixed_form", r * u1},
                      {"mixed_form_of_derivative", r * u2},
                      {"form_of_lifted_shape", k * u3},
                      {"normal_laplacian", -k * u4},
                      {"curvature", -k * k * c * values(h2)}};
  Vec tangential = zero_n, normal = zero_n;
  for (const auto& t : out.tangential_terms) tangential += t.value;
  for (const auto& t : out.normal_terms) normal += t.value;
  // Mixed second fundamental forms can leave range components in the normal
  // terms; they are moved to the tangential condition so that
  // tau_2 = tangential - normal holds exactly.
  out.leak = point.target_norm(point.range_part(normal));
  out.tangential = tangential - point.range_part(normal);
  out.normal = point.normal_part(normal);
  return out;
}

Vec rough_laplacian(const MapPoint& point, const JetVec& w) {
  Vec out = Vec::Zero(point.n());
  auto add = [&](const JetVec& e) {
    out += values(point.pullback(e, point.pullback(e, w))) - values(point.pullback(point.nabla(e, e), w));
  };
  for (const auto& u : point.vertical()) add(u);
  for (const auto& x : point.horizontal()) add(x);
  return out;
}

Vec bitension_direct(const MapPoint& point, double c) {
  require_order(point, "bitension");
  check_space_form(point, c);
  const JetVec tau = tension_field(point);
  const Vec tv = values(tau);
  // trace R(dF, tau) dF with the constant-curvature tensor.
  Vec curvature = Vec::Zero(point.n());
  if (c != 0.0) {
    auto add = [&](const JetVec& e) {
      const Vec fe = point.push(values(e));
      curvature += c * (point.target_inner(tv, fe) * fe - point.target_inner(fe, fe) * tv);
    };
    for (const auto& u : point.vertical()) add(u);
    for (const auto& x : point.horizontal()) add(x);
  }
  // Delta^F = -trace (nabla^2), so -Delta^F tau is the rough Laplacian.
  return rough_laplacian(point, tau) - curvature;
}

}  // namespace riemap
