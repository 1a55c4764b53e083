#include "riemap/rmap.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <set>

#include "riemap/errors.hpp"

namespace riemap {

namespace {

std::vector<double> as_point(const Vec& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

JetVec unit_field(int n, int a, int dim, int order) {
  Vec e = Vec::Zero(n);
  e[a] = 1.0;
  return constant_field(e, dim, order);
}

double jet_norm(const JetMat& g, const JetVec& v) {
  const Vec x = values(v);
  return std::sqrt(std::max(0.0, x.dot(g.values() * x)));
}

}  // namespace

SmoothMap::SmoothMap(ChartManifold source, ChartManifold target, const std::vector<std::string>& components,
                     const std::vector<std::pair<std::string, std::string>>& parameters,
                     const std::vector<std::vector<std::string>>& range_extensions,
                     const std::vector<std::vector<std::string>>& normal_extensions)
    : source_(std::move(source)), target_(std::move(target)) {
  if (!source_.parameters().empty())
    throw Error(ErrorKind::Schema, source_.name() + ": a source manifold cannot declare parameters");
  if (static_cast<int>(components.size()) != target_.dim())
    throw Error(ErrorKind::Dimension, "map needs " + std::to_string(target_.dim()) + " components");
  for (const auto& c : components) components_.push_back(parse_expression(c, source_.scope()));

  std::set<std::string> declared(target_.parameters().begin(), target_.parameters().end());
  for (const auto& [name, expr] : parameters)
    if (!declared.count(name)) throw Error(ErrorKind::Schema, "unknown target parameter '" + name + "'");
  for (const auto& name : target_.parameters()) {
    auto it = std::find_if(parameters.begin(), parameters.end(), [&](const auto& kv) { return kv.first == name; });
    if (it == parameters.end()) throw Error(ErrorKind::Schema, "target parameter '" + name + "' is not bound");
    parameters_.push_back(parse_expression(it->second, source_.coords()));
  }

  auto parse_ext = [&](const std::vector<std::vector<std::string>>& fields) {
    std::vector<std::vector<Expression>> out;
    for (const auto& f : fields) {
      if (static_cast<int>(f.size()) != target_.dim())
        throw Error(ErrorKind::Dimension, "extension field needs " + std::to_string(target_.dim()) + " components");
      out.push_back(target_.parse_field(f));
    }
    return out;
  };
  range_ext_ = parse_ext(range_extensions);
  normal_ext_ = parse_ext(normal_extensions);
}

Bindings SmoothMap::target_bindings(const Vec& p) const {
  const auto point = as_point(p);
  Bindings b;
  for (std::size_t i = 0; i < parameters_.size(); ++i) b[target_.parameters()[i]] = parameters_[i].evaluate(point);
  return b;
}

Vec SmoothMap::image(const Vec& p) const {
  const auto point = as_point(p);
  Vec y(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t a = 0; a < components_.size(); ++a) y[static_cast<Eigen::Index>(a)] = components_[a].evaluate(point);
  return y;
}

MapSample map_sample(const SmoothMap& map, const Vec& p, const MapOptions& options) {
  const int m = map.source().dim();
  const int n = map.target().dim();
  if (p.size() != m) throw Error(ErrorKind::Dimension, "source point has wrong dimension");
  MapSample s;
  s.point = p;
  const JetVec f = eval_field(map.components(), p, 1);
  s.image = values(f);
  s.jacobian.resize(n, m);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < m; ++i) s.jacobian(a, i) = f[static_cast<std::size_t>(a)].partial(i).value();
  s.g_source = metric_sample(map.source(), p, {}, options.pd_tol).g;
  s.g_target = metric_sample(map.target(), s.image, map.target_bindings(p), options.pd_tol).g;
  s.adjoint = s.g_source.inverse() * s.jacobian.transpose() * s.g_target;
  return s;
}

MapPoint::MapPoint(const SmoothMap& map, const Vec& p, const MapOptions& options)
    : map_(&map), options_(options), m_(map.source().dim()), n_(map.target().dim()),
      q_(static_cast<int>(map.parameters().size())), point_(p) {
  const int K = options_.jet_order;
  if (K < 2) throw Error(ErrorKind::OrderExceeded, "map analysis needs jet order >= 2");
  if (K > kMaxJetOrder) throw Error(ErrorKind::OrderTooLarge, "jet order above " + std::to_string(kMaxJetOrder));
  if (p.size() != m_) throw Error(ErrorKind::Dimension, "source point has wrong dimension");

  source_ = metric_field(map.source(), p, K, {}, options_.pd_tol);
  f_ = eval_field(map.components(), p, K);
  inputs_ = f_;
  const JetVec s = eval_field(map.parameters(), p, K);
  inputs_.insert(inputs_.end(), s.begin(), s.end());
  image_ = values(f_);
  bindings_ = map.target_bindings(p);

  jacobian_ = JetMat(n_, m_, zero_jet(m_, K - 1));
  for (int a = 0; a < n_; ++a)
    for (int i = 0; i < m_; ++i) jacobian_(a, i) = f_[static_cast<std::size_t>(a)].partial(i);

  const ChartManifold& target = map.target();
  h_ = JetMat(n_, n_, zero_jet(m_, K));
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) h_(a, b) = target.metric(a, b).evaluate(std::span<const Jet>(inputs_));
  check_positive_definite(h_.values(), options_.pd_tol);
  h_inv_ = inverse(h_);

  // Target metric as a function of (y, parameters), expanded at (F(p), s(p)).
  const int nq = n_ + q_;
  std::vector<double> yz(image_.data(), image_.data() + n_);
  for (const auto& sj : s) yz.push_back(sj.value());
  JetMat gc(n_, n_, zero_jet(nq, K));
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) gc(a, b) = eval_jet(target.metric(a, b), yz, K, {}, kMaxJetOrder);
  const JetMat gc_inv = inverse(gc);

  // Frozen Christoffel symbols (y-derivatives only) and parameter derivatives, pulled back to M.
  std::vector<JetMat> gamma(static_cast<std::size_t>(n_), JetMat(n_, n_, zero_jet(m_, K - 1)));
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      for (int c = 0; c < n_; ++c) {
        Jet sum = zero_jet(nq, K - 1);
        for (int l = 0; l < n_; ++l)
          sum += gc_inv(a, l) * (gc(c, l).partial(b) + gc(b, l).partial(c) - gc(b, c).partial(l));
        gamma[static_cast<std::size_t>(a)](b, c) = 0.5 * compose(sum, inputs_);
      }
  std::vector<JetMat> dpar;
  for (int t = 0; t < q_; ++t) {
    JetMat d(n_, n_, zero_jet(m_, K - 1));
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) d(a, b) = compose(gc(a, b).partial(n_ + t), inputs_);
    dpar.push_back(h_inv_ * d);
  }

  omega_.assign(static_cast<std::size_t>(m_), JetMat(n_, n_, zero_jet(m_, K - 1)));
  for (int i = 0; i < m_; ++i) {
    JetMat& w = omega_[static_cast<std::size_t>(i)];
    for (int a = 0; a < n_; ++a)
      for (int c = 0; c < n_; ++c) {
        Jet sum = zero_jet(m_, K - 1);
        for (int b = 0; b < n_; ++b) sum += gamma[static_cast<std::size_t>(a)](b, c) * jacobian_(b, i);
        for (int t = 0; t < q_; ++t)
          sum += 0.5 * dpar[static_cast<std::size_t>(t)](a, c) * s[static_cast<std::size_t>(t)].partial(i);
        w(a, c) = sum;
      }
  }

  adjoint_ = source_.g_inv * (jacobian_.transpose() * h_);

  // Rank from the singular values of J between orthonormal frames.
  const Mat lm = source_.g.values().llt().matrixL();
  const Mat ln = h_.values().llt().matrixL();
  const Mat jhat = ln.transpose() * jacobian_.values() * lm.transpose().inverse();
  singular_values_ = Eigen::JacobiSVD<Mat>(jhat).singularValues();
  const double tol = options_.rank_tol;
  for (Eigen::Index k = 0; k < singular_values_.size(); ++k) {
    const double sv = singular_values_[k];
    if (sv >= tol / 10 && sv <= tol * 10)
      throw Error(ErrorKind::RankUnstable, "singular value " + std::to_string(sv) + " is close to the rank tolerance");
    if (sv > tol) ++rank_;
  }
  if (rank_ == 0) throw Error(ErrorKind::RankUnstable, "map has rank 0");

  std::vector<JetVec> candidates;
  for (const auto& e : map.range_extensions()) candidates.push_back(adjoint_ * along(e));
  if (static_cast<int>(candidates.size()) < rank_)
    for (int a = 0; a < n_; ++a) candidates.push_back(adjoint_.column(a));
  horizontal_ = pivoted_gram_schmidt(source_.g, candidates, rank_);
  for (const auto& x : horizontal_) range_.push_back(push(x));
  const auto range_on = pivoted_gram_schmidt(h_, range_, rank_);
  projector_ = riemap::projector(h_, range_on, n_);

  candidates.clear();
  for (int i = 0; i < m_; ++i) candidates.push_back(unit_field(m_, i, m_, K));
  vertical_ = pivoted_gram_schmidt(source_.g, candidates, m_ - rank_, horizontal_);

  candidates.clear();
  for (const auto& e : map.normal_extensions()) candidates.push_back(along(e));
  if (static_cast<int>(candidates.size()) < n_ - rank_)
    for (int a = 0; a < n_; ++a) candidates.push_back(unit_field(n_, a, m_, K));
  normal_ = pivoted_gram_schmidt(h_, candidates, n_ - rank_, range_on);
}

SplitBases MapPoint::split() const {
  SplitBases out;
  out.rank = rank_;
  out.singular_values = singular_values_;
  auto stack = [](const std::vector<JetVec>& fields, int rows) {
    Mat m(rows, static_cast<Eigen::Index>(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = values(fields[j]);
    return m;
  };
  out.vertical = stack(vertical_, m_);
  out.horizontal = stack(horizontal_, m_);
  out.range = stack(range_, n_);
  out.normal = stack(normal_, n_);
  out.projector = projector_.values();
  return out;
}

JetVec MapPoint::constant(const Vec& v) const { return constant_field(v, m_, options_.jet_order); }

JetVec MapPoint::along(const std::vector<Expression>& target_field) const {
  JetVec out;
  out.reserve(target_field.size());
  for (const auto& e : target_field) out.push_back(e.evaluate(std::span<const Jet>(inputs_)));
  return out;
}

JetVec MapPoint::pullback(const JetVec& x, const JetVec& w) const {
  JetVec out = directional(w, x);
  for (int i = 0; i < m_; ++i) out = out + x[static_cast<std::size_t>(i)] * (omega_[static_cast<std::size_t>(i)] * w);
  return out;
}

JetVec MapPoint::pullback(const Vec& x, const JetVec& w) const {
  JetVec out = directional(w, x);
  for (int i = 0; i < m_; ++i)
    if (x[i] != 0.0) out = out + x[i] * (omega_[static_cast<std::size_t>(i)] * w);
  return out;
}

JetVec MapPoint::second_fundamental(const JetVec& x, const JetVec& y) const {
  return pullback(x, push(y)) - push(nabla(x, y));
}

JetVec MapPoint::shape(const JetVec& v, const JetVec& x) const { return -1.0 * range_part(pullback(x, v)); }
JetVec MapPoint::shape(const JetVec& v, const Vec& x) const { return -1.0 * range_part(pullback(x, v)); }
JetVec MapPoint::normal_connection(const JetVec& v, const JetVec& x) const { return normal_part(pullback(x, v)); }
JetVec MapPoint::normal_connection(const JetVec& v, const Vec& x) const { return normal_part(pullback(x, v)); }

Vec MapPoint::shape_at(const Vec& v, const Vec& u) const {
  const Vec x = lift(u);
  Vec out = Vec::Zero(n_);
  for (const auto& nk : normal_) {
    const double c = target_inner(v, values(nk));
    if (c != 0.0) out += c * values(shape(nk, x));
  }
  return out;
}

JetVec MapPoint::horizontal_part(const JetVec& w) const {
  JetVec out(w.size(), zero_jet(m_, order_of(w)));
  for (const auto& x : horizontal_) out = out + source_inner(w, x) * x;
  return out;
}

AmbientFrame::AmbientFrame(const MapPoint& point, double agreement_tol)
    : bindings_(point.target_bindings()), image_(point.image()), order_(point.order()) {
  const SmoothMap& map = point.map();
  const int n = point.n();
  const int n1 = point.normal_dim();
  if (n1 > 0 && map.range_extensions().empty() && map.normal_extensions().empty())
    throw Error(ErrorKind::ExtensionRequired, "ambient computations need range or normal extensions");

  metric_ = metric_field(map.target(), image_, order_, bindings_, point.options().pd_tol);
  riemann_ = riemann_from_christoffel(metric_.gamma);
  ricci_ = ricci_from_riemann(riemann_);

  std::vector<JetVec> candidates;
  for (const auto& e : map.range_extensions()) candidates.push_back(field(e));
  if (candidates.empty()) {
    if (n1 > 0) throw Error(ErrorKind::ExtensionRequired, "ambient computations need range extensions");
    for (int a = 0; a < n; ++a) candidates.push_back(unit_field(n, a, n, order_));
  }
  range_ = pivoted_gram_schmidt(metric_.g, candidates, point.rank());

  candidates.clear();
  for (const auto& e : map.normal_extensions()) candidates.push_back(field(e));
  if (static_cast<int>(candidates.size()) < n1)
    for (int a = 0; a < n; ++a) candidates.push_back(unit_field(n, a, n, order_));
  normal_ = pivoted_gram_schmidt(metric_.g, candidates, n1, range_);

  projector_ = riemap::projector(metric_.g, range_, n);
  agreement_ = (projector_.values() - point.projector().values()).cwiseAbs().maxCoeff();
  if (agreement_ > agreement_tol)
    throw Error(ErrorKind::ExtensionRequired,
                "extensions disagree with the range of the map (" + std::to_string(agreement_) + ")");
}

JetVec AmbientFrame::field(const std::vector<Expression>& components) const {
  return eval_field(components, image_, order_, bindings_);
}

JetVec AmbientFrame::constant(const Vec& v) const { return constant_field(v, dim(), order_); }

JetVec AmbientFrame::range_field(const Vec& u) const {
  JetVec out = constant(Vec::Zero(dim()));
  for (const auto& e : range_) out = out + inner(u, values(e)) * e;
  return out;
}

JetVec AmbientFrame::normal_field(const Vec& v) const {
  JetVec out = constant(Vec::Zero(dim()));
  for (const auto& e : normal_) out = out + inner(v, values(e)) * e;
  return out;
}

Vec AmbientFrame::shape_at(const Vec& v, const Vec& z) const {
  Vec out = Vec::Zero(dim());
  for (const auto& nk : normal_) {
    const double c = inner(v, values(nk));
    if (c != 0.0) out += c * values(shape(nk, z));
  }
  return out;
}

double AmbientFrame::ricci_range(const Vec& a, const Vec& b) const {
  double sum = 0.0;
  for (const auto& e : range_) {
    const Vec ev = values(e);
    sum += inner(riemann_.apply(ev, a, b), ev);
  }
  return sum;
}

double AmbientFrame::ricci_normal(const Vec& a, const Vec& b) const {
  double sum = 0.0;
  for (const auto& e : normal_) {
    const Vec ev = values(e);
    sum += inner(riemann_.apply(ev, a, b), ev);
  }
  return sum;
}

double AmbientFrame::ricci(const Vec& a, const Vec& b) const { return a.dot(ricci_ * b); }

double verify_riemannian(const MapPoint& point) {
  double worst = 0.0;
  const auto& xs = point.horizontal();
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const Vec xi = values(xs[i]), xj = values(xs[j]);
      worst = std::max(worst, std::abs(point.target_inner(point.push(xi), point.push(xj)) - point.source_inner(xi, xj)));
    }
  return worst;
}

Vec pullback_connection(const MapPoint& point, const Vec& x, const JetVec& w) { return values(point.pullback(x, w)); }

Vec second_fundamental_form(const MapPoint& point, const Vec& x, const Vec& y) {
  return values(point.second_fundamental(x, y));
}

ShapeResult shape_and_normal(const MapPoint& point, const Vec& x, const JetVec& v) {
  const JetVec d = point.pullback(x, v);
  return {-1.0 * values(point.range_part(d)), values(point.normal_part(d))};
}

Vec nabla_tilde_shape(const MapPoint& point, const Vec& x, const JetVec& v, const JetVec& y) {
  const JetVec lifted = point.adjoint() * point.shape(v, y);
  const Vec t1 = values(point.push(point.nabla(x, lifted)));
  const Vec t2 = point.shape_at(values(point.normal_connection(v, x)), values(point.push(y)));
  const Vec dy = values(point.range_part(point.pullback(x, point.push(y))));
  const Vec t3 = values(point.shape(v, point.lift(dy)));
  return t1 - t2 - t3;
}

Vec nabla_tilde_shape(const AmbientFrame& frame, const Vec& fx, const JetVec& v, const JetVec& fy) {
  const Vec t1 = values(frame.range_part(frame.nabla(fx, frame.shape(v, fy))));
  const Vec t2 = frame.shape_at(values(frame.perp(v, fx)), values(fy));
  const Vec t3 = values(frame.shape(v, frame.range_part(values(frame.nabla(fx, fy)))));
  return t1 - t2 - t3;
}

MixedCurvature curvature_mixed_check(const AmbientFrame& frame, const Vec& fx, const JetVec& v, const JetVec& w) {
  const JetVec fxf = frame.range_field(fx);
  const Vec vv = values(v), wv = values(w);
  const Vec r = frame.curvature().apply(fx, vv, wv);

  const Vec sv_fx = values(frame.shape(v, fx));
  const Vec nv_fx = values(frame.nabla(vv, fxf));
  const Vec a1 = -frame.shape_at(values(frame.perp(w, vv)), fx);
  const Vec a2 = values(frame.perp(frame.perp(w, v), fx));
  const Vec a3 = values(frame.nabla(vv, frame.shape(w, fxf)));
  const Vec a4 = -values(frame.perp(frame.perp(w, fxf), vv));
  const Vec a5 = -values(frame.shape(w, sv_fx));
  const Vec a6 = values(frame.perp(w, frame.range_part(sv_fx)));
  const Vec a7 = -values(frame.perp(w, values(frame.perp(v, fx))));
  const Vec a8 = -values(frame.shape(w, nv_fx));
  const Vec a9 = values(frame.perp(w, frame.range_part(nv_fx)));

  auto norm = [&](const Vec& x) { return std::sqrt(std::max(0.0, frame.inner(x, x))); };
  MixedCurvature out;
  out.full = norm(r - (a1 + a2 + a3 + a4 + a5 + a6 + a7 + a8 + a9));
  out.normal = norm(frame.normal_part(r) - (a2 + a4 + a6 + a7 + a9));
  out.assumption = normal_distribution_geodesic(frame);
  return out;
}

double normal_distribution_geodesic(const AmbientFrame& frame) {
  double worst = 0.0;
  for (const auto& nk : frame.normal())
    for (const auto& nl : frame.normal()) {
      const Vec d = values(frame.range_part(frame.nabla(values(nk), nl)));
      worst = std::max(worst, std::sqrt(std::max(0.0, frame.inner(d, d))));
    }
  return worst;
}

TotallyGeodesic totally_geodesic_checks(const MapPoint& point, const AmbientFrame* frame) {
  TotallyGeodesic out;
  const JetMat& g = point.source_metric().g;
  for (const auto& xi : point.horizontal())
    for (const auto& xj : point.horizontal())
      out.a_tensor = std::max(out.a_tensor, jet_norm(g, point.vertical_part(point.nabla(xi, xj))));
  for (const auto& ui : point.vertical())
    for (const auto& uj : point.vertical())
      out.t_tensor = std::max(out.t_tensor, jet_norm(g, point.horizontal_part(point.nabla(ui, uj))));
  for (const auto& nk : point.normal())
    for (const auto& xj : point.horizontal())
      out.shape = std::max(out.shape, jet_norm(point.target_metric(), point.shape(nk, xj)));
  if (frame) out.normal_geodesic = normal_distribution_geodesic(*frame);
  else if (point.normal_dim() == 0) out.normal_geodesic = 0.0;
  return out;
}

UmbilicFit umbilic_fit(const MapPoint& point, double tol) {
  if (point.normal_dim() == 0) throw Error(ErrorKind::EmptyDistribution, "umbilicity needs a normal direction");
  UmbilicFit out;
  std::vector<std::vector<Vec>> s;
  double num = 0.0, den = 0.0, largest = 0.0;
  for (const auto& nk : point.normal()) {
    auto& row = s.emplace_back();
    for (std::size_t j = 0; j < point.horizontal().size(); ++j) {
      const Vec sv = values(point.shape(nk, point.horizontal()[j]));
      const Vec fx = values(point.range()[j]);
      num += point.target_inner(sv, fx);
      den += point.target_inner(fx, fx);
      largest = std::max(largest, point.target_norm(sv));
      row.push_back(sv);
    }
  }
  out.degenerate = largest <= tol;
  out.f = out.degenerate ? 0.0 : num / den;
  for (const auto& row : s)
    for (std::size_t j = 0; j < row.size(); ++j) {
      const Vec d = row[j] - out.f * values(point.range()[j]);
      out.residual += point.target_inner(d, d);
    }

  const auto& xs = point.horizontal();
  Vec h2 = Vec::Zero(point.n());
  for (const auto& x : xs) h2 += values(point.second_fundamental(x, x));
  h2 = point.normal_part(Vec(h2 / static_cast<double>(xs.size())));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) {
      Vec d = values(point.second_fundamental(xs[i], xs[j]));
      if (i == j) d -= h2;
      out.second_form_residual = std::max(out.second_form_residual, point.target_norm(d));
    }
  return out;
}

}  // namespace riemap
