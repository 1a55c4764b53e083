#include "riemap/checks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "riemap/errors.hpp"
#include "riemap/harmonicity.hpp"
#include "riemap/soliton.hpp"

namespace riemap {

namespace {

using Json = nlohmann::ordered_json;

struct MetricValue {
  std::string name;
  double value;
  double tol;
};

/// Everything one check produced at one point.
struct PointOut {
  std::vector<MetricValue> metrics;
  std::vector<Constant> values;  // averaged over points
  std::vector<std::string> flags;
  std::vector<std::string> notes;
  std::optional<Mat> mat;
  std::optional<LeafPoint> leaf;
  std::optional<ErrorKind> error;
  std::string message;
  bool numeric = false;

  void metric(const std::string& name, double value, double tol) {
    for (auto& m : metrics)
      if (m.name == name) {
        m.value = std::isnan(value) || std::isnan(m.value) ? NAN : std::max(m.value, value);
        return;
      }
    metrics.push_back({name, value, tol});
  }
  void value(const std::string& name, double v) { values.push_back({name, v}); }
  void flag(const std::string& f) {
    if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
  }
};

/// Lazily built per-point objects shared by all checks at that point.
struct PointEnv {
  PointEnv(const Scene& s, const MapOptions& o, const Vec& p, std::uint64_t i) : scene(s), options(o), x(p), index(i) {}

  const Scene& scene;
  const MapOptions& options;
  const Vec& x;
  std::uint64_t index;

  std::optional<MapPoint> point;
  std::optional<Error> point_error;
  std::optional<AmbientFrame> frame;
  std::optional<Error> frame_error;
  bool point_tried = false, frame_tried = false;

  const MapPoint& map_point() {
    if (!point_tried) {
      point_tried = true;
      try {
        point.emplace(*scene.map, x, options);
      } catch (const Error& e) {
        point_error.emplace(e);
      }
    }
    if (point_error) throw *point_error;
    return *point;
  }
  const AmbientFrame& ambient() {
    const MapPoint& p = map_point();
    if (!frame_tried) {
      frame_tried = true;
      try {
        frame.emplace(p);
      } catch (const Error& e) {
        frame_error.emplace(e);
      }
    }
    if (frame_error) throw *frame_error;
    return *frame;
  }
};

struct Settings {
  const CheckSpec& spec;
  double tol;
  double class_tol;
  double pd_tol;
  std::optional<std::optional<double>> lambda_override;
  std::uint64_t seed;

  bool flag(const char* key) const { return spec.options.value(key, false); }
  std::optional<double> number(const char* key) const {
    if (!spec.options.contains(key) || !spec.options[key].is_number()) return std::nullopt;
    return spec.options[key].get<double>();
  }
  std::string text(const char* key, const std::string& fallback) const { return spec.options.value(key, fallback); }
  /// Option tol, else the given default.
  double tol_or(double fallback) const { return number("tol").value_or(fallback); }
  std::optional<double> lambda() const {
    if (lambda_override) return *lambda_override;
    return number("lambda");
  }
};

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::vector<Vec> frame_values(const std::vector<JetVec>& fields) {
  std::vector<Vec> out;
  for (const auto& f : fields) out.push_back(values(f));
  return out;
}

/// Deterministic standard normal matrix from the sampling stream, salted per use.
Mat stream_matrix(std::uint64_t seed, std::uint64_t salt, std::uint64_t index, int rows, int cols) {
  Mat a(rows, cols);
  for (int i = 0; i < rows * cols; ++i) {
    const std::uint64_t k = (index * 64 + static_cast<std::uint64_t>(i)) * 2;
    const double u1 = std::max(uniform_at(seed ^ salt, k), 0x1.0p-53);
    const double u2 = uniform_at(seed ^ salt, k + 1);
    a.data()[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return a;
}

Mat rotate(const Mat& frame, const Mat& random) {
  if (frame.cols() == 0) return frame;
  const Mat q = Eigen::HouseholderQR<Mat>(random).householderQ();
  return frame * q;
}

Mat columns(const std::vector<Vec>& vs, int rows) {
  Mat out(rows, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = vs[i];
  return out;
}

ChartPoint chart_point(PointEnv& env, bool on_source) {
  if (on_source) return {env.x, {}};
  const MapPoint& p = env.map_point();
  return {p.image(), p.target_bindings()};
}

// ---- per-point checks ---------------------------------------------------

void riemannian(PointEnv& env, const Settings& s, PointOut& out) {
  const MapPoint& p = env.map_point();
  out.metric("riemannian", verify_riemannian(p), s.tol_or(s.tol));
  out.value("rank", p.rank());
  out.value("kernel_dim", p.kernel_dim());
  out.value("normal_dim", p.normal_dim());
}

void split(PointEnv& env, const Settings& s, PointOut& out) {
  const MapPoint& p = env.map_point();
  const SplitBases b = p.split();
  const Mat& g = p.source_metric().g.values();
  const Mat& h = p.target_metric().values();
  auto ortho = [](const Mat& e, const Mat& metric) {
    if (e.cols() == 0) return 0.0;
    return max_abs(e.transpose() * metric * e - Mat::Identity(e.cols(), e.cols()));
  };
  double orth = std::max({ortho(b.vertical, g), ortho(b.horizontal, g), ortho(b.range, h), ortho(b.normal, h)});
  if (b.vertical.cols() > 0 && b.horizontal.cols() > 0)
    orth = std::max(orth, max_abs(b.vertical.transpose() * g * b.horizontal));
  out.metric("orthonormality", orth, s.tol);
  out.value("rank", b.rank);
  out.value("kernel_dim", p.kernel_dim());
  // Smallest singular value kept in the rank; Eigen sorts them in decreasing order.
  out.value("smallest_retained_singular_value", b.rank > 0 ? b.singular_values[b.rank - 1] : 0.0);
  if (s.spec.options.contains("vertical_span")) {
    std::vector<Vec> span;
    for (const auto& row : s.spec.options["vertical_span"]) {
      Vec v(p.m());
      for (int i = 0; i < p.m(); ++i) v[i] = row[static_cast<std::size_t>(i)].get<double>();
      span.push_back(v);
    }
    const Mat expected = orthonormalize(g, columns(span, p.m()));
    double angle = 0.0;
    if (expected.cols() != b.vertical.cols()) {
      angle = M_PI / 2;
    } else if (expected.cols() > 0) {
      // sine of the largest principal angle: residual of the expected basis off the computed span
      const Mat residual = expected - b.vertical * (b.vertical.transpose() * g * expected);
      for (Eigen::Index j = 0; j < residual.cols(); ++j)
        angle = std::max(angle, std::asin(std::min(1.0, std::sqrt(std::max(0.0, residual.col(j).dot(g * residual.col(j)))))));
    }
    out.metric("vertical_angle", angle, s.tol_or(1e-9));
  }
}

void second_fundamental_form_check(PointEnv& env, const Settings& s, PointOut& out) {
  const MapPoint& p = env.map_point();
  const double tol = s.tol_or(s.tol);
  const auto& hs = p.horizontal();
  std::vector<JetVec> full = p.vertical();
  full.insert(full.end(), hs.begin(), hs.end());

  double orth = 0.0, sym = 0.0;
  for (const auto& a : hs)
    for (const auto& b : hs) {
      const Vec bab = values(p.second_fundamental(a, b));
      for (const auto& fz : p.range()) orth = std::max(orth, std::fabs(p.target_inner(bab, values(fz))));
    }
  for (const auto& a : full)
    for (const auto& b : full)
      sym = std::max(sym, p.target_norm(values(p.second_fundamental(a, b)) - values(p.second_fundamental(b, a))));
  out.metric("orthogonality", orth, tol);
  out.metric("symmetry", sym, tol);

  double dual = 0.0, self = 0.0, adjoint = 0.0;
  for (const auto& v : p.normal())
    for (const auto& a : hs)
      for (const auto& b : hs) {
        const Vec sa = values(p.shape(v, a)), sb = values(p.shape(v, b));
        const Vec fa = p.push(values(a)), fb = p.push(values(b));
        const Vec bab = values(p.second_fundamental(a, b));
        dual = std::max(dual, std::fabs(p.target_inner(sa, fb) - p.target_inner(values(v), bab)));
        self = std::max(self, std::fabs(p.target_inner(sa, fb) - p.target_inner(fa, sb)));
        const Vec lifted = values(p.second_fundamental(a, p.adjoint() * p.shape(v, b)));
        for (const auto& w : p.normal())
          adjoint = std::max(adjoint, std::fabs(p.target_inner(lifted, values(w)) -
                                                p.target_inner(values(p.shape(w, a)), sb)));
      }
  out.metric("duality", dual, tol);
  out.metric("self_adjoint", self, tol);
  out.metric("adjoint_identity", adjoint, s.number("adjoint_tol").value_or(1e-7));
}

void mixed_curvature(PointEnv& env, const Settings& s, PointOut& out) {
  const AmbientFrame& f = env.ambient();
  if (f.normal().empty()) {
    out.notes.push_back("normal distribution empty");
    return;
  }
  const double tol = s.tol_or(1e-6);
  for (const auto& fx : f.range())
    for (const auto& v : f.normal())
      for (const auto& w : f.normal()) {
        const MixedCurvature r = curvature_mixed_check(f, values(fx), v, w);
        out.metric("full", r.full, tol);
        out.metric("normal", r.normal, tol);
        if (r.assumption > s.tol) out.flag("AssumptionViolated");
        out.value("assumption", r.assumption);
      }
}

void ricci_decomposition(PointEnv& env, const Settings& s, PointOut& out) {
  const AmbientFrame& f = env.ambient();
  const double tol = s.tol_or(1e-6);
  const std::vector<Vec> rs = frame_values(f.range()), ns = frame_values(f.normal());
  for (const auto& a : rs)
    for (const auto& b : rs) out.metric("range_range", ricci_range_range(f, a, b).residual(), tol);
  for (const auto& a : ns)
    for (const auto& b : ns) {
      out.metric("normal_normal", ricci_normal_normal(f, a, b).residual(), tol);
      out.metric("normal_normal_unreduced", ricci_normal_normal_unreduced(f, a, b).residual(), tol);
    }
  for (const auto& a : rs)
    for (const auto& v : ns) out.metric("mixed", ricci_mixed(f, a, v).residual(), tol);
}

void scalar_decomposition_check(PointEnv& env, const Settings& s, PointOut& out) {
  const MapPoint& p = env.map_point();
  const AmbientFrame& f = env.ambient();
  const ScalarDecomposition sd = scalar_decomposition(f);
  out.metric("identity", sd.report.residual(), s.tol_or(1e-6));
  out.value("scalar", sd.report.lhs);
  out.value("correction", sd.correction);
  const TotallyGeodesic tg = totally_geodesic_checks(p, &f);
  const double worst = std::max({tg.a_tensor, tg.t_tensor, tg.shape, tg.normal_geodesic.value_or(0.0)});
  if (worst <= s.tol) out.metric("totally_geodesic_correction", std::fabs(sd.correction), s.tol);
}

void totally_geodesic(PointEnv& env, const Settings& s, PointOut& out) {
  const MapPoint& p = env.map_point();
  const AmbientFrame* f = nullptr;
  try {
    f = &env.ambient();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ExtensionRequired) throw;
  }
  const TotallyGeodesic tg = totally_geodesic_checks(p, f);
  const double tol = s.tol_or(s.tol);
  out.metric("a_tensor", tg.a_tensor, tol);
  out.metric("t_tensor", tg.t_tensor, tol);
  out.metric("shape", tg.shape, tol);
  if (tg.normal_geodesic) out.metric("normal_geodesic", *tg.normal_geodesic, tol);
}

void umbilic(PointEnv& env, const Settings& s, PointOut& out) {
  const UmbilicFit u = umbilic_fit(env.map_point(), s.tol);
  out.metric("residual", u.residual, s.tol_or(s.tol));
  out.value("f", u.f);
  out.value("second_form_residual", u.second_form_residual);
  // Corollary value for comparison only; its derivation assumes one normal direction.
  out.value("corollary_correction", umbilic_scalar_correction(u.f, env.map_point().rank()));
  if (u.degenerate) out.flag("Degenerate");
}

void curvature(PointEnv& env, const Settings& s, PointOut& out) {
  const bool on_source = s.text("manifold", "source") == "source";
  const ChartPoint cp = chart_point(env, on_source);
  const ChartManifold& m = on_source ? env.scene.map->source() : env.scene.map->target();
  const CurvatureSample cs = curvature_sample(m, cp.point, cp.bindings, s.pd_tol);
  const int n = m.dim();
  const Mat probes = stream_matrix(s.seed, 0xC0FFEE, env.index, n, 3);
  const Mat& g = cs.metric.g;
  const Mat e1 = orthonormalize(g, stream_matrix(s.seed, 0xE1, env.index, n, n));
  const Mat e2 = orthonormalize(g, stream_matrix(s.seed, 0xE2, env.index, n, n));
  const CurvatureIdentities ci = curvature_identities(cs, probes.col(0), probes.col(1), probes.col(2), e1, e2);
  const double tol = s.tol_or(s.tol);
  out.metric("symmetry", ci.symmetry, tol);
  out.metric("bianchi", ci.bianchi, tol);
  out.metric("compatibility", ci.compatibility, tol);
  out.metric("frame", ci.frame, tol);
  out.value("scalar", cs.scalar);
  if (auto want = s.number("scalar")) out.metric("scalar_error", std::fabs(cs.scalar - *want), tol);
  if (auto k = s.number("ricci_factor")) {
    const Mat ric = e1.transpose() * cs.ricci * e1;
    out.metric("ricci_error", max_abs(ric - *k * Mat::Identity(n, n)), tol);
  }
}

void einstein(PointEnv& env, const Settings& s, PointOut& out) {
  const bool on_source = s.text("manifold", "source") == "source";
  const ChartManifold& m = on_source ? env.scene.map->source() : env.scene.map->target();
  out.mat = ricci_on_frame(m, chart_point(env, on_source), s.pd_tol);
}

const std::vector<Expression>* field_of(const Scene& scene, const Settings& s) {
  if (!s.spec.options.contains("field")) return nullptr;
  return &scene.fields.at(s.spec.options["field"].get<std::string>()).parsed;
}

void soliton(PointEnv& env, const Settings& s, PointOut& out) {
  const bool on_source = s.text("manifold", "target") == "source";
  const ChartManifold& m = on_source ? env.scene.map->source() : env.scene.map->target();
  const std::vector<Expression>* xi = field_of(env.scene, s);
  const std::vector<Expression> none;
  const ChartPoint cp = chart_point(env, on_source);
  out.mat = soliton_tensor(m, xi ? *xi : none, cp, s.pd_tol);
  if (s.flag("killing")) out.metric("killing", killing_residual(m, xi ? *xi : none, {cp}, s.pd_tol), s.tol_or(s.tol));
}

Potential potential_of(const Scene& scene, const Settings& s) {
  Potential pot;
  if (!s.spec.options.contains("field")) return pot;
  const FieldDef& f = scene.fields.at(s.spec.options["field"].get<std::string>());
  pot.kind = f.on == FieldDef::On::Target ? Potential::Kind::Target : Potential::Kind::Push;
  pot.field = f.parsed;
  return pot;
}

void leaf(PointEnv& env, const Settings& s, PointOut& out, Restriction which) {
  out.leaf = leaf_point(env.map_point(), env.ambient(), which, potential_of(env.scene, s));
}

void tension_check(PointEnv& env, const Settings& s, PointOut& out) {
  const MapPoint& p = env.map_point();
  const double tol = s.tol_or(s.tol);
  const TensionReport t = tension(p);
  const MeanCurvatures mc = mean_curvatures(p);
  out.metric("identity", t.identity_residual, tol);
  const SplitBases b = p.split();
  const MeanCurvatures rotated =
      mean_curvatures(p, rotate(b.vertical, stream_matrix(s.seed, 0xF1, env.index, static_cast<int>(b.vertical.cols()),
                                                          static_cast<int>(b.vertical.cols()))),
                      rotate(b.horizontal, stream_matrix(s.seed, 0xF2, env.index, static_cast<int>(b.horizontal.cols()),
                                                         static_cast<int>(b.horizontal.cols()))));
  out.metric("frame", std::max((mc.h - rotated.h).norm(), (mc.h2 - rotated.h2).norm()), tol);
  double h2_range = 0.0;
  for (const auto& r : p.range()) h2_range = std::max(h2_range, std::fabs(p.target_inner(mc.h2, values(r))));
  out.metric("h2_normal", h2_range, tol);
  out.value("tau_norm", t.norm);
  out.value("h_norm", p.source_norm(mc.h));
  out.value("h2_norm", p.target_norm(mc.h2));
  if (s.flag("harmonic")) out.metric("tau", t.norm, tol);
  if (auto v = s.number("h2_norm")) out.metric("h2_error", std::fabs(p.target_norm(mc.h2) - *v), tol);
  if (auto v = s.number("tau_norm")) out.metric("tau_error", std::fabs(t.norm - *v), tol);
}

/// Laplace-Beltrami of the tension values by central differences, valid when
/// the target Christoffel symbols vanish.
Vec laplacian_by_differences(const Scene& scene, const MapOptions& options, const MapPoint& p, double h) {
  const int m = p.m();
  auto tau = [&](const Vec& x) {
    const MapPoint q(*scene.map, x, options);
    return tension(q).tau;
  };
  const Vec t0 = tau(p.point());
  std::vector<Vec> d1(static_cast<std::size_t>(m));
  std::vector<std::vector<Vec>> d2(static_cast<std::size_t>(m), std::vector<Vec>(static_cast<std::size_t>(m)));
  for (int i = 0; i < m; ++i) {
    Vec a = p.point(), b = p.point();
    a[i] += h;
    b[i] -= h;
    const Vec ta = tau(a), tb = tau(b);
    d1[static_cast<std::size_t>(i)] = (ta - tb) / (2 * h);
    d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = (ta - 2 * t0 + tb) / (h * h);
    for (int j = 0; j < i; ++j) {
      Vec pp = p.point(), pm = p.point(), mp = p.point(), mm = p.point();
      pp[i] += h, pp[j] += h;
      pm[i] += h, pm[j] -= h;
      mp[i] -= h, mp[j] += h;
      mm[i] -= h, mm[j] -= h;
      const Vec mixed = (tau(pp) - tau(pm) - tau(mp) + tau(mm)) / (4 * h * h);
      d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = mixed;
      d2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = mixed;
    }
  }
  const Mat& g_inv = p.source_metric().g_inv.values();
  Vec out = Vec::Zero(p.n());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Vec term = d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      for (int k = 0; k < m; ++k) term -= p.source_metric().gamma[static_cast<std::size_t>(k)](i, j).value() * d1[static_cast<std::size_t>(k)];
      out += g_inv(i, j) * term;
    }
  return out;
}

void biharmonic(PointEnv& env, const Settings& s, PointOut& out) {
  const MapPoint& p = env.map_point();
  const double c = *env.scene.space_form;
  const BitensionConditions bc = bitension_conditions(p, c);
  const Vec direct = bitension_direct(p, c);
  const double tol = s.tol_or(s.tol);
  const double nt = p.target_norm(bc.tangential), nn = p.target_norm(bc.normal), nd = p.target_norm(direct);
  out.value("tangential_norm", nt);
  out.value("normal_norm", nn);
  out.value("bitension_norm", nd);
  out.value("normal_terms_range_leak", bc.leak);
  out.metric("reassembly", p.target_norm(direct - (bc.tangential - bc.normal)), 1e-7);
  // Only joint vanishing is claimed: both conditions hold exactly when the bitension vanishes.
  out.metric("joint_vanishing", (std::max(nt, nn) <= tol) == (nd <= tol) ? 0.0 : 1.0, 0.0);
  if (s.flag("biharmonic")) {
    out.metric("tangential", nt, tol);
    out.metric("normal", nn, tol);
    out.metric("bitension", nd, tol);
  }
  if (s.flag("finite_differences")) {
    const CurvatureSample cs =
        curvature_sample(env.scene.map->target(), p.image(), p.target_bindings(), s.pd_tol);
    double gamma = 0.0;
    for (const auto& g : cs.gamma) gamma = std::max(gamma, max_abs(g));
    if (gamma > 1e-12) {
      out.notes.push_back("finite differences skipped: target Christoffel symbols do not vanish");
    } else {
      const Vec jet = rough_laplacian(p, tension_field(p));
      const Vec fd = laplacian_by_differences(env.scene, env.options, p, 1e-3);
      out.metric("laplacian_vs_differences", (jet - fd).norm(), 1e-5);
    }
  }
}

using PointCheck = void (*)(PointEnv&, const Settings&, PointOut&);

PointCheck dispatch(const std::string& name) {
  if (name == "riemannian") return riemannian;
  if (name == "split") return split;
  if (name == "second-fundamental-form") return second_fundamental_form_check;
  if (name == "mixed-curvature") return mixed_curvature;
  if (name == "ricci-decomposition") return ricci_decomposition;
  if (name == "scalar-decomposition") return scalar_decomposition_check;
  if (name == "totally-geodesic") return totally_geodesic;
  if (name == "umbilic") return umbilic;
  if (name == "curvature") return curvature;
  if (name == "einstein") return einstein;
  if (name == "soliton") return soliton;
  if (name == "leaf-range") return [](PointEnv& e, const Settings& s, PointOut& o) { leaf(e, s, o, Restriction::Range); };
  if (name == "leaf-normal") return [](PointEnv& e, const Settings& s, PointOut& o) { leaf(e, s, o, Restriction::Normal); };
  if (name == "tension") return tension_check;
  if (name == "biharmonic") return biharmonic;
  throw Error(ErrorKind::Schema, "unknown check '" + name + "'");
}

// ---- aggregation ---------------------------------------------------------

void merge_metric(CheckRecord& r, const MetricValue& m) {
  for (auto& x : r.metrics)
    if (x.name == m.name) {
      x.worst = std::isnan(m.value) || std::isnan(x.worst) ? NAN : std::max(x.worst, m.value);
      return;
    }
  r.metrics.push_back({m.name, m.value, m.tol});
}

void add_flag(CheckRecord& r, const std::string& f) {
  if (std::find(r.flags.begin(), r.flags.end(), f) == r.flags.end()) r.flags.push_back(f);
}

void finish_fit(CheckRecord& r, const std::vector<Mat>& mats, const Settings& s, const char* constant) {
  if (mats.empty()) return;
  const EinsteinFit fit = fit_constant(mats, s.lambda(), s.class_tol);
  r.metrics.insert(r.metrics.begin(), Metric{"residual", fit.residual, s.tol_or(s.tol)});
  r.constants.push_back({constant, fit.kappa});
  r.notes.push_back(std::string("classification ") + to_string(fit.classification));
  r.notes.push_back(fit.fitted ? "fitted" : "imposed");
  if (fit.degenerate) add_flag(r, "Degenerate");
}

void finish_leaf(CheckRecord& r, const std::vector<LeafPoint>& points, const Settings& s, const Scene& scene,
                 Restriction which) {
  if (points.empty()) return;
  const LeafReport lr = leaf_summary(points, which, s.lambda(), s.class_tol);
  const double tol = s.tol_or(s.tol);
  const Potential pot = potential_of(scene, s);
  r.constants.push_back({"lambda", lr.lambda});
  r.constants.push_back({"dim", static_cast<double>(lr.dim)});
  r.constants.push_back({"scalar", lr.scalar});
  r.constants.push_back({"hypothesis", lr.hypothesis});
  r.notes.push_back(std::string("classification ") + to_string(lr.classification));
  r.notes.push_back(lr.fitted ? "fitted" : "imposed");
  if (s.text("form", "restricted") == "intrinsic") {
    if (!lr.intrinsic_residual) {
      r.errors += 1;
      r.first_error = "intrinsic leaf curvature needs a leaf of dimension at least 2";
      return;
    }
    r.metrics.push_back({"intrinsic", *lr.intrinsic_residual, tol});
  } else {
    if (lr.soliton_residual) r.metrics.push_back({"soliton", *lr.soliton_residual, tol});
    const bool einstein_branch = pot.kind == Potential::Kind::Zero ||
                                 (which == Restriction::Range && pot.kind == Potential::Kind::Target && lr.potential_off <= tol) ||
                                 (which == Restriction::Normal && pot.kind == Potential::Kind::Push);
    if (einstein_branch) {
      r.metrics.push_back({"einstein", lr.einstein_residual, tol});
      r.metrics.push_back({"scalar", lr.scalar_residual, tol});
    }
    if (lr.intrinsic_residual) r.constants.push_back({"intrinsic_residual", *lr.intrinsic_residual});
  }
  if (lr.hypothesis > tol) add_flag(r, "HypothesisUnmet");
  if (pot.kind == Potential::Kind::Target && lr.potential_off > tol) add_flag(r, "PotentialOutsideDistribution");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

}  // namespace

CheckReport run_checks(const Scene& scene, const Overrides& overrides) {
  CheckReport report;
  report.scene = scene.name;
  report.digest = scene_digest(scene.text);
  report.tolerances = scene.tolerances;
  if (overrides.tol) report.tolerances.tol = *overrides.tol;
  if (overrides.rank_tol) report.tolerances.rank_tol = *overrides.rank_tol;
  Sampling sampling = scene.sampling;
  if (overrides.seed) sampling.seed = *overrides.seed;
  if (overrides.samples) sampling.count = *overrides.samples;
  report.seed = sampling.seed;
  report.samples = sampling.count;
  report.jet_order = overrides.jet_order.value_or(scene.jet_order);

  MapOptions options;
  options.jet_order = report.jet_order;
  options.rank_tol = report.tolerances.rank_tol;
  options.pd_tol = report.tolerances.pd_tol;

  std::vector<CheckSpec> specs;
  if (overrides.checks.empty()) {
    specs = scene.checks;
  } else {
    for (const auto& name : overrides.checks) {
      const auto it = std::find_if(scene.checks.begin(), scene.checks.end(), [&](const CheckSpec& c) { return c.name == name; });
      if (it != scene.checks.end()) {
        specs.push_back(*it);
      } else {
        dispatch(name);  // rejects unknown names
        if (name == "biharmonic" && !scene.space_form)
          throw Error(ErrorKind::Schema, "check 'biharmonic' needs 'space_form'");
        specs.push_back({name, Json::object()});
      }
    }
  }

  std::vector<Settings> settings;
  std::vector<PointCheck> fns;
  for (const auto& spec : specs) {
    settings.push_back({spec, report.tolerances.tol, report.tolerances.class_tol, report.tolerances.pd_tol,
                        overrides.lambda, sampling.seed});
    fns.push_back(dispatch(spec.name));
  }

  const std::vector<Vec> points = sample_points(sampling);
  const std::size_t np = points.size(), nc = specs.size();
  std::vector<std::vector<PointOut>> results(nc, std::vector<PointOut>(np));

  auto work = [&](std::size_t i) {
    PointEnv env{scene, options, points[i], i};
    for (std::size_t c = 0; c < nc; ++c) {
      PointOut& out = results[c][i];
      try {
        fns[c](env, settings[c], out);
      } catch (const Error& e) {
        out = PointOut{};
        out.error = e.kind();
        out.message = e.what();
        out.numeric = e.is_numeric();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(overrides.threads, static_cast<int>(np)));
  if (threads == 1) {
    for (std::size_t i = 0; i < np; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < np; i = next++) work(i);
      });
    for (auto& t : pool) t.join();
  }

  // Merge in point order so the report never depends on scheduling.
  for (std::size_t c = 0; c < nc; ++c) {
    CheckRecord r;
    r.name = specs[c].name;
    std::vector<Mat> mats;
    std::vector<LeafPoint> leaves;
    std::vector<std::string> value_order;
    std::map<std::string, double> sums;
    for (std::size_t i = 0; i < np; ++i) {
      const PointOut& out = results[c][i];
      if (out.error) {
        ++r.errors;
        ++r.error_kinds[to_string(*out.error)];
        if (r.first_error.empty()) r.first_error = "point " + std::to_string(i) + ": " + out.message;
        r.numeric_error = r.numeric_error || out.numeric;
        continue;
      }
      ++r.points;
      for (const auto& m : out.metrics) merge_metric(r, m);
      for (const auto& v : out.values) {
        if (!sums.count(v.name)) value_order.push_back(v.name);
        sums[v.name] += v.value;
      }
      for (const auto& f : out.flags) add_flag(r, f);
      for (const auto& n : out.notes)
        if (std::find(r.notes.begin(), r.notes.end(), n) == r.notes.end()) r.notes.push_back(n);
      if (out.mat) mats.push_back(*out.mat);
      if (out.leaf) leaves.push_back(*out.leaf);
    }
    for (const auto& name : value_order) r.constants.push_back({"mean_" + name, sums[name] / r.points});
    try {
      if (r.name == "einstein") finish_fit(r, mats, settings[c], "kappa");
      if (r.name == "soliton") finish_fit(r, mats, settings[c], "lambda");
      if (r.name == "leaf-range") finish_leaf(r, leaves, settings[c], scene, Restriction::Range);
      if (r.name == "leaf-normal") finish_leaf(r, leaves, settings[c], scene, Restriction::Normal);
    } catch (const Error& e) {
      ++r.errors;
      if (r.first_error.empty()) r.first_error = e.what();
      r.numeric_error = r.numeric_error || e.is_numeric();
    }
    r.pass = r.errors == 0 && r.points > 0 &&
             std::all_of(r.metrics.begin(), r.metrics.end(), [](const Metric& m) { return m.pass(); });
    report.checks.push_back(std::move(r));
  }
  return report;
}

int exit_status(const CheckReport& report) {
  bool failed = false;
  for (const auto& c : report.checks) {
    if (c.numeric_error) return 3;
    if (!c.pass && !c.flagged()) failed = true;
  }
  return failed ? 1 : 0;
}

std::string render_text(const CheckReport& report) {
  std::string out;
  char line[256];
  auto row = [&](const char* key, const std::string& value) {
    std::snprintf(line, sizeof line, "%-10s %s\n", key, value.c_str());
    out += line;
  };
  row("scene", report.scene);
  row("digest", report.digest);
  row("seed", std::to_string(report.seed));
  row("samples", std::to_string(report.samples));
  row("jet_order", std::to_string(report.jet_order));
  row("tol", format_double(report.tolerances.tol));
  row("rank_tol", format_double(report.tolerances.rank_tol));
  row("pd_tol", format_double(report.tolerances.pd_tol));
  row("class_tol", format_double(report.tolerances.class_tol));
  int passed = 0, failed = 0, flagged = 0;
  for (const auto& c : report.checks) {
    out += "\n";
    const char* status = c.pass ? "PASS" : (c.errors > 0 ? "ERROR" : "FAIL");
    std::snprintf(line, sizeof line, "check %-26s %-5s points %d/%d\n", c.name.c_str(), status, c.points,
                  c.points + c.errors);
    out += line;
    for (const auto& m : c.metrics) {
      std::snprintf(line, sizeof line, "  metric %-28s %16s  tol %s  %s\n", m.name.c_str(), format_double(m.worst).c_str(),
                    format_double(m.tol).c_str(), m.pass() ? "ok" : "over");
      out += line;
    }
    for (const auto& k : c.constants) {
      std::snprintf(line, sizeof line, "  value  %-28s %16s\n", k.name.c_str(), format_double(k.value).c_str());
      out += line;
    }
    for (const auto& n : c.notes) out += "  note   " + n + "\n";
    for (const auto& f : c.flags) out += "  flag   " + f + "\n";
    for (const auto& [kind, count] : c.error_kinds) out += "  error  " + kind + " at " + std::to_string(count) + " points\n";
    if (!c.first_error.empty()) out += "  first  " + c.first_error + "\n";
    if (c.flagged()) {
      ++flagged;
    } else if (c.pass) {
      ++passed;
    } else {
      ++failed;
    }
  }
  std::snprintf(line, sizeof line, "\nsummary: %d passed, %d failed, %d flagged, exit %d\n", passed, failed, flagged,
                exit_status(report));
  out += line;
  return out;
}

std::string render_json(const CheckReport& report) {
  Json j;
  j["scene"] = report.scene;
  j["digest"] = report.digest;
  j["environment"] = {{"seed", report.seed},
                      {"samples", report.samples},
                      {"jet_order", report.jet_order},
                      {"tol", report.tolerances.tol},
                      {"rank_tol", report.tolerances.rank_tol},
                      {"pd_tol", report.tolerances.pd_tol},
                      {"class_tol", report.tolerances.class_tol}};
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json cj;
    cj["name"] = c.name;
    cj["pass"] = c.pass;
    cj["points"] = c.points;
    cj["errors"] = c.errors;
    Json metrics = Json::array();
    for (const auto& m : c.metrics)
      metrics.push_back({{"name", m.name}, {"worst", std::isnan(m.worst) ? Json(nullptr) : Json(m.worst)},
                         {"tol", m.tol}, {"pass", m.pass()}});
    cj["metrics"] = metrics;
    Json constants = Json::object();
    for (const auto& k : c.constants) constants[k.name] = k.value;
    cj["values"] = constants;
    cj["notes"] = c.notes;
    cj["flags"] = c.flags;
    Json kinds = Json::object();
    for (const auto& [kind, count] : c.error_kinds) kinds[kind] = count;
    cj["error_kinds"] = kinds;
    if (!c.first_error.empty()) cj["first_error"] = c.first_error;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["exit_status"] = exit_status(report);
  return j.dump(2) + "\n";
}

}  // namespace riemap
