// Acceptance suite: one PASS/FAIL line per criterion with the tolerances pinned
// here, independent of the tolerances written into the scenes.
//
// Exit status is 0 when every criterion passes, except those named with
// --known-blocked, which must fail (a blocked criterion that starts passing is
// reported so the list gets updated).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "riemap/checks.hpp"
#include "riemap/errors.hpp"
#include "riemap/geometry.hpp"
#include "riemap/scene.hpp"
#include "support.hpp"

using namespace riemap;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Collects bounded quantities for one criterion; NaN or a missing quantity fails.
class Criterion {
 public:
  void below(const std::string& what, double value, double tol) {
    const bool ok = value <= tol;  // false for NaN
    if (!ok) failures_.push_back(what + " = " + fmt(value) + " > " + fmt(tol));
    worst_ratio_ = std::max(worst_ratio_, ok && tol > 0 ? value / tol : 0.0);
    ++count_;
  }
  void near(const std::string& what, double value, double expected, double tol) {
    below(what + " - " + fmt(expected), std::fabs(value - expected), tol);
  }
  void require(const std::string& what, bool ok) {
    if (!ok) failures_.push_back(what);
    ++count_;
  }
  bool pass() const { return failures_.empty() && count_ > 0; }
  std::string detail() const {
    if (!pass()) {
      std::string out;
      for (std::size_t i = 0; i < failures_.size() && i < 4; ++i) out += (i ? "; " : "") + failures_[i];
      if (failures_.size() > 4) out += "; +" + std::to_string(failures_.size() - 4) + " more";
      return out;
    }
    return std::to_string(count_) + " quantities, worst at " + fmt(worst_ratio_) + " of tolerance";
  }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }
  std::vector<std::string> failures_;
  double worst_ratio_ = 0.0;
  int count_ = 0;
};

const CheckRecord* find_check(const CheckReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

/// Worst value of a metric; NaN if the check or metric is missing or any point errored.
double metric(const CheckReport& r, const std::string& check, const std::string& name) {
  const CheckRecord* c = find_check(r, check);
  if (c == nullptr || c->errors > 0 || c->points != r.samples) return kNaN;
  for (const auto& m : c->metrics)
    if (m.name == name) return m.worst;
  return kNaN;
}

double constant(const CheckReport& r, const std::string& check, const std::string& name) {
  const CheckRecord* c = find_check(r, check);
  if (c == nullptr) return kNaN;
  for (const auto& k : c->constants)
    if (k.name == name) return k.value;
  return kNaN;
}

bool has_note(const CheckReport& r, const std::string& check, const std::string& note) {
  const CheckRecord* c = find_check(r, check);
  return c != nullptr && std::find(c->notes.begin(), c->notes.end(), note) != c->notes.end();
}

std::vector<std::string> metric_names(const CheckReport& r, const std::string& check) {
  std::vector<std::string> out;
  if (const CheckRecord* c = find_check(r, check))
    for (const auto& m : c->metrics) out.push_back(m.name);
  return out;
}

struct Context {
  std::map<std::string, Scene> scenes;
  std::map<std::string, CheckReport> reports;
  int threads = 4;

  const Scene& scene(const std::string& n) const { return scenes.at(n); }
  const CheckReport& report(const std::string& n) const { return reports.at(n); }
};

Criterion example_reproduction(const Context& cx) {
  Criterion c;
  const Scene& s = cx.scene("paper-example");
  const CheckReport& r = cx.report("paper-example");
  c.require("64 sampled points", r.samples == 64);

  MapOptions opts;
  opts.jet_order = s.jet_order;
  opts.rank_tol = s.tolerances.rank_tol;
  opts.pd_tol = s.tolerances.pd_tol;
  double a7 = 0.0;
  int bad_rank = 0;
  for (const Vec& x : sample_points(s.sampling)) {
    const MapPoint p(*s.map, x, opts);
    if (p.rank() != 1 || p.kernel_dim() != 2) ++bad_rank;
    // Shape-operator coefficient of the normal potential along the range.
    const Vec sx = values(p.shape(p.normal()[0], p.horizontal()[0]));
    a7 = std::max(a7, std::fabs(p.target_inner(sx, values(p.range()[0]))));
  }
  c.require("rank 1 and kernel dimension 2 at every point", bad_rank == 0);
  c.below("vertical principal angle", metric(r, "split", "vertical_angle"), 1e-9);
  c.below("riemannian residual", metric(r, "riemannian", "riemannian"), 1e-9);
  c.below("Lie derivative of the potential", metric(r, "soliton", "killing"), 1e-9);
  c.below("mixed Ricci Ric(e1', e2')", metric(r, "ricci-decomposition", "mixed"), 1e-8);
  c.below("soliton fit residual", metric(r, "soliton", "residual"), 1e-8);
  c.near("soliton lambda vs a7^2", constant(r, "soliton", "lambda"), a7 * a7, 1e-8);
  c.require("soliton classification steady", has_note(r, "soliton", "classification steady"));
  return c;
}

Criterion constant_curvature(const Context& cx) {
  Criterion c;
  const CheckReport& s2 = cx.report("sphere-immersion");
  c.below("S2 |s - 2|", metric(s2, "curvature", "scalar_error"), 1e-7);
  c.below("S2 |Ric - g|", metric(s2, "curvature", "ricci_error"), 1e-8);
  c.near("S2 Einstein kappa", constant(s2, "einstein", "kappa"), -1.0, 1e-7);
  c.require("S2 classification shrinking", has_note(s2, "einstein", "classification shrinking"));
  const CheckReport& h2 = cx.report("hyperbolic-plane");
  c.below("H2 |s + 2|", metric(h2, "curvature", "scalar_error"), 1e-7);
  return c;
}

Criterion structural_identities(const Context&) {
  Criterion c;
  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CurvatureIdentities worst;
  auto vec3 = [&] {
    Vec v(3);
    for (int i = 0; i < 3; ++i) v[i] = u(rng);
    return v;
  };
  for (int metric_index = 0; metric_index < 200; ++metric_index) {
    const ChartManifold m = testing::perturbed_flat(rng);
    for (int point = 0; point < 100; ++point) {
      const Vec p = vec3();
      const CurvatureSample cs = curvature_sample(m, p);
      const Vec x = vec3(), y = vec3(), z = vec3();
      const Mat e1 = testing::random_orthonormal_frame(cs.metric.g, rng);
      const Mat e2 = testing::random_orthonormal_frame(cs.metric.g, rng);
      const CurvatureIdentities id = curvature_identities(cs, x, y, z, e1, e2);
      worst.symmetry = std::max(worst.symmetry, id.symmetry);
      worst.bianchi = std::max(worst.bianchi, id.bianchi);
      worst.compatibility = std::max(worst.compatibility, id.compatibility);
      worst.frame = std::max(worst.frame, id.frame);
    }
  }
  c.below("curvature symmetries", worst.symmetry, 1e-8);
  c.below("first Bianchi", worst.bianchi, 1e-8);
  c.below("metric compatibility", worst.compatibility, 1e-8);
  c.below("Ricci frame independence", worst.frame, 1e-8);
  return c;
}

Criterion map_identities(const Context& cx) {
  Criterion c;
  for (const auto& [name, r] : cx.reports)
    for (const char* m : {"orthogonality", "duality", "self_adjoint", "symmetry"})
      c.below(name + " " + m, metric(r, "second-fundamental-form", m), 1e-8);
  c.below("sphere-immersion adjoint identity", metric(cx.report("sphere-immersion"), "second-fundamental-form",
                                                      "adjoint_identity"),
          1e-7);
  return c;
}

Criterion decompositions(const Context& cx) {
  Criterion c;
  for (const std::string name : {"paper-example", "sphere-immersion"}) {
    const CheckReport& r = cx.report(name);
    c.below(name + " mixed curvature full", metric(r, "mixed-curvature", "full"), 1e-6);
    c.below(name + " mixed curvature normal", metric(r, "mixed-curvature", "normal"), 1e-6);
    for (const char* m : {"range_range", "normal_normal", "normal_normal_unreduced", "mixed"})
      c.below(name + " Ricci " + m, metric(r, "ricci-decomposition", m), 1e-6);
    c.below(name + " scalar identity", metric(r, "scalar-decomposition", "identity"), 1e-6);
  }
  const CheckReport& pr = cx.report("projection-submersion");
  const auto tg = metric_names(pr, "totally-geodesic");
  c.require("projection totally-geodesic metrics present", tg.size() == 4);
  for (const auto& m : tg) c.below("projection totally-geodesic " + m, metric(pr, "totally-geodesic", m), 1e-8);
  c.below("projection totally-geodesic scalar correction",
          metric(pr, "scalar-decomposition", "totally_geodesic_correction"), 1e-8);
  return c;
}

Criterion leaves(const Context& cx) {
  Criterion c;
  const CheckReport& r = cx.report("paper-example");
  c.below("example range-leaf Einstein", metric(r, "leaf-range", "einstein"), 1e-8);
  c.below("example range-leaf |s + lambda (m - r)|", metric(r, "leaf-range", "scalar"), 1e-7);

  Overrides ov;
  ov.lambda = std::optional<double>{0.0};
  ov.checks = {"leaf-range"};
  ov.threads = cx.threads;
  const CheckReport pr = run_checks(cx.scene("projection-submersion"), ov);
  c.near("projection leaf lambda", constant(pr, "leaf-range", "lambda"), 0.0, 0.0);
  c.below("projection range-leaf soliton", metric(pr, "leaf-range", "soliton"), 1e-9);
  c.below("projection range-leaf Einstein", metric(pr, "leaf-range", "einstein"), 1e-9);
  return c;
}

Criterion harmonicity(const Context& cx) {
  Criterion c;
  for (const auto& [name, r] : cx.reports) c.below(name + " tension identity", metric(r, "tension", "identity"), 1e-8);
  const CheckReport& s2 = cx.report("sphere-immersion");
  c.below("sphere | |H2| - 1 |", metric(s2, "tension", "h2_error"), 1e-7);
  c.below("sphere | |tau| - 2 |", metric(s2, "tension", "tau_error"), 1e-7);
  c.below("sphere jet vs finite-difference Laplacian", metric(s2, "biharmonic", "laplacian_vs_differences"), 1e-5);
  const CheckReport& pr = cx.report("projection-submersion");
  c.below("projection |tau|", metric(pr, "tension", "tau"), 1e-9);
  for (const char* m : {"tangential", "normal", "bitension"})
    c.below(std::string("projection biharmonic ") + m, metric(pr, "biharmonic", m), 1e-7);
  return c;
}

Criterion determinism(const Context& cx) {
  Criterion c;
  for (const auto& [name, first] : cx.reports) {
    Overrides serial;
    const CheckReport again = run_checks(cx.scene(name), serial);
    c.require(name + " text report repeats byte for byte", render_text(first) == render_text(again));
    c.require(name + " JSON report repeats byte for byte", render_json(first) == render_json(again));
    c.require(name + " second run repeats", render_text(again) == render_text(run_checks(cx.scene(name), serial)));
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> blocked;
  Context cx;
  app.add_option("--known-blocked", blocked, "Criteria expected to fail (see the README)")->check(CLI::Range(1, 8));
  app.add_option("--threads", cx.threads, "Worker threads for scene runs")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  const std::set<int> known(blocked.begin(), blocked.end());

  try {
    for (const auto& name : builtin_scene_names()) {
      cx.scenes.emplace(name, parse_scene(builtin_scene(name)));
      Overrides ov;
      ov.threads = cx.threads;
      cx.reports.emplace(name, run_checks(cx.scenes.at(name), ov));
    }
  } catch (const Error& e) {
    std::printf("error loading built-in scenes: %s\n", e.what());
    return 1;
  }

  const std::vector<std::pair<const char*, std::function<Criterion(const Context&)>>> criteria = {
      {"example reproduction", example_reproduction},
      {"constant-curvature oracles", constant_curvature},
      {"structural curvature identities", structural_identities},
      {"Riemannian-map identities", map_identities},
      {"decomposition theorems", decompositions},
      {"leaf checks", leaves},
      {"harmonicity", harmonicity},
      {"determinism", determinism},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Criterion c;
    try {
      c = criteria[i].second(cx);
    } catch (const Error& e) {
      c.require(std::string("raised ") + to_string(e.kind()) + ": " + e.what(), false);
    }
    const bool blocked_here = known.count(id) > 0;
    std::printf("criterion %d  %s  %-32s %s%s\n", id, c.pass() ? "PASS" : "FAIL", criteria[i].first,
                c.detail().c_str(), blocked_here ? "  [known blocked]" : "");
    if (c.pass() == blocked_here) ++unexpected;
  }
  std::printf("acceptance: %d unexpected result%s\n", unexpected, unexpected == 1 ? "" : "s");
  return unexpected == 0 ? 0 : 1;
}
