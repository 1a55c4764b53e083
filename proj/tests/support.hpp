#pragma once

#include <cstdio>

#include <random>

#include "riemap/rmap.hpp"

namespace riemap::testing {

inline ChartManifold flat(const std::string& name, const std::vector<std::string>& coords) {
  const std::size_t n = coords.size();
  std::vector<std::vector<std::string>> g(n, std::vector<std::string>(n, "0"));
  for (std::size_t i = 0; i < n; ++i) g[i][i] = "1";
  return ChartManifold(name, coords, {}, g);
}

inline SmoothMap identity_map() {
  return SmoothMap(flat("R3", {"x1", "x2", "x3"}), flat("R3", {"y1", "y2", "y3"}), {"x1", "x2", "x3"});
}

inline SmoothMap projection_map() {
  return SmoothMap(flat("R3", {"x1", "x2", "x3"}), flat("R2", {"y1", "y2"}), {"x1", "x2"}, {},
                   {{"1", "0"}, {"0", "1"}});
}

inline SmoothMap conformal_example() {
  ChartManifold m("M", {"x1", "x2", "x3"}, {},
                  {{"exp(2*x3)", "0", "0"}, {"0", "exp(2*x3)", "0"}, {"0", "0", "exp(2*x3)"}});
  ChartManifold n("N", {"y1", "y2"}, {"w"}, {{"w", "0"}, {"0", "1"}});
  return SmoothMap(m, n, {"(x1+x2+x3)/sqrt(3)", "0"}, {{"w", "exp(2*x3)"}}, {{"1/sqrt(w)", "0"}}, {{"0", "1"}});
}

inline ChartManifold round_sphere(double radius = 1.0) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", radius * radius);
  const std::string r2 = buf;
  return ChartManifold("S2", {"th", "ph"}, {}, {{r2, "0"}, {"0", r2 + "*sin(th)^2"}});
}

/// Unit sphere in flat R^3 with the radial normal and unit polar frame extensions.
inline SmoothMap sphere_map() {
  return SmoothMap(round_sphere(), flat("R3", {"y1", "y2", "y3"}),
                   {"sin(th)*cos(ph)", "sin(th)*sin(ph)", "cos(th)"}, {},
                   {{"y1*y3/(sqrt(y1^2+y2^2+y3^2)*sqrt(y1^2+y2^2))", "y2*y3/(sqrt(y1^2+y2^2+y3^2)*sqrt(y1^2+y2^2))",
                     "-sqrt(y1^2+y2^2)/sqrt(y1^2+y2^2+y3^2)"},
                    {"-y2/sqrt(y1^2+y2^2)", "y1/sqrt(y1^2+y2^2)", "0"}},
                   {{"y1/sqrt(y1^2+y2^2+y3^2)", "y2/sqrt(y1^2+y2^2+y3^2)", "y3/sqrt(y1^2+y2^2+y3^2)"}});
}

/// Geodesic sphere of polar radius a0 in the round 3-sphere (hyperspherical chart).
inline SmoothMap small_sphere_in_s3(double a0 = 1.0) {
  ChartManifold s3("S3", {"a", "b", "c"}, {},
                   {{"1", "0", "0"}, {"0", "sin(a)^2", "0"}, {"0", "0", "sin(a)^2*sin(b)^2"}});
  char a[32];
  std::snprintf(a, sizeof a, "%.17g", a0);
  return SmoothMap(round_sphere(std::sin(a0)), s3, {a, "th", "ph"}, {},
                   {{"0", "1/sin(a)", "0"}, {"0", "0", "1/(sin(a)*sin(b))"}}, {{"1", "0", "0"}});
}

inline SmoothMap hyperbolic_identity() {
  ChartManifold h("H2", {"x", "y"}, {}, {{"1/y^2", "0"}, {"0", "1/y^2"}});
  ChartManifold t("H2", {"u", "v"}, {}, {{"1/v^2", "0"}, {"0", "1/v^2"}});
  return SmoothMap(h, t, {"x", "y"});
}

inline Vec uniform_point(std::mt19937_64& rng, const Vec& lo, const Vec& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec p(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) p[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
  return p;
}

inline Vec random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

/// Flat metric on R^3 plus small smooth sinusoidal perturbations; stays positive definite.
inline ChartManifold perturbed_flat(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto term = [&] {
    char buf[160];
    std::snprintf(buf, sizeof buf, "0.08*sin(%.4f*x1 + %.4f*x2 + %.4f*x3 + %.4f)", 2 * u(rng), 2 * u(rng), 2 * u(rng),
                  3 * u(rng));
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> g(3, std::vector<std::string>(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      const std::string t = term();
      g[i][j] = (i == j ? "1 + " : "") + t;
      g[j][i] = g[i][j];
    }
  }
  return ChartManifold("P", {"x1", "x2", "x3"}, {}, g);
}

inline Mat random_orthonormal_frame(const Mat& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Mat v(g.rows(), g.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = n01(rng);
  return orthonormalize(g, v);
}

}  // namespace riemap::testing
