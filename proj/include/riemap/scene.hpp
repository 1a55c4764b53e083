#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riemap/rmap.hpp"

namespace riemap {

struct FieldDef {
  enum class On { Source, Target };
  On on = On::Target;
  std::vector<std::string> components;
  std::vector<Expression> parsed;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct Sampling {
  int count = 64;
  std::uint64_t seed = 0;
  std::vector<Interval> box;
};

struct Tolerances {
  double tol = 1e-8;
  double rank_tol = 1e-8;
  double pd_tol = kDefaultPdTol;
  double class_tol = 1e-7;
};

/// One requested check with its raw options; options are validated against
/// the check catalog when the scene is loaded.
struct CheckSpec {
  std::string name;
  nlohmann::ordered_json options = nlohmann::ordered_json::object();
};

struct Scene {
  std::string name;
  std::string description;
  std::string text;  // the exact bytes the scene was loaded from
  std::shared_ptr<const SmoothMap> map;
  std::map<std::string, FieldDef> fields;
  std::optional<double> space_form;
  Sampling sampling;
  Tolerances tolerances;
  int jet_order = 4;
  std::vector<CheckSpec> checks;
};

/// Parses and validates a scene.  Malformed JSON raises SyntaxError-kind
/// errors with line and column; structural problems raise Schema; bad
/// expressions keep their own kind with the offending JSON path prepended.
Scene parse_scene(const std::string& text);
Scene load_scene(const std::string& path);

/// Text of a shipped scene; throws UnknownScene.
const std::string& builtin_scene(const std::string& name);
std::vector<std::string> builtin_scene_names();

/// Checks known to run_checks, in catalog order.
const std::vector<std::string>& check_names();

/// SplitMix64 finalizer.
std::uint64_t splitmix64_mix(std::uint64_t z);
/// Counter-based stream: value(i) = mix(seed + (i + 1) * 0x9E3779B97F4A7C15).
std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index);
/// Uniform double in [0, 1) from the top 53 bits of value(index).
double uniform_at(std::uint64_t seed, std::uint64_t index);

/// Point k, coordinate j uses stream index k * dim + j.
std::vector<Vec> sample_points(const Sampling& sampling);

/// Hex SHA-256 of the scene bytes.
std::string scene_digest(const std::string& text);

}  // namespace riemap
