#include "riemap/scene.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "builtin_scenes.hpp"
#include "riemap/errors.hpp"

namespace riemap {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Schema, path + ": " + what);
}

const Json& member(const Json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) schema(path, std::string("missing field '") + key + "'");
  return obj.at(key);
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) schema(path, "expected a string");
  return v.get<std::string>();
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) schema(path, "expected a number");
  return v.get<double>();
}

std::vector<std::string> string_list(const Json& v, const std::string& path) {
  if (!v.is_array()) schema(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_string(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<std::string>> string_matrix(const Json& v, const std::string& path) {
  if (!v.is_array()) schema(path, "expected an array of arrays");
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(string_list(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void reject_unknown(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) schema(path, "expected an object");
  for (const auto& [k, _] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
      schema(path, "unknown field '" + k + "'");
  }
}

// Library errors keep their kind; the JSON path is prepended for context.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

ChartManifold parse_manifold(const Json& v, const std::string& path, std::vector<Interval>* domain) {
  reject_unknown(v, path, {"name", "coords", "parameters", "metric", "domain"});
  const std::string name = as_string(member(v, path, "name"), path + ".name");
  const auto coords = string_list(member(v, path, "coords"), path + ".coords");
  const auto params = v.contains("parameters") ? string_list(v["parameters"], path + ".parameters")
                                               : std::vector<std::string>{};
  const auto metric = string_matrix(member(v, path, "metric"), path + ".metric");
  if (domain != nullptr && v.contains("domain")) {
    const Json& d = v["domain"];
    if (!d.is_array() || d.size() != coords.size()) schema(path + ".domain", "expected one interval per coordinate");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string p = path + ".domain[" + std::to_string(i) + "]";
      if (!d[i].is_array() || d[i].size() != 2) schema(p, "expected [lo, hi] with null for unbounded");
      const double lo = d[i][0].is_null() ? -HUGE_VAL : as_number(d[i][0], p);
      const double hi = d[i][1].is_null() ? HUGE_VAL : as_number(d[i][1], p);
      domain->push_back({lo, hi});
    }
  }
  return at_path(path + ".metric", [&] { return ChartManifold(name, coords, params, metric); });
}

struct CheckRule {
  const char* name;
  std::vector<const char*> keys;
};

const std::vector<CheckRule>& catalog() {
  static const std::vector<CheckRule> rules = {
      {"riemannian", {}},
      {"split", {"vertical_span"}},
      {"second-fundamental-form", {"adjoint_tol"}},
      {"mixed-curvature", {}},
      {"ricci-decomposition", {}},
      {"scalar-decomposition", {}},
      {"totally-geodesic", {}},
      {"umbilic", {}},
      {"curvature", {"manifold", "scalar", "ricci_factor"}},
      {"einstein", {"manifold", "kappa"}},
      {"soliton", {"manifold", "field", "lambda", "killing"}},
      {"leaf-range", {"field", "lambda", "form"}},
      {"leaf-normal", {"field", "lambda", "form"}},
      {"tension", {"harmonic", "h2_norm", "tau_norm"}},
      {"biharmonic", {"biharmonic", "finite_differences"}},
  };
  return rules;
}

void validate_check(const CheckSpec& c, const Scene& scene, const std::string& path) {
  const auto rule = std::find_if(catalog().begin(), catalog().end(), [&](const CheckRule& r) { return c.name == r.name; });
  if (rule == catalog().end()) schema(path, "unknown check '" + c.name + "'");
  for (const auto& [k, v] : c.options.items()) {
    const std::string p = path + "." + k;
    if (k == "tol") {
      as_number(v, p);
      continue;
    }
    if (std::find_if(rule->keys.begin(), rule->keys.end(), [&](const char* a) { return k == a; }) == rule->keys.end())
      schema(path, "check '" + c.name + "' has no option '" + k + "'");
    if (k == "manifold") {
      const std::string m = as_string(v, p);
      if (m != "source" && m != "target") schema(p, "expected \"source\" or \"target\"");
    } else if (k == "field") {
      const std::string f = as_string(v, p);
      if (!scene.fields.count(f)) throw Error(ErrorKind::UnknownIdentifier, p + ": unknown field '" + f + "'");
    } else if (k == "lambda") {
      if (!(v.is_number() || (v.is_string() && v.get<std::string>() == "fit"))) schema(p, "expected a number or \"fit\"");
    } else if (k == "form") {
      const std::string f = as_string(v, p);
      if (f != "restricted" && f != "intrinsic") schema(p, "expected \"restricted\" or \"intrinsic\"");
    } else if (k == "killing" || k == "harmonic" || k == "biharmonic" || k == "finite_differences") {
      if (!v.is_boolean()) schema(p, "expected true or false");
    } else if (k == "vertical_span") {
      if (!v.is_array()) schema(p, "expected an array of vectors");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string q = p + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || static_cast<int>(v[i].size()) != scene.map->source().dim())
          schema(q, "expected a vector with one entry per source coordinate");
        for (const auto& x : v[i]) as_number(x, q);
      }
    } else {
      as_number(v, p);
    }
  }
  if (c.name == "biharmonic" && !scene.space_form) schema(path, "check 'biharmonic' needs 'space_form'");
  if (c.name == "soliton" || c.name == "leaf-range" || c.name == "leaf-normal") {
    if (c.options.contains("field") && c.name == "soliton") {
      const FieldDef& f = scene.fields.at(c.options["field"].get<std::string>());
      const std::string want = c.options.value("manifold", std::string("target"));
      if ((f.on == FieldDef::On::Source) != (want == "source"))
        schema(path, "field '" + c.options["field"].get<std::string>() + "' does not live on the " + want);
    }
  }
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  // nlohmann reports the byte after the offending token.
  if (col > 1) --col;
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& r : catalog()) out.emplace_back(r.name);
    return out;
  }();
  return names;
}

Scene parse_scene(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Syntax, "scene: " + line_column(text, e.byte) + ": malformed JSON");
  }
  reject_unknown(root, "scene",
                 {"name", "description", "notes", "source", "target", "map", "extensions", "fields", "space_form",
                  "sampling", "tolerances", "jet_order", "checks"});

  Scene scene;
  scene.text = text;
  scene.name = as_string(member(root, "scene", "name"), "name");
  if (root.contains("description")) scene.description = as_string(root["description"], "description");
  if (root.contains("notes")) string_list(root["notes"], "notes");

  std::vector<Interval> domain;
  ChartManifold source = parse_manifold(member(root, "scene", "source"), "source", &domain);
  ChartManifold target = parse_manifold(member(root, "scene", "target"), "target", nullptr);

  const Json& map = member(root, "scene", "map");
  reject_unknown(map, "map", {"components", "parameters"});
  const auto components = string_list(member(map, "map", "components"), "map.components");
  std::vector<std::pair<std::string, std::string>> params;
  if (map.contains("parameters")) {
    if (!map["parameters"].is_object()) schema("map.parameters", "expected an object of expressions");
    for (const auto& [k, v] : map["parameters"].items()) params.emplace_back(k, as_string(v, "map.parameters." + k));
  }
  std::vector<std::vector<std::string>> range_ext, normal_ext;
  if (root.contains("extensions")) {
    const Json& ext = root["extensions"];
    reject_unknown(ext, "extensions", {"range", "normal"});
    if (ext.contains("range")) range_ext = string_matrix(ext["range"], "extensions.range");
    if (ext.contains("normal")) normal_ext = string_matrix(ext["normal"], "extensions.normal");
  }
  // Parse each expression once here so errors name the offending entry.
  for (std::size_t i = 0; i < components.size(); ++i)
    at_path("map.components[" + std::to_string(i) + "]", [&] { return parse_expression(components[i], source.coords()); });
  for (const auto& [k, v] : params)
    at_path("map.parameters." + k, [&] { return parse_expression(v, source.coords()); });
  std::vector<std::string> target_scope = target.coords();
  target_scope.insert(target_scope.end(), target.parameters().begin(), target.parameters().end());
  auto check_rows = [&](const std::vector<std::vector<std::string>>& rows, const std::string& path) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j)
        at_path(path + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                [&] { return parse_expression(rows[i][j], target_scope); });
  };
  check_rows(range_ext, "extensions.range");
  check_rows(normal_ext, "extensions.normal");
  scene.map = at_path("map", [&] {
    return std::make_shared<const SmoothMap>(source, target, components, params, range_ext, normal_ext);
  });

  if (root.contains("fields")) {
    const Json& fields = root["fields"];
    if (!fields.is_object()) schema("fields", "expected an object");
    for (const auto& [name, v] : fields.items()) {
      const std::string path = "fields." + name;
      reject_unknown(v, path, {"on", "components"});
      FieldDef f;
      const std::string on = as_string(member(v, path, "on"), path + ".on");
      if (on == "source") {
        f.on = FieldDef::On::Source;
      } else if (on == "target") {
        f.on = FieldDef::On::Target;
      } else {
        schema(path + ".on", "expected \"source\" or \"target\"");
      }
      f.components = string_list(member(v, path, "components"), path + ".components");
      const ChartManifold& home = f.on == FieldDef::On::Source ? scene.map->source() : scene.map->target();
      f.parsed = at_path(path + ".components", [&] { return home.parse_field(f.components); });
      scene.fields.emplace(name, std::move(f));
    }
  }

  if (root.contains("space_form")) scene.space_form = as_number(root["space_form"], "space_form");

  const Json& sampling = member(root, "scene", "sampling");
  reject_unknown(sampling, "sampling", {"count", "seed", "box"});
  const Json& count = member(sampling, "sampling", "count");
  if (!count.is_number_integer() || count.get<long long>() < 1) schema("sampling.count", "expected a positive integer");
  scene.sampling.count = count.get<int>();
  const Json& seed = member(sampling, "sampling", "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    schema("sampling.seed", "expected a non-negative integer");
  scene.sampling.seed = seed.get<std::uint64_t>();
  const Json& box = member(sampling, "sampling", "box");
  const int m = scene.map->source().dim();
  if (!box.is_array() || static_cast<int>(box.size()) != m) schema("sampling.box", "expected one interval per source coordinate");
  for (int i = 0; i < m; ++i) {
    const std::string p = "sampling.box[" + std::to_string(i) + "]";
    const Json& b = box[static_cast<std::size_t>(i)];
    if (!b.is_array() || b.size() != 2) schema(p, "expected [lo, hi]");
    Interval iv{as_number(b[0], p), as_number(b[1], p)};
    if (!(iv.lo <= iv.hi)) schema(p, "lower bound exceeds upper bound");
    if (!domain.empty()) {
      const Interval& d = domain[static_cast<std::size_t>(i)];
      const bool inside = (std::isinf(d.lo) || iv.lo > d.lo) && (std::isinf(d.hi) || iv.hi < d.hi);
      if (!inside) schema(p, "box leaves the chart domain");
    }
    scene.sampling.box.push_back(iv);
  }

  if (root.contains("tolerances")) {
    const Json& t = root["tolerances"];
    reject_unknown(t, "tolerances", {"tol", "rank_tol", "pd_tol", "class_tol"});
    if (t.contains("tol")) scene.tolerances.tol = as_number(t["tol"], "tolerances.tol");
    if (t.contains("rank_tol")) scene.tolerances.rank_tol = as_number(t["rank_tol"], "tolerances.rank_tol");
    if (t.contains("pd_tol")) scene.tolerances.pd_tol = as_number(t["pd_tol"], "tolerances.pd_tol");
    if (t.contains("class_tol")) scene.tolerances.class_tol = as_number(t["class_tol"], "tolerances.class_tol");
  }
  if (root.contains("jet_order")) {
    const Json& j = root["jet_order"];
    if (!j.is_number_integer()) schema("jet_order", "expected an integer");
    scene.jet_order = j.get<int>();
    if (scene.jet_order < 2 || scene.jet_order > kMaxJetOrder)
      throw Error(ErrorKind::OrderTooLarge, "jet_order: must lie in [2, " + std::to_string(kMaxJetOrder) + "]");
  }

  const Json& checks = member(root, "scene", "checks");
  if (!checks.is_array()) schema("checks", "expected an array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const std::string path = "checks[" + std::to_string(i) + "]";
    const Json& c = checks[i];
    if (!c.is_object()) schema(path, "expected an object");
    CheckSpec spec;
    spec.name = as_string(member(c, path, "name"), path + ".name");
    for (const auto& [k, v] : c.items())
      if (k != "name") spec.options[k] = v;
    if (!seen.insert(spec.name).second) schema(path, "check '" + spec.name + "' listed twice");
    validate_check(spec, scene, path);
    scene.checks.push_back(std::move(spec));
  }
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Schema, path + ": cannot open scene file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

const std::string& builtin_scene(const std::string& name) {
  static const std::map<std::string, std::string> scenes = [] {
    std::map<std::string, std::string> out;
    for (const auto& s : kBuiltinScenes) out.emplace(s.name, s.text);
    return out;
  }();
  const auto it = scenes.find(name);
  if (it == scenes.end()) throw Error(ErrorKind::UnknownScene, "unknown built-in scene '" + name + "'");
  return it->second;
}

std::vector<std::string> builtin_scene_names() {
  std::vector<std::string> out;
  for (const auto& s : kBuiltinScenes) out.emplace_back(s.name);
  return out;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_mix(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

double uniform_at(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(splitmix64_at(seed, index) >> 11) * 0x1.0p-53;
}

std::vector<Vec> sample_points(const Sampling& sampling) {
  const auto dim = static_cast<std::uint64_t>(sampling.box.size());
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(sampling.count));
  for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(sampling.count); ++k) {
    Vec p(static_cast<Eigen::Index>(dim));
    for (std::uint64_t j = 0; j < dim; ++j) {
      const Interval& iv = sampling.box[j];
      p[static_cast<Eigen::Index>(j)] = iv.lo + (iv.hi - iv.lo) * uniform_at(sampling.seed, k * dim + j);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string scene_digest(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace riemap
