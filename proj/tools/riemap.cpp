// Command-line front end: validate, check and print scenes.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "riemap/checks.hpp"
#include "riemap/errors.hpp"

namespace {

constexpr int kSceneError = 2;

// A path if one exists, otherwise the name of a built-in scene.
riemap::Scene resolve(const std::string& arg) {
  if (std::filesystem::exists(arg)) return riemap::load_scene(arg);
  return riemap::parse_scene(riemap::builtin_scene(arg));
}

std::optional<std::optional<double>> parse_lambda(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "fit") return std::optional<double>{};
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw CLI::ValidationError("--lambda", "expected a number or 'fit'");
  return std::optional<double>{v};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for Riemannian maps between chart manifolds"};
  app.require_subcommand(1);

  std::string scene_arg, json_path, lambda, scene_name;
  riemap::Overrides ov;
  double tol = 0, rank_tol = 0;
  std::uint64_t seed = 0;
  int samples = 0, jet_order = 0;
  bool list = false;

  auto* validate = app.add_subcommand("validate", "Parse and validate a scene file");
  validate->add_option("scene", scene_arg, "Scene file or built-in scene name")->required();

  auto* check = app.add_subcommand("check", "Run the scene's checks at sampled points");
  check->add_option("scene", scene_arg, "Scene file or built-in scene name")->required();
  auto* tol_opt = check->add_option("--tol", tol, "Residual tolerance");
  auto* rank_opt = check->add_option("--rank-tol", rank_tol, "Singular value threshold for the rank");
  auto* seed_opt = check->add_option("--seed", seed, "Sampling seed");
  auto* samples_opt = check->add_option("--samples", samples, "Number of sampled points")->check(CLI::PositiveNumber);
  auto* order_opt = check->add_option("--jet-order", jet_order, "Jet order")->check(CLI::Range(2, riemap::kMaxJetOrder));
  check->add_option("--json", json_path, "Also write the report as JSON to this path");
  check->add_option("--check", ov.checks, "Run only this check (repeatable)")->take_all();
  check->add_option("--lambda", lambda, "Soliton constant for soliton and leaf checks, or 'fit'");
  check->add_option("--threads", ov.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* scene = app.add_subcommand("scene", "Print a built-in scene");
  scene->add_option("name", scene_name, "Built-in scene name");
  scene->add_flag("--list", list, "List built-in scenes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kSceneError;
  }

  try {
    if (*scene) {
      if (list || scene_name.empty()) {
        for (const auto& n : riemap::builtin_scene_names()) std::cout << n << "\n";
        return 0;
      }
      std::cout << riemap::builtin_scene(scene_name);
      return 0;
    }

    if (*validate) {
      const riemap::Scene s = resolve(scene_arg);
      std::cout << "scene    " << s.name << "\n"
                << "digest   " << riemap::scene_digest(s.text) << "\n"
                << "source   " << s.map->source().name() << " (dim " << s.map->source().dim() << ")\n"
                << "target   " << s.map->target().name() << " (dim " << s.map->target().dim() << ")\n"
                << "checks  ";
      for (const auto& c : s.checks) std::cout << " " << c.name;
      std::cout << "\nvalid\n";
      return 0;
    }

    const riemap::Scene s = resolve(scene_arg);
    if (*tol_opt) ov.tol = tol;
    if (*rank_opt) ov.rank_tol = rank_tol;
    if (*seed_opt) ov.seed = seed;
    if (*samples_opt) ov.samples = samples;
    if (*order_opt) ov.jet_order = jet_order;
    ov.lambda = parse_lambda(lambda);
    const riemap::CheckReport report = riemap::run_checks(s, ov);
    std::cout << riemap::render_text(report);
    if (!json_path.empty()) {
      std::ofstream out(json_path, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write " << json_path << "\n";
        return kSceneError;
      }
      out << riemap::render_json(report);
    }
    return riemap::exit_status(report);
  } catch (const riemap::Error& e) {
    std::cerr << "error (" << riemap::to_string(e.kind()) << "): " << e.what() << "\n";
    return kSceneError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSceneError;
  }
}
