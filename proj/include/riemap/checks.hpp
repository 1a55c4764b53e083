#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "riemap/scene.hpp"

namespace riemap {

struct Overrides {
  std::optional<double> tol;
  std::optional<double> rank_tol;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<int> jet_order;
  std::vector<std::string> checks;  // empty: the scene's list
  /// nullopt: keep each check's own setting; a set optional of nullopt forces a fit.
  std::optional<std::optional<double>> lambda;
  int threads = 1;
};

/// Worst value over points of one residual, against its tolerance.
struct Metric {
  std::string name;
  double worst = 0.0;
  double tol = 0.0;
  bool pass() const { return worst <= tol; }
};

struct Constant {
  std::string name;
  double value = 0.0;
};

struct CheckRecord {
  std::string name;
  int points = 0;    // points at which the check produced values
  int errors = 0;    // points at which it raised
  std::map<std::string, int> error_kinds;  // kind -> count
  std::string first_error;
  bool numeric_error = false;
  std::vector<Metric> metrics;
  std::vector<Constant> constants;
  std::vector<std::string> notes;  // string-valued results such as a classification
  std::vector<std::string> flags;  // AssumptionViolated, HypothesisUnmet, Degenerate, ...
  bool pass = false;
  bool flagged() const { return !flags.empty(); }
};

struct CheckReport {
  std::string scene;
  std::string digest;
  Tolerances tolerances;
  std::uint64_t seed = 0;
  int samples = 0;
  int jet_order = 0;
  std::vector<CheckRecord> checks;
};

/// Runs the requested checks at every sampled point.  Errors are recorded
/// per check and point; the run always completes.
CheckReport run_checks(const Scene& scene, const Overrides& overrides = {});

/// 0 pass, 1 check failure, 3 numeric domain error.
int exit_status(const CheckReport& report);

/// Aligned plain-text report with fixed ordering.
std::string render_text(const CheckReport& report);
/// The same content as a JSON document with stable key order.
std::string render_json(const CheckReport& report);

}  // namespace riemap
