#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopt/bradley_terry.hpp"
#include "dopt/design.hpp"

namespace dopt {

/// Everything a run needs. Commands: select, bench, evaluate, verify.
struct RunConfig {
  std::string command = "select";
  /// Tags: ng fg sg nl flp flm slp slm entropy fisher random. Empty picks the
  /// command default (select: sg; bench: all eight D-optimal variants;
  /// evaluate: sg and random). verify always runs the eight variants.
  std::vector<std::string> algorithms;
  std::size_t k = 20;
  double lambda = 1e-4;  // design-matrix ridge
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::size_t warmup = 0;  // discarded runs before the measured repeats
  std::size_t refresh_every = 0;
  double absolute_fraction = 0.1;
  double fit_lambda = 1.0;  // MAP ridge for baselines in select/bench

  std::optional<SyntheticSpec> synthetic;
  std::string features_csv;
  std::string absolute_csv;
  std::string comparisons_csv;

  // evaluate
  std::size_t folds = 4;
  double validation_fraction = 0.2;
  std::vector<double> lambda_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1};
  bool full_budget = false;  // K = every candidate pair in the training split

  // verify
  std::size_t instances = 100;
  std::vector<std::size_t> verify_n{50, 200};
  std::vector<std::size_t> verify_d{10, 40};
  std::optional<std::uint64_t> instance_seed;  // rerun one reported instance
  std::string inject_fault;                    // variant tag to corrupt (negative control)

  /// Worker threads; 0 reads DOPT_WORKERS, falling back to hardware concurrency.
  std::size_t workers = 0;

  /// Throws Errc::invalid_config.
  void validate() const;
  std::vector<std::string> resolved_algorithms() const;
};

RunConfig config_from_json(const nlohmann::json& j);
/// Canonical echo used in reports. Leaves out `workers`.
nlohmann::json config_to_json(const RunConfig& config);

struct PhaseTimings {
  double preprocess = 0.0;
  double find_max = 0.0;
  double update = 0.0;
  double sweep = 0.0;  // part of update
  double total = 0.0;
};

/// One (repeat, fold, algorithm) outcome.
struct RepeatRow {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::vector<ComparisonId> selected;
  std::optional<double> objective;  // f(S) - f(empty), recomputed from scratch
  std::optional<double> auc_absolute;
  std::optional<double> auc_comparison;
  std::optional<double> lambda_fit;
  std::size_t touches = 0;
  PhaseTimings timings;
  std::string error;  // empty on success
};

/// One verify instance.
struct VerifyRow {
  std::size_t instance = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  bool exact_match = true;
  bool passed = true;
  std::optional<double> objective_ng;
  double max_relative_diff = 0.0;
  std::vector<std::string> mismatched;  // set differs from ng
  std::vector<std::string> failed;      // objective outside tolerance, or error
  std::map<std::string, std::vector<ComparisonId>> selected;
  std::string error;
};

struct Report {
  static constexpr int kSchemaVersion = 1;
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<RepeatRow> rows;
  std::vector<VerifyRow> verify;
  bool passed = true;
  std::string summary;
  std::size_t workers = 0;  // runtime detail, not hashed
};

enum class ReportFormat { json, csv };

/// Report as JSON, including per-algorithm aggregates (mean, std, count) that
/// are recomputed from the rows. Wall-time values live under "timings" keys and
/// runtime details under "runtime".
nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);
/// Sorted keys, two-space indent, reals with 17 significant digits.
std::string dump_json(const nlohmann::json& j);
std::string report_to_csv(const Report& report);
/// FNV-1a 64 of the canonical JSON with "timings" and "runtime" removed, hex.
std::string report_hash(const Report& report);
/// Throws Errc::io_error.
void emit_report(const Report& report, ReportFormat format, const std::string& path);

/// Calls fn(i) for i in [0, count) on a pool of `workers` threads. Exceptions
/// are rethrown after all work finishes (lowest index first).
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);
/// DOPT_WORKERS if set and positive, else hardware concurrency (at least 1).
std::size_t default_workers();

Report run_selection(const RunConfig& config);
Report run_evaluation(const RunConfig& config);
Report verify_equivalence(const RunConfig& config);
/// Dispatches on config.command.
Report run_command(const RunConfig& config);

}  // namespace dopt
