// dopt: command-line front end over the C interface.
//
//   dopt select   --algorithm sg --k 50 --synthetic n=2000,d=128 --out sel.json
//   dopt bench    --k 50 --synthetic n=2000,d=128 --repeats 5 --out bench.csv
//   dopt evaluate --algorithm sg --algorithm random --k 100 --synthetic n=500,d=20 --repeats 50
//   dopt verify   [--instances 100] [--instance-seed S --n 200 --d 40]
//
// Exit codes: 0 success, 1 verification or run failure, 2 usage error, 3 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dopt/dopt.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct Options {
  std::vector<std::string> algorithms;
  std::optional<std::size_t> k;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::optional<std::size_t> warmup;
  std::optional<std::size_t> refresh_every;
  std::optional<double> absolute_fraction;
  std::optional<double> fit_lambda;
  std::optional<std::size_t> workers;
  std::string synthetic;
  std::string features;
  std::string absolute;
  std::string comparisons;
  std::string out;
  std::string format;
  bool quiet = false;
  // evaluate
  std::optional<std::size_t> folds;
  std::optional<double> validation_fraction;
  std::vector<double> lambda_grid;
  bool full_budget = false;
  // verify
  std::optional<std::size_t> instances;
  std::vector<std::size_t> verify_n;
  std::vector<std::size_t> verify_d;
  std::optional<std::uint64_t> instance_seed;
  std::string inject_fault;
};

/// Parses "n=500,d=20,sigma-x=1,sigma-beta=1,c-a=1.2".
nlohmann::json parse_synthetic(const std::string& text) {
  nlohmann::json spec = nlohmann::json::object();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--synthetic", "expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      std::size_t used = 0;
      if (key == "n" || key == "d") {
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        spec[key] = v;
      } else if (key == "sigma-x" || key == "sigma-beta" || key == "c-a") {
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        std::string json_key = key;
        for (char& c : json_key) c = c == '-' ? '_' : c;
        spec[json_key] = v;
      } else {
        throw CLI::ValidationError("--synthetic", "unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw CLI::ValidationError("--synthetic", "bad value for '" + key + "': '" + value + "'");
    }
  }
  return spec;
}

nlohmann::json to_config(const Options& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.algorithms.empty()) j["algorithms"] = o.algorithms;
  if (o.k) j["k"] = *o.k;
  if (o.lambda) j["lambda"] = *o.lambda;
  if (o.seed) j["seed"] = *o.seed;
  if (o.repeats) j["repeats"] = *o.repeats;
  if (o.warmup) j["warmup"] = *o.warmup;
  if (o.refresh_every) j["refresh_every"] = *o.refresh_every;
  if (o.absolute_fraction) j["absolute_fraction"] = *o.absolute_fraction;
  if (o.fit_lambda) j["fit_lambda"] = *o.fit_lambda;
  if (o.workers) j["workers"] = *o.workers;
  if (!o.synthetic.empty()) j["synthetic"] = parse_synthetic(o.synthetic);
  if (!o.features.empty()) j["features"] = o.features;
  if (!o.absolute.empty()) j["absolute"] = o.absolute;
  if (!o.comparisons.empty()) j["comparisons"] = o.comparisons;
  if (o.folds) j["folds"] = *o.folds;
  if (o.validation_fraction) j["validation_fraction"] = *o.validation_fraction;
  if (!o.lambda_grid.empty()) j["lambda_grid"] = o.lambda_grid;
  if (o.full_budget) j["full_budget"] = true;
  if (o.instances) j["instances"] = *o.instances;
  if (!o.verify_n.empty()) j["verify_n"] = o.verify_n;
  if (!o.verify_d.empty()) j["verify_d"] = o.verify_d;
  if (o.instance_seed) j["instance_seed"] = *o.instance_seed;
  if (!o.inject_fault.empty()) j["inject_fault"] = o.inject_fault;
  return j;
}

int exit_code_for(dopt_status s) {
  switch (s) {
    case DOPT_OK: return kExitOk;
    case DOPT_INVALID_CONFIG:
    case DOPT_INVALID_ARGUMENT: return kExitUsage;
    case DOPT_IO_ERROR:
    case DOPT_PARSE_ERROR:
    case DOPT_DIMENSION_MISMATCH:
    case DOPT_INVALID_LABEL: return kExitIo;
    default: return kExitFailed;
  }
}

void add_common(CLI::App* cmd, Options& o, bool with_algorithm) {
  if (with_algorithm) {
    cmd->add_option("--algorithm,-a", o.algorithms,
                    "Algorithm tag: ng fg sg nl flp flm slp slm entropy fisher random (repeatable)");
  }
  cmd->add_option("--k,-k", o.k, "Budget K (comparisons to select)");
  cmd->add_option("--lambda", o.lambda, "Design ridge lambda (default 1e-4)");
  cmd->add_option("--seed", o.seed, "Base seed (default 0)");
  cmd->add_option("--absolute-fraction", o.absolute_fraction,
                  "Fraction of samples with absolute labels forming A (default 0.1)");
  cmd->add_option("--refresh-every", o.refresh_every,
                  "Re-invert A(S) from scratch every this many iterations (0 = never)");
  cmd->add_option("--workers", o.workers, "Worker threads (default: DOPT_WORKERS or all cores)");
  cmd->add_option("--out,-o", o.out, "Report path (default: JSON on stdout)");
  cmd->add_option("--format", o.format, "Report format: json or csv (default from --out extension)")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--quiet,-q", o.quiet, "Do not print the summary line");
}

void add_data(CLI::App* cmd, Options& o) {
  auto* syn = cmd->add_option("--synthetic", o.synthetic,
                              "Synthetic data: n=..,d=..,sigma-x=..,sigma-beta=..,c-a=..");
  auto* feat = cmd->add_option("--features", o.features, "Features CSV (id,f0,...)");
  syn->excludes(feat);
  feat->excludes(syn);
  cmd->add_option("--absolute", o.absolute, "Absolute labels CSV (id,label)")->needs(feat);
  cmd->add_option("--comparisons", o.comparisons, "Comparison labels CSV (i,j,label)")->needs(feat);
  cmd->add_option("--repeats", o.repeats, "Repeats, each with a derived seed (default 1)");
  cmd->add_option("--fit-lambda", o.fit_lambda, "MAP ridge for entropy/fisher baselines (default 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D-optimal selection of pairwise comparisons"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dopt_version()));
  Options o;

  auto* select = app.add_subcommand("select", "Run selection algorithms and report selected sets");
  add_common(select, o, true);
  add_data(select, o);

  auto* bench = app.add_subcommand("bench", "Time the selection variants (one warm-up run discarded)");
  add_common(bench, o, true);
  add_data(bench, o);
  bench->add_option("--warmup", o.warmup, "Discarded warm-up runs (default 1)");

  auto* evaluate = app.add_subcommand("evaluate", "Select, reveal labels, fit and score held-out AUC");
  add_common(evaluate, o, true);
  add_data(evaluate, o);
  evaluate->add_option("--folds", o.folds, "Cross-validation folds (default 4)");
  evaluate->add_option("--validation-fraction", o.validation_fraction,
                       "Fraction held out for choosing the MAP ridge (default 0.2)");
  evaluate->add_option("--lambda-grid", o.lambda_grid, "MAP ridge grid (default 1e-4 ... 1e1)");
  evaluate->add_flag("--full-budget", o.full_budget, "Select every candidate pair of the training split");

  auto* verify = app.add_subcommand("verify", "Check that all eight variants select the same set");
  add_common(verify, o, false);
  verify->add_option("--instances", o.instances, "Number of seeded instances (default 100)");
  verify->add_option("--n", o.verify_n, "Sample counts cycled over (default 50 200)");
  verify->add_option("--d", o.verify_d, "Dimensions cycled over (default 10 40)");
  verify->add_option("--instance-seed", o.instance_seed, "Rerun one instance with this seed");
  verify->add_option("--inject-fault", o.inject_fault, "Corrupt this variant's output (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const CLI::App* active = app.get_subcommands().front();
  const std::string command = active->get_name();
  if (command == "bench" && !o.warmup) o.warmup = 1;

  std::string config;
  try {
    config = to_config(o).dump();
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  dopt_report* report = nullptr;
  dopt_status status = dopt_run(command.c_str(), config.c_str(), &report);
  if (status != DOPT_OK) {
    std::cerr << "error: " << dopt_last_error() << '\n';
    return exit_code_for(status);
  }

  if (o.out.empty()) {
    std::cout << dopt_report_json(report);
  } else {
    std::string format = o.format;
    if (format.empty()) {
      format = o.out.size() >= 4 && o.out.compare(o.out.size() - 4, 4, ".csv") == 0 ? "csv" : "json";
    }
    status = dopt_report_write(report, format == "csv" ? DOPT_FORMAT_CSV : DOPT_FORMAT_JSON,
                               o.out.c_str());
    if (status != DOPT_OK) {
      std::cerr << "error: " << dopt_last_error() << '\n';
      dopt_report_free(report);
      return exit_code_for(status);
    }
  }
  const bool passed = dopt_report_passed(report) != 0;
  if (!o.quiet) {
    std::cerr << command << ": " << (passed ? "ok" : "FAILED") << " (" << dopt_report_summary(report)
              << ") hash " << dopt_report_hash(report) << '\n';
  }
  dopt_report_free(report);
  return passed ? kExitOk : kExitFailed;
}
