#include "dopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "dopt/dataset.hpp"
#include "dopt/error.hpp"
#include "dopt/random.hpp"
#include "dopt/selection.hpp"

namespace dopt {

using nlohmann::json;

namespace {

const char* const kBaselines[] = {"entropy", "fisher", "random"};

bool is_baseline(const std::string& tag) {
  return std::find(std::begin(kBaselines), std::end(kBaselines), tag) != std::end(kBaselines);
}

bool is_known_tag(const std::string& tag) { return is_baseline(tag) || parse_algorithm(tag); }

[[noreturn]] void bad_config(const std::string& what) { throw Error(Errc::invalid_config, what); }

}  // namespace

// ---------------------------------------------------------------------------
// configuration

std::vector<std::string> RunConfig::resolved_algorithms() const {
  if (command == "verify" || (algorithms.empty() && command == "bench")) {
    std::vector<std::string> all;
    for (Algorithm a : kAllAlgorithms) all.emplace_back(algorithm_tag(a));
    return all;
  }
  if (!algorithms.empty()) return algorithms;
  if (command == "evaluate") return {"sg", "random"};
  return {"sg"};
}

void RunConfig::validate() const {
  if (command != "select" && command != "bench" && command != "evaluate" && command != "verify") {
    bad_config("unknown command '" + command + "'");
  }
  for (const auto& tag : algorithms) {
    if (!is_known_tag(tag)) bad_config("unknown algorithm tag '" + tag + "'");
  }
  if (k < 1 && !(command == "evaluate" && full_budget)) bad_config("k must be at least 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) bad_config("lambda must be positive");
  if (!(fit_lambda > 0.0)) bad_config("fit_lambda must be positive");
  if (repeats < 1) bad_config("repeats must be at least 1");
  if (!(absolute_fraction >= 0.0 && absolute_fraction <= 1.0)) {
    bad_config("absolute_fraction must lie in [0, 1]");
  }
  if (synthetic) {
    const SyntheticSpec& s = *synthetic;
    if (s.n < 2 || s.d < 1) bad_config("synthetic data needs n >= 2 and d >= 1");
    if (!(s.sigma_x > 0.0 && s.sigma_beta > 0.0 && s.c_a > 0.0)) {
      bad_config("synthetic scale parameters must be positive");
    }
  }
  if (command != "verify") {
    if (synthetic && !features_csv.empty()) bad_config("give either synthetic data or a features CSV");
    if (!synthetic && features_csv.empty()) bad_config("no dataset: pass synthetic parameters or a features CSV");
  }
  if (command == "evaluate") {
    if (folds < 2) bad_config("folds must be at least 2");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
      bad_config("validation_fraction must lie in (0, 1)");
    }
    if (lambda_grid.empty()) bad_config("lambda_grid is empty");
    for (double l : lambda_grid) {
      if (!(l > 0.0)) bad_config("lambda_grid entries must be positive");
    }
    if (!synthetic && comparisons_csv.empty()) bad_config("evaluate needs comparison labels");
  }
  if (command == "verify") {
    if (instances < 1) bad_config("instances must be at least 1");
    if (verify_n.empty() || verify_d.empty()) bad_config("verify sizes are empty");
    for (std::size_t n : verify_n) {
      if (n < 2) bad_config("verify sizes need n >= 2");
    }
    for (std::size_t d : verify_d) {
      if (d < 1) bad_config("verify sizes need d >= 1");
    }
    if (!inject_fault.empty() && !parse_algorithm(inject_fault)) {
      bad_config("inject_fault must name a D-optimal variant");
    }
  }
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) bad_config("config must be a JSON object");
  static const std::set<std::string> known{
      "command", "algorithm", "algorithms", "k", "lambda", "seed", "repeats", "warmup",
      "refresh_every", "absolute_fraction", "fit_lambda", "synthetic", "features", "absolute",
      "comparisons", "folds", "validation_fraction", "lambda_grid", "full_budget", "instances",
      "verify_n", "verify_d", "instance_seed", "inject_fault", "workers"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) bad_config("unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    c.command = j.value("command", c.command);
    if (j.contains("algorithm")) c.algorithms.push_back(j["algorithm"].get<std::string>());
    if (j.contains("algorithms")) {
      for (const json& t : j["algorithms"]) c.algorithms.push_back(t.get<std::string>());
    }
    c.k = j.value("k", c.k);
    c.lambda = j.value("lambda", c.lambda);
    c.seed = j.value("seed", c.seed);
    c.repeats = j.value("repeats", c.repeats);
    c.warmup = j.value("warmup", c.warmup);
    c.refresh_every = j.value("refresh_every", c.refresh_every);
    c.absolute_fraction = j.value("absolute_fraction", c.absolute_fraction);
    c.fit_lambda = j.value("fit_lambda", c.fit_lambda);
    if (j.contains("synthetic") && !j["synthetic"].is_null()) {
      const json& s = j["synthetic"];
      SyntheticSpec spec;
      spec.n = s.value("n", spec.n);
      spec.d = s.value("d", spec.d);
      spec.sigma_x = s.value("sigma_x", spec.sigma_x);
      spec.sigma_beta = s.value("sigma_beta", spec.sigma_beta);
      spec.c_a = s.value("c_a", spec.c_a);
      c.synthetic = spec;
    }
    c.features_csv = j.value("features", c.features_csv);
    c.absolute_csv = j.value("absolute", c.absolute_csv);
    c.comparisons_csv = j.value("comparisons", c.comparisons_csv);
    c.folds = j.value("folds", c.folds);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    if (j.contains("lambda_grid")) c.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
    c.full_budget = j.value("full_budget", c.full_budget);
    c.instances = j.value("instances", c.instances);
    if (j.contains("verify_n")) c.verify_n = j["verify_n"].get<std::vector<std::size_t>>();
    if (j.contains("verify_d")) c.verify_d = j["verify_d"].get<std::vector<std::size_t>>();
    if (j.contains("instance_seed") && !j["instance_seed"].is_null()) {
      c.instance_seed = j["instance_seed"].get<std::uint64_t>();
    }
    c.inject_fault = j.value("inject_fault", c.inject_fault);
    c.workers = j.value("workers", c.workers);
  } catch (const json::exception& e) {
    bad_config(std::string("malformed config: ") + e.what());
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  json j = {{"command", c.command},
            {"algorithms", c.resolved_algorithms()},
            {"k", c.k},
            {"lambda", c.lambda},
            {"seed", c.seed},
            {"repeats", c.repeats},
            {"warmup", c.warmup},
            {"refresh_every", c.refresh_every},
            {"absolute_fraction", c.absolute_fraction},
            {"fit_lambda", c.fit_lambda}};
  if (c.synthetic) {
    j["synthetic"] = {{"n", c.synthetic->n},
                      {"d", c.synthetic->d},
                      {"sigma_x", c.synthetic->sigma_x},
                      {"sigma_beta", c.synthetic->sigma_beta},
                      {"c_a", c.synthetic->c_a}};
  } else {
    j["synthetic"] = nullptr;
  }
  j["features"] = c.features_csv;
  j["absolute"] = c.absolute_csv;
  j["comparisons"] = c.comparisons_csv;
  if (c.command == "evaluate") {
    j["folds"] = c.folds;
    j["validation_fraction"] = c.validation_fraction;
    j["lambda_grid"] = c.lambda_grid;
    j["full_budget"] = c.full_budget;
  }
  if (c.command == "verify") {
    j["instances"] = c.instances;
    j["verify_n"] = c.verify_n;
    j["verify_d"] = c.verify_d;
    j["instance_seed"] = c.instance_seed ? json(*c.instance_seed) : json(nullptr);
    j["inject_fault"] = c.inject_fault;
  }
  return j;
}

// ---------------------------------------------------------------------------
// worker pool

std::size_t default_workers() {
  if (const char* env = std::getenv("DOPT_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), count);
  if (threads <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(drain);
    for (std::thread& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::size_t resolve_workers(const RunConfig& c) {
  return c.workers > 0 ? c.workers : default_workers();
}

// ---------------------------------------------------------------------------
// data sources

/// A dataset whose labels are either revealed by a synthetic oracle or looked
/// up in loaded CSV files.
class LabelSource {
 public:
  explicit LabelSource(SyntheticDataset synthetic) : synthetic_(std::move(synthetic)) {}
  explicit LabelSource(Dataset loaded) : loaded_(std::move(loaded)) {
    for (const AbsoluteLabel& a : loaded_->labels.absolute) absolute_[a.sample].push_back(a.label);
    for (const ComparisonLabel& c : loaded_->labels.comparisons) comparisons_[c.pair].push_back(c.label);
  }

  const FeatureMatrix& features() const {
    return synthetic_ ? synthetic_->features() : loaded_->features;
  }
  bool is_synthetic() const { return synthetic_.has_value(); }

  /// Samples that can carry an absolute label.
  bool has_absolute(std::size_t i) const { return synthetic_ || absolute_.count(i); }
  bool has_comparison(ComparisonId e) const { return synthetic_ || comparisons_.count(e); }
  bool restricts_pairs() const { return !synthetic_ && !loaded_->labels.comparisons.empty(); }

  void absolute_labels(std::size_t i, std::vector<AbsoluteLabel>& out) const {
    if (synthetic_) {
      out.push_back({i, synthetic_->absolute_label(i)});
      return;
    }
    const auto it = absolute_.find(i);
    if (it == absolute_.end()) return;
    for (int y : it->second) out.push_back({i, y});
  }

  void comparison_labels(ComparisonId e, std::vector<ComparisonLabel>& out) const {
    if (synthetic_) {
      out.push_back({e, synthetic_->comparison_label(e)});
      return;
    }
    const auto it = comparisons_.find(e);
    if (it == comparisons_.end()) return;
    for (int y : it->second) out.push_back({e, y});
  }

  /// Labeled pairs among `members` (sorted); all pairs for synthetic data.
  std::vector<ComparisonId> pairs_within(const std::vector<std::size_t>& members) const {
    std::vector<ComparisonId> out;
    if (synthetic_) return all_comparisons(features().samples(), members);
    std::vector<char> in(features().samples(), 0);
    for (std::size_t m : members) in[m] = 1;
    for (const auto& [e, _] : comparisons_) {
      if (in[e.i] && in[e.j]) out.push_back(e);
    }
    return out;  // std::map keeps them sorted
  }

 private:
  std::optional<SyntheticDataset> synthetic_;
  std::optional<Dataset> loaded_;
  std::map<std::size_t, std::vector<int>> absolute_;
  std::map<ComparisonId, std::vector<int>> comparisons_;
};

/// Loaded CSV data is shared across repeats; synthetic data is redrawn per repeat.
class DataFactory {
 public:
  explicit DataFactory(const RunConfig& c) : config_(c) {
    if (!c.synthetic) {
      shared_ = std::make_shared<LabelSource>(load_dataset(c.features_csv, c.absolute_csv, c.comparisons_csv));
    }
  }

  std::shared_ptr<const LabelSource> make(std::uint64_t repeat_seed) const {
    if (shared_) return shared_;
    return std::make_shared<LabelSource>(sample_synthetic(*config_.synthetic, repeat_seed));
  }

 private:
  const RunConfig& config_;
  std::shared_ptr<const LabelSource> shared_;
};

/// m items of `from` uniformly without replacement, returned sorted.
std::vector<std::size_t> sample_subset(std::vector<std::size_t> from, std::size_t m,
                                       std::uint64_t seed) {
  m = std::min(m, from.size());
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < m; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, from.size() - 1);
    std::swap(from[t], from[pick(rng)]);
  }
  from.resize(m);
  std::sort(from.begin(), from.end());
  return from;
}

std::size_t fraction_of(std::size_t count, double fraction) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count)));
}

/// Absolute set: a fraction of the members that can carry an absolute label.
std::vector<std::size_t> choose_absolute(const LabelSource& src,
                                         const std::vector<std::size_t>& members, double fraction,
                                         std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t m : members) {
    if (src.has_absolute(m)) eligible.push_back(m);
  }
  return sample_subset(std::move(eligible), fraction_of(eligible.size(), fraction), seed);
}

std::vector<std::size_t> iota_vector(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

/// Mask over the lexicographic pairs of `members` that marks labeled pairs.
std::vector<std::uint8_t> allowed_mask(const LabelSource& src,
                                       const std::vector<std::size_t>& members) {
  if (!src.restricts_pairs()) return {};
  const std::size_t m = members.size();
  if (m < 2) return {};
  std::vector<std::uint8_t> mask(m * (m - 1) / 2, 0);
  std::size_t idx = 0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b, ++idx) {
      mask[idx] = src.has_comparison(make_comparison(members[a], members[b])) ? 1 : 0;
    }
  }
  return mask;
}

LabeledData absolute_only(const LabelSource& src, const std::vector<std::size_t>& absolute) {
  LabeledData data;
  for (std::size_t i : absolute) src.absolute_labels(i, data.absolute);
  return data;
}

double objective_gain(const FeatureMatrix& x, const std::vector<std::size_t>& absolute,
                      const std::vector<ComparisonId>& selected, double lambda) {
  return objective_value(x, absolute, selected, lambda) - objective_value(x, absolute, {}, lambda);
}

struct Selected {
  std::vector<ComparisonId> pairs;
  PhaseTimings timings;
  std::size_t touches = 0;
};

/// Runs one selection algorithm. `beta_for_baselines` is only consulted by the
/// entropy and Fisher baselines.
Selected select_pairs(const std::string& tag, const FeatureMatrix& x,
                      const std::vector<std::size_t>& absolute,
                      const std::vector<std::size_t>& pool, const std::vector<std::uint8_t>& mask,
                      std::size_t k, const RunConfig& c, std::uint64_t random_seed,
                      const std::function<Vector()>& beta_for_baselines) {
  Selected out;
  if (const auto algo = parse_algorithm(tag)) {
    SelectionProblem problem{x, absolute, c.lambda, k, pool, mask, c.refresh_every};
    const SelectionTrace trace = run_algorithm(*algo, problem);
    out.pairs = trace.selected;
    out.touches = trace.total_touches();
    out.timings.preprocess = trace.preprocess_seconds;
    for (double s : trace.find_max_seconds) out.timings.find_max += s;
    for (double s : trace.update_seconds) out.timings.update += s;
    for (double s : trace.sweep_seconds) out.timings.sweep += s;
    out.timings.total = trace.total_seconds;
    return out;
  }
  const auto start = Clock::now();
  std::vector<ComparisonId> candidates = all_comparisons(x.samples(), pool);
  if (!mask.empty()) {
    std::vector<ComparisonId> kept;
    for (std::size_t t = 0; t < candidates.size(); ++t) {
      if (mask[t]) kept.push_back(candidates[t]);
    }
    candidates.swap(kept);
  }
  if (k > candidates.size()) bad_config("k exceeds the number of candidate pairs");
  Vector beta;
  if (tag != "random") beta = beta_for_baselines();
  const auto prepared = Clock::now();
  if (tag == "random") {
    out.pairs = random_select(candidates, k, random_seed);
  } else if (tag == "entropy") {
    out.pairs = entropy_select(x, beta, k, candidates);
  } else {
    out.pairs = fisher_select(x, beta, k, candidates).selected;
  }
  const auto done = Clock::now();
  out.timings.preprocess = seconds_between(start, prepared);
  out.timings.find_max = seconds_between(prepared, done);
  out.timings.total = seconds_between(start, done);
  return out;
}

std::string describe(const std::exception& e) { return e.what(); }

}  // namespace

// ---------------------------------------------------------------------------
// select / bench

Report run_selection(const RunConfig& config) {
  config.validate();
  const DataFactory factory(config);
  const std::vector<std::string> tags = config.resolved_algorithms();
  Report report;
  report.command = config.command;
  report.config = config_to_json(config);
  report.workers = resolve_workers(config);

  const auto run_one = [&](std::size_t repeat, const std::string& tag, RepeatRow& row) {
    const std::uint64_t rs = derive_seed(config.seed, repeat);
    row.repeat = repeat;
    row.seed = rs;
    row.algorithm = tag;
    row.k = config.k;
    try {
      const auto src = factory.make(rs);
      const FeatureMatrix& x = src->features();
      row.n = x.samples();
      row.d = x.dim();
      const std::vector<std::size_t> members = iota_vector(x.samples());
      const std::vector<std::size_t> absolute =
          choose_absolute(*src, members, config.absolute_fraction, derive_seed(rs, 1));
      const auto beta = [&] {
        const LabeledData data = absolute_only(*src, absolute);
        return map_fit(x, data, config.fit_lambda).params.beta;
      };
      const Selected sel = select_pairs(tag, x, absolute, {}, allowed_mask(*src, members),
                                        config.k, config, derive_seed(rs, 2), beta);
      row.selected = sel.pairs;
      row.touches = sel.touches;
      row.timings = sel.timings;
      row.objective = objective_gain(x, absolute, sel.pairs, config.lambda);
    } catch (const Error& e) {
      row.error = describe(e);
    }
  };

  // Warm-up runs on repeat 0, discarded.
  for (std::size_t w = 0; w < config.warmup; ++w) {
    for (const auto& tag : tags) {
      RepeatRow scratch;
      run_one(0, tag, scratch);
    }
  }

  std::vector<RepeatRow> rows(config.repeats * tags.size());
  parallel_for(config.repeats, report.workers, [&](std::size_t r) {
    for (std::size_t t = 0; t < tags.size(); ++t) run_one(r, tags[t], rows[r * tags.size() + t]);
  });
  report.rows = std::move(rows);
  std::size_t errors = 0;
  for (const RepeatRow& r : report.rows) errors += r.error.empty() ? 0 : 1;
  report.passed = errors == 0;
  report.summary = std::to_string(report.rows.size()) + " runs, " + std::to_string(errors) + " errors";
  return report;
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

struct ScoredSet {
  std::vector<std::size_t> samples;
  std::vector<ComparisonId> pairs;
  LabeledData labels;
};

ScoredSet labeled_split(const LabelSource& src, std::vector<std::size_t> samples) {
  ScoredSet s;
  std::sort(samples.begin(), samples.end());
  s.samples = samples;
  for (std::size_t i : samples) src.absolute_labels(i, s.labels.absolute);
  s.pairs = src.pairs_within(samples);
  for (const ComparisonId& e : s.pairs) src.comparison_labels(e, s.labels.comparisons);
  return s;
}

struct SplitAuc {
  std::optional<double> absolute;
  std::optional<double> comparison;
};

std::optional<double> safe_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  try {
    return auc(scores, labels);
  } catch (const Error& e) {
    if (e.code() == Errc::degenerate_label_set) return std::nullopt;
    throw;
  }
}

SplitAuc score(const FeatureMatrix& x, const Vector& beta, const ScoredSet& set) {
  const Vector s = x.rows() * beta;
  std::vector<double> scores;
  std::vector<int> labels;
  for (const AbsoluteLabel& a : set.labels.absolute) {
    scores.push_back(s(static_cast<Eigen::Index>(a.sample)));
    labels.push_back(a.label);
  }
  SplitAuc out;
  out.absolute = safe_auc(scores, labels);
  scores.clear();
  labels.clear();
  for (const ComparisonLabel& c : set.labels.comparisons) {
    scores.push_back(s(static_cast<Eigen::Index>(c.pair.i)) - s(static_cast<Eigen::Index>(c.pair.j)));
    labels.push_back(c.label);
  }
  out.comparison = safe_auc(scores, labels);
  return out;
}

/// Validation metric: mean of the AUCs that are defined.
std::optional<double> validation_metric(const SplitAuc& a) {
  if (a.absolute && a.comparison) return 0.5 * (*a.absolute + *a.comparison);
  if (a.comparison) return a.comparison;
  return a.absolute;
}

struct TunedFit {
  Vector beta;
  double lambda = 0.0;
};

/// Fits once per grid value and keeps the best validation metric (first on ties).
TunedFit tuned_fit(const FeatureMatrix& x, const LabeledData& train, const ScoredSet& validation,
                   const std::vector<double>& grid) {
  TunedFit best;
  double best_metric = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (double l : grid) {
    const FitResult fit = map_fit(x, train, l);
    const std::optional<double> m = validation_metric(score(x, fit.params.beta, validation));
    if (!m) throw Error(Errc::degenerate_label_set, "validation split has no usable labels");
    if (!found || *m > best_metric) {
      best = {fit.params.beta, l};
      best_metric = *m;
      found = true;
    }
  }
  return best;
}

}  // namespace

Report run_evaluation(const RunConfig& config) {
  config.validate();
  const DataFactory factory(config);
  const std::vector<std::string> tags = config.resolved_algorithms();
  Report report;
  report.command = config.command;
  report.config = config_to_json(config);
  report.workers = resolve_workers(config);

  const std::size_t per_repeat = config.folds * tags.size();
  std::vector<RepeatRow> rows(config.repeats * per_repeat);

  parallel_for(config.repeats, report.workers, [&](std::size_t r) {
    const std::uint64_t rs = derive_seed(config.seed, r);
    RepeatRow* slot = &rows[r * per_repeat];
    for (std::size_t f = 0; f < config.folds; ++f) {
      for (std::size_t t = 0; t < tags.size(); ++t) {
        RepeatRow& row = slot[f * tags.size() + t];
        row.repeat = r;
        row.fold = f;
        row.seed = rs;
        row.algorithm = tags[t];
      }
    }
    const auto fail_all = [&](const std::string& what, std::size_t from_fold) {
      for (std::size_t i = from_fold * tags.size(); i < per_repeat; ++i) {
        if (slot[i].error.empty()) slot[i].error = what;
      }
    };

    std::shared_ptr<const LabelSource> src;
    try {
      src = factory.make(rs);
    } catch (const Error& e) {
      fail_all(describe(e), 0);
      return;
    }
    const FeatureMatrix& x = src->features();
    const std::size_t n = x.samples();

    // Fixed validation split, remaining samples dealt into folds.
    std::vector<std::size_t> order = iota_vector(n);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(derive_seed(rs, 1)));
    const std::size_t n_val = std::max<std::size_t>(1, fraction_of(n, config.validation_fraction));
    if (n_val + config.folds > n) {
      fail_all("InvalidConfig: too few samples for the validation split and folds", 0);
      return;
    }
    const ScoredSet validation =
        labeled_split(*src, std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val)));
    const std::size_t rest = n - n_val;

    for (std::size_t f = 0; f < config.folds; ++f) {
      try {
        const std::size_t lo = n_val + f * rest / config.folds;
        const std::size_t hi = n_val + (f + 1) * rest / config.folds;
        std::vector<std::size_t> test_samples(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                              order.begin() + static_cast<std::ptrdiff_t>(hi));
        std::vector<std::size_t> train;
        train.insert(train.end(), order.begin() + static_cast<std::ptrdiff_t>(n_val),
                     order.begin() + static_cast<std::ptrdiff_t>(lo));
        train.insert(train.end(), order.begin() + static_cast<std::ptrdiff_t>(hi), order.end());
        std::sort(train.begin(), train.end());
        const ScoredSet test = labeled_split(*src, std::move(test_samples));

        const std::uint64_t fs = derive_seed(rs, 100 + f);
        const std::vector<std::size_t> absolute =
            choose_absolute(*src, train, config.absolute_fraction, derive_seed(fs, 1));
        const LabeledData absolute_data = absolute_only(*src, absolute);
        const std::vector<std::uint8_t> mask = allowed_mask(*src, train);
        std::size_t candidates = train.size() * (train.size() - 1) / 2;
        if (!mask.empty()) candidates = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
        const std::size_t k = config.full_budget ? candidates : config.k;

        std::optional<Vector> baseline_beta;
        const auto beta = [&] {
          if (!baseline_beta) baseline_beta = tuned_fit(x, absolute_data, validation, config.lambda_grid).beta;
          return *baseline_beta;
        };

        for (std::size_t t = 0; t < tags.size(); ++t) {
          RepeatRow& row = slot[f * tags.size() + t];
          row.n = n;
          row.d = x.dim();
          row.k = k;
          try {
            const Selected sel = select_pairs(tags[t], x, absolute, train, mask, k, config,
                                              derive_seed(fs, 2), beta);
            row.selected = sel.pairs;
            row.touches = sel.touches;
            row.timings = sel.timings;
            row.objective = objective_gain(x, absolute, sel.pairs, config.lambda);

            LabeledData train_data = absolute_data;
            std::vector<ComparisonId> revealed = sel.pairs;
            std::sort(revealed.begin(), revealed.end());  // fit is independent of pick order
            for (const ComparisonId& e : revealed) src->comparison_labels(e, train_data.comparisons);
            const TunedFit fit = tuned_fit(x, train_data, validation, config.lambda_grid);
            const SplitAuc a = score(x, fit.beta, test);
            row.lambda_fit = fit.lambda;
            row.auc_absolute = a.absolute;
            row.auc_comparison = a.comparison;
          } catch (const Error& e) {
            row.error = describe(e);
          }
        }
      } catch (const Error& e) {
        fail_all(describe(e), f);
      }
    }
  });

  report.rows = std::move(rows);
  std::size_t errors = 0;
  for (const RepeatRow& r : report.rows) errors += r.error.empty() ? 0 : 1;
  report.passed = errors == 0;
  report.summary = std::to_string(report.rows.size()) + " fold runs, " + std::to_string(errors) + " errors";
  return report;
}

// ---------------------------------------------------------------------------
// verify

namespace {

/// Swaps the last pick for the first unselected pair: a deliberately wrong engine.
void corrupt(std::vector<ComparisonId>& selected, std::size_t n) {
  if (selected.empty()) return;
  for (const ComparisonId& e : all_comparisons(n)) {
    if (std::find(selected.begin(), selected.end(), e) == selected.end()) {
      selected.back() = e;
      return;
    }
  }
}

VerifyRow verify_instance(const RunConfig& c, std::size_t index, std::uint64_t seed,
                          std::size_t n, std::size_t d) {
  VerifyRow row;
  row.instance = index;
  row.seed = seed;
  row.n = n;
  row.d = d;
  row.k = c.k;
  try {
    SyntheticSpec spec;
    spec.n = n;
    spec.d = d;
    if (c.synthetic) {
      spec.sigma_x = c.synthetic->sigma_x;
      spec.sigma_beta = c.synthetic->sigma_beta;
      spec.c_a = c.synthetic->c_a;
    }
    const SyntheticDataset data = sample_synthetic(spec, seed);
    const FeatureMatrix& x = data.features();
    const std::vector<std::size_t> absolute =
        sample_subset(iota_vector(n), fraction_of(n, c.absolute_fraction), derive_seed(seed, 1));
    const SelectionProblem problem{x, absolute, c.lambda, c.k, {}, {}, c.refresh_every};

    std::vector<ComparisonId> reference;
    double f_ng = 0.0;
    for (Algorithm algo : kAllAlgorithms) {
      const std::string tag(algorithm_tag(algo));
      std::vector<ComparisonId> picked;
      try {
        picked = run_algorithm(algo, problem).selected;
      } catch (const Error& e) {
        row.failed.push_back(tag);
        row.mismatched.push_back(tag);
        row.error += (row.error.empty() ? "" : "; ") + tag + ": " + describe(e);
        continue;
      }
      if (tag == c.inject_fault) corrupt(picked, n);
      row.selected[tag] = picked;
      if (algo == Algorithm::naive_greedy) {
        reference = picked;
        f_ng = objective_value(x, absolute, picked, c.lambda);
        row.objective_ng = f_ng;
        continue;
      }
      if (picked == reference) continue;
      row.mismatched.push_back(tag);
      const double f = objective_value(x, absolute, picked, c.lambda);
      const double rel = std::abs(f - f_ng) / std::max(std::abs(f_ng), std::numeric_limits<double>::min());
      row.max_relative_diff = std::max(row.max_relative_diff, rel);
      if (!(std::abs(f - f_ng) <= 1e-6 * std::abs(f_ng))) row.failed.push_back(tag);
    }
  } catch (const Error& e) {
    row.error = describe(e);
    row.failed.push_back("instance");
  }
  row.exact_match = row.mismatched.empty();
  row.passed = row.failed.empty();
  return row;
}

}  // namespace

Report verify_equivalence(const RunConfig& config) {
  config.validate();
  Report report;
  report.command = "verify";
  report.config = config_to_json(config);
  report.workers = resolve_workers(config);

  const std::size_t combos = config.verify_n.size() * config.verify_d.size();
  const std::size_t count = config.instance_seed ? 1 : config.instances;
  std::vector<VerifyRow> rows(count);
  parallel_for(count, report.workers, [&](std::size_t i) {
    const std::size_t combo = i % combos;
    const std::size_t n = config.verify_n[combo / config.verify_d.size()];
    const std::size_t d = config.verify_d[combo % config.verify_d.size()];
    const std::uint64_t seed = config.instance_seed ? *config.instance_seed : derive_seed(config.seed, i);
    rows[i] = verify_instance(config, i, seed, n, d);
  });
  report.verify = std::move(rows);

  std::size_t exact = 0;
  std::size_t failed = 0;
  std::string first_failure;
  for (const VerifyRow& v : report.verify) {
    exact += v.exact_match ? 1 : 0;
    if (!v.passed) {
      ++failed;
      if (first_failure.empty()) {
        first_failure = "; first failure: instance " + std::to_string(v.instance) + " seed " +
                        std::to_string(v.seed) + " variant " + v.failed.front();
      }
    }
  }
  // Every instance must pass; at least 95% must match exactly.
  const bool enough_exact = 100 * exact >= 95 * report.verify.size();
  report.passed = failed == 0 && enough_exact;
  report.summary = std::to_string(exact) + "/" + std::to_string(report.verify.size()) +
                   " exact, " + std::to_string(failed) + " failed" + first_failure;
  return report;
}

Report run_command(const RunConfig& config) {
  if (config.command == "verify") return verify_equivalence(config);
  if (config.command == "evaluate") return run_evaluation(config);
  return run_selection(config);
}

}  // namespace dopt
