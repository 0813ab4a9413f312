#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dopt/design.hpp"

namespace dopt {

/// The eight D-optimal greedy variants. Tags follow the usual abbreviations.
enum class Algorithm {
  naive_greedy,                   // ng
  factorization_greedy,           // fg
  scalar_greedy,                  // sg
  naive_lazy,                     // nl
  factorization_lazy_precompute,  // flp
  factorization_lazy_memoize,     // flm
  scalar_lazy_precompute,         // slp
  scalar_lazy_memoize,            // slm
};

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::naive_greedy,
    Algorithm::factorization_greedy,
    Algorithm::scalar_greedy,
    Algorithm::naive_lazy,
    Algorithm::factorization_lazy_precompute,
    Algorithm::factorization_lazy_memoize,
    Algorithm::scalar_lazy_precompute,
    Algorithm::scalar_lazy_memoize,
};

std::string_view algorithm_tag(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view tag);
bool is_lazy(Algorithm a);

/// Whether the lazy variants compute per-sample scratch vectors eagerly each
/// iteration or on first use.
enum class LazyMode { precompute, memoize };

struct SelectionProblem {
  const FeatureMatrix& features;
  std::vector<std::size_t> absolute;
  double lambda = 1e-4;
  std::size_t k = 0;
  /// Samples whose pairs form the candidate universe; empty means all samples.
  std::vector<std::size_t> pool;
  /// Optional mask over pool pairs in lexicographic order (1 = candidate).
  std::vector<std::uint8_t> allowed;
  /// Rebuild A^{-1} from scratch every this many iterations; 0 disables.
  std::size_t refresh_every = 0;
};

/// Per-iteration counters reported by an engine.
struct IterationStats {
  std::size_t touches = 0;       // lazy-loop gain refreshes
  std::size_t z_computed = 0;    // memoized factor products z_i = U x_i
  std::size_t rho_computed = 0;  // memoized scalars v_l^T x_i
  double sweep_seconds = 0.0;    // scalar d_e sweep inside UpdateS
};

struct SelectionTrace {
  Algorithm algorithm = Algorithm::naive_greedy;
  std::vector<ComparisonId> selected;
  std::vector<double> gains;             // proxy gain d_{e*} per iteration
  std::vector<double> objective_deltas;  // log(1 + d_{e*})
  double preprocess_seconds = 0.0;
  std::vector<double> find_max_seconds;
  std::vector<double> update_seconds;
  std::vector<double> sweep_seconds;
  std::vector<std::size_t> touches;
  std::vector<std::size_t> z_computed;
  std::vector<std::size_t> rho_computed;
  double total_seconds = 0.0;

  std::size_t total_touches() const;
  /// f(S) - f(empty set), accumulated from the per-iteration deltas.
  double objective_gain() const;
};

/// Candidate pairs over a sorted sample pool, indexed lexicographically by
/// pool-local positions (a, b), a < b.
class PairSpace {
 public:
  explicit PairSpace(const SelectionProblem& problem);

  std::size_t members() const { return members_; }
  std::size_t pair_count() const { return pair_count_; }
  std::size_t allowed_count() const { return allowed_count_; }
  std::size_t index(std::size_t a, std::size_t b) const {
    return a * (2 * members_ - a - 1) / 2 + (b - a - 1);
  }
  bool allowed(std::size_t idx) const { return allowed_.empty() || allowed_[idx] != 0; }
  /// Pool rows gathered contiguously, M x d.
  const Matrix& rows() const { return rows_; }
  Vector pair_feature(std::size_t a, std::size_t b) const {
    return (rows_.row(static_cast<Eigen::Index>(a)) - rows_.row(static_cast<Eigen::Index>(b)))
        .transpose();
  }
  ComparisonId global(std::size_t a, std::size_t b) const {
    return make_comparison(pool_[a], pool_[b]);
  }

 private:
  std::vector<std::size_t> pool_;
  std::vector<std::uint8_t> allowed_;
  std::size_t members_ = 0;
  std::size_t pair_count_ = 0;
  std::size_t allowed_count_ = 0;
  Matrix rows_;
};

/// Chosen element of one FindMax call, in pool-local coordinates.
struct Pick {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double gain = 0.0;
};

/// Shared state for every engine: pair space, the inverse design matrix, and
/// the selection so far.
class EngineBase {
 public:
  explicit EngineBase(const SelectionProblem& problem);

  const PairSpace& space() const { return space_; }
  const Matrix& ainv() const { return ainv_; }
  std::size_t iteration() const { return selected_.size(); }
  std::size_t budget() const { return problem_.k; }
  const std::vector<ComparisonId>& selected() const { return selected_; }
  const IterationStats& stats() const { return stats_; }

 protected:
  void init_inverse();
  void record_selection(const Pick& pick);
  /// Re-inverts A(S) from scratch when the refresh knob fires; returns true if it did.
  bool maybe_refresh();

  const SelectionProblem& problem_;
  PairSpace space_;
  Matrix ainv_;
  std::vector<ComparisonId> selected_;
  IterationStats stats_;
};

using Clock = std::chrono::steady_clock;

inline double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

/// The abstract greedy skeleton: PreProcessing, then K rounds of FindMax and
/// UpdateS, each phase timed separately.
template <class Engine>
SelectionTrace run_greedy(Engine& engine, Algorithm tag) {
  SelectionTrace trace;
  trace.algorithm = tag;
  const auto start = Clock::now();
  engine.preprocess();
  trace.preprocess_seconds = seconds_between(start, Clock::now());
  const std::size_t k = engine.budget();
  for (std::size_t it = 0; it < k; ++it) {
    const auto t0 = Clock::now();
    const Pick pick = engine.find_max();
    const auto t1 = Clock::now();
    engine.update(pick);
    const auto t2 = Clock::now();
    const IterationStats& s = engine.stats();
    trace.selected.push_back(engine.space().global(pick.a, pick.b));
    trace.gains.push_back(pick.gain);
    trace.objective_deltas.push_back(std::log1p(pick.gain));
    trace.find_max_seconds.push_back(seconds_between(t0, t1));
    trace.update_seconds.push_back(seconds_between(t1, t2));
    trace.sweep_seconds.push_back(s.sweep_seconds);
    trace.touches.push_back(s.touches);
    trace.z_computed.push_back(s.z_computed);
    trace.rho_computed.push_back(s.rho_computed);
  }
  trace.total_seconds = seconds_between(start, Clock::now());
  return trace;
}

/// Runs the named variant end to end.
SelectionTrace run_algorithm(Algorithm algorithm, const SelectionProblem& problem);

}  // namespace dopt
