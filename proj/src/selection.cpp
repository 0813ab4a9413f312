#include "dopt/selection.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dopt/error.hpp"
#include "dopt/greedy.hpp"
#include "dopt/lazy.hpp"

namespace dopt {

namespace {

constexpr std::string_view kTags[] = {"ng", "fg", "sg", "nl", "flp", "flm", "slp", "slm"};

}  // namespace

std::string_view algorithm_tag(Algorithm a) { return kTags[static_cast<int>(a)]; }

std::optional<Algorithm> parse_algorithm(std::string_view tag) {
  for (Algorithm a : kAllAlgorithms) {
    if (algorithm_tag(a) == tag) return a;
  }
  return std::nullopt;
}

bool is_lazy(Algorithm a) {
  return a != Algorithm::naive_greedy && a != Algorithm::factorization_greedy &&
         a != Algorithm::scalar_greedy;
}

std::size_t SelectionTrace::total_touches() const {
  return std::accumulate(touches.begin(), touches.end(), std::size_t{0});
}

double SelectionTrace::objective_gain() const {
  return std::accumulate(objective_deltas.begin(), objective_deltas.end(), 0.0);
}

PairSpace::PairSpace(const SelectionProblem& problem) {
  const FeatureMatrix& x = problem.features;
  if (!(problem.lambda > 0.0) || !std::isfinite(problem.lambda)) {
    throw Error(Errc::invalid_config, "lambda must be positive and finite");
  }
  for (std::size_t i : problem.absolute) {
    if (i >= x.samples()) throw Error(Errc::index_out_of_range, "absolute-label sample out of range");
  }
  if (problem.pool.empty()) {
    pool_.resize(x.samples());
    std::iota(pool_.begin(), pool_.end(), std::size_t{0});
  } else {
    pool_ = problem.pool;
    std::sort(pool_.begin(), pool_.end());
    if (std::adjacent_find(pool_.begin(), pool_.end()) != pool_.end()) {
      throw Error(Errc::invalid_config, "candidate pool lists a sample twice");
    }
    if (pool_.back() >= x.samples()) {
      throw Error(Errc::index_out_of_range, "candidate pool sample out of range");
    }
  }
  members_ = pool_.size();
  pair_count_ = members_ < 2 ? 0 : members_ * (members_ - 1) / 2;
  if (!problem.allowed.empty()) {
    if (problem.allowed.size() != pair_count_) {
      throw Error(Errc::dimension_mismatch, "candidate mask size does not match the pool");
    }
    allowed_ = problem.allowed;
    allowed_count_ = static_cast<std::size_t>(
        std::count_if(allowed_.begin(), allowed_.end(), [](std::uint8_t v) { return v != 0; }));
  } else {
    allowed_count_ = pair_count_;
  }
  if (problem.k > allowed_count_) {
    throw Error(Errc::invalid_config, "budget K = " + std::to_string(problem.k) +
                                          " exceeds the " + std::to_string(allowed_count_) +
                                          " candidate comparisons");
  }
  rows_.resize(static_cast<Eigen::Index>(members_), static_cast<Eigen::Index>(x.dim()));
  for (std::size_t a = 0; a < members_; ++a) {
    rows_.row(static_cast<Eigen::Index>(a)) = x.row(pool_[a]);
  }
}

EngineBase::EngineBase(const SelectionProblem& problem) : problem_(problem), space_(problem) {}

void EngineBase::init_inverse() {
  selected_.clear();
  ainv_ = invert_spd(design_matrix(problem_.features, problem_.absolute, {}, problem_.lambda));
}

void EngineBase::record_selection(const Pick& pick) {
  selected_.push_back(space_.global(pick.a, pick.b));
}

bool EngineBase::maybe_refresh() {
  const std::size_t every = problem_.refresh_every;
  if (every == 0 || selected_.empty() || selected_.size() % every != 0) return false;
  ainv_ = invert_spd(
      design_matrix(problem_.features, problem_.absolute, selected_, problem_.lambda));
  return true;
}

SelectionTrace run_algorithm(Algorithm algorithm, const SelectionProblem& problem) {
  switch (algorithm) {
    case Algorithm::naive_greedy:
      return naive_greedy(problem);
    case Algorithm::factorization_greedy:
      return factorization_greedy(problem);
    case Algorithm::scalar_greedy:
      return scalar_greedy(problem);
    case Algorithm::naive_lazy:
      return naive_lazy(problem);
    case Algorithm::factorization_lazy_precompute:
      return factorization_lazy(problem, LazyMode::precompute);
    case Algorithm::factorization_lazy_memoize:
      return factorization_lazy(problem, LazyMode::memoize);
    case Algorithm::scalar_lazy_precompute:
      return scalar_lazy(problem, LazyMode::precompute);
    case Algorithm::scalar_lazy_memoize:
      return scalar_lazy(problem, LazyMode::memoize);
  }
  throw Error(Errc::invalid_config, "unknown algorithm");
}

}  // namespace dopt
