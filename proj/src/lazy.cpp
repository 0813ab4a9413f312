#include "dopt/lazy.hpp"

#include <string>

#include "dopt/error.hpp"
#include "dopt/greedy.hpp"

namespace dopt {

// Lazy skeleton

void LazyEngineBase::build_heap(const std::vector<double>& initial_gains) {
  const std::size_t m = space_.members();
  std::vector<HeapEntry> items;
  items.reserve(space_.allowed_count());
  std::size_t idx = 0;
  for (std::size_t a = 0; a + 1 < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b, ++idx) {
      if (!space_.allowed(idx)) continue;
      items.push_back({initial_gains[idx], 0,
                       {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)}});
    }
  }
  heap_ = heap_build(std::move(items));
}

Pick LazyEngineBase::find_max() {
  stats_ = {};
  const auto k = static_cast<std::uint32_t>(iteration());
  while (true) {
    const HeapEntry& top = heap_.peek();
    if (top.stamp > k) {
      throw Error(Errc::stale_stamp_corruption,
                  "heap entry stamped " + std::to_string(top.stamp) + " at iteration " +
                      std::to_string(k));
    }
    if (top.stamp == k) {
      // Already current; every other entry is an upper bound that ranks below it.
      const HeapEntry chosen = heap_.extract_max();
      return {chosen.pair.i, chosen.pair.j, chosen.gain};
    }
    const HeapEntry fresh{refresh_gain(top), k, top.pair};
    ++stats_.touches;
    if (heap_.size() == 1 || ranks_before(fresh, heap_.peek_second())) {
      heap_.extract_max();
      return {fresh.pair.i, fresh.pair.j, fresh.gain};
    }
    heap_.replace_top(fresh);
  }
}

// Naive lazy

void NaiveLazyEngine::preprocess() {
  init_inverse();
  std::vector<double> gains;
  detail::naive_pair_gains(space_, ainv_, gains);
  build_heap(gains);
}

double NaiveLazyEngine::refresh_gain(const HeapEntry& entry) {
  const Vector xe = space_.pair_feature(entry.pair.i, entry.pair.j);
  return xe.dot(ainv_ * xe);
}

void NaiveLazyEngine::update(const Pick& pick) {
  sherman_morrison_downdate_inplace(ainv_, space_.pair_feature(pick.a, pick.b));
  record_selection(pick);
  maybe_refresh();
}

// Factorization lazy

FactorizationLazyEngine::FactorizationLazyEngine(const SelectionProblem& problem, LazyMode mode)
    : LazyEngineBase(problem), mode_(mode) {}

void FactorizationLazyEngine::preprocess() {
  init_inverse();
  factor_ = cholesky_factor(ainv_);
  z_.noalias() = space_.rows() * factor_.lower.triangularView<Eigen::Lower>();
  z_generation_.assign(space_.members(), 0);
  generation_ = 0;
  std::vector<double> gains;
  detail::factor_pair_gains(space_, z_, gains);
  build_heap(gains);
}

void FactorizationLazyEngine::ensure_z(std::uint32_t member) {
  if (z_generation_[member] == generation_) return;
  z_.row(member).noalias() =
      space_.rows().row(member) * factor_.lower.triangularView<Eigen::Lower>();
  z_generation_[member] = generation_;
  ++stats_.z_computed;
}

double FactorizationLazyEngine::refresh_gain(const HeapEntry& entry) {
  if (mode_ == LazyMode::memoize) {
    ensure_z(entry.pair.i);
    ensure_z(entry.pair.j);
  }
  return (z_.row(entry.pair.i) - z_.row(entry.pair.j)).squaredNorm();
}

void FactorizationLazyEngine::update(const Pick& pick) {
  sherman_morrison_downdate_inplace(ainv_, space_.pair_feature(pick.a, pick.b));
  record_selection(pick);
  maybe_refresh();
  factor_ = cholesky_factor(ainv_);
  ++generation_;
  if (mode_ == LazyMode::precompute) {
    z_.noalias() = space_.rows() * factor_.lower.triangularView<Eigen::Lower>();
    std::fill(z_generation_.begin(), z_generation_.end(), generation_);
  }
}

// Scalar lazy

ScalarLazyEngine::ScalarLazyEngine(const SelectionProblem& problem, LazyMode mode)
    : LazyEngineBase(problem), mode_(mode) {}

void ScalarLazyEngine::preprocess() {
  init_inverse();
  const auto k = static_cast<Eigen::Index>(budget());
  const auto m = static_cast<Eigen::Index>(space_.members());
  history_.rho = Matrix::Zero(k, m);
  history_.filled_rows = 0;
  if (mode_ == LazyMode::memoize) {
    history_.filled.assign(static_cast<std::size_t>(k * m), 0);
  }
  update_vectors_ = Matrix::Zero(k, space_.rows().cols());
  const Matrix z = detail::factor_products(space_, ainv_);
  std::vector<double> gains;
  detail::factor_pair_gains(space_, z, gains);
  build_heap(gains);
}

double ScalarLazyEngine::rho(std::size_t row, std::uint32_t member) {
  const auto r = static_cast<Eigen::Index>(row);
  if (mode_ == LazyMode::memoize) {
    std::uint8_t& mark = history_.filled[row * space_.members() + member];
    if (!mark) {
      history_.rho(r, member) = space_.rows().row(member).dot(update_vectors_.row(r));
      mark = 1;
      ++stats_.rho_computed;
    }
  }
  return history_.rho(r, member);
}

double ScalarLazyEngine::refresh_gain(const HeapEntry& entry) {
  const std::size_t k = iteration();
  if (entry.stamp > k) {
    throw Error(Errc::stale_stamp_corruption, "entry stamp is ahead of the iteration count");
  }
  double total = 0.0;
  for (std::size_t l = entry.stamp; l < k; ++l) {
    const double diff = rho(l, entry.pair.i) - rho(l, entry.pair.j);
    total += diff * diff;
  }
  return entry.gain - total;
}

void ScalarLazyEngine::update(const Pick& pick) {
  const auto row = static_cast<Eigen::Index>(iteration());
  const Vector v = update_vector(ainv_, space_.pair_feature(pick.a, pick.b));
  update_vectors_.row(row) = v.transpose();
  if (mode_ == LazyMode::precompute) {
    history_.rho.row(row).noalias() = (space_.rows() * v).transpose();
  }
  ainv_.noalias() -= v * v.transpose();
  symmetrize(ainv_);
  record_selection(pick);
  history_.filled_rows = iteration();
  maybe_refresh();
}

SelectionTrace naive_lazy(const SelectionProblem& problem) {
  NaiveLazyEngine engine(problem);
  return run_greedy(engine, Algorithm::naive_lazy);
}

SelectionTrace factorization_lazy(const SelectionProblem& problem, LazyMode mode) {
  FactorizationLazyEngine engine(problem, mode);
  return run_greedy(engine, mode == LazyMode::precompute
                                ? Algorithm::factorization_lazy_precompute
                                : Algorithm::factorization_lazy_memoize);
}

SelectionTrace scalar_lazy(const SelectionProblem& problem, LazyMode mode) {
  ScalarLazyEngine engine(problem, mode);
  return run_greedy(engine, mode == LazyMode::precompute ? Algorithm::scalar_lazy_precompute
                                                         : Algorithm::scalar_lazy_memoize);
}

}  // namespace dopt
