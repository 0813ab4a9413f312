#pragma once

#include <cstdint>
#include <vector>

#include "dopt/heap.hpp"
#include "dopt/selection.hpp"

namespace dopt {

/// Lazy FindMax shared by the three lazy variants. Heap entries hold pool-local
/// pairs and upper bounds on their current proxy gain; only the top is refreshed.
class LazyEngineBase : public EngineBase {
 public:
  using EngineBase::EngineBase;
  virtual ~LazyEngineBase() = default;

  Pick find_max();
  const LazyHeap& heap() const { return heap_; }

  /// Current proxy gain for a stale entry, as UpdateMarginal computes it.
  virtual double refresh_gain(const HeapEntry& entry) = 0;

 protected:
  /// Builds the heap from initial gains indexed like PairSpace::index.
  void build_heap(const std::vector<double>& initial_gains);

  LazyHeap heap_;
};

class NaiveLazyEngine : public LazyEngineBase {
 public:
  using LazyEngineBase::LazyEngineBase;

  void preprocess();
  void update(const Pick& pick);
  double refresh_gain(const HeapEntry& entry) override;
};

class FactorizationLazyEngine : public LazyEngineBase {
 public:
  FactorizationLazyEngine(const SelectionProblem& problem, LazyMode mode);

  void preprocess();
  void update(const Pick& pick);
  double refresh_gain(const HeapEntry& entry) override;

 private:
  void ensure_z(std::uint32_t member);

  LazyMode mode_;
  TriangularFactor factor_;
  Matrix z_;
  // z_ row i is valid for the current factor iff z_generation_[i] == generation_.
  std::vector<std::uint64_t> z_generation_;
  std::uint64_t generation_ = 0;
};

/// Dense K x N history of rho_{l,i} = v_l^T x_i, one row per completed iteration.
struct RhoHistory {
  Matrix rho;
  std::vector<std::uint8_t> filled;  // memoize mode: per-entry fill mask
  std::size_t filled_rows = 0;
};

class ScalarLazyEngine : public LazyEngineBase {
 public:
  ScalarLazyEngine(const SelectionProblem& problem, LazyMode mode);

  void preprocess();
  void update(const Pick& pick);
  /// Delta_old - sum over l in [stamp, k) of (rho_{l,i} - rho_{l,j})^2.
  double refresh_gain(const HeapEntry& entry) override;

  const RhoHistory& history() const { return history_; }

 private:
  double rho(std::size_t row, std::uint32_t member);

  LazyMode mode_;
  RhoHistory history_;
  Matrix update_vectors_;  // row l holds v_l
};

SelectionTrace naive_lazy(const SelectionProblem& problem);
SelectionTrace factorization_lazy(const SelectionProblem& problem, LazyMode mode);
SelectionTrace scalar_lazy(const SelectionProblem& problem, LazyMode mode);

}  // namespace dopt
