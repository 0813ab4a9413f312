#pragma once

#include <vector>

#include "dopt/selection.hpp"

namespace dopt {

/// Every remaining d_e = x_e^T A^{-1} x_e recomputed per iteration, O(N^2 d^2).
class NaiveGreedyEngine : public EngineBase {
 public:
  using EngineBase::EngineBase;

  void preprocess();
  Pick find_max();
  void update(const Pick& pick);

  /// d_e from the latest FindMax, -inf for excluded pairs.
  const std::vector<double>& gains() const { return gains_; }

 private:
  std::vector<double> gains_;
  std::vector<std::uint8_t> excluded_;
};

/// Factor A^{-1} = U^T U each iteration; d_e = ||z_i - z_j||^2 with z_i = U x_i.
class FactorizationGreedyEngine : public EngineBase {
 public:
  using EngineBase::EngineBase;

  void preprocess();
  Pick find_max();
  void update(const Pick& pick);

  const std::vector<double>& gains() const { return gains_; }

 private:
  std::vector<double> gains_;
  std::vector<std::uint8_t> excluded_;
  Matrix z_;
};

/// d_e computed once, then downdated per iteration by (z_i - z_j)^2 with
/// z_i = v^T x_i, O(N^2) scalar work per iteration.
class ScalarGreedyEngine : public EngineBase {
 public:
  using EngineBase::EngineBase;

  void preprocess();
  Pick find_max();
  void update(const Pick& pick);

  /// Cached d_e, -inf for excluded pairs.
  const std::vector<double>& gains() const { return gains_; }

 private:
  void recompute_all_gains();

  std::vector<double> gains_;
  std::vector<std::uint8_t> excluded_;
};

SelectionTrace naive_greedy(const SelectionProblem& problem);
SelectionTrace factorization_greedy(const SelectionProblem& problem);
SelectionTrace scalar_greedy(const SelectionProblem& problem);

namespace detail {

/// Fills out[index(a, b)] = x_e^T ainv x_e for every pool pair, batching rows
/// through dense matrix products.
void naive_pair_gains(const PairSpace& space, const Matrix& ainv, std::vector<double>& out);

/// out[index(a, b)] = ||z_a - z_b||^2 for every pool pair.
void factor_pair_gains(const PairSpace& space, const Matrix& z, std::vector<double>& out);

/// z = rows * L so that row i holds (U x_i)^T with U = L^T.
Matrix factor_products(const PairSpace& space, const Matrix& ainv);

}  // namespace detail

}  // namespace dopt
