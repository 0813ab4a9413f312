#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dopt/linalg.hpp"

namespace dopt {

/// N samples by d features, one sample per row. Entries are finite.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix rows);

  std::size_t samples() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows_.cols()); }
  const Matrix& rows() const { return rows_; }
  auto row(std::size_t i) const { return rows_.row(static_cast<Eigen::Index>(i)); }

 private:
  Matrix rows_;
};

/// Unordered comparison between samples i and j, stored canonically with i < j.
struct ComparisonId {
  std::uint32_t i = 0;
  std::uint32_t j = 0;

  friend auto operator<=>(const ComparisonId&, const ComparisonId&) = default;
};

ComparisonId make_comparison(std::size_t a, std::size_t b);

/// x_i - x_j.
Vector comparison_feature(const FeatureMatrix& x, ComparisonId e);

/// lambda I + sum_{i in absolute} x_i x_i^T + sum_{e in selected} x_e x_e^T
Matrix design_matrix(const FeatureMatrix& x, std::span<const std::size_t> absolute,
                     std::span<const ComparisonId> selected, double lambda);

/// Evolving inverse design matrix together with the selection that produced it.
struct DesignState {
  Matrix ainv;
  std::vector<ComparisonId> selected;
  std::vector<std::size_t> absolute;
  double lambda = 0.0;
  std::size_t iteration = 0;

  bool contains(ComparisonId e) const;
  /// Appends e and applies the Sherman-Morrison downdate to ainv.
  void add(const FeatureMatrix& x, ComparisonId e);
};

DesignState init_design(const FeatureMatrix& x, std::span<const std::size_t> absolute,
                        double lambda);

/// log det A(S), from scratch. Slow reference path.
double objective_value(const FeatureMatrix& x, std::span<const std::size_t> absolute,
                       std::span<const ComparisonId> selected, double lambda);

/// log(1 + x_e^T A^{-1} x_e) by the matrix determinant lemma.
double marginal_gain_exact(const DesignState& state, const FeatureMatrix& x, ComparisonId e);

/// d_e = x_e^T A^{-1} x_e.
double proxy_gain(const DesignState& state, const FeatureMatrix& x, ComparisonId e);

/// Exhaustive maximizer of objective_value over all K-subsets of the comparison
/// universe. Ties go to the lexicographically smallest sorted pair list.
/// Throws Errc::instance_too_large when C(|C|, K) exceeds max_subsets.
std::vector<ComparisonId> brute_force_select(const FeatureMatrix& x,
                                             std::span<const std::size_t> absolute,
                                             std::size_t k, double lambda,
                                             double max_subsets = 1e6);

/// All pairs (i, j), i < j, over the given samples (all samples when empty), in
/// lexicographic order.
std::vector<ComparisonId> all_comparisons(std::size_t n_samples,
                                          std::span<const std::size_t> pool = {});

}  // namespace dopt
