#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dopt/design.hpp"

namespace dopt {

struct ModelParams {
  Vector beta;
  double lambda = 1.0;  // MAP regularizer, 1 / sigma^2 of the Gaussian prior
};

struct AbsoluteLabel {
  std::size_t sample = 0;
  int label = 1;  // +1 or -1
};

struct ComparisonLabel {
  ComparisonId pair;
  int label = 1;  // +1 when sample i is preferred over sample j
};

struct LabeledData {
  std::vector<AbsoluteLabel> absolute;
  std::vector<ComparisonLabel> comparisons;

  /// Throws index_out_of_range / invalid_label on bad entries.
  void validate(std::size_t n_samples) const;
};

struct FitResult {
  ModelParams params;
  double final_loss = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// 1 / (1 + exp(-t)).
double logistic(double t);
/// log(1 + exp(-t)) without overflow.
double log1p_exp_neg(double t);
/// Entropy in nats of a Bernoulli(p) variable.
double bernoulli_entropy(double p);

struct SyntheticSpec {
  std::size_t n = 100;
  std::size_t d = 10;
  double sigma_x = 1.0;     // feature standard deviation
  double sigma_beta = 1.0;  // standard deviation of the latent parameter
  double c_a = 1.2;         // absolute labels use beta / c_a
};

/// Gaussian features plus a latent parameter; labels are drawn on demand from a
/// counter-based stream, so any (pair, draw) label is reproducible in isolation.
class SyntheticDataset {
 public:
  SyntheticDataset(FeatureMatrix features, Vector beta_tilde, double c_a, std::uint64_t seed);

  const FeatureMatrix& features() const { return features_; }
  const Vector& beta_tilde() const { return beta_tilde_; }
  double c_a() const { return c_a_; }

  /// P(y_i = +1) with beta = beta_tilde / c_a.
  double absolute_probability(std::size_t i) const;
  /// P(y_ij = +1) with beta = beta_tilde.
  double comparison_probability(ComparisonId e) const;
  int absolute_label(std::size_t i, std::uint64_t draw = 0) const;
  int comparison_label(ComparisonId e, std::uint64_t draw = 0) const;

  LabeledData reveal(std::span<const std::size_t> absolute,
                     std::span<const ComparisonId> comparisons) const;

 private:
  FeatureMatrix features_;
  Vector beta_tilde_;
  double c_a_;
  std::uint64_t seed_;
};

SyntheticDataset sample_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// lambda ||beta||^2 + sum log(1 + e^{-y beta^T x_i}) + sum log(1 + e^{-y beta^T x_ij}).
double nll_loss(const ModelParams& params, const FeatureMatrix& x, const LabeledData& data);
Vector nll_gradient(const ModelParams& params, const FeatureMatrix& x, const LabeledData& data);

/// MAP estimate by gradient descent with Barzilai-Borwein trial steps and
/// Armijo backtracking. Deterministic.
FitResult map_fit(const FeatureMatrix& x, const LabeledData& data, double lambda,
                  double tol = 1e-8, std::size_t max_iter = 5000);

/// Mann-Whitney AUC with half credit for score ties. Labels are +1 / -1.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Top-K pairs by Bernoulli entropy of the comparison label under beta_hat.
/// Entropy is decreasing in |beta_hat^T x_ij|, which is the sort key.
std::vector<ComparisonId> entropy_select(const FeatureMatrix& x, const Vector& beta_hat,
                                         std::size_t k, std::span<const ComparisonId> pool);

struct FisherSelection {
  std::vector<ComparisonId> selected;
  std::vector<double> objective;  // f(S) after each greedy step
};

/// -tr(I_q(S)^{-1} I_p), with I_p averaged over the pool and I_q over S,
/// both ridged by delta I.
double fisher_objective(const FeatureMatrix& x, const Vector& beta_hat,
                        std::span<const ComparisonId> selected,
                        std::span<const ComparisonId> pool, double delta = 1e-6);

/// Greedy maximization of fisher_objective. Throws instance_too_large when the
/// pool exceeds max_pool.
FisherSelection fisher_select(const FeatureMatrix& x, const Vector& beta_hat, std::size_t k,
                              std::span<const ComparisonId> pool, double delta = 1e-6,
                              std::size_t max_pool = 10000);

/// K pool entries uniformly without replacement, in draw order.
std::vector<ComparisonId> random_select(std::span<const ComparisonId> pool, std::size_t k,
                                        std::uint64_t seed);

}  // namespace dopt
