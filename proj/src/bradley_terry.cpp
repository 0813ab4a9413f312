#include "dopt/bradley_terry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "dopt/error.hpp"
#include "dopt/random.hpp"

namespace dopt {

namespace {

constexpr std::uint64_t kAbsoluteStream = 0xa5a5a5a5ULL;
constexpr std::uint64_t kComparisonStream = 0x5a5a5a5aULL;

int check_label(int label) {
  if (label != 1 && label != -1) {
    throw Error(Errc::invalid_label, "label " + std::to_string(label) + " is not +1 or -1");
  }
  return label;
}

double label_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t i, std::uint64_t j,
                     std::uint64_t draw) {
  std::uint64_t h = mix64(seed ^ stream);
  h = mix64(h ^ i);
  h = mix64(h ^ (j * 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ draw);
  return to_unit(h);
}

double pair_logit(const FeatureMatrix& x, const Vector& beta, ComparisonId e) {
  return (x.row(e.i) - x.row(e.j)).dot(beta.transpose());
}

}  // namespace

double logistic(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log1p_exp_neg(double t) {
  if (t > 0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

double bernoulli_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

void LabeledData::validate(std::size_t n_samples) const {
  for (const AbsoluteLabel& a : absolute) {
    if (a.sample >= n_samples) throw Error(Errc::index_out_of_range, "absolute label sample out of range");
    check_label(a.label);
  }
  for (const ComparisonLabel& c : comparisons) {
    if (c.pair.i >= c.pair.j || c.pair.j >= n_samples) {
      throw Error(Errc::index_out_of_range, "comparison label pair invalid");
    }
    check_label(c.label);
  }
}

// Synthetic generator

SyntheticDataset::SyntheticDataset(FeatureMatrix features, Vector beta_tilde, double c_a,
                                   std::uint64_t seed)
    : features_(std::move(features)), beta_tilde_(std::move(beta_tilde)), c_a_(c_a), seed_(seed) {
  if (static_cast<std::size_t>(beta_tilde_.size()) != features_.dim()) {
    throw Error(Errc::dimension_mismatch, "latent parameter length differs from feature dimension");
  }
  if (!(c_a_ > 0.0)) throw Error(Errc::invalid_config, "c_a must be positive");
}

double SyntheticDataset::absolute_probability(std::size_t i) const {
  return logistic(features_.row(i).dot(beta_tilde_.transpose()) / c_a_);
}

double SyntheticDataset::comparison_probability(ComparisonId e) const {
  return logistic(pair_logit(features_, beta_tilde_, e));
}

int SyntheticDataset::absolute_label(std::size_t i, std::uint64_t draw) const {
  return label_uniform(seed_, kAbsoluteStream, i, 0, draw) < absolute_probability(i) ? 1 : -1;
}

int SyntheticDataset::comparison_label(ComparisonId e, std::uint64_t draw) const {
  return label_uniform(seed_, kComparisonStream, e.i, e.j, draw) < comparison_probability(e) ? 1
                                                                                            : -1;
}

LabeledData SyntheticDataset::reveal(std::span<const std::size_t> absolute,
                                     std::span<const ComparisonId> comparisons) const {
  LabeledData data;
  for (std::size_t i : absolute) data.absolute.push_back({i, absolute_label(i)});
  for (const ComparisonId& e : comparisons) data.comparisons.push_back({e, comparison_label(e)});
  return data;
}

SyntheticDataset sample_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n == 0 || spec.d == 0) throw Error(Errc::invalid_config, "synthetic n and d must be positive");
  if (!(spec.sigma_x > 0.0) || !(spec.sigma_beta > 0.0) || !(spec.c_a > 0.0)) {
    throw Error(Errc::invalid_config, "synthetic scale parameters must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> feature(0.0, spec.sigma_x);
  std::normal_distribution<double> latent(0.0, spec.sigma_beta);
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto d = static_cast<Eigen::Index>(spec.d);
  Matrix x(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) x(r, c) = feature(rng);
  }
  Vector beta(d);
  for (Eigen::Index c = 0; c < d; ++c) beta(c) = latent(rng);
  return SyntheticDataset(FeatureMatrix(std::move(x)), std::move(beta), spec.c_a, mix64(seed));
}

// MAP estimation

double nll_loss(const ModelParams& params, const FeatureMatrix& x, const LabeledData& data) {
  double loss = params.lambda * params.beta.squaredNorm();
  for (const AbsoluteLabel& a : data.absolute) {
    loss += log1p_exp_neg(a.label * x.row(a.sample).dot(params.beta.transpose()));
  }
  for (const ComparisonLabel& c : data.comparisons) {
    loss += log1p_exp_neg(c.label * pair_logit(x, params.beta, c.pair));
  }
  return loss;
}

Vector nll_gradient(const ModelParams& params, const FeatureMatrix& x, const LabeledData& data) {
  Vector grad = 2.0 * params.lambda * params.beta;
  // d/dbeta log(1 + e^{-y t}) = -y * sigma(-y t) * dt/dbeta
  for (const AbsoluteLabel& a : data.absolute) {
    const double t = x.row(a.sample).dot(params.beta.transpose());
    grad -= (a.label * logistic(-a.label * t)) * x.row(a.sample).transpose();
  }
  for (const ComparisonLabel& c : data.comparisons) {
    const double t = pair_logit(x, params.beta, c.pair);
    grad -= (c.label * logistic(-c.label * t)) *
            (x.row(c.pair.i) - x.row(c.pair.j)).transpose();
  }
  return grad;
}

FitResult map_fit(const FeatureMatrix& x, const LabeledData& data, double lambda, double tol,
                  std::size_t max_iter) {
  if (!(lambda > 0.0)) throw Error(Errc::invalid_config, "MAP lambda must be positive");
  data.validate(x.samples());

  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-20;
  constexpr double kMaxStep = 1e20;
  constexpr double kLossNoise = 1e-12;

  ModelParams p{Vector::Zero(static_cast<Eigen::Index>(x.dim())), lambda};
  double loss = nll_loss(p, x, data);
  Vector grad = nll_gradient(p, x, data);
  double step = 1.0;
  FitResult result;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    const double gn2 = grad.squaredNorm();
    if (std::sqrt(gn2) <= tol) break;

    ModelParams trial{p.beta, lambda};
    double trial_loss = loss;
    Vector trial_grad;
    double t = step;
    while (true) {
      trial.beta = p.beta - t * grad;
      trial_loss = nll_loss(trial, x, data);
      if (trial_loss <= loss - kArmijo * t * gn2) {
        trial_grad = nll_gradient(trial, x, data);
        break;
      }
      // Near the optimum the decrease drops below loss round-off; fall back to
      // the approximate Wolfe test on the directional derivative.
      if (trial_loss <= loss + kLossNoise * std::abs(loss)) {
        trial_grad = nll_gradient(trial, x, data);
        if (trial_grad.dot(grad) >= -(1.0 - 2.0 * kArmijo) * gn2 && trial_grad.squaredNorm() < gn2) break;
      }
      t *= 0.5;
      if (t < kMinStep) break;
    }
    if (t < kMinStep) break;  // no descent possible at double precision

    const Vector s = trial.beta - p.beta;
    const Vector y = trial_grad - grad;
    const double sy = s.dot(y);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, kMinStep, kMaxStep) : 2.0 * t;

    p = std::move(trial);
    loss = trial_loss;
    grad = trial_grad;
  }
  result.params = std::move(p);
  result.final_loss = loss;
  result.grad_norm = grad.norm();
  result.iterations = it;
  result.converged = result.grad_norm <= tol;
  return result;
}

// Evaluation

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(Errc::dimension_mismatch, "scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney U, kept integral: each positive scores 2 per negative
  // strictly below it and 1 per negative tied with it.
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = 0;
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t end = g;
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    while (end < order.size() && scores[order[end]] == scores[order[g]]) {
      (check_label(labels[order[end]]) == 1 ? pos : neg) += 1;
      ++end;
    }
    twice_u += 2 * pos * neg_below + pos * neg;
    neg_below += neg;
    n_pos += pos;
    n_neg += neg;
    g = end;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw Error(Errc::degenerate_label_set, "AUC needs at least one positive and one negative");
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Competitor objectives

std::vector<ComparisonId> entropy_select(const FeatureMatrix& x, const Vector& beta_hat,
                                         std::size_t k, std::span<const ComparisonId> pool) {
  if (k > pool.size()) throw Error(Errc::invalid_config, "K exceeds the pool size");
  struct Keyed {
    double abs_logit;
    ComparisonId pair;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(pool.size());
  for (const ComparisonId& e : pool) keyed.push_back({std::abs(pair_logit(x, beta_hat, e)), e});
  const auto by_entropy = [](const Keyed& a, const Keyed& b) {
    if (a.abs_logit != b.abs_logit) return a.abs_logit < b.abs_logit;
    return a.pair < b.pair;
  };
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k), keyed.end(),
                    by_entropy);
  std::vector<ComparisonId> out;
  out.reserve(k);
  for (std::size_t t = 0; t < k; ++t) out.push_back(keyed[t].pair);
  return out;
}

namespace {

Matrix pool_information(const FeatureMatrix& x, const Vector& beta_hat,
                        std::span<const ComparisonId> pairs, double delta, bool average) {
  const auto d = static_cast<Eigen::Index>(x.dim());
  Matrix info = Matrix::Zero(d, d);
  for (const ComparisonId& e : pairs) {
    const Vector xe = comparison_feature(x, e);
    const double p = logistic(xe.dot(beta_hat));
    info.noalias() += (p * (1.0 - p)) * xe * xe.transpose();
  }
  if (average && !pairs.empty()) info /= static_cast<double>(pairs.size());
  info.diagonal().array() += delta;
  return info;
}

}  // namespace

double fisher_objective(const FeatureMatrix& x, const Vector& beta_hat,
                        std::span<const ComparisonId> selected,
                        std::span<const ComparisonId> pool, double delta) {
  const Matrix ip = pool_information(x, beta_hat, pool, delta, true);
  const Matrix iq = pool_information(x, beta_hat, selected, delta, true);
  return -(invert_spd(iq) * ip).trace();
}

FisherSelection fisher_select(const FeatureMatrix& x, const Vector& beta_hat, std::size_t k,
                              std::span<const ComparisonId> pool, double delta,
                              std::size_t max_pool) {
  if (pool.size() > max_pool) {
    throw Error(Errc::instance_too_large,
                "Fisher selection pool of " + std::to_string(pool.size()) + " exceeds " +
                    std::to_string(max_pool));
  }
  if (k > pool.size()) throw Error(Errc::invalid_config, "K exceeds the pool size");

  std::vector<ComparisonId> candidates(pool.begin(), pool.end());
  std::sort(candidates.begin(), candidates.end());
  const auto d = static_cast<Eigen::Index>(x.dim());
  const Matrix ip = pool_information(x, beta_hat, candidates, delta, true);

  std::vector<Vector> features;
  std::vector<double> weights;
  features.reserve(candidates.size());
  weights.reserve(candidates.size());
  for (const ComparisonId& e : candidates) {
    features.push_back(comparison_feature(x, e));
    const double p = logistic(features.back().dot(beta_hat));
    weights.push_back(p * (1.0 - p));
  }

  FisherSelection out;
  std::vector<std::uint8_t> taken(candidates.size(), 0);
  Matrix scatter = Matrix::Zero(d, d);  // sum over S of w x x^T
  for (std::size_t step = 0; step < k; ++step) {
    // I_q(S + e) = B + u u^T with B = scatter / (|S|+1) + delta I and
    // u = sqrt(w_e / (|S|+1)) x_e; the trace follows from Sherman-Morrison.
    const double scale = 1.0 / static_cast<double>(step + 1);
    Matrix b = scale * scatter;
    b.diagonal().array() += delta;
    const Matrix binv = invert_spd(b);
    const Matrix g = binv * ip * binv;
    const double base = (binv * ip).trace();

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (taken[c]) continue;
      const Vector u = std::sqrt(weights[c] * scale) * features[c];
      const double q = u.dot(binv * u);
      const double value = -(base - u.dot(g * u) / (1.0 + q));
      if (value > best) {
        best = value;
        best_idx = c;
      }
    }
    taken[best_idx] = 1;
    scatter.noalias() += weights[best_idx] * features[best_idx] * features[best_idx].transpose();
    out.selected.push_back(candidates[best_idx]);
    out.objective.push_back(best);
  }
  return out;
}

std::vector<ComparisonId> random_select(std::span<const ComparisonId> pool, std::size_t k,
                                        std::uint64_t seed) {
  if (k > pool.size()) throw Error(Errc::invalid_config, "K exceeds the pool size");
  std::vector<ComparisonId> items(pool.begin(), pool.end());
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < k; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, items.size() - 1);
    std::swap(items[t], items[pick(rng)]);
  }
  items.resize(k);
  return items;
}

}  // namespace dopt
