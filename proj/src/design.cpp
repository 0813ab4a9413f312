#include "dopt/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dopt/error.hpp"

namespace dopt {

namespace {

void check_sample(const FeatureMatrix& x, std::size_t i) {
  if (i >= x.samples()) {
    throw Error(Errc::index_out_of_range,
                "sample " + std::to_string(i) + " not in [0, " + std::to_string(x.samples()) + ")");
  }
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(Errc::invalid_config, "lambda must be positive and finite");
  }
}

double binomial(double n, double k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (double t = 0; t < k; ++t) r = r * (n - t) / (t + 1.0);
  return r;
}

}  // namespace

FeatureMatrix::FeatureMatrix(Matrix rows) : rows_(std::move(rows)) {
  if (!rows_.allFinite()) {
    throw Error(Errc::parse_error, "feature matrix contains non-finite entries");
  }
}

ComparisonId make_comparison(std::size_t a, std::size_t b) {
  if (a == b) throw Error(Errc::index_out_of_range, "a comparison needs two distinct samples");
  if (a > b) std::swap(a, b);
  return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
}

Vector comparison_feature(const FeatureMatrix& x, ComparisonId e) {
  check_sample(x, e.i);
  check_sample(x, e.j);
  return (x.row(e.i) - x.row(e.j)).transpose();
}

Matrix design_matrix(const FeatureMatrix& x, std::span<const std::size_t> absolute,
                     std::span<const ComparisonId> selected, double lambda) {
  const auto d = static_cast<Eigen::Index>(x.dim());
  Matrix a = lambda * Matrix::Identity(d, d);
  for (std::size_t i : absolute) {
    check_sample(x, i);
    const Vector xi = x.row(i).transpose();
    a.noalias() += xi * xi.transpose();
  }
  for (const ComparisonId& e : selected) {
    const Vector xe = comparison_feature(x, e);
    a.noalias() += xe * xe.transpose();
  }
  return a;
}

bool DesignState::contains(ComparisonId e) const {
  return std::find(selected.begin(), selected.end(), e) != selected.end();
}

void DesignState::add(const FeatureMatrix& x, ComparisonId e) {
  if (contains(e)) throw Error(Errc::already_selected, "comparison selected twice");
  sherman_morrison_downdate_inplace(ainv, comparison_feature(x, e));
  selected.push_back(e);
  iteration = selected.size();
}

DesignState init_design(const FeatureMatrix& x, std::span<const std::size_t> absolute,
                        double lambda) {
  check_lambda(lambda);
  DesignState s;
  s.lambda = lambda;
  s.absolute.assign(absolute.begin(), absolute.end());
  s.ainv = invert_spd(design_matrix(x, absolute, {}, lambda));
  return s;
}

double objective_value(const FeatureMatrix& x, std::span<const std::size_t> absolute,
                       std::span<const ComparisonId> selected, double lambda) {
  check_lambda(lambda);
  return logdet_spd(design_matrix(x, absolute, selected, lambda));
}

double proxy_gain(const DesignState& state, const FeatureMatrix& x, ComparisonId e) {
  if (state.contains(e)) throw Error(Errc::already_selected, "gain requested for a selected pair");
  const Vector xe = comparison_feature(x, e);
  return xe.dot(state.ainv * xe);
}

double marginal_gain_exact(const DesignState& state, const FeatureMatrix& x, ComparisonId e) {
  return std::log1p(proxy_gain(state, x, e));
}

std::vector<ComparisonId> all_comparisons(std::size_t n_samples,
                                          std::span<const std::size_t> pool) {
  std::vector<std::size_t> members(pool.begin(), pool.end());
  if (members.empty()) {
    members.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) members[i] = i;
  }
  std::sort(members.begin(), members.end());
  std::vector<ComparisonId> out;
  out.reserve(members.size() * (members.size() - (members.empty() ? 0 : 1)) / 2);
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      out.push_back(make_comparison(members[a], members[b]));
    }
  }
  return out;
}

std::vector<ComparisonId> brute_force_select(const FeatureMatrix& x,
                                             std::span<const std::size_t> absolute,
                                             std::size_t k, double lambda,
                                             double max_subsets) {
  const std::vector<ComparisonId> universe = all_comparisons(x.samples());
  const std::size_t m = universe.size();
  if (k > m) throw Error(Errc::instance_too_large, "K exceeds the number of comparisons");
  if (binomial(static_cast<double>(m), static_cast<double>(k)) > max_subsets) {
    throw Error(Errc::instance_too_large, "too many subsets for exhaustive search");
  }

  // Combinations in lexicographic index order; strict improvement keeps the
  // lexicographically smallest maximizer.
  std::vector<std::size_t> idx(k);
  for (std::size_t t = 0; t < k; ++t) idx[t] = t;
  std::vector<ComparisonId> subset(k);
  std::vector<ComparisonId> best;
  double best_value = -std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t t = 0; t < k; ++t) subset[t] = universe[idx[t]];
    const double value = objective_value(x, absolute, subset, lambda);
    if (value > best_value) {
      best_value = value;
      best = subset;
    }
    std::size_t t = k;
    while (t > 0 && idx[t - 1] == m - k + (t - 1)) --t;
    if (t == 0) break;
    ++idx[t - 1];
    for (std::size_t u = t; u < k; ++u) idx[u] = idx[u - 1] + 1;
  }
  return best;
}

}  // namespace dopt
