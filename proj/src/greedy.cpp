#include "dopt/greedy.hpp"

#include <algorithm>
#include <limits>

#include "dopt/error.hpp"

namespace dopt {

namespace {

constexpr double kExcluded = -std::numeric_limits<double>::infinity();
constexpr Eigen::Index kBatchRows = 256;

std::vector<std::uint8_t> initial_exclusions(const PairSpace& space) {
  std::vector<std::uint8_t> excluded(space.pair_count(), 0);
  for (std::size_t idx = 0; idx < excluded.size(); ++idx) excluded[idx] = !space.allowed(idx);
  return excluded;
}

void mask_excluded(const std::vector<std::uint8_t>& excluded, std::vector<double>& gains) {
  for (std::size_t idx = 0; idx < gains.size(); ++idx) {
    if (excluded[idx]) gains[idx] = kExcluded;
  }
}

// First maximum in lexicographic pair order, so equal gains go to the smaller pair.
Pick argmax_pairs(const PairSpace& space, const std::vector<double>& gains) {
  const std::size_t m = space.members();
  Pick best;
  double best_gain = kExcluded;
  bool found = false;
  std::size_t idx = 0;
  for (std::size_t a = 0; a + 1 < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b, ++idx) {
      if (gains[idx] > best_gain) {
        best_gain = gains[idx];
        best.a = static_cast<std::uint32_t>(a);
        best.b = static_cast<std::uint32_t>(b);
        found = true;
      }
    }
  }
  if (!found) throw Error(Errc::invalid_config, "no candidate comparison remains");
  best.gain = best_gain;
  return best;
}

}  // namespace

namespace detail {

void naive_pair_gains(const PairSpace& space, const Matrix& ainv, std::vector<double>& out) {
  const auto m = static_cast<Eigen::Index>(space.members());
  const Matrix& rows = space.rows();
  out.resize(space.pair_count());
  Matrix diff;
  Matrix weighted;
  std::size_t idx = 0;
  for (Eigen::Index a = 0; a + 1 < m; ++a) {
    for (Eigen::Index start = a + 1; start < m; start += kBatchRows) {
      const Eigen::Index len = std::min(kBatchRows, m - start);
      diff = rows.middleRows(start, len).rowwise() - rows.row(a);
      weighted.noalias() = diff * ainv;
      for (Eigen::Index r = 0; r < len; ++r) {
        out[idx++] = weighted.row(r).dot(diff.row(r));
      }
    }
  }
}

void factor_pair_gains(const PairSpace& space, const Matrix& z, std::vector<double>& out) {
  const auto m = static_cast<Eigen::Index>(space.members());
  out.resize(space.pair_count());
  std::size_t idx = 0;
  for (Eigen::Index a = 0; a + 1 < m; ++a) {
    const auto za = z.row(a);
    for (Eigen::Index b = a + 1; b < m; ++b) {
      out[idx++] = (z.row(b) - za).squaredNorm();
    }
  }
}

Matrix factor_products(const PairSpace& space, const Matrix& ainv) {
  const TriangularFactor f = cholesky_factor(ainv);
  Matrix z;
  z.noalias() = space.rows() * f.lower.triangularView<Eigen::Lower>();
  return z;
}

}  // namespace detail

// Naive greedy

void NaiveGreedyEngine::preprocess() {
  init_inverse();
  excluded_ = initial_exclusions(space_);
}

Pick NaiveGreedyEngine::find_max() {
  stats_ = {};
  detail::naive_pair_gains(space_, ainv_, gains_);
  mask_excluded(excluded_, gains_);
  return argmax_pairs(space_, gains_);
}

void NaiveGreedyEngine::update(const Pick& pick) {
  excluded_[space_.index(pick.a, pick.b)] = 1;
  sherman_morrison_downdate_inplace(ainv_, space_.pair_feature(pick.a, pick.b));
  record_selection(pick);
  maybe_refresh();
}

// Factorization greedy

void FactorizationGreedyEngine::preprocess() {
  init_inverse();
  excluded_ = initial_exclusions(space_);
}

Pick FactorizationGreedyEngine::find_max() {
  stats_ = {};
  z_ = detail::factor_products(space_, ainv_);
  detail::factor_pair_gains(space_, z_, gains_);
  mask_excluded(excluded_, gains_);
  return argmax_pairs(space_, gains_);
}

void FactorizationGreedyEngine::update(const Pick& pick) {
  excluded_[space_.index(pick.a, pick.b)] = 1;
  sherman_morrison_downdate_inplace(ainv_, space_.pair_feature(pick.a, pick.b));
  record_selection(pick);
  maybe_refresh();
}

// Scalar greedy

void ScalarGreedyEngine::recompute_all_gains() {
  const Matrix z = detail::factor_products(space_, ainv_);
  detail::factor_pair_gains(space_, z, gains_);
  mask_excluded(excluded_, gains_);
}

void ScalarGreedyEngine::preprocess() {
  init_inverse();
  excluded_ = initial_exclusions(space_);
  recompute_all_gains();
}

Pick ScalarGreedyEngine::find_max() {
  stats_ = {};
  return argmax_pairs(space_, gains_);
}

void ScalarGreedyEngine::update(const Pick& pick) {
  const std::size_t chosen = space_.index(pick.a, pick.b);
  excluded_[chosen] = 1;
  gains_[chosen] = kExcluded;

  const Vector v = update_vector(ainv_, space_.pair_feature(pick.a, pick.b));
  const Vector z = space_.rows() * v;

  const auto sweep_start = Clock::now();
  const std::size_t m = space_.members();
  double* g = gains_.data();
  const double* zs = z.data();
  for (std::size_t a = 0; a + 1 < m; ++a) {
    const double za = zs[a];
    const double* zb = zs + a + 1;
    const std::size_t n = m - a - 1;
    for (std::size_t t = 0; t < n; ++t) {
      const double diff = za - zb[t];
      g[t] -= diff * diff;
    }
    g += n;
  }
  stats_.sweep_seconds = seconds_between(sweep_start, Clock::now());

  ainv_.noalias() -= v * v.transpose();
  symmetrize(ainv_);
  record_selection(pick);
  if (maybe_refresh()) recompute_all_gains();
}

SelectionTrace naive_greedy(const SelectionProblem& problem) {
  NaiveGreedyEngine engine(problem);
  return run_greedy(engine, Algorithm::naive_greedy);
}

SelectionTrace factorization_greedy(const SelectionProblem& problem) {
  FactorizationGreedyEngine engine(problem);
  return run_greedy(engine, Algorithm::factorization_greedy);
}

SelectionTrace scalar_greedy(const SelectionProblem& problem) {
  ScalarGreedyEngine engine(problem);
  return run_greedy(engine, Algorithm::scalar_greedy);
}

}  // namespace dopt
