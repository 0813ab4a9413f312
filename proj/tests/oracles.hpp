#pragma once

// Independent reference computations and frozen hand-derived values used by
// the unit and acceptance tests. Nothing here calls the routine it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "dopt/bradley_terry.hpp"
#include "dopt/design.hpp"

namespace oracle {

using dopt::ComparisonId;
using dopt::FeatureMatrix;
using dopt::Matrix;
using dopt::Vector;

// ---- frozen values -------------------------------------------------------

// d = 1, x = (0, 1, 3), A empty, lambda = 1: step one picks (0,2) with
// d = 9 / 1; A becomes 10, so step two compares (0,1): 1/10 and (1,2): 4/10.
inline constexpr double kLine3Lambda = 1.0;
inline constexpr double kLine3Gain1 = 9.0;
inline constexpr double kLine3Gain2 = 0.4;
inline const double kLine3Objective = std::log(14.0);  // log(1 + 9 + 4)

// d = 1, x0 = 2, x1 = 0, lambda = 1, S = {(0,1)}: log(1 + 4).
inline const double kScalarObjective = std::log(5.0);

// One absolute label y = +1 on x = 1 with lambda = 1: loss(b) = b^2 + log(1 + e^-b).
// Root of 2b - 1/(1 + e^b) = 0, solved once at 30 digits and frozen.
inline constexpr double kSingleLabelBeta = 0.22232347127832914;

// ---- linear algebra --------------------------------------------------------

inline Matrix random_spd(std::size_t d, std::mt19937_64& rng, double ridge = 1.0) {
  std::normal_distribution<double> g;
  Matrix b(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    for (Eigen::Index c = 0; c < b.cols(); ++c) b(r, c) = g(rng);
  }
  Matrix m = b * b.transpose() / static_cast<double>(d);
  m.diagonal().array() += ridge;
  return (m + m.transpose()) / 2.0;
}

inline Vector random_vector(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
  return v;
}

inline FeatureMatrix random_features(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = g(rng);
  }
  return FeatureMatrix(std::move(x));
}

/// Inverse by full-pivot LU, independent of the Cholesky route.
inline Matrix direct_inverse(const Matrix& m) { return Matrix(m.fullPivLu().inverse()); }

/// log det by partial-pivot LU.
inline double lu_logdet(const Matrix& m) {
  const Eigen::PartialPivLU<Matrix> lu(m);
  const Matrix& f = lu.matrixLU();
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) s += std::log(std::abs(f(i, i)));
  return s;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double relative_max_abs(const Matrix& got, const Matrix& want) {
  return max_abs(got - want) / std::max(max_abs(want), 1e-300);
}

/// lambda I + sum x_i x_i^T + sum x_e x_e^T, assembled entry by entry.
inline Matrix design(const FeatureMatrix& x, std::span<const std::size_t> absolute,
                     std::span<const ComparisonId> selected, double lambda) {
  const auto d = static_cast<Eigen::Index>(x.dim());
  Matrix a = Matrix::Identity(d, d) * lambda;
  const auto add = [&](const Vector& v) {
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) a(r, c) += v(r) * v(c);
    }
  };
  for (std::size_t i : absolute) add(x.row(i).transpose());
  for (const ComparisonId& e : selected) add((x.row(e.i) - x.row(e.j)).transpose());
  return a;
}

inline double objective(const FeatureMatrix& x, std::span<const std::size_t> absolute,
                        std::span<const ComparisonId> selected, double lambda) {
  return lu_logdet(design(x, absolute, selected, lambda));
}

inline std::vector<ComparisonId> all_pairs(std::size_t n) {
  std::vector<ComparisonId> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) out.push_back({i, j});
  }
  return out;
}

/// Greedy on logdet differences, first maximum in lexicographic order.
inline std::vector<ComparisonId> greedy_by_objective(const FeatureMatrix& x,
                                                     std::span<const std::size_t> absolute,
                                                     std::size_t k, double lambda) {
  std::vector<ComparisonId> s;
  const auto pairs = all_pairs(x.samples());
  for (std::size_t it = 0; it < k; ++it) {
    double best = -INFINITY;
    ComparisonId pick{};
    for (const ComparisonId& e : pairs) {
      if (std::find(s.begin(), s.end(), e) != s.end()) continue;
      s.push_back(e);
      const double f = objective(x, absolute, s, lambda);
      s.pop_back();
      if (f > best) {
        best = f;
        pick = e;
      }
    }
    s.push_back(pick);
  }
  return s;
}

// ---- statistics -------------------------------------------------------------

/// AUC by counting every (positive, negative) pair.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double credit = 0.0;
  double pairs = 0.0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] != 1) continue;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (labels[q] != -1) continue;
      pairs += 1.0;
      if (scores[p] > scores[q]) credit += 1.0;
      if (scores[p] == scores[q]) credit += 0.5;
    }
  }
  return credit / pairs;
}

/// Minimizer of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-12) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

/// Loss written out term by term from the model definition.
inline double reference_loss(const Vector& beta, double lambda, const FeatureMatrix& x,
                             const dopt::LabeledData& data) {
  double loss = lambda * beta.squaredNorm();
  for (const auto& a : data.absolute) {
    const double t = a.label * x.row(a.sample).dot(beta);
    loss += std::log1p(std::exp(-t));
  }
  for (const auto& c : data.comparisons) {
    const double t = c.label * (x.row(c.pair.i) - x.row(c.pair.j)).dot(beta);
    loss += std::log1p(std::exp(-t));
  }
  return loss;
}

}  // namespace oracle
