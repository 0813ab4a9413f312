#include "dopt/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "dopt/error.hpp"

namespace dopt {

namespace {

constexpr double kDegenerateDenominator = 1e-14;

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(Errc::dimension_mismatch,
                std::string(who) + ": expected a non-empty square matrix");
  }
}

double downdate_denominator(const Matrix& ainv, const Vector& x, Vector& ax) {
  if (x.size() != ainv.rows()) {
    throw Error(Errc::dimension_mismatch, "rank-one update vector has wrong length");
  }
  ax.noalias() = ainv * x;
  const double denom = 1.0 + x.dot(ax);
  if (!(denom > kDegenerateDenominator)) {
    throw Error(Errc::degenerate_update,
                "1 + x^T A^{-1} x = " + std::to_string(denom) + " is not positive");
  }
  return denom;
}

}  // namespace

TriangularFactor cholesky_factor(const Matrix& m) {
  require_square(m, "cholesky_factor");
  Eigen::LLT<Matrix, Eigen::Lower> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::not_positive_definite, "Cholesky pivot is not strictly positive");
  }
  TriangularFactor f{llt.matrixL()};
  for (Eigen::Index i = 0; i < f.dim(); ++i) {
    if (!(f.lower(i, i) > 0.0) || !std::isfinite(f.lower(i, i))) {
      throw Error(Errc::not_positive_definite, "Cholesky pivot is not strictly positive");
    }
  }
  return f;
}

Matrix invert_spd(const Matrix& m) {
  const TriangularFactor f = cholesky_factor(m);
  const Eigen::Index d = f.dim();
  Matrix inv = Matrix::Identity(d, d);
  const auto lower = f.lower.triangularView<Eigen::Lower>();
  lower.solveInPlace(inv);
  lower.transpose().solveInPlace(inv);
  symmetrize(inv);
  return inv;
}

double logdet_spd(const Matrix& m) {
  const TriangularFactor f = cholesky_factor(m);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < f.dim(); ++i) sum += std::log(f.lower(i, i));
  return 2.0 * sum;
}

void symmetrize(Matrix& m) {
  const Eigen::Index d = m.rows();
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = r + 1; c < d; ++c) {
      const double avg = 0.5 * (m(r, c) + m(c, r));
      m(r, c) = avg;
      m(c, r) = avg;
    }
  }
}

void sherman_morrison_downdate_inplace(Matrix& ainv, const Vector& x) {
  Vector ax;
  const double denom = downdate_denominator(ainv, x, ax);
  ainv.noalias() -= (ax / denom) * ax.transpose();
  symmetrize(ainv);
}

Matrix sherman_morrison_downdate(const Matrix& ainv, const Vector& x) {
  Matrix out = ainv;
  sherman_morrison_downdate_inplace(out, x);
  return out;
}

Vector update_vector(const Matrix& ainv, const Vector& x) {
  Vector ax;
  const double denom = downdate_denominator(ainv, x, ax);
  return ax / std::sqrt(denom);
}

double relative_asymmetry(const Matrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

}  // namespace dopt
