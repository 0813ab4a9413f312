#pragma once

#include <Eigen/Core>

namespace dopt {

// Dense row-major storage throughout; d stays in the low hundreds.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Lower-triangular Cholesky factor L with L * L^T equal to the factored matrix.
/// The upper factor U = L^T satisfies U^T * U = M.
struct TriangularFactor {
  Matrix lower;

  Eigen::Index dim() const { return lower.rows(); }
  Matrix upper() const { return lower.transpose(); }
};

/// Factors a symmetric positive definite matrix. Throws Errc::not_positive_definite
/// when a pivot is not strictly positive.
TriangularFactor cholesky_factor(const Matrix& m);

/// Inverse of an SPD matrix via its Cholesky factor and triangular solves.
Matrix invert_spd(const Matrix& m);

/// log det of an SPD matrix as twice the sum of log-diagonal of its factor.
double logdet_spd(const Matrix& m);

/// Replaces m with (m + m^T) / 2.
void symmetrize(Matrix& m);

/// In place: ainv <- (A + x x^T)^{-1} given ainv = A^{-1}.
void sherman_morrison_downdate_inplace(Matrix& ainv, const Vector& x);

Matrix sherman_morrison_downdate(const Matrix& ainv, const Vector& x);

/// v = ainv x / sqrt(1 + x^T ainv x), so that ainv - v v^T = (A + x x^T)^{-1}.
Vector update_vector(const Matrix& ainv, const Vector& x);

/// Max-abs asymmetry relative to the largest entry; 0 for the zero matrix.
double relative_asymmetry(const Matrix& m);

}  // namespace dopt
