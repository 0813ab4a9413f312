#include <doctest.h>

#include "dopt/error.hpp"
#include "dopt/linalg.hpp"
#include "oracles.hpp"

using namespace dopt;

namespace {

Matrix diag(std::initializer_list<double> values) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) {
    m(i, i) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("cholesky of identity and diagonal matrices") {
    CHECK(oracle::max_abs(cholesky_factor(Matrix::Identity(3, 3)).lower - Matrix::Identity(3, 3)) == 0.0);
    const TriangularFactor f = cholesky_factor(diag({4.0, 9.0}));
    CHECK(oracle::max_abs(f.lower - diag({2.0, 3.0})) == 0.0);
  }

  TEST_CASE("cholesky reproduces random SPD matrices") {
    std::mt19937_64 rng(42);
    const Matrix m = oracle::random_spd(8, rng);
    const TriangularFactor f = cholesky_factor(m);
    CHECK((f.lower * f.lower.transpose() - m).norm() / m.norm() <= 1e-10);
    CHECK((f.upper().transpose() * f.upper() - m).norm() / m.norm() <= 1e-10);
    for (Eigen::Index i = 0; i < f.dim(); ++i) CHECK(f.lower(i, i) > 0.0);
    for (std::size_t d = 1; d <= 64; d *= 2) {
      const Matrix a = oracle::random_spd(d, rng, 1e-3);
      const TriangularFactor g = cholesky_factor(a);
      CHECK((g.lower * g.lower.transpose() - a).norm() / a.norm() <= 1e-10);
    }
  }

  TEST_CASE("cholesky rejects indefinite input") {
    Matrix m = diag({1.0, -1.0});
    CHECK_THROWS_AS(cholesky_factor(m), Error);
    try {
      cholesky_factor(m);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::not_positive_definite);
    }
    CHECK_THROWS_AS(invert_spd(Matrix::Zero(2, 2)), Error);
  }

  TEST_CASE("invert_spd closed forms") {
    CHECK(oracle::max_abs(invert_spd(Matrix::Identity(4, 4)) - Matrix::Identity(4, 4)) <= 1e-15);
    CHECK(oracle::max_abs(invert_spd(diag({2.0, 4.0})) - diag({0.5, 0.25})) <= 1e-15);
    Vector x(2);
    x << 1.0, 0.0;
    const Matrix a = Matrix::Identity(2, 2) + x * x.transpose();
    CHECK(oracle::max_abs(invert_spd(a) - diag({0.5, 1.0})) <= 1e-15);
  }

  TEST_CASE("invert_spd agrees with LU inverse and stays symmetric") {
    std::mt19937_64 rng(3);
    for (std::size_t d : {1u, 5u, 17u, 64u}) {
      const Matrix m = oracle::random_spd(d, rng);
      const Matrix inv = invert_spd(m);
      CHECK(oracle::relative_max_abs(inv, oracle::direct_inverse(m)) <= 1e-10);
      CHECK(relative_asymmetry(inv) <= 1e-12);
    }
  }

  TEST_CASE("logdet matches the LU route") {
    std::mt19937_64 rng(8);
    for (std::size_t d : {1u, 7u, 32u}) {
      const Matrix m = oracle::random_spd(d, rng);
      CHECK(logdet_spd(m) == doctest::Approx(oracle::lu_logdet(m)).epsilon(1e-12));
    }
    CHECK(logdet_spd(diag({2.0, 3.0})) == doctest::Approx(std::log(6.0)));
  }

  TEST_CASE("sherman-morrison closed forms") {
    Vector x(2);
    x << 1.0, 0.0;
    CHECK(oracle::max_abs(sherman_morrison_downdate(Matrix::Identity(2, 2), x) - diag({0.5, 1.0})) <= 1e-15);
    CHECK(oracle::max_abs(sherman_morrison_downdate(Matrix::Identity(2, 2), Vector::Zero(2)) -
                          Matrix::Identity(2, 2)) == 0.0);
  }

  TEST_CASE("sherman-morrison matches the direct inverse") {
    std::mt19937_64 rng(7);
    const Matrix a = oracle::random_spd(16, rng);
    const Vector x = oracle::random_vector(16, rng);
    const Matrix got = sherman_morrison_downdate(invert_spd(a), x);
    CHECK(oracle::relative_max_abs(got, oracle::direct_inverse(a + x * x.transpose())) <= 1e-10);
    CHECK(relative_asymmetry(got) <= 1e-12);

    Matrix in_place = invert_spd(a);
    sherman_morrison_downdate_inplace(in_place, x);
    CHECK(oracle::max_abs(in_place - got) <= 1e-14);
  }

  TEST_CASE("sherman-morrison flags a corrupted state") {
    // An indefinite "inverse" can make 1 + x^T ainv x vanish.
    Matrix bad = diag({-1.0, 1.0});
    Vector x(2);
    x << 1.0, 0.0;
    try {
      sherman_morrison_downdate(bad, x);
      FAIL("expected DegenerateUpdate");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_update);
    }
    CHECK_THROWS_AS(update_vector(bad, x), Error);
  }

  TEST_CASE("update_vector closed form and cross-check") {
    Vector x(2);
    x << 1.0, 0.0;
    const Vector v = update_vector(Matrix::Identity(2, 2), x);
    CHECK(v(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(v(1) == 0.0);
    CHECK(update_vector(Matrix::Identity(3, 3), Vector::Zero(3)).norm() == 0.0);

    std::mt19937_64 rng(11);
    const Matrix ainv = invert_spd(oracle::random_spd(12, rng));
    const Vector y = oracle::random_vector(12, rng);
    const Vector w = update_vector(ainv, y);
    CHECK(oracle::max_abs(Matrix(ainv - w * w.transpose()) - sherman_morrison_downdate(ainv, y)) <= 1e-12);
  }

  TEST_CASE("symmetrize and asymmetry measure") {
    Matrix m(2, 2);
    m << 1.0, 2.0, 4.0, 1.0;
    CHECK(relative_asymmetry(m) == doctest::Approx(0.5));
    symmetrize(m);
    CHECK(m(0, 1) == 3.0);
    CHECK(m(1, 0) == 3.0);
    CHECK(relative_asymmetry(Matrix::Zero(3, 3)) == 0.0);
  }

  TEST_CASE("property: repeated downdates track the direct inverse") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t d = 1 + rng() % 40;
      Matrix a = oracle::random_spd(d, rng);
      Matrix ainv = invert_spd(a);
      for (int step = 0; step < 10; ++step) {
        const Vector x = oracle::random_vector(d, rng);
        a += x * x.transpose();
        sherman_morrison_downdate_inplace(ainv, x);
      }
      CHECK(oracle::relative_max_abs(ainv, oracle::direct_inverse(a)) <= 1e-9);
      CHECK(relative_asymmetry(ainv) <= 1e-12);
    }
  }
}
