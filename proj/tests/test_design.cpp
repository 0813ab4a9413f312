#include <doctest.h>

#include "dopt/design.hpp"
#include "dopt/error.hpp"
#include "oracles.hpp"

using namespace dopt;

namespace {

FeatureMatrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()),
           static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : values) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return FeatureMatrix(std::move(m));
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::io_error;
}

}  // namespace

TEST_SUITE("design") {
  TEST_CASE("feature matrix rejects non-finite entries") {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(FeatureMatrix{m}, Error);
  }

  TEST_CASE("comparison ids are canonical") {
    CHECK(make_comparison(5, 2) == ComparisonId{2, 5});
    CHECK_THROWS_AS(make_comparison(3, 3), Error);
    CHECK(ComparisonId{0, 1} < ComparisonId{0, 2});
    CHECK(ComparisonId{0, 9} < ComparisonId{1, 2});
  }

  TEST_CASE("comparison_feature examples") {
    const FeatureMatrix x = rows({{1, 2}, {1, 2}, {3, 0}, {1, 1}});
    CHECK(comparison_feature(x, {0, 1}).norm() == 0.0);
    const Vector f = comparison_feature(x, {2, 3});
    CHECK(f(0) == 2.0);
    CHECK(f(1) == -1.0);
    CHECK(code_of([&] { comparison_feature(x, {1, 4}); }) == Errc::index_out_of_range);
  }

  TEST_CASE("property: comparison features are antisymmetric") {
    const FeatureMatrix x = oracle::random_features(30, 6, 1);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 100; ++t) {
      const std::size_t a = rng() % 30, b = rng() % 30;
      if (a == b) continue;
      const Vector fab = x.row(a).transpose() - x.row(b).transpose();
      const Vector canonical = comparison_feature(x, make_comparison(a, b));
      CHECK((a < b ? Vector(canonical - fab) : Vector(canonical + fab)).norm() == 0.0);
    }
  }

  TEST_CASE("init_design closed forms") {
    const FeatureMatrix x = oracle::random_features(5, 3, 4);
    const DesignState s = init_design(x, {}, 2.0);
    CHECK(oracle::max_abs(s.ainv - 0.5 * Matrix::Identity(3, 3)) <= 1e-15);
    CHECK(s.iteration == 0);

    const FeatureMatrix y = rows({{1, 0}, {0, 1}});
    const std::vector<std::size_t> a{0};
    const DesignState t = init_design(y, a, 1.0);
    CHECK(t.ainv(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(t.ainv(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.ainv(0, 1) == 0.0);
  }

  TEST_CASE("init_design reconstruction") {
    const FeatureMatrix x = oracle::random_features(20, 5, 3);
    const std::vector<std::size_t> a{1, 4, 9, 16};
    const DesignState s = init_design(x, a, 1e-4);
    const Matrix prod = s.ainv * oracle::design(x, a, {}, 1e-4);
    CHECK(oracle::max_abs(prod - Matrix::Identity(5, 5)) <= 1e-9);
  }

  TEST_CASE("objective_value examples") {
    const FeatureMatrix x = oracle::random_features(4, 3, 5);
    CHECK(objective_value(x, {}, {}, 1.0) == doctest::Approx(0.0));
    const FeatureMatrix y = rows({{2}, {0}});
    const std::vector<ComparisonId> s{{0, 1}};
    CHECK(objective_value(y, {}, s, 1.0) == doctest::Approx(oracle::kScalarObjective).epsilon(1e-15));
  }

  TEST_CASE("property: objective matches LU oracle and is monotone") {
    const FeatureMatrix x = oracle::random_features(15, 6, 6);
    const auto pairs = oracle::all_pairs(15);
    std::mt19937_64 rng(7);
    const std::vector<std::size_t> a{0, 3};
    for (int t = 0; t < 200; ++t) {
      std::vector<ComparisonId> s;
      const std::size_t size = rng() % 8;
      while (s.size() < size) {
        const ComparisonId e = pairs[rng() % pairs.size()];
        if (std::find(s.begin(), s.end(), e) == s.end()) s.push_back(e);
      }
      const double f = objective_value(x, a, s, 1e-4);
      CHECK(f == doctest::Approx(oracle::objective(x, a, s, 1e-4)).epsilon(1e-10));
      ComparisonId e = pairs[rng() % pairs.size()];
      while (std::find(s.begin(), s.end(), e) != s.end()) e = pairs[rng() % pairs.size()];
      s.push_back(e);
      CHECK(objective_value(x, a, s, 1e-4) >= f - 1e-9);
    }
  }

  TEST_CASE("marginal and proxy gain examples") {
    const FeatureMatrix x = rows({{1, 0, 0}, {0, 0, 0}, {0, 0, 0}});
    const DesignState s = init_design(x, {}, 1.0);
    CHECK(marginal_gain_exact(s, x, {0, 1}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(marginal_gain_exact(s, x, {1, 2}) == 0.0);
    CHECK(proxy_gain(s, x, {1, 2}) == 0.0);

    const FeatureMatrix y = oracle::random_features(6, 4, 8);
    const DesignState id = init_design(y, {}, 1.0);
    for (const ComparisonId& e : oracle::all_pairs(6)) {
      CHECK(proxy_gain(id, y, e) == doctest::Approx((y.row(e.i) - y.row(e.j)).squaredNorm()).epsilon(1e-14));
    }
  }

  TEST_CASE("gains reject already selected pairs") {
    const FeatureMatrix x = oracle::random_features(5, 2, 9);
    DesignState s = init_design(x, {}, 1.0);
    s.add(x, {1, 3});
    CHECK(s.contains({1, 3}));
    CHECK(s.iteration == 1);
    CHECK(code_of([&] { proxy_gain(s, x, {1, 3}); }) == Errc::already_selected);
    CHECK(code_of([&] { marginal_gain_exact(s, x, {1, 3}); }) == Errc::already_selected);
    CHECK(code_of([&] { s.add(x, {1, 3}); }) == Errc::already_selected);
  }

  TEST_CASE("property: exact gain equals the logdet difference and log1p(proxy)") {
    std::mt19937_64 rng(10);
    const FeatureMatrix x = oracle::random_features(25, 7, 11);
    const auto pairs = oracle::all_pairs(25);
    for (int t = 0; t < 100; ++t) {
      const std::vector<std::size_t> a{static_cast<std::size_t>(rng() % 25)};
      DesignState s = init_design(x, a, 1e-4);
      const std::size_t steps = rng() % 6;
      while (s.selected.size() < steps) {
        const ComparisonId e = pairs[rng() % pairs.size()];
        if (!s.contains(e)) s.add(x, e);
      }
      double best_exact = -1, best_proxy = -1;
      ComparisonId arg_exact{}, arg_proxy{};
      for (const ComparisonId& e : pairs) {
        if (s.contains(e)) continue;
        const double exact = marginal_gain_exact(s, x, e);
        const double proxy = proxy_gain(s, x, e);
        CHECK(exact == doctest::Approx(std::log1p(proxy)).epsilon(1e-12));
        if (exact > best_exact) best_exact = exact, arg_exact = e;
        if (proxy > best_proxy) best_proxy = proxy, arg_proxy = e;
      }
      CHECK(arg_exact == arg_proxy);
      std::vector<ComparisonId> plus = s.selected;
      plus.push_back(arg_exact);
      const double diff = oracle::objective(x, a, plus, 1e-4) - oracle::objective(x, a, s.selected, 1e-4);
      CHECK(std::abs(best_exact - diff) <= 1e-8);
    }
  }

  TEST_CASE("property: submodularity and monotonicity of exact gains") {
    std::mt19937_64 rng(12);
    const FeatureMatrix x = oracle::random_features(12, 4, 13);
    const auto pairs = oracle::all_pairs(12);
    for (int t = 0; t < 100; ++t) {
      DesignState big = init_design(x, {}, 1e-4);
      DesignState small = init_design(x, {}, 1e-4);
      const std::size_t steps = 1 + rng() % 6;
      while (big.selected.size() < steps) {
        const ComparisonId e = pairs[rng() % pairs.size()];
        if (big.contains(e)) continue;
        big.add(x, e);
        if (rng() % 2) small.add(x, e);
      }
      for (const ComparisonId& e : pairs) {
        if (big.contains(e)) continue;
        const double g_big = marginal_gain_exact(big, x, e);
        CHECK(g_big >= -1e-9);
        CHECK(marginal_gain_exact(small, x, e) >= g_big - 1e-9);
      }
    }
  }

  TEST_CASE("property: design state reconstruction after many updates") {
    const FeatureMatrix x = oracle::random_features(40, 8, 14);
    const auto pairs = oracle::all_pairs(40);
    const std::vector<std::size_t> a{2, 5, 7};
    DesignState s = init_design(x, a, 1e-4);
    std::mt19937_64 rng(15);
    while (s.selected.size() < 60) {
      const ComparisonId e = pairs[rng() % pairs.size()];
      if (s.contains(e)) continue;
      s.add(x, e);
      if (s.iteration % 10 == 0) {
        const Matrix want = oracle::direct_inverse(oracle::design(x, a, s.selected, 1e-4));
        CHECK(oracle::relative_max_abs(s.ainv, want) <= 1e-8);
      }
    }
  }

  TEST_CASE("brute force examples") {
    const FeatureMatrix x = rows({{0}, {1}, {3}});
    const auto one = brute_force_select(x, {}, 1, 1.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == ComparisonId{0, 2});
    auto all = brute_force_select(x, {}, 3, 1.0);
    std::sort(all.begin(), all.end());
    CHECK(all == oracle::all_pairs(3));
    const FeatureMatrix big = oracle::random_features(60, 3, 1);
    CHECK(code_of([&] { brute_force_select(big, {}, 5, 1e-4); }) == Errc::instance_too_large);
  }

  TEST_CASE("brute force is optimal against exhaustive oracle") {
    const FeatureMatrix x = oracle::random_features(6, 3, 5);
    const auto s = brute_force_select(x, {}, 2, 1e-4);
    const double best = oracle::objective(x, {}, s, 1e-4);
    const auto pairs = oracle::all_pairs(6);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      for (std::size_t q = p + 1; q < pairs.size(); ++q) {
        const std::vector<ComparisonId> t{pairs[p], pairs[q]};
        CHECK(oracle::objective(x, {}, t, 1e-4) <= best + 1e-9);
      }
    }
  }

  TEST_CASE("all_comparisons enumerates in lexicographic order") {
    const auto c = all_comparisons(4);
    CHECK(c == oracle::all_pairs(4));
    const std::vector<std::size_t> pool{1, 3, 6};
    const auto p = all_comparisons(8, pool);
    CHECK(p == std::vector<ComparisonId>{{1, 3}, {1, 6}, {3, 6}});
  }
}
