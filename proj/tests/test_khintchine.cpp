#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "csense/khintchine.hpp"

#include <cmath>

using namespace csense;

namespace {

/// M = 2 scalar family with a_{01} = a_{10} = 1/2: the chaos collapses to
/// eps_0 eps_1, so every moment is exactly 1.
MatrixFamily<double> tiny_scalar_family() {
  auto fam = MatrixFamily<double>::zero(2, 1, 1);
  fam.block(0, 1)(0, 0) = 0.5;
  fam.block(1, 0)(0, 0) = 0.5;
  return fam;
}

}  // namespace

TEST_CASE("constants match hand values") {
  const auto k1 = khintchine_constants(1, 2.0);
  CHECK(std::abs(k1.b_m - 1.0) <= 1e-12);
  CHECK(std::abs(k1.c_m - std::sqrt(std::numbers::pi / 2.0)) <= 1e-12);
  CHECK(std::abs(k1.d_m - std::sqrt(2.0) * std::numbers::pi * std::numbers::pi) <= 1e-12);
  CHECK(std::abs(k1.d_p - 16.0 / std::numbers::e) <= 1e-12);

  SUBCASE("B_m^{2m} is the odd double factorial") {
    for (Index m = 1; m <= 20; ++m) {
      const auto k = khintchine_constants(m, 2.0);
      CHECK(std::pow(k.b_m, 2.0 * m) ==
            doctest::Approx(static_cast<double>(odd_double_factorial(m)))
                .epsilon(1e-10));
    }
  }

  SUBCASE("B_m and D_m are nondecreasing up to m = 20") {
    double prev_b = 0, prev_d = 0;
    for (Index m = 1; m <= 20; ++m) {
      const auto k = khintchine_constants(m, 2.0);
      CHECK(k.b_m >= prev_b);
      CHECK(k.d_m >= prev_d);
      prev_b = k.b_m;
      prev_d = k.d_m;
    }
  }

  SUBCASE("domain errors") {
    CHECK_THROWS_AS(khintchine_constants(21, 2.0), std::domain_error);
    CHECK_THROWS_AS(khintchine_constants(0, 2.0), std::domain_error);
    CHECK_THROWS_AS(khintchine_constants(1, 1.5), std::invalid_argument);
  }
}

TEST_CASE("schatten norms") {
  SUBCASE("identity k x k at p = 2m") {
    Mat<double> eye = Mat<double>::Identity(5, 5);
    CHECK(schatten_norm(eye, 4.0) == doctest::Approx(std::pow(5.0, 0.25)));
    CHECK(schatten_norm(eye, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(1.0));
  }

  SUBCASE("unit rank-one matrix has norm 1 for every p") {
    Vec<double> u(4);
    u << 0.5, -0.5, 0.5, 0.5;
    Mat<double> m = u * u.transpose();
    for (double p : {1.0, 2.0, 4.0, 7.5}) {
      CHECK(schatten_norm(m, p) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("S_2 equals the Frobenius norm") {
    Rng rng({99, 0});
    Mat<double> m(4, 3);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 3; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    CHECK(std::abs(schatten_norm(m, 2.0) - m.norm()) <= 1e-12);
  }

  SUBCASE("wide and tall agree") {
    Rng rng({98, 0});
    Mat<double> m(2, 5);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 5; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    CHECK(schatten_norm(m, 3.0) ==
          doctest::Approx(schatten_norm(Mat<double>(m.transpose()), 3.0))
              .epsilon(1e-12));
  }
}

TEST_CASE("chaos moment lhs") {
  SUBCASE("zero family") {
    auto fam = MatrixFamily<double>::zero(3, 2, 2);
    CHECK(chaos_moment_lhs(fam, 2).value == 0.0);
  }

  SUBCASE("tiny scalar family has unit moments for every m") {
    auto fam = tiny_scalar_family();
    for (Index m : {1, 2, 3})
      CHECK(chaos_moment_lhs(fam, m).value == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("monte carlo agrees with exhaustive within 3 standard errors") {
    auto fam = random_family(8, 1, 1, {55, 0});
    const auto exact = chaos_moment_lhs(fam, 1);
    const auto mc = chaos_moment_lhs(fam, 1, MomentMethod::monte_carlo, 100000, {55, 1});
    CHECK(std::abs(mc.raw_mean - exact.raw_mean) <= 3.0 * mc.raw_std_error);
  }

  SUBCASE("budget and validation") {
    auto fam = random_family(13, 1, 1, {1, 0});
    CHECK_THROWS_AS(chaos_moment_lhs(fam, 1), std::length_error);
    auto bad = MatrixFamily<double>::zero(2, 1, 1);
    bad.block(0, 0)(0, 0) = 1.0;
    CHECK_THROWS_AS(chaos_moment_lhs(bad, 1), std::invalid_argument);
  }
}

TEST_CASE("chaos bound rhs: hand-computed M = 2 scalar example") {
  auto fam = tiny_scalar_family();
  const auto bound = chaos_bound_rhs(fam, 1);
  // sum of squares = 1/2 on both sides; F = [[0, 1/2], [1/2, 0]] has
  // singular values (1/2, 1/2), so ||F||_{S_2} = sqrt(1/2) as well.
  CHECK(bound.term_row == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(bound.term_col == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(bound.term_block == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(bound.rhs ==
        doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-12));
  CHECK(chaos_moment_lhs(fam, 1).value <= bound.rhs);
}

TEST_CASE("matrix chaos inequality holds exhaustively on random families") {
  int stream = 0;
  for (int rep = 0; rep < 12; ++rep) {
    const Index m = 2 + rep % 7;          // 2..8
    const Index r = 1 + rep % 3;          // 1..3
    const Index t = 1 + (rep / 2) % 3;    // 1..3
    auto fam = random_family(m, r, t, {700, static_cast<std::uint64_t>(stream++)});
    for (Index order : {1, 2, 3}) {
      auto check = chaos_check(fam, order);
      CHECK(check.holds);
      CHECK(check.lhs <= check.rhs);
    }
  }
}

TEST_CASE("scalar chaos check") {
  SUBCASE("zero matrix") {
    Mat<double> a = Mat<double>::Zero(3, 3);
    auto check = scalar_chaos_check(a, 2.0);
    CHECK(check.lhs == 0.0);
    CHECK(check.rhs == 0.0);
    CHECK(check.holds);
  }

  SUBCASE("hand example: lhs 1 vs rhs (16/e)/sqrt(2)") {
    Mat<double> a = Mat<double>::Zero(2, 2);
    a(0, 1) = a(1, 0) = 0.5;
    auto check = scalar_chaos_check(a, 2.0);
    CHECK(check.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(check.rhs == doctest::Approx((16.0 / std::numbers::e) / std::sqrt(2.0))
                           .epsilon(1e-12));
    CHECK(check.holds);
  }

  SUBCASE("random M = 10 families at p in {2, 4, 6}") {
    for (int rep = 0; rep < 5; ++rep) {
      auto fam = random_family(10, 1, 1, {800, static_cast<std::uint64_t>(rep)});
      Mat<double> a = Mat<double>::Zero(10, 10);
      for (Index j = 0; j < 10; ++j)
        for (Index k = 0; k < 10; ++k) a(j, k) = fam.block(j, k)(0, 0);
      for (double p : {2.0, 4.0, 6.0}) {
        auto check = scalar_chaos_check(a, p);
        CHECK(check.holds);
      }
    }
  }

  SUBCASE("scalar specialization agrees with the matrix machinery") {
    auto fam = random_family(6, 1, 1, {801, 0});
    Mat<double> a = Mat<double>::Zero(6, 6);
    for (Index j = 0; j < 6; ++j)
      for (Index k = 0; k < 6; ++k) a(j, k) = fam.block(j, k)(0, 0);
    for (Index m : {1, 2, 3}) {
      const double via_matrix = chaos_moment_lhs(fam, m).value;
      const double via_scalar = scalar_chaos_check(a, 2.0 * m).lhs;
      CHECK(via_matrix == doctest::Approx(via_scalar).epsilon(1e-12));
    }
  }
}

TEST_CASE("gaussian comparison in the commutative case") {
  // For scalar first-order sums the optimal constant B_m satisfies
  // B_m^{2m} = (2m-1)!!, exactly the 2m-th Gaussian moment factor, and the
  // Bernoulli moment never exceeds it.
  Rng rng({900, 0});
  const Index len = 7;
  Vec<double> a(len);
  for (Index i = 0; i < len; ++i) a[i] = rng.uniform(-1.0, 1.0);
  const double var = a.squaredNorm();
  for (Index m : {1, 2, 3}) {
    long double acc = 0;
    for (Index bits = 0; bits < (Index(1) << len); ++bits) {
      double sum = 0;
      for (Index j = 0; j < len; ++j)
        sum += ((bits >> j) & 1 ? 1.0 : -1.0) * a[j];
      acc += std::pow(std::abs(sum), 2.0 * static_cast<double>(m));
    }
    const double bernoulli_moment =
        static_cast<double>(acc / static_cast<long double>(Index(1) << len));
    const double gaussian_moment = static_cast<double>(odd_double_factorial(m)) *
                                   std::pow(var, static_cast<double>(m));
    const auto k = khintchine_constants(m, 2.0);
    CHECK(bernoulli_moment <=
          std::pow(k.b_m, 2.0 * m) * std::pow(var, static_cast<double>(m)) + 1e-12);
    CHECK(bernoulli_moment <=
          std::pow(k.c_m, 2.0 * m) * std::pow(var, static_cast<double>(m)) + 1e-12);
    CHECK(gaussian_moment ==
          doctest::Approx(std::pow(k.b_m, 2.0 * m) * std::pow(var, m)).epsilon(1e-10));
  }
}

TEST_CASE("decoupling inequality") {
  SUBCASE("zero family") {
    auto fam = MatrixFamily<double>::zero(3, 2, 2);
    auto check = decoupling_check(fam, 2.0);
    CHECK(check.coupled == 0.0);
    CHECK(check.decoupled == 0.0);
    CHECK(check.holds);
  }

  SUBCASE("tiny scalar family: coupled 1, decoupled 1/2") {
    auto fam = tiny_scalar_family();
    for (double p : {1.0, 2.0, 4.0}) {
      auto check = decoupling_check(fam, p);
      CHECK(check.coupled == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(check.decoupled == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(check.holds);
    }
  }

  SUBCASE("random matrix families in the Schatten-4 norm") {
    for (int rep = 0; rep < 4; ++rep) {
      auto fam = random_family(6, 2, 2, {1000, static_cast<std::uint64_t>(rep)});
      auto check = decoupling_check(fam, 4.0);
      CHECK(check.holds);
      CHECK(check.coupled <= check.bound_factor * check.decoupled);
    }
  }

  SUBCASE("monte carlo mode runs and stays sane") {
    auto fam = random_family(8, 2, 3, {1001, 0});
    auto exact = decoupling_check(fam, 2.0);
    auto mc = decoupling_check(fam, 2.0, MomentMethod::monte_carlo, 20000, {1001, 1});
    CHECK(std::abs(mc.coupled - exact.coupled) / exact.coupled <= 0.1);
    CHECK(std::abs(mc.decoupled - exact.decoupled) / exact.decoupled <= 0.1);
  }

  SUBCASE("budget") {
    auto fam = random_family(13, 1, 1, {1, 0});
    CHECK_THROWS_AS(decoupling_check(fam, 2.0), std::length_error);
  }
}

TEST_CASE("moment tail bound") {
  SUBCASE("4 e^{-u} instance") {
    auto out = moment_tail_bound(1.0, 4.0, 1.0, 2.0, 2.0);
    CHECK(out.bound == doctest::Approx(4.0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(out.markov_intermediate == doctest::Approx(out.bound).epsilon(1e-12));
  }

  SUBCASE("monotone decay to zero") {
    double prev = 1e300;
    for (double u : {2.0, 4.0, 8.0, 16.0, 64.0}) {
      const double b = moment_tail_bound(1.0, 4.0, 1.0, 2.0, u).bound;
      CHECK(b < prev);
      prev = b;
    }
    CHECK(prev <= 1e-20);
  }

  SUBCASE("setting the tail to eps recovers eps") {
    const double big_n = 512.0, eps = 0.05;
    const double beta = 2.0 * big_n * big_n;
    const double u = std::log(beta / eps);
    auto out = moment_tail_bound(1.0, beta, 1.0, 2.0, u);
    CHECK(out.bound == doctest::Approx(eps).epsilon(1e-10));
  }

  SUBCASE("u below p0 is rejected") {
    CHECK_THROWS_AS(moment_tail_bound(1.0, 4.0, 1.0, 2.0, 1.5), std::invalid_argument);
  }
}

TEST_CASE("empirical tails obey the moment-to-tail bound") {
  // Scalar chaos Z = |sum eps_j eps_k a_{j,k}| with ||a||_F = 1 satisfies
  // (E Z^p)^{1/p} <= (4/e) p 4^{1/p}, i.e. alpha = 4/e, beta = 4, gamma = 1.
  auto fam = random_family(10, 1, 1, {1100, 0});
  Mat<double> a = Mat<double>::Zero(10, 10);
  for (Index j = 0; j < 10; ++j)
    for (Index k = 0; k < 10; ++k) a(j, k) = fam.block(j, k)(0, 0);
  a /= a.norm();
  const double alpha = 4.0 / std::numbers::e;
  const Index total = Index(1) << 10;
  for (double u : {2.0, 3.0}) {
    auto tail = moment_tail_bound(alpha, 4.0, 1.0, 2.0, u);
    Index count = 0;
    for (Index bits = 0; bits < total; ++bits) {
      double sum = 0;
      for (Index j = 0; j < 10; ++j)
        for (Index k = 0; k < 10; ++k)
          sum += (((bits >> j) & 1) ? 1.0 : -1.0) * (((bits >> k) & 1) ? 1.0 : -1.0) *
                 a(j, k);
      if (std::abs(sum) >= tail.threshold) ++count;
    }
    CHECK(static_cast<double>(count) / static_cast<double>(total) <= tail.bound);
  }
}
