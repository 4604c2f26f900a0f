#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "csense/signals.hpp"

#include <cmath>

using namespace csense;

TEST_CASE("rademacher sequences") {
  SUBCASE("entries are +-1 and deterministic per seed") {
    auto a = rademacher<double>(257, {123, 9});
    auto b = rademacher<double>(257, {123, 9});
    CHECK(a.isApprox(b));
    for (Index i = 0; i < a.size(); ++i) CHECK(std::abs(a[i]) == 1.0);
    auto c = rademacher<double>(257, {123, 10});
    CHECK_FALSE(a.isApprox(c));
  }

  SUBCASE("length 1") {
    auto v = rademacher<double>(1, {0, 0});
    CHECK(std::abs(v[0]) == 1.0);
    CHECK_THROWS_AS(rademacher<double>(0, {0, 0}), std::invalid_argument);
  }

  SUBCASE("empirical mean within the Hoeffding envelope") {
    const Index len = 10000;
    auto v = rademacher<double>(len, {7, 0});
    CHECK(std::abs(v.sum()) <= 5.0 * std::sqrt(static_cast<double>(len)));
  }

  SUBCASE("distinct streams are decorrelated") {
    const Index len = 10000;
    auto a = rademacher<double>(len, {7, 1});
    auto b = rademacher<double>(len, {7, 2});
    CHECK(std::abs(a.dot(b)) / static_cast<double>(len) <= 0.05);
  }

  SUBCASE("generator lengths per kind") {
    CHECK(rademacher_generator<double>(OperatorKind::circulant, 9, {1, 1})
              .values.size() == 9);
    CHECK(rademacher_generator<double>(OperatorKind::toeplitz, 9, {1, 1})
              .values.size() == 17);
  }
}

TEST_CASE("random_sparse") {
  SUBCASE("s = N forces full support") {
    auto sig = random_sparse<double>(6, 6, MagnitudeLaw::unit, {3, 0});
    CHECK(sig.support.size() == 6);
    for (Index i = 0; i < 6; ++i) CHECK(sig.support[i] == i);
  }

  SUBCASE("s = 1 unit law gives one +-1 entry") {
    auto sig = random_sparse<double>(10, 1, MagnitudeLaw::unit, {3, 1});
    auto x = sig.dense();
    Index nnz = 0;
    for (Index i = 0; i < 10; ++i)
      if (x[i] != 0.0) {
        ++nnz;
        CHECK(std::abs(x[i]) == 1.0);
      }
    CHECK(nnz == 1);
  }

  SUBCASE("support marginals match the hypergeometric rate s/N") {
    const int trials = 10000;
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(10);
    for (int t = 0; t < trials; ++t) {
      auto sig = random_sparse<double>(10, 3, MagnitudeLaw::unit,
                                       {2222, static_cast<std::uint64_t>(t)});
      for (Index k = 0; k < 3; ++k) counts[sig.support[k]] += 1;
    }
    for (Index i = 0; i < 10; ++i) {
      const double freq = counts[i] / static_cast<double>(trials);
      CHECK(std::abs(freq - 0.3) <= 0.02);
    }
  }

  SUBCASE("signs are symmetric") {
    double sum = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
      auto sig = random_sparse<double>(32, 4, MagnitudeLaw::unit,
                                       {5, static_cast<std::uint64_t>(t)});
      sum += sig.signs.sum();
    }
    CHECK(std::abs(sum / (4.0 * trials)) <= 0.05);
  }

  SUBCASE("uniform12 magnitudes stay in [1, 2]") {
    auto sig = random_sparse<double>(64, 16, MagnitudeLaw::uniform12, {9, 0});
    for (Index k = 0; k < 16; ++k) {
      CHECK(sig.magnitudes[k] >= 1.0);
      CHECK(sig.magnitudes[k] < 2.0);
    }
  }

  SUBCASE("preconditions") {
    CHECK_THROWS_AS(random_sparse<double>(4, 5, MagnitudeLaw::unit, {0, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(random_sparse<double>(4, 0, MagnitudeLaw::unit, {0, 0}),
                    std::invalid_argument);
  }
}

TEST_CASE("omega presets") {
  SUBCASE("downsample is the 0-based image of {K, 2K, ..., nK}") {
    auto omega = omega_preset(OmegaPreset::downsample, 8, 4);
    REQUIRE(omega.size() == 4);
    CHECK(omega[0] == 1);
    CHECK(omega[1] == 3);
    CHECK(omega[2] == 5);
    CHECK(omega[3] == 7);
  }

  SUBCASE("n = N gives the full set for every preset") {
    for (auto preset :
         {OmegaPreset::first_n, OmegaPreset::downsample, OmegaPreset::uniform_random}) {
      auto omega = omega_preset(preset, 8, 8, {1, 0});
      for (Index i = 0; i < 8; ++i) CHECK(omega[i] == i);
    }
  }

  SUBCASE("divisibility is enforced") {
    CHECK_THROWS_AS(omega_preset(OmegaPreset::downsample, 9, 4), std::invalid_argument);
  }

  SUBCASE("uniform_random is deterministic in the seed") {
    auto a = omega_preset(OmegaPreset::uniform_random, 100, 20, {12, 34});
    auto b = omega_preset(OmegaPreset::uniform_random, 100, 20, {12, 34});
    CHECK(a.values() == b.values());
    CHECK(a.max_index() < 100);
  }
}
