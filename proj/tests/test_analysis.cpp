#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "csense/analysis.hpp"
#include "csense/solver.hpp"
#include "support/test_helpers.hpp"

#include <Eigen/SVD>

using namespace csense;
using csense::testing::delta_generator;
using csense::testing::random_instance;

TEST_CASE("coherence basics") {
  SUBCASE("orthonormal columns have zero coherence") {
    auto op = make_operator(delta_generator(16), full_index_set(16), true);
    CHECK(coherence<double>(op).mu == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("constant generator duplicates columns, mu = 1") {
    Vec<double> b = Vec<double>::Ones(2);
    auto op = make_operator(GeneratorVector<double>{b, OperatorKind::circulant},
                            full_index_set(2), true);
    auto res = coherence<double>(op);
    CHECK(res.mu == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(res.argmax_i == 0);
    CHECK(res.argmax_l == 1);
  }

  SUBCASE("unnormalized operators are rejected") {
    auto op = make_operator(delta_generator(8), full_index_set(8), false);
    CHECK_THROWS_AS(coherence<double>(op), std::invalid_argument);
  }

  SUBCASE("bound value formula") {
    auto op = make_operator(delta_generator(16), full_index_set(16), true);
    auto res = coherence<double>(op, 0.05);
    CHECK(res.bound_value ==
          doctest::Approx(4.0 * std::log(2.0 * 256.0 / 0.05) / 4.0));
  }
}

TEST_CASE("coherence strategies agree with the dense Gram") {
  int stream = 0;
  for (auto kind : {OperatorKind::circulant, OperatorKind::toeplitz}) {
    for (Index ambient : {63, 96, 128}) {
      for (Index n : {ambient / 3, ambient}) {
        auto inst = random_instance(ambient, n, kind, OmegaPreset::uniform_random,
                                    {777, static_cast<std::uint64_t>(stream++)});
        auto dense = coherence<double>(inst.op, 0.05, CoherenceStrategy::dense_gram);
        auto fast = coherence<double>(inst.op, 0.05, CoherenceStrategy::fft_diagonal);
        CHECK(std::abs(dense.mu - fast.mu) <= 1e-10);
      }
    }
  }
}

TEST_CASE("coherence tail check") {
  SUBCASE("vacuous bound is never exceeded") {
    CoherenceTailParams p;
    p.ambient = 64;
    p.rows = 4;
    p.mu_trials = 10;
    p.seed = {42, 0};
    auto report = coherence_tail_check(p);
    CHECK(report.bound_value >= 1.0);
    CHECK(report.exceed_fraction == 0.0);
  }

  SUBCASE("per-pair tail stays within 3 MC standard errors of 4 e^{-u}") {
    CoherenceTailParams p;
    p.ambient = 128;
    p.rows = 32;
    p.mu_trials = 0;
    p.pair_trials = 2000;
    p.seed = {43, 0};
    auto report = coherence_tail_check(p);
    REQUIRE(report.per_pair.size() == 3);
    for (const auto& row : report.per_pair)
      CHECK(row.empirical <= row.bound + 3.0 * row.mc_stderr);
  }
}

TEST_CASE("gershgorin restricted isometry bound") {
  CHECK(gershgorin_ric(0.37, 1) == 0.0);
  CHECK(gershgorin_ric(0.2, 3) == doctest::Approx(0.4));
  CHECK_THROWS_AS(gershgorin_ric(-0.1, 2), std::invalid_argument);
  CHECK_THROWS_AS(gershgorin_ric(0.1, 0), std::invalid_argument);

  SUBCASE("dominates the exact RIC on small instances") {
    for (int t = 0; t < 4; ++t) {
      auto inst = random_instance(12, 8, t % 2 ? OperatorKind::toeplitz
                                               : OperatorKind::circulant,
                                  OmegaPreset::uniform_random,
                                  {606, static_cast<std::uint64_t>(t)});
      const double mu = coherence<double>(inst.op).mu;
      for (Index s : {2, 3})
        CHECK(exhaustive_ric(inst.op, s) <= gershgorin_ric(mu, s) + 1e-12);
    }
  }
}

TEST_CASE("submatrix eigenvalue extremes") {
  SUBCASE("identity operator") {
    auto op = make_operator(delta_generator(12), full_index_set(12), false);
    auto ext = submatrix_extremes(op, IndexSet({1, 4, 7}));
    CHECK(ext.lambda_min == doctest::Approx(1.0));
    CHECK(ext.lambda_max == doctest::Approx(1.0));
    CHECK(ext.delta == doctest::Approx(0.0));
  }

  SUBCASE("single unit column") {
    auto inst = random_instance(64, 24, OperatorKind::circulant,
                                OmegaPreset::uniform_random, {11, 0});
    auto ext = submatrix_extremes(inst.op, IndexSet({17}));
    CHECK(std::abs(ext.lambda_min - 1.0) <= 1e-12);
    CHECK(std::abs(ext.lambda_max - 1.0) <= 1e-12);
  }

  SUBCASE("matches a dense SVD oracle at N = 512") {
    auto inst = random_instance(512, 256, OperatorKind::toeplitz,
                                OmegaPreset::uniform_random, {1212, 0});
    auto support = random_sparse<double>(512, 8, MagnitudeLaw::unit, {1212, 1}).support;
    auto ext = submatrix_extremes(inst.op, support);
    Mat<double> dense = to_dense(inst.op);
    Mat<double> sub(dense.rows(), support.size());
    for (Index k = 0; k < support.size(); ++k) sub.col(k) = dense.col(support[k]);
    Eigen::JacobiSVD<Mat<double>> svd(sub);
    const double smax = svd.singularValues().maxCoeff();
    const double smin = svd.singularValues().minCoeff();
    CHECK(ext.lambda_max == doctest::Approx(smax * smax).epsilon(1e-8));
    CHECK(ext.lambda_min == doctest::Approx(smin * smin).epsilon(1e-8));
  }
}

TEST_CASE("exhaustive restricted isometry constant") {
  SUBCASE("identity has zero RIC") {
    auto op = make_operator(delta_generator(10), full_index_set(10), false);
    for (Index s : {1, 2, 3}) CHECK(exhaustive_ric(op, s) <= 1e-12);
  }

  SUBCASE("nondecreasing in s") {
    auto inst = random_instance(12, 8, OperatorKind::circulant,
                                OmegaPreset::first_n, {31, 0});
    double prev = 0.0;
    for (Index s = 1; s <= 4; ++s) {
      const double cur = exhaustive_ric(inst.op, s);
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
  }

  SUBCASE("matches an independent support enumeration") {
    auto inst = random_instance(12, 8, OperatorKind::toeplitz,
                                OmegaPreset::uniform_random, {32, 0});
    const Index s = 2;
    Mat<double> dense = to_dense(inst.op);
    double worst = 0.0;
    for (Index b = 11; b >= 1; --b)
      for (Index a = b - 1; a >= 0; --a) {
        Mat<double> sub(dense.rows(), 2);
        sub.col(0) = dense.col(a);
        sub.col(1) = dense.col(b);
        Eigen::SelfAdjointEigenSolver<Mat<double>> eig(sub.transpose() * sub);
        worst = std::max({worst, 1.0 - eig.eigenvalues().minCoeff(),
                          eig.eigenvalues().maxCoeff() - 1.0});
      }
    CHECK(exhaustive_ric(inst.op, s) == doctest::Approx(worst).epsilon(1e-12));
  }

  SUBCASE("combinatorial budget enforced") {
    auto inst = random_instance(64, 16, OperatorKind::circulant,
                                OmegaPreset::first_n, {33, 0});
    CHECK_THROWS_AS(exhaustive_ric(inst.op, 10), std::length_error);
  }
}

TEST_CASE("fuchs/tropp certificate") {
  SUBCASE("identity operator certifies any support") {
    auto op = make_operator(delta_generator(16), full_index_set(16), true);
    Vec<double> signs(3);
    signs << 1, -1, 1;
    auto report = fuchs_tropp_certificate<double>(op, IndexSet({2, 5, 9}), signs);
    CHECK(report.max_abs_correlation <= 1e-12);
    CHECK(report.satisfied);
  }

  SUBCASE("full support is vacuously satisfied") {
    auto inst = random_instance(8, 8, OperatorKind::circulant, OmegaPreset::first_n,
                                {3, 0});
    Vec<double> signs = Vec<double>::Ones(8);
    auto report = fuchs_tropp_certificate<double>(inst.op, full_index_set(8), signs);
    CHECK(report.max_abs_correlation == 0.0);
    CHECK(report.satisfied);
    CHECK(report.argmax_rho == -1);
  }

  SUBCASE("matches the dense pseudo-inverse oracle") {
    auto inst = random_instance(64, 32, OperatorKind::circulant,
                                OmegaPreset::uniform_random, {2023, 0});
    auto signal = random_sparse<double>(64, 3, MagnitudeLaw::unit, {2023, 1});
    auto report = fuchs_tropp_certificate<double>(inst.op, signal.support,
                                                  signal.signs, true);

    Mat<double> dense = to_dense(inst.op);
    Mat<double> sub(dense.rows(), 3);
    for (Index k = 0; k < 3; ++k) sub.col(k) = dense.col(signal.support[k]);
    Eigen::CompleteOrthogonalDecomposition<Mat<double>> cod(sub);
    const Mat<double> pinv = cod.pseudoInverse();
    double want = 0.0;
    for (Index rho = 0; rho < 64; ++rho) {
      if (signal.support.contains(rho)) continue;
      want = std::max(want,
                      std::abs((pinv * dense.col(rho)).dot(signal.signs)));
    }
    CHECK(report.max_abs_correlation == doctest::Approx(want).epsilon(1e-8));
    REQUIRE(report.per_rho.has_value());
  }

  SUBCASE("singular Gram raises") {
    Vec<double> b = Vec<double>::Ones(4);  // all columns coincide
    auto op = make_operator(GeneratorVector<double>{b, OperatorKind::circulant},
                            full_index_set(4), true);
    Vec<double> signs(2);
    signs << 1, 1;
    CHECK_THROWS_AS(fuchs_tropp_certificate<double>(op, IndexSet({0, 1}), signs),
                    SingularGramError);
  }
}

TEST_CASE("pseudo-inverse norm chain") {
  SUBCASE("identity: exact and bound both vanish") {
    auto op = make_operator(delta_generator(16), full_index_set(16), true);
    auto chain = pseudo_inverse_norm_chain(op, IndexSet({1, 5}), 9);
    CHECK(chain.exact_norm <= 1e-12);
    CHECK(chain.mu <= 1e-12);
    CHECK(chain.mu_bound <= 1e-10);
  }

  SUBCASE("s = 1 reduces to a column inner product") {
    auto inst = random_instance(48, 16, OperatorKind::circulant,
                                OmegaPreset::uniform_random, {51, 0});
    auto chain = pseudo_inverse_norm_chain(inst.op, IndexSet({7}), 20);
    const double ip = std::abs(column(inst.op, 7).dot(column(inst.op, 20)));
    CHECK(chain.exact_norm == doctest::Approx(ip).epsilon(1e-10));
    CHECK(chain.exact_norm <= chain.mu + 1e-12);
  }

  SUBCASE("exact norm obeys the coherence bound at N = 128") {
    for (int t = 0; t < 5; ++t) {
      auto inst = random_instance(128, 64, OperatorKind::toeplitz,
                                  OmegaPreset::uniform_random,
                                  {52, static_cast<std::uint64_t>(t)});
      auto signal = random_sparse<double>(128, 4, MagnitudeLaw::unit,
                                          {53, static_cast<std::uint64_t>(t)});
      const Index rho = signal.support.contains(0) ? 1 : 0;
      auto chain = pseudo_inverse_norm_chain(inst.op, signal.support, rho);
      CHECK(chain.exact_norm <= chain.mu_bound + 1e-12);
    }
  }
}

TEST_CASE("sample complexity budget") {
  SUBCASE("constant is 4 pi^2") {
    auto b = sample_complexity_budget(1024, 8, 0.1);
    CHECK(b.c_tilde == doctest::Approx(39.4784176043574).epsilon(1e-12));
  }

  SUBCASE("cond1 value at N = 1024, s = 8, eps = 0.1") {
    auto b = sample_complexity_budget(1024, 8, 0.1);
    const double log_n2 = std::log(2.0 * 1024.0 * 1024.0 / 0.1);
    const double want = 8.0 * 8.0 * log_n2 * log_n2 * std::log(2.0 * 1024.0 / 0.1);
    CHECK(b.n_cond1 == doctest::Approx(want).epsilon(1e-12));
    CHECK(b.n_required >= b.n_cond1);
    CHECK(b.n_required >= b.n_cond2);
  }

  SUBCASE("monotone in s and in 1/eps") {
    auto base = sample_complexity_budget(512, 4, 0.1);
    auto more_s = sample_complexity_budget(512, 8, 0.1);
    auto smaller_eps = sample_complexity_budget(512, 4, 0.01);
    CHECK(more_s.n_cond1 >= base.n_cond1);
    CHECK(more_s.n_cond2 >= base.n_cond2);
    CHECK(smaller_eps.n_cond1 >= base.n_cond1);
    CHECK(smaller_eps.n_cond2 >= base.n_cond2);
  }

  SUBCASE("failure bound decreases to 2 eps") {
    const double at_small = recovery_failure_bound(256, 4, 0.05, 100.0);
    const double at_large = recovery_failure_bound(256, 4, 0.05, 1e7);
    CHECK(at_large <= at_small);
    CHECK(at_large == doctest::Approx(0.1).epsilon(1e-6));
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(sample_complexity_budget(1, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(sample_complexity_budget(16, 0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(sample_complexity_budget(16, 4, 1.5), std::invalid_argument);
  }
}

TEST_CASE("hoeffding tail check") {
  SUBCASE("u = 0 bound is trivially 2") {
    auto rows = hoeffding_tail_check(16, {0.0}, 100, {5, 0});
    CHECK(rows[0].bound == doctest::Approx(2.0));
    CHECK(rows[0].empirical <= 1.0);
  }

  SUBCASE("single-term extreme case") {
    Vec<double> a = Vec<double>::Zero(4);
    a[0] = 1.0;
    auto rows = hoeffding_tail_check(a, {1.0}, 500, {6, 0});
    CHECK(rows[0].empirical == doctest::Approx(1.0));
    CHECK(rows[0].bound >= 1.0);
  }

  SUBCASE("all-ones length 100 at u = 2") {
    auto rows = hoeffding_tail_check(100, {2.0}, 20000, {7, 0});
    CHECK(rows[0].empirical <= 2.0 * std::exp(-2.0));
  }
}

TEST_CASE("gram diagonal of a normalized operator is one") {
  auto inst = random_instance(96, 40, OperatorKind::toeplitz,
                              OmegaPreset::uniform_random, {88, 0});
  auto signal = random_sparse<double>(96, 6, MagnitudeLaw::unit, {88, 1});
  Mat<double> gram = support_gram(inst.op, signal.support);
  CHECK((gram - gram.transpose()).lpNorm<Eigen::Infinity>() <= 1e-14);
  for (Index k = 0; k < 6; ++k)
    CHECK(std::abs(gram(k, k) - 1.0) <= 1e-12);
}

TEST_CASE("eigenvalue concentration improves with more rows (small trend)") {
  const Index ambient = 256, s = 4;
  const auto support = random_sparse<double>(ambient, s, MagnitudeLaw::unit,
                                             {4040, 0}).support;
  std::vector<double> medians;
  for (Index n : {32, 64, 128, 256}) {
    std::vector<double> deltas;
    for (int t = 0; t < 51; ++t) {
      auto gen = rademacher_generator<double>(OperatorKind::circulant, ambient,
                                              {4141, static_cast<std::uint64_t>(t)});
      auto op = make_operator(gen, omega_preset(OmegaPreset::first_n, ambient, n), true);
      deltas.push_back(submatrix_extremes(op, support).delta);
    }
    std::sort(deltas.begin(), deltas.end());
    medians.push_back(deltas[deltas.size() / 2]);
  }
  for (std::size_t k = 1; k < medians.size(); ++k)
    CHECK(medians[k] <= medians[k - 1]);
}

TEST_CASE("certificate implies recovery on certified instances") {
  int certified = 0;
  int trial = 0;
  while (certified < 20 && trial < 200) {
    ++trial;
    auto inst = random_instance(96, 56, trial % 2 ? OperatorKind::toeplitz
                                                  : OperatorKind::circulant,
                                OmegaPreset::uniform_random,
                                {9090, static_cast<std::uint64_t>(trial)});
    auto signal = random_sparse<double>(96, 1 + trial % 4, MagnitudeLaw::unit,
                                        {9091, static_cast<std::uint64_t>(trial)});
    CertificateReport<double> cert;
    try {
      cert = fuchs_tropp_certificate<double>(inst.op, signal.support, signal.signs);
    } catch (const SingularGramError&) {
      continue;
    }
    auto ext = submatrix_extremes(inst.op, signal.support);
    if (!cert.satisfied || cert.margin() < 1e-3 || ext.lambda_min < 0.1) continue;
    ++certified;
    auto y = apply<double>(inst.op, signal.dense());
    auto res = basis_pursuit<double>(inst.op, y);
    REQUIRE(res.status == SolveStatus::converged);
    CHECK(exact_recovery<double>(res.x_hat, signal));
  }
  CHECK(certified == 20);
}
