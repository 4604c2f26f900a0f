#pragma once

#include "csense/operators.hpp"
#include "csense/signals.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace csense {

struct SingularGramError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

template <class Scalar>
struct CoherenceResult {
  Scalar mu = Scalar(0);
  Index argmax_i = 0;
  Index argmax_l = 0;
  Scalar epsilon = Scalar(0.05);
  Scalar bound_value = Scalar(0);  // 4 log(2 N^2 / eps) / sqrt(n)
};

enum class CoherenceStrategy { automatic, dense_gram, fft_diagonal };

template <class Scalar>
Scalar coherence_bound(Index ambient, Index n, Scalar eps) {
  return Scalar(4) *
         std::log(Scalar(2) * static_cast<Scalar>(ambient) *
                  static_cast<Scalar>(ambient) / eps) /
         std::sqrt(static_cast<Scalar>(n));
}

namespace detail {

constexpr Index kCoherenceDenseMax = 2048;
constexpr Index kCoherenceMax = 16384;

template <class Scalar>
void coherence_dense(const StructuredOperator<Scalar>& op, CoherenceResult<Scalar>& out) {
  const Mat<Scalar> dense = to_dense(op, kCoherenceDenseMax);
  const Mat<Scalar> gram = dense.transpose() * dense;
  const Index dim = gram.rows();
  for (Index i = 0; i < dim; ++i)
    for (Index l = i + 1; l < dim; ++l) {
      const Scalar v = std::abs(gram(i, l));
      if (v > out.mu) {
        out.mu = v;
        out.argmax_i = i;
        out.argmax_l = l;
      }
    }
}

/// Full-row circulant shortcut: the Gram is circulant, given by the cyclic
/// autocorrelation of the generator, so one FFT pair covers all diagonals.
template <class Scalar>
void coherence_autocorr(const StructuredOperator<Scalar>& op,
                        CoherenceResult<Scalar>& out) {
  const Index ambient = op.cols();
  const Index m = next_pow2(ambient);
  FftPlan<Scalar> plan(m);
  CVec<Scalar> buf = CVec<Scalar>::Zero(m);
  for (Index t = 0; t < ambient; ++t) buf[t] = op.generator().values[t];
  if (m == ambient) {
    plan.forward(buf.data());
    for (Index k = 0; k < m; ++k) buf[k] *= std::conj(buf[k]);
    plan.inverse(buf.data());
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(op.rows());
    for (Index d = 1; d < ambient; ++d) {
      const Scalar v = std::abs(buf[d].real()) * inv_n;
      if (v > out.mu) {
        out.mu = v;
        out.argmax_i = 0;
        out.argmax_l = d;
      }
    }
    return;
  }
  // Non power-of-two ambient: cyclic autocorrelation via linear
  // autocorrelation and fold.
  const Index big = next_pow2(2 * ambient - 1);
  FftPlan<Scalar> plan2(big);
  CVec<Scalar> a = CVec<Scalar>::Zero(big);
  for (Index t = 0; t < ambient; ++t) a[t] = op.generator().values[t];
  plan2.forward(a.data());
  for (Index k = 0; k < big; ++k) a[k] *= std::conj(a[k]);
  plan2.inverse(a.data());
  // a[j] now holds sum_t b_t b_{t+j} for j >= 0 (linear lags, wrapped
  // negatives at big - j).
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(op.rows());
  for (Index d = 1; d < ambient; ++d) {
    const Scalar cyc = a[d].real() + a[big - (ambient - d)].real();
    const Scalar v = std::abs(cyc) * inv_n;
    if (v > out.mu) {
      out.mu = v;
      out.argmax_i = 0;
      out.argmax_l = d;
    }
  }
}

/// General per-diagonal route: for offset d the inner products
/// G_{i,i+d} over i form a convolution of the Omega indicator with the
/// lagged generator product; one FFT pair per diagonal, O(N^2 log N).
template <class Scalar>
void coherence_fft_diagonal(const StructuredOperator<Scalar>& op,
                            CoherenceResult<Scalar>& out) {
  const Index ambient = op.cols();
  const bool circ = op.kind() == OperatorKind::circulant;
  const Index m = next_pow2(circ ? 2 * ambient - 1 : 3 * ambient - 2);
  FftPlan<Scalar> plan(m);
  CVec<Scalar> omega_spec = CVec<Scalar>::Zero(m);
  for (Index r : op.omega()) omega_spec[r] = Scalar(1);
  plan.forward(omega_spec.data());

  const auto& gen = op.generator().values;
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(op.rows());
  CVec<Scalar> buf(m);
  for (Index d = 1; d < ambient; ++d) {
    buf.setZero();
    if (circ) {
      for (Index t = 0; t < ambient; ++t)
        buf[t] = gen[t] * gen[(t + d) % ambient];
    } else {
      for (Index t = 0; t + d < 2 * ambient - 1; ++t)
        buf[t] = gen[t] * gen[t + d];
    }
    plan.forward(buf.data());
    buf.array() *= omega_spec.array();
    plan.inverse(buf.data());
    const Index i_hi = circ ? ambient : ambient - d;
    for (Index i = 0; i < i_hi; ++i) {
      Scalar raw;
      if (circ) {
        raw = buf[i].real();
        if (i + ambient <= 2 * ambient - 2) raw += buf[i + ambient].real();
      } else {
        raw = buf[i + ambient - 1].real();
      }
      const Scalar v = std::abs(raw) * inv_n;
      if (v > out.mu) {
        out.mu = v;
        out.argmax_i = i;
        out.argmax_l = circ ? (i + d) % ambient : i + d;
      }
    }
  }
}

}  // namespace detail

/// Exact coherence of a normalized operator: max_{i != l} |<a_i, a_l>|.
template <class Scalar>
CoherenceResult<Scalar> coherence(const StructuredOperator<Scalar>& op,
                                  Scalar eps = Scalar(0.05),
                                  CoherenceStrategy strategy = CoherenceStrategy::automatic) {
  if (!op.normalized())
    throw std::invalid_argument("coherence: operator must be normalized");
  if (op.cols() > detail::kCoherenceMax)
    throw std::length_error("coherence: ambient dim exceeds compute budget");
  CoherenceResult<Scalar> out;
  out.epsilon = eps;
  out.bound_value = coherence_bound<Scalar>(op.cols(), op.rows(), eps);
  if (strategy == CoherenceStrategy::automatic) {
    if (op.kind() == OperatorKind::circulant && op.rows() == op.cols())
      strategy = CoherenceStrategy::fft_diagonal;  // resolved to autocorr below
    else
      strategy = op.cols() <= detail::kCoherenceDenseMax ? CoherenceStrategy::dense_gram
                                                         : CoherenceStrategy::fft_diagonal;
  }
  if (strategy == CoherenceStrategy::dense_gram) {
    detail::coherence_dense(op, out);
  } else if (op.kind() == OperatorKind::circulant && op.rows() == op.cols()) {
    detail::coherence_autocorr(op, out);
  } else {
    detail::coherence_fft_diagonal(op, out);
  }
  if (out.argmax_i > out.argmax_l) std::swap(out.argmax_i, out.argmax_l);
  return out;
}

// ---------------------------------------------------------------------------
// Coherence tail and per-pair chaos tail checks
// ---------------------------------------------------------------------------

struct PairTailRow {
  double u = 0;
  double empirical = 0;
  double bound = 0;  // 4 e^{-u}
  double mc_stderr = 0;
};

struct CoherenceTailReport {
  double bound_value = 0;
  Index mu_trials = 0;
  Index exceed_count = 0;
  double exceed_fraction = 0;
  std::vector<PairTailRow> per_pair;
};

struct CoherenceTailParams {
  Index ambient = 0;
  Index rows = 0;
  double epsilon = 0.05;
  Index mu_trials = 0;
  Index pair_trials = 0;
  std::vector<double> u_values = {2.0, 3.0, 4.0};
  OperatorKind kind = OperatorKind::circulant;
  OmegaPreset preset = OmegaPreset::first_n;
  Index pair_i = 0;
  Index pair_l = 1;
  SeedSpec seed;
};

/// Empirical check of the coherence tail bound mu <= 4 log(2N^2/eps)/sqrt(n)
/// and the per-pair tail P(n |<s_i, s_l>| >= 4 sqrt(n) u) <= 4 e^{-u}.
/// Omega stays fixed; the generator is redrawn per trial (stream = trial).
inline CoherenceTailReport coherence_tail_check(const CoherenceTailParams& p) {
  if (p.mu_trials < 0 || p.pair_trials < 0 || (p.mu_trials == 0 && p.pair_trials == 0))
    throw std::invalid_argument("coherence_tail_check: need at least one trial");
  CoherenceTailReport report;
  report.bound_value = coherence_bound<double>(p.ambient, p.rows, p.epsilon);
  const IndexSet omega =
      omega_preset(p.preset, p.ambient, p.rows,
                   SeedSpec{p.seed.master_seed, p.seed.stream_id + (1ULL << 40)});

  report.mu_trials = p.mu_trials;
  for (Index t = 0; t < p.mu_trials; ++t) {
    auto gen = rademacher_generator<double>(
        p.kind, p.ambient, SeedSpec{p.seed.master_seed, p.seed.stream_id + static_cast<std::uint64_t>(t)});
    auto op = make_operator(gen, omega, true);
    if (coherence<double>(op, p.epsilon).mu > report.bound_value)
      ++report.exceed_count;
  }
  if (p.mu_trials > 0)
    report.exceed_fraction =
        static_cast<double>(report.exceed_count) / static_cast<double>(p.mu_trials);

  if (p.pair_trials > 0) {
    std::vector<Index> counts(p.u_values.size(), 0);
    const double root_n = std::sqrt(static_cast<double>(p.rows));
    for (Index t = 0; t < p.pair_trials; ++t) {
      auto gen = rademacher_generator<double>(
          p.kind, p.ambient,
          SeedSpec{p.seed.master_seed,
                   p.seed.stream_id + (1ULL << 41) + static_cast<std::uint64_t>(t)});
      double z = 0.0;
      for (Index r : omega)
        z += gen.at_offset(p.pair_i - r, p.ambient) * gen.at_offset(p.pair_l - r, p.ambient);
      for (std::size_t k = 0; k < p.u_values.size(); ++k)
        if (std::abs(z) >= 4.0 * root_n * p.u_values[k]) ++counts[k];
    }
    for (std::size_t k = 0; k < p.u_values.size(); ++k) {
      PairTailRow row;
      row.u = p.u_values[k];
      row.empirical = static_cast<double>(counts[k]) / static_cast<double>(p.pair_trials);
      row.bound = 4.0 * std::exp(-row.u);
      row.mc_stderr = std::sqrt(std::max(row.empirical * (1.0 - row.empirical),
                                         1.0 / static_cast<double>(p.pair_trials)) /
                                static_cast<double>(p.pair_trials));
      report.per_pair.push_back(row);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Restricted isometry diagnostics
// ---------------------------------------------------------------------------

/// Gershgorin bound on the restricted isometry constant: delta_s <= (s-1) mu.
template <class Scalar>
Scalar gershgorin_ric(Scalar mu, Index s) {
  if (s < 1) throw std::invalid_argument("gershgorin_ric: s must be >= 1");
  if (mu < Scalar(0)) throw std::invalid_argument("gershgorin_ric: mu must be >= 0");
  return static_cast<Scalar>(s - 1) * mu;
}

template <class Scalar>
struct EigenExtremes {
  Scalar lambda_min = Scalar(0);
  Scalar lambda_max = Scalar(0);
  IndexSet support;
  Scalar delta = Scalar(0);  // max(1 - lambda_min, lambda_max - 1)
};

/// Gram submatrix of the support columns.
template <class Scalar>
Mat<Scalar> support_gram(const StructuredOperator<Scalar>& op, const IndexSet& support) {
  const Index s = support.size();
  Mat<Scalar> cols(op.rows(), s);
  for (Index k = 0; k < s; ++k) cols.col(k) = column(op, support[k]);
  return cols.transpose() * cols;
}

template <class Scalar>
EigenExtremes<Scalar> submatrix_extremes(const StructuredOperator<Scalar>& op,
                                         const IndexSet& support,
                                         Index dense_cap = 4096) {
  if (support.size() > dense_cap)
    throw std::length_error("submatrix_extremes: support exceeds dense cap");
  if (support.max_index() >= op.cols())
    throw std::invalid_argument("submatrix_extremes: support index out of range");
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(support_gram(op, support),
                                                 Eigen::EigenvaluesOnly);
  EigenExtremes<Scalar> out;
  out.lambda_min = eig.eigenvalues().minCoeff();
  out.lambda_max = eig.eigenvalues().maxCoeff();
  out.support = support;
  out.delta = std::max(Scalar(1) - out.lambda_min, out.lambda_max - Scalar(1));
  return out;
}

/// Exact restricted isometry constant by enumerating every size-s support.
/// Only for tiny instances: requires C(N, s) <= 10^6.
template <class Scalar>
Scalar exhaustive_ric(const StructuredOperator<Scalar>& op, Index s) {
  const Index ambient = op.cols();
  if (s < 1 || s > ambient) throw std::invalid_argument("exhaustive_ric: bad s");
  double combos = 1.0;
  for (Index k = 0; k < s; ++k)
    combos *= static_cast<double>(ambient - k) / static_cast<double>(k + 1);
  if (combos > 1e6)
    throw std::length_error("exhaustive_ric: combinatorial budget exceeded");

  const Mat<Scalar> dense = to_dense(op);
  const Mat<Scalar> gram = dense.transpose() * dense;
  std::vector<Index> pick(static_cast<std::size_t>(s));
  for (Index k = 0; k < s; ++k) pick[static_cast<std::size_t>(k)] = k;
  Scalar worst = Scalar(0);
  Mat<Scalar> sub(s, s);
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig;
  for (;;) {
    for (Index a = 0; a < s; ++a)
      for (Index b = 0; b < s; ++b)
        sub(a, b) = gram(pick[static_cast<std::size_t>(a)],
                         pick[static_cast<std::size_t>(b)]);
    eig.compute(sub, Eigen::EigenvaluesOnly);
    worst = std::max(worst, std::max(Scalar(1) - eig.eigenvalues().minCoeff(),
                                     eig.eigenvalues().maxCoeff() - Scalar(1)));
    // next combination
    Index k = s - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == ambient - s + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (Index j = k + 1; j < s; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Fuchs/Tropp dual certificate
// ---------------------------------------------------------------------------

template <class Scalar>
struct CertificateReport {
  Scalar max_abs_correlation = Scalar(0);
  Index argmax_rho = -1;
  bool satisfied = true;  // max_abs_correlation < 1
  std::optional<Vec<Scalar>> per_rho;

  Scalar margin() const { return Scalar(1) - max_abs_correlation; }
};

/// Evaluates max_{rho not in Lambda} |<A_Lambda^† a_rho, signs>| using
/// h = (A_Lambda^* A_Lambda)^{-1} signs, v = A_Lambda h, and one adjoint
/// apply for all correlations <a_rho, v> at once. Throws SingularGramError
/// when the Gram factorization meets a pivot below 1e-10.
template <class Scalar>
CertificateReport<Scalar> fuchs_tropp_certificate(const StructuredOperator<Scalar>& op,
                                                  const IndexSet& support,
                                                  const Eigen::Ref<const Vec<Scalar>>& signs,
                                                  bool keep_per_rho = false) {
  const Index s = support.size();
  if (signs.size() != s)
    throw std::invalid_argument("fuchs_tropp_certificate: signs size != |support|");
  if (support.max_index() >= op.cols())
    throw std::invalid_argument("fuchs_tropp_certificate: support index out of range");

  if (s == op.cols()) {
    // No rho outside the support: vacuously satisfied by convention.
    CertificateReport<Scalar> report;
    if (keep_per_rho) report.per_rho = Vec<Scalar>::Zero(op.cols());
    return report;
  }

  Mat<Scalar> cols(op.rows(), s);
  for (Index k = 0; k < s; ++k) cols.col(k) = column(op, support[k]);
  const Mat<Scalar> gram = cols.transpose() * cols;
  Eigen::LDLT<Mat<Scalar>> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < Scalar(1e-10))
    throw SingularGramError("fuchs_tropp_certificate: singular support Gram");

  const Vec<Scalar> h = ldlt.solve(signs);
  const Vec<Scalar> v = cols * h;
  const Vec<Scalar> corr = adjoint_apply<Scalar>(op, v);

  CertificateReport<Scalar> report;
  for (Index rho = 0; rho < op.cols(); ++rho) {
    if (support.contains(rho)) continue;
    const Scalar val = std::abs(corr[rho]);
    if (val > report.max_abs_correlation) {
      report.max_abs_correlation = val;
      report.argmax_rho = rho;
    }
  }
  report.satisfied = report.max_abs_correlation < Scalar(1);
  if (keep_per_rho) report.per_rho = corr;
  return report;
}

template <class Scalar>
struct PseudoInverseChain {
  Scalar exact_norm = Scalar(0);  // ||A_Lambda^† a_rho||_2
  Scalar mu_bound = Scalar(0);    // sqrt(s) mu / lambda_min
  Scalar mu = Scalar(0);
  Scalar lambda_min = Scalar(0);
};

/// Exact pseudo-inverse norm against the coherence-based chain bound.
template <class Scalar>
PseudoInverseChain<Scalar> pseudo_inverse_norm_chain(const StructuredOperator<Scalar>& op,
                                                     const IndexSet& support, Index rho) {
  if (rho < 0 || rho >= op.cols() || support.contains(rho))
    throw std::invalid_argument("pseudo_inverse_norm_chain: rho must lie outside support");
  const Index s = support.size();
  Mat<Scalar> cols(op.rows(), s);
  for (Index k = 0; k < s; ++k) cols.col(k) = column(op, support[k]);
  const Mat<Scalar> gram = cols.transpose() * cols;
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(gram);
  PseudoInverseChain<Scalar> out;
  out.lambda_min = eig.eigenvalues().minCoeff();
  if (out.lambda_min < Scalar(1e-10))
    throw SingularGramError("pseudo_inverse_norm_chain: singular support Gram");
  const Vec<Scalar> rhs = cols.transpose() * column(op, rho);
  const Vec<Scalar> solved =
      eig.eigenvectors() *
      (eig.eigenvectors().transpose() * rhs).cwiseQuotient(eig.eigenvalues());
  out.exact_norm = solved.norm();
  out.mu = coherence(op).mu;
  out.mu_bound = std::sqrt(static_cast<Scalar>(s)) * out.mu / out.lambda_min;
  return out;
}

// ---------------------------------------------------------------------------
// Sample-complexity budget (conditions (cond2) and (cond1))
// ---------------------------------------------------------------------------

struct SampleComplexityBudget {
  double c_tilde = 0;     // 4 pi^2
  double n_cond2 = 0;     // 4 C~ s log^2(s/eps)
  double n_cond1 = 0;     // 8 s log^2(2N^2/eps) log(2N/eps)
  double n_required = 0;  // max of the two
};

inline SampleComplexityBudget sample_complexity_budget(Index ambient, Index s,
                                                       double eps) {
  if (ambient < 2 || s < 1 || s > ambient || eps <= 0.0 || eps >= 1.0)
    throw std::invalid_argument("sample_complexity_budget: bad arguments");
  SampleComplexityBudget out;
  const double pi = std::numbers::pi;
  out.c_tilde = 4.0 * pi * pi;
  const double log_s = std::log(static_cast<double>(s) / eps);
  out.n_cond2 = 4.0 * out.c_tilde * static_cast<double>(s) * log_s * log_s;
  const double nn = static_cast<double>(ambient);
  const double log_n2 = std::log(2.0 * nn * nn / eps);
  out.n_cond1 = 8.0 * static_cast<double>(s) * log_n2 * log_n2 * std::log(2.0 * nn / eps);
  out.n_required = std::max(out.n_cond2, out.n_cond1);
  return out;
}

/// Failure-probability expression 2N exp(-n / (8 s log^2(2N^2/eps))) + 2 eps
/// for a given sample count n.
inline double recovery_failure_bound(Index ambient, Index s, double eps, double n) {
  const double nn = static_cast<double>(ambient);
  const double log_n2 = std::log(2.0 * nn * nn / eps);
  return 2.0 * nn * std::exp(-n / (8.0 * static_cast<double>(s) * log_n2 * log_n2)) +
         2.0 * eps;
}

// ---------------------------------------------------------------------------
// Hoeffding tail check
// ---------------------------------------------------------------------------

struct HoeffdingTailRow {
  double u = 0;
  double empirical = 0;
  double bound = 0;  // 2 e^{-u^2/2}
  double mc_stderr = 0;
};

/// Empirical tails of |sum_j eps_j a_j| / ||a||_2 against 2 e^{-u^2/2}.
inline std::vector<HoeffdingTailRow> hoeffding_tail_check(
    const Vec<double>& a, const std::vector<double>& u_values, Index trials,
    SeedSpec seed) {
  if (trials < 1) throw std::invalid_argument("hoeffding_tail_check: trials >= 1");
  const double norm_a = a.norm();
  std::vector<Index> counts(u_values.size(), 0);
  for (Index t = 0; t < trials; ++t) {
    Rng rng({seed.master_seed, seed.stream_id + static_cast<std::uint64_t>(t)});
    double sum = 0.0;
    for (Index j = 0; j < a.size(); ++j)
      sum += static_cast<double>(rng.rademacher_sign()) * a[j];
    for (std::size_t k = 0; k < u_values.size(); ++k)
      if (std::abs(sum) >= u_values[k] * norm_a) ++counts[k];
  }
  std::vector<HoeffdingTailRow> rows;
  for (std::size_t k = 0; k < u_values.size(); ++k) {
    HoeffdingTailRow row;
    row.u = u_values[k];
    row.empirical = static_cast<double>(counts[k]) / static_cast<double>(trials);
    row.bound = 2.0 * std::exp(-0.5 * row.u * row.u);
    row.mc_stderr = std::sqrt(std::max(row.empirical * (1.0 - row.empirical),
                                       1.0 / static_cast<double>(trials)) /
                              static_cast<double>(trials));
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<HoeffdingTailRow> hoeffding_tail_check(Index length,
                                                          const std::vector<double>& u_values,
                                                          Index trials, SeedSpec seed) {
  return hoeffding_tail_check(Vec<double>::Ones(length), u_values, trials, seed);
}

}  // namespace csense
