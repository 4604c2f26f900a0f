#pragma once

#include "csense/common.hpp"
#include "csense/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace csense {

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// (2m-1)!! = (2m)! / (2^m m!), exact in 128-bit integer arithmetic.
inline long double odd_double_factorial(Index m) {
  if (m < 1 || m > 20)
    throw std::domain_error("odd_double_factorial: need 1 <= m <= 20");
  __int128 acc = 1;
  for (Index k = 1; k < 2 * m; k += 2) acc *= k;
  return static_cast<long double>(acc);
}

struct KhintchineConstants {
  double b_m = 0;  // ((2m)!/(2^m m!))^{1/2m}
  double c_m = 0;  // sqrt(pi/2) B_m
  double d_m = 0;  // 2^{1/2m} 2 pi C_m^2
  double d_p = 0;  // 4^{1/p} (4/e) p
};

inline KhintchineConstants khintchine_constants(Index m, double p) {
  if (p < 2.0) throw std::invalid_argument("khintchine_constants: need p >= 2");
  KhintchineConstants out;
  const long double dfac = odd_double_factorial(m);
  const long double inv2m = 1.0L / (2.0L * static_cast<long double>(m));
  out.b_m = static_cast<double>(std::pow(dfac, inv2m));
  out.c_m = std::sqrt(std::numbers::pi / 2.0) * out.b_m;
  out.d_m = static_cast<double>(std::pow(2.0L, inv2m)) * 2.0 * std::numbers::pi *
            out.c_m * out.c_m;
  out.d_p = std::pow(4.0, 1.0 / p) * (4.0 / std::numbers::e) * p;
  return out;
}

// ---------------------------------------------------------------------------
// Schatten norms
// ---------------------------------------------------------------------------

namespace detail {

/// Squared singular values of a small dense matrix: eigenvalues of the Gram
/// on the shorter side, clamped at zero.
template <class Scalar>
Vec<Scalar> singular_values_squared(const Mat<Scalar>& m) {
  const bool tall = m.rows() >= m.cols();
  const Mat<Scalar> gram = tall ? Mat<Scalar>(m.transpose() * m)
                                : Mat<Scalar>(m * m.transpose());
  const Index dim = gram.rows();
  Vec<Scalar> lams(dim);
  if (dim == 1) {
    lams[0] = gram(0, 0);
  } else if (dim == 2) {
    const Scalar tr = gram(0, 0) + gram(1, 1);
    const Scalar det = gram(0, 0) * gram(1, 1) - gram(0, 1) * gram(1, 0);
    const Scalar disc = std::sqrt(std::max(tr * tr / 4 - det, Scalar(0)));
    lams[0] = tr / 2 - disc;
    lams[1] = tr / 2 + disc;
  } else if (dim == 3) {
    Eigen::Matrix<Scalar, 3, 3> g3 = gram;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 3, 3>> eig;
    eig.computeDirect(g3, Eigen::EigenvaluesOnly);
    lams = eig.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
    lams = eig.eigenvalues();
  }
  // Clamp roundoff: eigenvalues below dim * eps * lambda_max are rank noise.
  const Scalar floor = lams.maxCoeff() * static_cast<Scalar>(dim) *
                       std::numeric_limits<Scalar>::epsilon();
  return (lams.array() < floor).select(Scalar(0), lams);
}

}  // namespace detail

/// Schatten p-norm: l_p norm of the singular values; p = infinity gives the
/// operator norm, p = 2 the Frobenius norm.
template <class Scalar>
Scalar schatten_norm(const Mat<Scalar>& m, Scalar p) {
  if (!(p >= Scalar(1))) throw std::invalid_argument("schatten_norm: need p >= 1");
  const Vec<Scalar> lams = detail::singular_values_squared(m);
  if (std::isinf(static_cast<double>(p)))
    return std::sqrt(lams.maxCoeff());
  Scalar acc = Scalar(0);
  for (Index i = 0; i < lams.size(); ++i)
    acc += std::pow(lams[i], p / Scalar(2));
  return std::pow(acc, Scalar(1) / p);
}

// ---------------------------------------------------------------------------
// Matrix families (the chaos coefficients A_{j,k})
// ---------------------------------------------------------------------------

/// Coefficients of a second-order matrix chaos: an M x M grid of r x t
/// blocks with zero diagonal blocks.
template <class Scalar>
struct MatrixFamily {
  Index size = 0;   // M
  Index rows = 0;   // r
  Index cols = 0;   // t
  std::vector<Mat<Scalar>> blocks;  // row-major (j, k) -> blocks[j*size + k]
  bool diagonal_zero = true;

  static MatrixFamily zero(Index m, Index r, Index t) {
    MatrixFamily fam;
    fam.size = m;
    fam.rows = r;
    fam.cols = t;
    fam.blocks.assign(static_cast<std::size_t>(m * m), Mat<Scalar>::Zero(r, t));
    return fam;
  }

  const Mat<Scalar>& block(Index j, Index k) const {
    return blocks[static_cast<std::size_t>(j * size + k)];
  }
  Mat<Scalar>& block(Index j, Index k) {
    return blocks[static_cast<std::size_t>(j * size + k)];
  }

  void validate() const {
    if (size < 1 || rows < 1 || cols < 1 ||
        blocks.size() != static_cast<std::size_t>(size * size))
      throw std::invalid_argument("MatrixFamily: inconsistent dimensions");
    for (const auto& b : blocks)
      if (b.rows() != rows || b.cols() != cols)
        throw std::invalid_argument("MatrixFamily: block dimension mismatch");
    if (diagonal_zero)
      for (Index j = 0; j < size; ++j)
        if (block(j, j).cwiseAbs().maxCoeff() != Scalar(0))
          throw std::invalid_argument("MatrixFamily: nonzero diagonal block");
  }

  /// Block matrix F = (A_{j,k}) of shape rM x tM.
  Mat<Scalar> block_matrix() const {
    Mat<Scalar> f(rows * size, cols * size);
    for (Index j = 0; j < size; ++j)
      for (Index k = 0; k < size; ++k)
        f.block(j * rows, k * cols, rows, cols) = block(j, k);
    return f;
  }
};

/// Random family with iid uniform[-1,1] entries and zero diagonal blocks.
template <class Scalar = double>
MatrixFamily<Scalar> random_family(Index m, Index r, Index t, SeedSpec seed) {
  auto fam = MatrixFamily<Scalar>::zero(m, r, t);
  Rng rng(seed);
  for (Index j = 0; j < m; ++j)
    for (Index k = 0; k < m; ++k) {
      if (j == k) continue;
      auto& b = fam.block(j, k);
      for (Index a = 0; a < r; ++a)
        for (Index c = 0; c < t; ++c)
          b(a, c) = static_cast<Scalar>(rng.uniform(-1.0, 1.0));
    }
  return fam;
}

enum class MomentMethod { exhaustive, monte_carlo };

inline const char* method_name(MomentMethod m) {
  return m == MomentMethod::exhaustive ? "exhaustive" : "monte_carlo";
}

template <class Scalar>
struct MomentEstimate {
  Scalar value = Scalar(0);     // rooted moment (E ||.||^q)^{1/q}
  Scalar raw_mean = Scalar(0);  // E ||.||^q
  Scalar raw_std_error = Scalar(0);
  double order = 0;  // q
  MomentMethod method = MomentMethod::exhaustive;
  Index samples = 0;
};

namespace detail {

constexpr Index kChaosExhaustiveMaxM = 12;
constexpr Index kDecoupleExhaustiveBudget = Index(1) << 24;

template <class Scalar>
Mat<Scalar> chaos_sum(const MatrixFamily<Scalar>& fam, const std::vector<int>& eps) {
  Mat<Scalar> sum = Mat<Scalar>::Zero(fam.rows, fam.cols);
  for (Index j = 0; j < fam.size; ++j)
    for (Index k = 0; k < fam.size; ++k) {
      if (j == k) continue;
      sum.noalias() += Scalar(eps[static_cast<std::size_t>(j)] *
                              eps[static_cast<std::size_t>(k)]) *
                       fam.block(j, k);
    }
  return sum;
}

inline void pattern_signs(std::uint64_t bits, std::vector<int>& eps) {
  for (std::size_t j = 0; j < eps.size(); ++j)
    eps[j] = (bits >> j) & 1 ? 1 : -1;
}

template <class Scalar, class Sampler>
MomentEstimate<Scalar> moment_of(double order, MomentMethod method, Index exhaustive_count,
                                 Index trials, Sampler&& sample_pow) {
  MomentEstimate<Scalar> out;
  out.order = order;
  out.method = method;
  if (method == MomentMethod::exhaustive) {
    long double acc = 0;
    for (Index i = 0; i < exhaustive_count; ++i)
      acc += static_cast<long double>(sample_pow(i));
    out.samples = exhaustive_count;
    out.raw_mean = static_cast<Scalar>(acc / static_cast<long double>(exhaustive_count));
    out.raw_std_error = Scalar(0);
  } else {
    if (trials < 1) throw std::invalid_argument("moment estimate: trials >= 1");
    long double acc = 0, acc2 = 0;
    for (Index i = 0; i < trials; ++i) {
      const long double v = static_cast<long double>(sample_pow(i));
      acc += v;
      acc2 += v * v;
    }
    const long double mean = acc / static_cast<long double>(trials);
    const long double var =
        std::max(0.0L, acc2 / static_cast<long double>(trials) - mean * mean);
    out.samples = trials;
    out.raw_mean = static_cast<Scalar>(mean);
    out.raw_std_error =
        static_cast<Scalar>(std::sqrt(var / static_cast<long double>(trials)));
  }
  out.value = std::pow(out.raw_mean, Scalar(1.0 / order));
  return out;
}

}  // namespace detail

/// Left side of the second-order chaos inequality:
/// (E || sum_{j,k} eps_j eps_k A_{j,k} ||_{S_{2m}}^{2m})^{1/2m}.
/// Exhaustive mode averages over all 2^M sign patterns (M <= 12).
template <class Scalar>
MomentEstimate<Scalar> chaos_moment_lhs(const MatrixFamily<Scalar>& fam, Index m,
                                        MomentMethod method = MomentMethod::exhaustive,
                                        Index trials = 0, SeedSpec seed = {}) {
  fam.validate();
  if (!fam.diagonal_zero)
    throw std::invalid_argument("chaos_moment_lhs: needs diagonal_zero family");
  if (m < 1) throw std::invalid_argument("chaos_moment_lhs: m >= 1");
  const double order = 2.0 * static_cast<double>(m);
  const Scalar p = static_cast<Scalar>(order);
  std::vector<int> eps(static_cast<std::size_t>(fam.size));
  if (method == MomentMethod::exhaustive) {
    if (fam.size > detail::kChaosExhaustiveMaxM)
      throw std::length_error("chaos_moment_lhs: enumeration budget exceeded");
    const Index total = Index(1) << fam.size;
    return detail::moment_of<Scalar>(order, method, total, 0, [&](Index i) {
      detail::pattern_signs(static_cast<std::uint64_t>(i), eps);
      return std::pow(schatten_norm(detail::chaos_sum(fam, eps), p), p);
    });
  }
  Rng rng(seed);
  return detail::moment_of<Scalar>(order, method, 0, trials, [&](Index) {
    for (auto& e : eps) e = rng.rademacher_sign();
    return std::pow(schatten_norm(detail::chaos_sum(fam, eps), p), p);
  });
}

template <class Scalar>
struct ChaosBound {
  Scalar rhs = Scalar(0);
  Scalar term_row = Scalar(0);    // ||(sum A A^*)^{1/2}||_{S_{2m}}
  Scalar term_col = Scalar(0);    // ||(sum A^* A)^{1/2}||_{S_{2m}}
  Scalar term_block = Scalar(0);  // ||F||_{S_{2m}}
  int active_term = 0;            // 0 row, 1 col, 2 block
  Scalar constant = Scalar(0);    // D_m
};

/// Right side of the chaos inequality: D_m * max of the three square
/// function / block matrix terms.
template <class Scalar>
ChaosBound<Scalar> chaos_bound_rhs(const MatrixFamily<Scalar>& fam, Index m) {
  fam.validate();
  const Scalar p = static_cast<Scalar>(2 * m);
  Mat<Scalar> row_sq = Mat<Scalar>::Zero(fam.rows, fam.rows);
  Mat<Scalar> col_sq = Mat<Scalar>::Zero(fam.cols, fam.cols);
  for (Index j = 0; j < fam.size; ++j)
    for (Index k = 0; k < fam.size; ++k) {
      const auto& b = fam.block(j, k);
      row_sq.noalias() += b * b.transpose();
      col_sq.noalias() += b.transpose() * b;
    }
  ChaosBound<Scalar> out;
  // Schatten norm of the PSD square root: (sum lambda^m)^{1/2m}.
  auto half_power_norm = [&](const Mat<Scalar>& psd) {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(psd, Eigen::EigenvaluesOnly);
    Scalar acc = Scalar(0);
    for (Index i = 0; i < eig.eigenvalues().size(); ++i)
      acc += std::pow(std::max(eig.eigenvalues()[i], Scalar(0)),
                      static_cast<Scalar>(m));
    return std::pow(acc, Scalar(1) / p);
  };
  out.term_row = half_power_norm(row_sq);
  out.term_col = half_power_norm(col_sq);
  out.term_block = schatten_norm(fam.block_matrix(), p);
  out.constant = static_cast<Scalar>(khintchine_constants(m, 2.0).d_m);
  out.active_term = 0;
  Scalar best = out.term_row;
  if (out.term_col > best) {
    best = out.term_col;
    out.active_term = 1;
  }
  if (out.term_block > best) {
    best = out.term_block;
    out.active_term = 2;
  }
  out.rhs = out.constant * best;
  return out;
}

template <class Scalar>
struct MomentCheck {
  double order = 0;  // 2m (matrix case) or p (scalar case)
  Scalar lhs = Scalar(0);
  Scalar lhs_std_error = Scalar(0);
  Scalar rhs = Scalar(0);
  int active_term = -1;
  MomentMethod method = MomentMethod::exhaustive;
  bool holds = false;  // lhs <= rhs, with a 3 sigma margin for MC
};

/// Full Theorem-style check of the matrix chaos inequality.
template <class Scalar>
MomentCheck<Scalar> chaos_check(const MatrixFamily<Scalar>& fam, Index m,
                                MomentMethod method = MomentMethod::exhaustive,
                                Index trials = 0, SeedSpec seed = {}) {
  const auto lhs = chaos_moment_lhs(fam, m, method, trials, seed);
  const auto rhs = chaos_bound_rhs(fam, m);
  MomentCheck<Scalar> out;
  out.order = lhs.order;
  out.lhs = lhs.value;
  out.rhs = rhs.rhs;
  out.active_term = rhs.active_term;
  out.method = method;
  if (method == MomentMethod::exhaustive) {
    out.lhs_std_error = Scalar(0);
    out.holds = out.lhs <= out.rhs * (Scalar(1) + Scalar(1e-12));
  } else {
    // Declare a violation only when the 3 sigma lower bound still exceeds rhs.
    out.lhs_std_error = lhs.raw_std_error;
    const Scalar low_mean =
        std::max(lhs.raw_mean - Scalar(3) * lhs.raw_std_error, Scalar(0));
    out.holds = std::pow(low_mean, Scalar(1.0 / lhs.order)) <=
                out.rhs * (Scalar(1) + Scalar(1e-12));
  }
  return out;
}

/// Scalar chaos check (Corollary-style):
/// (E |sum eps_j eps_k a_{j,k}|^p)^{1/p} <= d_p (sum a_{j,k}^2)^{1/2}.
template <class Scalar>
MomentCheck<Scalar> scalar_chaos_check(const Mat<Scalar>& a, double p,
                                       MomentMethod method = MomentMethod::exhaustive,
                                       Index trials = 0, SeedSpec seed = {}) {
  if (a.rows() != a.cols()) throw std::invalid_argument("scalar_chaos_check: square a");
  if (p < 2.0) throw std::invalid_argument("scalar_chaos_check: need p >= 2");
  const Index m = a.rows();
  for (Index j = 0; j < m; ++j)
    if (a(j, j) != Scalar(0))
      throw std::invalid_argument("scalar_chaos_check: diagonal must be zero");

  std::vector<int> eps(static_cast<std::size_t>(m));
  auto chaos_value = [&]() {
    Scalar sum = Scalar(0);
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < m; ++k)
        sum += Scalar(eps[static_cast<std::size_t>(j)] *
                      eps[static_cast<std::size_t>(k)]) *
               a(j, k);
    return sum;
  };

  MomentEstimate<Scalar> lhs;
  if (method == MomentMethod::exhaustive) {
    if (m > detail::kChaosExhaustiveMaxM)
      throw std::length_error("scalar_chaos_check: enumeration budget exceeded");
    const Index total = Index(1) << m;
    lhs = detail::moment_of<Scalar>(p, method, total, 0, [&](Index i) {
      detail::pattern_signs(static_cast<std::uint64_t>(i), eps);
      return std::pow(std::abs(chaos_value()), static_cast<Scalar>(p));
    });
  } else {
    Rng rng(seed);
    lhs = detail::moment_of<Scalar>(p, method, 0, trials, [&](Index) {
      for (auto& e : eps) e = rng.rademacher_sign();
      return std::pow(std::abs(chaos_value()), static_cast<Scalar>(p));
    });
  }

  MomentCheck<Scalar> out;
  out.order = p;
  out.lhs = lhs.value;
  out.lhs_std_error = lhs.raw_std_error;
  out.rhs = static_cast<Scalar>(khintchine_constants(1, p).d_p) * a.norm();
  out.method = method;
  out.holds = out.lhs <= out.rhs * (Scalar(1) + Scalar(1e-12));
  return out;
}

// ---------------------------------------------------------------------------
// Decoupling (coupled vs independent-copy chaos)
// ---------------------------------------------------------------------------

template <class Scalar>
struct DecouplingCheck {
  Scalar coupled = Scalar(0);    // E || sum_{j != k} eps_j eps_k A_{j,k} ||^p
  Scalar decoupled = Scalar(0);  // E || sum_{j,k} eps_j eps'_k A_{j,k} ||^p
  double order = 0;
  Scalar bound_factor = Scalar(0);  // 4^p
  bool holds = false;               // coupled <= 4^p decoupled
  MomentMethod method = MomentMethod::exhaustive;
};

/// Lemma-style decoupling comparison in the Schatten-p norm (absolute value
/// in the scalar case r = t = 1). Exhaustive mode enumerates both sign
/// vectors: 2^{2M} patterns, requiring 2^{2M} <= 2^24.
template <class Scalar>
DecouplingCheck<Scalar> decoupling_check(const MatrixFamily<Scalar>& fam, double p,
                                         MomentMethod method = MomentMethod::exhaustive,
                                         Index trials = 0, SeedSpec seed = {}) {
  fam.validate();
  if (!fam.diagonal_zero)
    throw std::invalid_argument("decoupling_check: needs diagonal_zero family");
  if (p < 1.0) throw std::invalid_argument("decoupling_check: need p >= 1");
  const Scalar sp = static_cast<Scalar>(std::max(p, 1.0));
  const Index m = fam.size;
  std::vector<int> eps(static_cast<std::size_t>(m)), eps2(static_cast<std::size_t>(m));

  auto decoupled_sum = [&]() {
    Mat<Scalar> sum = Mat<Scalar>::Zero(fam.rows, fam.cols);
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < m; ++k) {
        if (j == k) continue;  // diagonal blocks are zero anyway
        sum.noalias() += Scalar(eps[static_cast<std::size_t>(j)] *
                                eps2[static_cast<std::size_t>(k)]) *
                         fam.block(j, k);
      }
    return sum;
  };

  DecouplingCheck<Scalar> out;
  out.order = p;
  out.method = method;
  out.bound_factor = std::pow(Scalar(4), static_cast<Scalar>(p));

  if (method == MomentMethod::exhaustive) {
    const Index total = Index(1) << m;
    if (static_cast<Index>(total) * total > detail::kDecoupleExhaustiveBudget)
      throw std::length_error("decoupling_check: enumeration budget exceeded");
    long double acc_coupled = 0;
    for (Index i = 0; i < total; ++i) {
      detail::pattern_signs(static_cast<std::uint64_t>(i), eps);
      acc_coupled += static_cast<long double>(
          std::pow(schatten_norm(detail::chaos_sum(fam, eps), sp),
                   static_cast<Scalar>(p)));
    }
    out.coupled = static_cast<Scalar>(acc_coupled / static_cast<long double>(total));

    // Precompute B_k(eps) = sum_j eps_j A_{j,k} per outer pattern, then
    // sweep the independent copy.
    long double acc_dec = 0;
    std::vector<Mat<Scalar>> bk(static_cast<std::size_t>(m));
    for (Index i = 0; i < total; ++i) {
      detail::pattern_signs(static_cast<std::uint64_t>(i), eps);
      for (Index k = 0; k < m; ++k) {
        Mat<Scalar> b = Mat<Scalar>::Zero(fam.rows, fam.cols);
        for (Index j = 0; j < m; ++j) {
          if (j == k) continue;
          b.noalias() += Scalar(eps[static_cast<std::size_t>(j)]) * fam.block(j, k);
        }
        bk[static_cast<std::size_t>(k)] = std::move(b);
      }
      for (Index i2 = 0; i2 < total; ++i2) {
        detail::pattern_signs(static_cast<std::uint64_t>(i2), eps2);
        Mat<Scalar> sum = Mat<Scalar>::Zero(fam.rows, fam.cols);
        for (Index k = 0; k < m; ++k)
          sum.noalias() +=
              Scalar(eps2[static_cast<std::size_t>(k)]) * bk[static_cast<std::size_t>(k)];
        acc_dec += static_cast<long double>(
            std::pow(schatten_norm(sum, sp), static_cast<Scalar>(p)));
      }
    }
    out.decoupled =
        static_cast<Scalar>(acc_dec / static_cast<long double>(total * total));
  } else {
    if (trials < 1) throw std::invalid_argument("decoupling_check: trials >= 1");
    Rng rng(seed);
    long double acc_coupled = 0, acc_dec = 0;
    for (Index t = 0; t < trials; ++t) {
      for (auto& e : eps) e = rng.rademacher_sign();
      for (auto& e : eps2) e = rng.rademacher_sign();
      acc_coupled += static_cast<long double>(
          std::pow(schatten_norm(detail::chaos_sum(fam, eps), sp),
                   static_cast<Scalar>(p)));
      acc_dec += static_cast<long double>(
          std::pow(schatten_norm(decoupled_sum(), sp), static_cast<Scalar>(p)));
    }
    out.coupled = static_cast<Scalar>(acc_coupled / static_cast<long double>(trials));
    out.decoupled = static_cast<Scalar>(acc_dec / static_cast<long double>(trials));
  }
  out.holds = out.coupled <= out.bound_factor * out.decoupled * (Scalar(1) + Scalar(1e-12));
  return out;
}

// ---------------------------------------------------------------------------
// Moment-to-tail lemma
// ---------------------------------------------------------------------------

struct MomentTailBound {
  double threshold = 0;  // e alpha u, the deviation level
  double bound = 0;      // beta exp(-u^gamma), kappa = 1
  double markov_intermediate = 0;  // beta (p^{1/gamma} / (e u))^p at p = u^gamma
};

/// Tail bound from moment growth (E Z^p)^{1/p} <= alpha beta^{1/p} p^{1/gamma}:
/// P(Z >= e alpha u) <= beta exp(-u^gamma), valid for u >= p0.
inline MomentTailBound moment_tail_bound(double alpha, double beta, double gamma,
                                         double p0, double u) {
  if (alpha <= 0 || beta <= 0 || gamma <= 0)
    throw std::invalid_argument("moment_tail_bound: alpha, beta, gamma > 0");
  if (u < p0)
    throw std::invalid_argument("moment_tail_bound: u < p0, bound not guaranteed");
  MomentTailBound out;
  out.threshold = std::numbers::e * alpha * u;
  out.bound = beta * std::exp(-std::pow(u, gamma));
  const double p = std::pow(u, gamma);
  out.markov_intermediate = beta * std::pow(std::pow(p, 1.0 / gamma) /
                                                (std::numbers::e * u),
                                            p);
  return out;
}

}  // namespace csense
