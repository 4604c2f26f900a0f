#pragma once

#include "csense/common.hpp"
#include "csense/operators.hpp"
#include "csense/rng.hpp"

#include <vector>

namespace csense {

/// s-sparse signal: support Lambda, a +-1 sign per support index, and
/// positive magnitudes. x_lambda = sign * magnitude.
template <class Scalar>
struct SparseSignal {
  Index ambient_dim = 0;
  IndexSet support;
  Vec<Scalar> signs;       // entries in {-1, +1}, one per support index
  Vec<Scalar> magnitudes;  // positive, one per support index

  Vec<Scalar> dense() const {
    Vec<Scalar> x = Vec<Scalar>::Zero(ambient_dim);
    for (Index k = 0; k < support.size(); ++k)
      x[support[k]] = signs[k] * magnitudes[k];
    return x;
  }

  Scalar l1_norm() const { return magnitudes.template lpNorm<1>(); }
  Scalar l2_norm() const { return magnitudes.norm(); }
};

enum class MagnitudeLaw { unit, uniform12 };

/// Rademacher sequence: independent fair +-1 draws.
template <class Scalar = double>
Vec<Scalar> rademacher(Index length, SeedSpec seed) {
  if (length < 1) throw std::invalid_argument("rademacher: length must be >= 1");
  Rng rng(seed);
  Vec<Scalar> out(length);
  for (Index i = 0; i < length; ++i)
    out[i] = static_cast<Scalar>(rng.rademacher_sign());
  return out;
}

/// Rademacher generating vector of the right length for the kind
/// (N for circulant, 2N-1 for Toeplitz).
template <class Scalar = double>
GeneratorVector<Scalar> rademacher_generator(OperatorKind kind, Index ambient_dim,
                                             SeedSpec seed) {
  const Index len =
      kind == OperatorKind::circulant ? ambient_dim : 2 * ambient_dim - 1;
  return GeneratorVector<Scalar>{rademacher<Scalar>(len, seed), kind};
}

namespace detail {

/// Uniform s-subset of [0, n) by Floyd's algorithm; O(s) draws.
inline std::vector<Index> sample_subset(Index n, Index s, Rng& rng) {
  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(s));
  for (Index j = n - s; j < n; ++j) {
    const Index t =
        static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(j) + 1));
    bool have = false;
    for (Index v : picked)
      if (v == t) {
        have = true;
        break;
      }
    picked.push_back(have ? j : t);
  }
  return picked;
}

}  // namespace detail

/// s-sparse signal with uniform support, Bernoulli signs, magnitudes per
/// law. Draw order within the stream: support, then signs, then magnitudes.
template <class Scalar = double>
SparseSignal<Scalar> random_sparse(Index ambient_dim, Index s, MagnitudeLaw law,
                                   SeedSpec seed) {
  if (s < 1 || s > ambient_dim)
    throw std::invalid_argument("random_sparse: need 1 <= s <= N");
  Rng rng(seed);
  SparseSignal<Scalar> sig;
  sig.ambient_dim = ambient_dim;
  sig.support = IndexSet(detail::sample_subset(ambient_dim, s, rng));
  sig.signs.resize(s);
  for (Index k = 0; k < s; ++k)
    sig.signs[k] = static_cast<Scalar>(rng.rademacher_sign());
  sig.magnitudes.resize(s);
  for (Index k = 0; k < s; ++k)
    sig.magnitudes[k] = law == MagnitudeLaw::unit
                            ? Scalar(1)
                            : static_cast<Scalar>(rng.uniform(1.0, 2.0));
  return sig;
}

enum class OmegaPreset { first_n, downsample, uniform_random };

inline const char* preset_name(OmegaPreset p) {
  switch (p) {
    case OmegaPreset::first_n: return "first_n";
    case OmegaPreset::downsample: return "downsample";
    default: return "uniform_random";
  }
}

/// Row subsets of size n: the first n rows, the downsampling set
/// {K-1, 2K-1, ..., nK-1} (requires N = nK), or a uniform random subset.
inline IndexSet omega_preset(OmegaPreset preset, Index ambient_dim, Index n,
                             SeedSpec seed = {}) {
  if (n < 1 || n > ambient_dim)
    throw std::invalid_argument("omega_preset: need 1 <= n <= N");
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(n));
  switch (preset) {
    case OmegaPreset::first_n:
      for (Index i = 0; i < n; ++i) idx.push_back(i);
      break;
    case OmegaPreset::downsample: {
      if (ambient_dim % n != 0)
        throw std::invalid_argument("omega_preset: downsample requires N = n*K");
      const Index k = ambient_dim / n;
      for (Index i = 1; i <= n; ++i) idx.push_back(i * k - 1);
      break;
    }
    case OmegaPreset::uniform_random: {
      Rng rng(seed);
      idx = detail::sample_subset(ambient_dim, n, rng);
      break;
    }
  }
  return IndexSet(std::move(idx));
}

}  // namespace csense
