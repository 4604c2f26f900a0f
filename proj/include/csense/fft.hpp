#pragma once

#include "csense/common.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

namespace csense {

inline Index next_pow2(Index n) {
  Index m = 1;
  while (m < n) m <<= 1;
  return m;
}

/// Iterative radix-2 complex FFT with precomputed bit-reversal and twiddle
/// tables. Plans are immutable after construction and safe to share across
/// threads; forward/inverse only touch caller-owned buffers.
template <class Real>
class FftPlan {
 public:
  explicit FftPlan(Index size) : size_(size) {
    if (size < 1 || (size & (size - 1)) != 0)
      throw std::invalid_argument("FftPlan: size must be a power of two");
    bitrev_.resize(static_cast<std::size_t>(size));
    bitrev_[0] = 0;
    for (Index i = 1; i < size; ++i)
      bitrev_[static_cast<std::size_t>(i)] =
          (bitrev_[static_cast<std::size_t>(i >> 1)] >> 1) | ((i & 1) ? size >> 1 : 0);
    twiddle_.resize(static_cast<std::size_t>(size / 2));
    const Real base = Real(-2) * std::numbers::pi_v<Real> / static_cast<Real>(size);
    for (Index k = 0; k < size / 2; ++k)
      twiddle_[static_cast<std::size_t>(k)] =
          std::complex<Real>(std::cos(base * static_cast<Real>(k)),
                             std::sin(base * static_cast<Real>(k)));
  }

  Index size() const { return size_; }

  /// In-place DFT, no scaling.
  void forward(std::complex<Real>* a) const {
    const Index m = size_;
    for (Index i = 0; i < m; ++i) {
      const Index j = bitrev_[static_cast<std::size_t>(i)];
      if (i < j) std::swap(a[i], a[j]);
    }
    for (Index len = 2; len <= m; len <<= 1) {
      const Index half = len >> 1;
      const Index stride = m / len;
      for (Index start = 0; start < m; start += len) {
        const std::complex<Real>* w = twiddle_.data();
        for (Index k = 0; k < half; ++k, w += stride) {
          const std::complex<Real> u = a[start + k];
          const std::complex<Real> v = a[start + k + half] * (*w);
          a[start + k] = u + v;
          a[start + k + half] = u - v;
        }
      }
    }
  }

  /// In-place inverse DFT, scales by 1/size.
  void inverse(std::complex<Real>* a) const {
    for (Index i = 0; i < size_; ++i) a[i] = std::conj(a[i]);
    forward(a);
    const Real inv = Real(1) / static_cast<Real>(size_);
    for (Index i = 0; i < size_; ++i) a[i] = std::conj(a[i]) * inv;
  }

 private:
  Index size_;
  std::vector<Index> bitrev_;
  std::vector<std::complex<Real>> twiddle_;
};

/// Convolution of real signals with a fixed real kernel, using the
/// half-size complex FFT packing: a real length-M transform costs one
/// length-M/2 complex transform plus O(M) twiddling. Spectra are stored on
/// bins [0, M/2] (the rest follows by conjugate symmetry).
template <class Real>
class RealConvPlan {
 public:
  explicit RealConvPlan(Index size) : size_(size), half_(size / 2) {
    if (size < 2 || (size & (size - 1)) != 0)
      throw std::invalid_argument("RealConvPlan: size must be a power of two >= 2");
    const Index h = size / 2;
    omega_.resize(h + 1);
    const Real base = Real(-2) * std::numbers::pi_v<Real> / static_cast<Real>(size);
    for (Index j = 0; j <= h; ++j)
      omega_[j] = std::complex<Real>(std::cos(base * static_cast<Real>(j)),
                                     std::sin(base * static_cast<Real>(j)));
  }

  Index size() const { return size_; }
  Index bins() const { return size_ / 2 + 1; }

  /// Half spectrum X[0..M/2] of a real signal of length M.
  /// scratch must hold M/2 complex values.
  void forward_half(const Real* x, std::complex<Real>* scratch,
                    std::complex<Real>* out) const {
    const Index h = size_ / 2;
    for (Index k = 0; k < h; ++k)
      scratch[k] = std::complex<Real>(x[2 * k], x[2 * k + 1]);
    half_.forward(scratch);
    for (Index j = 0; j <= h; ++j) {
      const Index jm = j % h;
      const std::complex<Real> zj = scratch[jm];
      const std::complex<Real> zc = std::conj(scratch[(h - jm) % h]);
      const std::complex<Real> even = Real(0.5) * (zj + zc);
      const std::complex<Real> odd =
          std::complex<Real>(0, Real(-0.5)) * (zj - zc);
      out[j] = even + omega_[j] * odd;
    }
  }

  /// Real inverse transform of a conjugate-symmetric half spectrum
  /// Y[0..M/2]; scratch must hold M/2 complex values.
  void inverse_real(const std::complex<Real>* y, std::complex<Real>* scratch,
                    Real* out) const {
    const Index h = size_ / 2;
    for (Index j = 0; j < h; ++j) {
      const std::complex<Real> a = Real(0.5) * (y[j] + std::conj(y[h - j]));
      const std::complex<Real> b =
          Real(0.5) * std::conj(omega_[j]) * (y[j] - std::conj(y[h - j]));
      scratch[j] = a + std::complex<Real>(0, 1) * b;
    }
    half_.inverse(scratch);
    for (Index k = 0; k < h; ++k) {
      out[2 * k] = scratch[k].real();
      out[2 * k + 1] = scratch[k].imag();
    }
  }

 private:
  Index size_;
  FftPlan<Real> half_;
  CVec<Real> omega_;
};

}  // namespace csense
