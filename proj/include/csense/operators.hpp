#pragma once

#include "csense/common.hpp"
#include "csense/fft.hpp"

#include <cmath>
#include <memory>

namespace csense {

enum class OperatorKind { circulant, toeplitz };

inline const char* kind_name(OperatorKind k) {
  return k == OperatorKind::circulant ? "circulant" : "toeplitz";
}

/// Generating sequence of a (full) circulant or Toeplitz matrix.
/// Circulant: values = (b_0, ..., b_{N-1}) and S(i,j) = b_{(j-i) mod N}.
/// Toeplitz: values = (c_{-(N-1)}, ..., c_{N-1}), length 2N-1, and
/// T(i,j) = c_{j-i}. All indices 0-based.
template <class Scalar>
struct GeneratorVector {
  Vec<Scalar> values;
  OperatorKind kind = OperatorKind::circulant;

  Index ambient_dim() const {
    const Index len = values.size();
    if (len < 1) throw std::invalid_argument("GeneratorVector: empty");
    if (kind == OperatorKind::circulant) return len;
    if (len % 2 == 0)
      throw std::invalid_argument("GeneratorVector: toeplitz length must be 2N-1");
    return (len + 1) / 2;
  }

  /// Entry on diagonal offset d = column - row, d in (-N, N).
  Scalar at_offset(Index d, Index ambient) const {
    if (kind == OperatorKind::circulant) {
      Index m = d % ambient;
      if (m < 0) m += ambient;
      return values[m];
    }
    return values[d + ambient - 1];
  }
};

/// Row-restricted circulant/Toeplitz measurement map. Immutable after
/// construction; apply/adjoint are pure, so instances can be shared across
/// threads freely. The fast product embeds the matrix into a circulant of
/// the smallest power-of-two size M >= 2N-1 and convolves via FFT, giving
/// O(M log M) per apply.
template <class Scalar>
class StructuredOperator {
 public:
  StructuredOperator(GeneratorVector<Scalar> gen, IndexSet omega, bool normalized)
      : gen_(std::move(gen)),
        omega_(std::move(omega)),
        ambient_(gen_.ambient_dim()),
        normalized_(normalized) {
    if (omega_.max_index() >= ambient_)
      throw std::invalid_argument("StructuredOperator: omega index >= ambient dim");
    scale_ = normalized_ ? Scalar(1) / std::sqrt(static_cast<Scalar>(omega_.size()))
                         : Scalar(1);
    build_plan();
  }

  Index rows() const { return omega_.size(); }
  Index cols() const { return ambient_; }
  OperatorKind kind() const { return gen_.kind; }
  bool normalized() const { return normalized_; }
  Scalar scale() const { return scale_; }
  const IndexSet& omega() const { return omega_; }
  const GeneratorVector<Scalar>& generator() const { return gen_; }

  /// Matrix entry for (row position r in omega order, column j).
  Scalar entry(Index r, Index j) const {
    return scale_ * gen_.at_offset(j - omega_[r], ambient_);
  }

  const RealConvPlan<Scalar>& plan() const { return *plan_; }
  /// Kernel spectrum on bins [0, fft_size/2].
  const CVec<Scalar>& kernel_spectrum() const { return spectrum_; }

 private:
  void build_plan() {
    // Kernel v with v[(-d) mod M] = g(d) for every diagonal offset d, so
    // that the full product is the head of the M-circular convolution
    // x (*) v. The adjoint kernel is the reversal of v, whose spectrum is
    // the conjugate of V; only V is stored. A circulant whose dimension is
    // already a power of two convolves at size N directly (offsets d and
    // d - N share a slot and a value); everything else embeds at the
    // smallest power of two >= 2N-1. Sizes are clamped to >= 2 for the
    // half-size real transform.
    const bool pow2_circulant = gen_.kind == OperatorKind::circulant &&
                                (ambient_ & (ambient_ - 1)) == 0;
    const Index m = std::max<Index>(
        2, pow2_circulant ? ambient_ : next_pow2(2 * ambient_ - 1));
    plan_ = std::make_shared<const RealConvPlan<Scalar>>(m);
    Vec<Scalar> v = Vec<Scalar>::Zero(m);
    for (Index d = -(ambient_ - 1); d < ambient_; ++d) {
      const Index slot = ((-d) % m + m) % m;
      v[slot] = gen_.at_offset(d, ambient_);
    }
    spectrum_.resize(plan_->bins());
    CVec<Scalar> scratch(m / 2);
    plan_->forward_half(v.data(), scratch.data(), spectrum_.data());
  }

  GeneratorVector<Scalar> gen_;
  IndexSet omega_;
  Index ambient_;
  bool normalized_;
  Scalar scale_;
  std::shared_ptr<const RealConvPlan<Scalar>> plan_;
  CVec<Scalar> spectrum_;
};

template <class Scalar>
StructuredOperator<Scalar> make_operator(GeneratorVector<Scalar> gen, IndexSet omega,
                                         bool normalized = true) {
  return StructuredOperator<Scalar>(std::move(gen), std::move(omega), normalized);
}

namespace detail {

/// Per-thread convolution workspace; callers only touch [0, m).
template <class Scalar>
struct ConvWorkspace {
  Vec<Scalar> real;          // length m
  CVec<Scalar> half;         // m/2 complex scratch
  CVec<Scalar> spec;         // m/2 + 1 bins
};

template <class Scalar>
ConvWorkspace<Scalar>& conv_scratch(Index m) {
  thread_local ConvWorkspace<Scalar> ws;
  if (ws.real.size() < m) {
    ws.real.resize(m);
    ws.half.resize(m / 2);
    ws.spec.resize(m / 2 + 1);
  }
  return ws;
}

}  // namespace detail

/// y = A x restricted to omega rows, via FFT convolution. The _into
/// variant writes into a caller-owned buffer (resized as needed).
template <class Scalar>
void apply_into(const StructuredOperator<Scalar>& op,
                const Eigen::Ref<const Vec<Scalar>>& x, Vec<Scalar>& out) {
  if (x.size() != op.cols())
    throw std::invalid_argument("apply: vector length != ambient dim");
  const Index m = op.plan().size();
  auto& ws = detail::conv_scratch<Scalar>(m);
  for (Index j = 0; j < op.cols(); ++j) ws.real[j] = x[j];
  for (Index j = op.cols(); j < m; ++j) ws.real[j] = Scalar(0);
  op.plan().forward_half(ws.real.data(), ws.half.data(), ws.spec.data());
  const auto& kernel = op.kernel_spectrum();
  for (Index k = 0; k < op.plan().bins(); ++k) ws.spec[k] *= kernel[k];
  op.plan().inverse_real(ws.spec.data(), ws.half.data(), ws.real.data());
  out.resize(op.rows());
  for (Index r = 0; r < op.rows(); ++r)
    out[r] = op.scale() * ws.real[op.omega()[r]];
}

template <class Scalar>
Vec<Scalar> apply(const StructuredOperator<Scalar>& op,
                  const Eigen::Ref<const Vec<Scalar>>& x) {
  Vec<Scalar> out;
  apply_into(op, x, out);
  return out;
}

/// A^T y: zero-extend y from omega to the ambient dimension, convolve with
/// the reversed kernel (conjugate spectrum).
template <class Scalar>
void adjoint_apply_into(const StructuredOperator<Scalar>& op,
                        const Eigen::Ref<const Vec<Scalar>>& y, Vec<Scalar>& out) {
  if (y.size() != op.rows())
    throw std::invalid_argument("adjoint_apply: vector length != row count");
  const Index m = op.plan().size();
  auto& ws = detail::conv_scratch<Scalar>(m);
  for (Index j = 0; j < m; ++j) ws.real[j] = Scalar(0);
  for (Index r = 0; r < op.rows(); ++r) ws.real[op.omega()[r]] = y[r];
  op.plan().forward_half(ws.real.data(), ws.half.data(), ws.spec.data());
  const auto& kernel = op.kernel_spectrum();
  for (Index k = 0; k < op.plan().bins(); ++k) ws.spec[k] *= std::conj(kernel[k]);
  op.plan().inverse_real(ws.spec.data(), ws.half.data(), ws.real.data());
  out.resize(op.cols());
  for (Index j = 0; j < op.cols(); ++j) out[j] = op.scale() * ws.real[j];
}

template <class Scalar>
Vec<Scalar> adjoint_apply(const StructuredOperator<Scalar>& op,
                          const Eigen::Ref<const Vec<Scalar>>& y) {
  Vec<Scalar> out;
  adjoint_apply_into(op, y, out);
  return out;
}

/// Column j of the operator, assembled directly from the generator.
template <class Scalar>
Vec<Scalar> column(const StructuredOperator<Scalar>& op, Index j) {
  if (j < 0 || j >= op.cols()) throw std::invalid_argument("column: index out of range");
  Vec<Scalar> out(op.rows());
  for (Index r = 0; r < op.rows(); ++r) out[r] = op.entry(r, j);
  return out;
}

/// Dense n x N materialization; oracle for tests and small-N analysis.
template <class Scalar>
Mat<Scalar> to_dense(const StructuredOperator<Scalar>& op, Index dense_cap = 4096) {
  if (op.cols() > dense_cap)
    throw std::length_error("to_dense: ambient dim exceeds dense cap");
  Mat<Scalar> out(op.rows(), op.cols());
  for (Index r = 0; r < op.rows(); ++r)
    for (Index j = 0; j < op.cols(); ++j) out(r, j) = op.entry(r, j);
  return out;
}

/// Elementary shift: circulant S_j (cyclic, j in [0, N)) or Toeplitz T_j
/// (zero fill, j in (-N, N)); (D_j x)_l = x_{l-j}.
struct ShiftOperator {
  Index shift = 0;
  OperatorKind kind = OperatorKind::circulant;
};

template <class Scalar>
Vec<Scalar> shift_apply(const ShiftOperator& op, const Eigen::Ref<const Vec<Scalar>>& x) {
  const Index n = x.size();
  if (op.kind == OperatorKind::circulant) {
    if (op.shift < 0 || op.shift >= n)
      throw std::invalid_argument("shift_apply: circulant shift out of [0, N)");
  } else if (op.shift <= -n || op.shift >= n) {
    throw std::invalid_argument("shift_apply: toeplitz shift out of (-N, N)");
  }
  Vec<Scalar> out(n);
  for (Index l = 0; l < n; ++l) {
    Index src = l - op.shift;
    if (op.kind == OperatorKind::circulant) {
      src %= n;
      if (src < 0) src += n;
      out[l] = x[src];
    } else {
      out[l] = (src >= 0 && src < n) ? x[src] : Scalar(0);
    }
  }
  return out;
}

/// Max absolute deviation of sum_j D_j^* P_Omega D_j from n I_N, in exact
/// integer arithmetic. Row l of D_j is e_{l-j}^T (or zero for an
/// out-of-range Toeplitz shift), so the sum is
/// sum_j sum_{l in Omega} e_{l-j} e_{l-j}^T; the accumulator collects those
/// rank-one terms and the full N x N grid is compared against n I.
inline std::int64_t verify_shift_identity(const IndexSet& omega, Index ambient,
                                          OperatorKind kind, Index dense_cap = 4096) {
  if (ambient > dense_cap)
    throw std::length_error("verify_shift_identity: ambient dim exceeds dense cap");
  if (omega.max_index() >= ambient)
    throw std::invalid_argument("verify_shift_identity: omega index >= ambient dim");
  Mat<std::int64_t> acc = Mat<std::int64_t>::Zero(ambient, ambient);
  const Index j_lo = kind == OperatorKind::circulant ? 0 : -(ambient - 1);
  const Index j_hi = ambient - 1;
  for (Index j = j_lo; j <= j_hi; ++j) {
    for (Index l : omega) {
      Index pos = l - j;
      if (kind == OperatorKind::circulant) {
        pos %= ambient;
        if (pos < 0) pos += ambient;
      } else if (pos < 0 || pos >= ambient) {
        continue;
      }
      acc(pos, pos) += 1;
    }
  }
  const std::int64_t n = omega.size();
  std::int64_t dev = 0;
  for (Index a = 0; a < ambient; ++a)
    for (Index b = 0; b < ambient; ++b) {
      const std::int64_t want = a == b ? n : 0;
      dev = std::max(dev, std::abs(acc(a, b) - want));
    }
  return dev;
}

}  // namespace csense
