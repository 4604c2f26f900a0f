#pragma once

#include "csense/operators.hpp"
#include "csense/signals.hpp"

#include <cmath>

namespace csense {

template <class Scalar>
struct SolverConfig {
  Scalar feas_tol = Scalar(1e-8);  // on ||A x - y||_2 / ||y||_2
  Scalar opt_tol = Scalar(1e-7);   // duality gap relative to 1 + ||x||_1
  Index max_iter = 20000;
  Scalar step_scale = Scalar(0.95);  // tau * sigma * L^2 = step_scale^2
  Scalar step_ratio = Scalar(1);     // tau / sigma balance
  Scalar relaxation = Scalar(1.8);   // Condat over-relaxation, in (0, 2)
  Index check_interval = 25;
};

enum class SolveStatus { converged, max_iter, infeasible_input };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    default: return "infeasible_input";
  }
}

template <class Scalar>
struct RecoveryResult {
  Vec<Scalar> x_hat;
  Scalar l1_value = Scalar(0);
  Scalar feas_residual = Scalar(0);
  Index iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
};

/// Largest singular value by power iteration on A^T A. Deterministic start,
/// so repeated runs give identical step sizes.
template <class Scalar>
Scalar operator_norm_estimate(const StructuredOperator<Scalar>& op,
                              Index max_rounds = 300, Scalar rel_tol = Scalar(1e-6)) {
  Vec<Scalar> v(op.cols());
  for (Index i = 0; i < op.cols(); ++i)
    v[i] = Scalar(1) + Scalar(0.25) * static_cast<Scalar>((i * 2654435761u) % 97) /
                           Scalar(97);
  v /= v.norm();
  Scalar lambda = Scalar(0);
  Vec<Scalar> av(op.rows()), w(op.cols());
  for (Index round = 0; round < max_rounds; ++round) {
    apply_into<Scalar>(op, v, av);
    adjoint_apply_into<Scalar>(op, av, w);
    const Scalar next = w.norm();
    if (next == Scalar(0)) return Scalar(0);
    const bool settled = std::abs(next - lambda) <= rel_tol * next;
    lambda = next;
    v = w / next;
    if (settled) break;
  }
  return std::sqrt(lambda);
}

/// Equality-constrained l1 minimization (Basis Pursuit) by an
/// over-relaxed primal-dual first-order scheme. Matrix-free: the operator
/// enters only through apply/adjoint_apply. Convergence is declared when
/// both the relative feasibility residual and the duality gap (computed
/// from the l_inf-rescaled dual iterate) are below their tolerances.
template <class Scalar>
RecoveryResult<Scalar> basis_pursuit(const StructuredOperator<Scalar>& op,
                                     const Eigen::Ref<const Vec<Scalar>>& y,
                                     const SolverConfig<Scalar>& cfg = {}) {
  if (y.size() != op.rows())
    throw std::invalid_argument("basis_pursuit: y length != operator rows");

  RecoveryResult<Scalar> result;
  if (!y.allFinite()) {
    result.x_hat = Vec<Scalar>::Zero(op.cols());
    result.status = SolveStatus::infeasible_input;
    result.feas_residual = std::numeric_limits<Scalar>::quiet_NaN();
    return result;
  }

  const Scalar norm_y = y.norm();
  const Scalar denom = norm_y > Scalar(0) ? norm_y : Scalar(1);

  Scalar opnorm = operator_norm_estimate(op) * Scalar(1.01);
  if (opnorm <= Scalar(0)) opnorm = Scalar(1);
  const Scalar tau = cfg.step_scale * cfg.step_ratio / opnorm;
  const Scalar sigma = cfg.step_scale / (cfg.step_ratio * opnorm);
  const Scalar rho = cfg.relaxation;

  const Index dim = op.cols();
  const Index rows = op.rows();
  Vec<Scalar> x = Vec<Scalar>::Zero(dim);
  Vec<Scalar> z = Vec<Scalar>::Zero(rows);
  Vec<Scalar> adj(dim), x_new(dim), x_bar(dim), ax(rows);

  Vec<Scalar> best_x = x;
  Scalar best_feas = norm_y / denom;
  Scalar best_l1 = Scalar(0);

  for (Index it = 1; it <= cfg.max_iter; ++it) {
    adjoint_apply_into<Scalar>(op, z, adj);
    for (Index j = 0; j < dim; ++j) {
      const Scalar v = x[j] - tau * adj[j];
      const Scalar mag = std::abs(v) - tau;
      x_new[j] = mag > Scalar(0) ? (v > Scalar(0) ? mag : -mag) : Scalar(0);
      x_bar[j] = 2 * x_new[j] - x[j];
      x[j] += rho * (x_new[j] - x[j]);
    }
    apply_into<Scalar>(op, x_bar, ax);
    const Scalar rho_sigma = rho * sigma;
    for (Index i = 0; i < rows; ++i) z[i] += rho_sigma * (ax[i] - y[i]);

    if (it % cfg.check_interval == 0 || it == cfg.max_iter) {
      const Scalar feas = (apply<Scalar>(op, x) - y).norm() / denom;
      const Scalar l1 = x.template lpNorm<1>();
      const Scalar dual_scale =
          std::max(Scalar(1), adjoint_apply<Scalar>(op, z).template lpNorm<Eigen::Infinity>());
      const Scalar gap = l1 + y.dot(z) / dual_scale;
      if (feas < best_feas || (feas == best_feas && l1 < best_l1)) {
        best_feas = feas;
        best_l1 = l1;
        best_x = x;
      }
      if (feas <= cfg.feas_tol && gap <= cfg.opt_tol * (Scalar(1) + l1)) {
        result.x_hat = x;
        result.l1_value = l1;
        result.feas_residual = feas;
        result.iterations = it;
        result.status = SolveStatus::converged;
        return result;
      }
    }
  }

  result.x_hat = best_x;
  result.l1_value = best_l1;
  result.feas_residual = best_feas;
  result.iterations = cfg.max_iter;
  result.status = SolveStatus::max_iter;
  return result;
}

/// Recovery decision: ||x_hat - x||_2 <= tol * max(1, ||x||_2).
template <class Scalar>
bool exact_recovery(const Eigen::Ref<const Vec<Scalar>>& x_hat,
                    const SparseSignal<Scalar>& truth, Scalar tol = Scalar(1e-4)) {
  if (x_hat.size() != truth.ambient_dim)
    throw std::invalid_argument("exact_recovery: dimension mismatch");
  const Vec<Scalar> x = truth.dense();
  return (x_hat - x).norm() <= tol * std::max(Scalar(1), x.norm());
}

}  // namespace csense
