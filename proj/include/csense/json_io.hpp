#pragma once

#include "csense/experiments.hpp"
#include "csense/operators.hpp"
#include "csense/signals.hpp"
#include "csense/solver.hpp"

#include <iosfwd>
#include <string>

namespace csense {

/// Instance file: {kind, N, omega, generator, normalized, y}.
struct Instance {
  StructuredOperator<double> op;
  Vec<double> y;
};

Instance read_instance_json(std::istream& in);
void write_instance_json(std::ostream& out, const StructuredOperator<double>& op,
                         const Vec<double>& y);

void write_signal_json(std::ostream& out, const SparseSignal<double>& signal);
SparseSignal<double> read_signal_json(std::istream& in);

void write_recovery_json(std::ostream& out, const RecoveryResult<double>& result);
void write_fit_json(std::ostream& out, const ScalingFit& fit);

}  // namespace csense
