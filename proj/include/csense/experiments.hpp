#pragma once

#include "csense/analysis.hpp"
#include "csense/operators.hpp"
#include "csense/signals.hpp"
#include "csense/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace csense {

enum class SignMode { bernoulli, positive };

/// Stream layout for experiment randomness: every draw is keyed by
/// (master_seed, cell, trial, purpose) only, so results do not depend on
/// worker count or execution order. Limits: trial < 2^21, purpose < 8.
inline std::uint64_t experiment_stream(Index cell, Index trial, int purpose) {
  return (static_cast<std::uint64_t>(cell) << 24) |
         (static_cast<std::uint64_t>(trial) << 3) |
         static_cast<std::uint64_t>(purpose);
}

struct ExperimentConfig {
  std::vector<Index> ambient_list;   // N
  std::vector<Index> sparsity_list;  // s
  std::vector<Index> row_list;       // n; empty selects an auto grid per (N, s)
  OperatorKind kind = OperatorKind::circulant;
  OmegaPreset preset = OmegaPreset::first_n;
  Index trials = 100;
  std::uint64_t master_seed = 0;
  SolverConfig<double> solver;
  MagnitudeLaw magnitude_law = MagnitudeLaw::unit;
  SignMode sign_mode = SignMode::bernoulli;
  double recovery_tol = 1e-4;
  std::string out_csv;  // empty: no file output
  int workers = 0;      // 0: CSENSE_THREADS env var, else 1
};

struct PhaseCell {
  OperatorKind kind = OperatorKind::circulant;
  OmegaPreset preset = OmegaPreset::first_n;
  Index ambient = 0;
  Index rows = 0;
  Index sparsity = 0;
  Index trials = 0;
  Index successes = 0;
  double success_rate = 0;
  std::uint64_t seed = 0;
  Index nonconverged = 0;
  double mean_iterations = 0;
  double mean_certificate_margin = 0;  // NaN when no trial had a usable Gram
};

/// Success-rate grid over (N, n, s) cells. Per trial the generator and the
/// signal are redrawn; Omega is fixed per cell. Cells are written to CSV
/// incrementally in deterministic order when out_csv is set.
std::vector<PhaseCell> run_phase_transition(const ExperimentConfig& cfg);

/// Heuristic n grid bracketing the 50% recovery boundary for one (N, s).
std::vector<Index> auto_row_grid(Index ambient, Index sparsity);

struct BoundaryPoint {
  Index sparsity = 0;
  double n_star = 0;
  bool bracketed = false;
};

struct ScalingFit {
  Index ambient = 0;
  double level = 0.5;
  double exponent = 0;  // q in n*(s) ~ a s^q
  double ci_lo = 0;
  double ci_hi = 0;
  double log_intercept = 0;
  Index bootstrap_reps = 0;
  std::vector<BoundaryPoint> boundaries;
};

/// Fits log n*(s) = log a + q log s, where n*(s) is the level crossing of
/// the isotonic success rate in n. Bootstrap resamples trials per cell.
ScalingFit fit_scaling(const std::vector<PhaseCell>& cells, Index ambient,
                       double level = 0.5, Index bootstrap_reps = 200,
                       SeedSpec seed = {424242, 0});

struct EigenSweepConfig {
  Index ambient = 0;
  Index sparsity = 0;
  std::vector<Index> row_list;
  Index trials = 50;
  std::uint64_t master_seed = 0;
  OperatorKind kind = OperatorKind::circulant;
  OmegaPreset preset = OmegaPreset::first_n;
  bool resample_support = false;  // default: fixed support, random coefficients
  std::string out_csv;
};

struct EigenSweepRow {
  Index rows = 0;
  double median = 0;
  double q90 = 0;
  double q99 = 0;
  double median_bound = 0;  // 2 pi sqrt(s/n) log(4 s / (1 - q)) tail prediction
};

/// Distribution of delta(Lambda) = max(1 - lambda_min, lambda_max - 1)
/// across generator draws, per row count.
std::vector<EigenSweepRow> eigen_concentration_sweep(const EigenSweepConfig& cfg);

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

/// 17-significant-digit decimal rendering used for all CSV numbers.
std::string format_double(double v);

void write_phase_csv_header(std::ostream& out);
void write_phase_csv_row(std::ostream& out, const PhaseCell& cell);
void write_phase_csv(std::ostream& out, const std::vector<PhaseCell>& cells);
std::vector<PhaseCell> read_phase_csv(std::istream& in);

void write_eigen_sweep_csv(std::ostream& out, const EigenSweepConfig& cfg,
                           const std::vector<EigenSweepRow>& rows);

// --------------------------------------------------------------------------
// Plots (static SVG)
// --------------------------------------------------------------------------

/// Success-rate heatmap over (n, s) with an optional boundary overlay.
void write_phase_heatmap_svg(std::ostream& out, const std::vector<PhaseCell>& cells,
                             const ScalingFit* fit = nullptr);

}  // namespace csense
