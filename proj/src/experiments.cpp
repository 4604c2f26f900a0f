#include "csense/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace csense {

namespace {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CSENSE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

struct TrialOutcome {
  bool success = false;
  bool nonconverged = false;
  Index iterations = 0;
  double margin = 0;
  bool has_margin = false;
};

TrialOutcome run_trial(const ExperimentConfig& cfg, const IndexSet& omega,
                       Index ambient, Index sparsity, Index cell, Index trial) {
  TrialOutcome out;
  auto gen = rademacher_generator<double>(
      cfg.kind, ambient, {cfg.master_seed, experiment_stream(cell, trial, 0)});
  auto op = make_operator(gen, omega, true);
  auto signal = random_sparse<double>(
      ambient, sparsity, cfg.magnitude_law,
      {cfg.master_seed, experiment_stream(cell, trial, 1)});
  if (cfg.sign_mode == SignMode::positive) signal.signs.setOnes();

  const Vec<double> y = apply<double>(op, signal.dense());
  const auto res = basis_pursuit<double>(op, y, cfg.solver);
  out.nonconverged = res.status != SolveStatus::converged;
  out.iterations = res.iterations;
  out.success = !out.nonconverged && exact_recovery<double>(res.x_hat, signal,
                                                            cfg.recovery_tol);
  try {
    const auto cert = fuchs_tropp_certificate<double>(op, signal.support, signal.signs);
    out.margin = cert.margin();
    out.has_margin = true;
  } catch (const SingularGramError&) {
    out.has_margin = false;
  }
  return out;
}

PhaseCell aggregate_cell(const ExperimentConfig& cfg, Index ambient, Index rows,
                         Index sparsity, const std::vector<TrialOutcome>& outcomes) {
  PhaseCell cell;
  cell.kind = cfg.kind;
  cell.preset = cfg.preset;
  cell.ambient = ambient;
  cell.rows = rows;
  cell.sparsity = sparsity;
  cell.trials = static_cast<Index>(outcomes.size());
  cell.seed = cfg.master_seed;
  long double iter_sum = 0, margin_sum = 0;
  Index margin_count = 0;
  for (const auto& o : outcomes) {
    if (o.success) ++cell.successes;
    if (o.nonconverged) ++cell.nonconverged;
    iter_sum += static_cast<long double>(o.iterations);
    if (o.has_margin) {
      margin_sum += static_cast<long double>(o.margin);
      ++margin_count;
    }
  }
  cell.success_rate =
      static_cast<double>(cell.successes) / static_cast<double>(cell.trials);
  cell.mean_iterations =
      static_cast<double>(iter_sum / static_cast<long double>(cell.trials));
  cell.mean_certificate_margin =
      margin_count > 0
          ? static_cast<double>(margin_sum / static_cast<long double>(margin_count))
          : std::numeric_limits<double>::quiet_NaN();
  return cell;
}

}  // namespace

std::vector<Index> auto_row_grid(Index ambient, Index sparsity) {
  const double center =
      2.0 * static_cast<double>(sparsity) *
      std::log(static_cast<double>(ambient) / static_cast<double>(sparsity));
  // The 50% boundary typically sits near 0.55..0.75 of the center
  // heuristic; sample that zone densely and the saturated region sparsely.
  std::vector<Index> grid;
  for (double factor :
       {0.4, 0.475, 0.55, 0.625, 0.7, 0.775, 0.85, 1.0, 1.2, 1.5, 2.0}) {
    Index n = static_cast<Index>(std::lround(center * factor));
    n = std::max<Index>(n, std::max<Index>(sparsity + 1, 4));
    n = std::min<Index>(n, ambient);
    grid.push_back(n);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<PhaseCell> run_phase_transition(const ExperimentConfig& cfg) {
  if (cfg.ambient_list.empty() || cfg.sparsity_list.empty() || cfg.trials < 1)
    throw std::invalid_argument("run_phase_transition: empty config");
  const int workers = resolve_workers(cfg.workers);

  std::ofstream csv;
  if (!cfg.out_csv.empty()) {
    csv.open(cfg.out_csv);
    if (!csv) throw std::runtime_error("cannot open " + cfg.out_csv);
    write_phase_csv_header(csv);
  }

  std::vector<PhaseCell> cells;
  Index cell_id = 0;
  for (Index ambient : cfg.ambient_list) {
    for (Index sparsity : cfg.sparsity_list) {
      if (sparsity > ambient)
        throw std::invalid_argument("run_phase_transition: s > N cell");
      const std::vector<Index> rows_for_cell =
          cfg.row_list.empty() ? auto_row_grid(ambient, sparsity) : cfg.row_list;
      for (Index rows : rows_for_cell) {
        if (rows > ambient)
          throw std::invalid_argument("run_phase_transition: n > N cell");
        const IndexSet omega = omega_preset(
            cfg.preset, ambient, rows,
            {cfg.master_seed, experiment_stream(cell_id, 0, 2)});

        std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
        auto worker = [&](Index first) {
          for (Index t = first; t < cfg.trials; t += workers)
            outcomes[static_cast<std::size_t>(t)] =
                run_trial(cfg, omega, ambient, sparsity, cell_id, t);
        };
        if (workers == 1) {
          worker(0);
        } else {
          std::vector<std::thread> pool;
          pool.reserve(static_cast<std::size_t>(workers));
          for (int w = 0; w < workers; ++w) pool.emplace_back(worker, Index(w));
          for (auto& th : pool) th.join();
        }

        cells.push_back(aggregate_cell(cfg, ambient, rows, sparsity, outcomes));
        if (csv.is_open()) {
          write_phase_csv_row(csv, cells.back());
          csv.flush();
        }
        ++cell_id;
      }
    }
  }
  return cells;
}

// --------------------------------------------------------------------------
// Scaling fit
// --------------------------------------------------------------------------

namespace {

/// Weighted isotonic (nondecreasing) regression, pool-adjacent-violators.
std::vector<double> isotonic(const std::vector<double>& values,
                             const std::vector<double>& weights) {
  struct Block {
    double mean, weight;
    std::size_t count;
  };
  std::vector<Block> stack;
  for (std::size_t i = 0; i < values.size(); ++i) {
    Block b{values[i], weights[i], 1};
    while (!stack.empty() && stack.back().mean >= b.mean) {
      const Block& top = stack.back();
      b.mean = (b.mean * b.weight + top.mean * top.weight) / (b.weight + top.weight);
      b.weight += top.weight;
      b.count += top.count;
      stack.pop_back();
    }
    stack.push_back(b);
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : stack)
    for (std::size_t k = 0; k < b.count; ++k) out.push_back(b.mean);
  return out;
}

struct CellSlice {
  std::vector<Index> rows;
  std::vector<double> rates;
  std::vector<double> trials;
};

BoundaryPoint boundary_for(Index sparsity, const CellSlice& slice, double level) {
  BoundaryPoint pt;
  pt.sparsity = sparsity;
  const std::vector<double> iso = isotonic(slice.rates, slice.trials);
  if (iso.empty() || iso.front() > level || iso.back() < level) return pt;
  for (std::size_t k = 0; k < iso.size(); ++k) {
    if (iso[k] < level) continue;
    if (k == 0 || iso[k] == iso[k - 1]) {
      pt.n_star = static_cast<double>(slice.rows[k]);
    } else {
      const double t = (level - iso[k - 1]) / (iso[k] - iso[k - 1]);
      pt.n_star = static_cast<double>(slice.rows[k - 1]) +
                  t * static_cast<double>(slice.rows[k] - slice.rows[k - 1]);
    }
    pt.bracketed = true;
    break;
  }
  return pt;
}

struct LineFit {
  double slope = 0, intercept = 0;
};

LineFit least_squares_loglog(const std::vector<BoundaryPoint>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const auto& p : pts) {
    if (!p.bracketed) continue;
    const double x = std::log(static_cast<double>(p.sparsity));
    const double y = std::log(p.n_star);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  LineFit fit;
  const double denom = count * sxx - sx * sx;
  fit.slope = (count * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / count;
  return fit;
}

}  // namespace

ScalingFit fit_scaling(const std::vector<PhaseCell>& cells, Index ambient,
                       double level, Index bootstrap_reps, SeedSpec seed) {
  std::map<Index, CellSlice> by_s;
  std::vector<const PhaseCell*> used;
  for (const auto& c : cells) {
    if (c.ambient != ambient) continue;
    used.push_back(&c);
  }
  std::sort(used.begin(), used.end(), [](const PhaseCell* a, const PhaseCell* b) {
    return a->sparsity != b->sparsity ? a->sparsity < b->sparsity : a->rows < b->rows;
  });
  for (const PhaseCell* c : used) {
    auto& slice = by_s[c->sparsity];
    slice.rows.push_back(c->rows);
    slice.rates.push_back(c->success_rate);
    slice.trials.push_back(static_cast<double>(c->trials));
  }

  ScalingFit fit;
  fit.ambient = ambient;
  fit.level = level;
  Index bracketed = 0;
  for (const auto& [s, slice] : by_s) {
    fit.boundaries.push_back(boundary_for(s, slice, level));
    if (fit.boundaries.back().bracketed) ++bracketed;
  }
  if (bracketed < 4)
    throw std::invalid_argument(
        "fit_scaling: need the boundary bracketed for at least 4 sparsity values");

  const LineFit line = least_squares_loglog(fit.boundaries);
  fit.exponent = line.slope;
  fit.log_intercept = line.intercept;

  // Bootstrap over per-cell binomial resampling of the success counts.
  std::vector<double> reps;
  reps.reserve(static_cast<std::size_t>(bootstrap_reps));
  for (Index b = 0; b < bootstrap_reps; ++b) {
    std::map<Index, CellSlice> resampled = by_s;
    Index cell_idx = 0;
    for (auto& [s, slice] : resampled) {
      for (std::size_t k = 0; k < slice.rates.size(); ++k, ++cell_idx) {
        Rng rng({seed.master_seed,
                 seed.stream_id + static_cast<std::uint64_t>(b) * 1000003ULL +
                     static_cast<std::uint64_t>(cell_idx)});
        const auto trials = static_cast<Index>(slice.trials[k]);
        Index hits = 0;
        for (Index t = 0; t < trials; ++t)
          if (rng.uniform01() < slice.rates[k]) ++hits;
        slice.rates[k] = static_cast<double>(hits) / static_cast<double>(trials);
      }
    }
    std::vector<BoundaryPoint> pts;
    Index ok = 0;
    for (const auto& [s, slice] : resampled) {
      pts.push_back(boundary_for(s, slice, level));
      if (pts.back().bracketed) ++ok;
    }
    if (ok < 2) continue;
    reps.push_back(least_squares_loglog(pts).slope);
  }
  fit.bootstrap_reps = static_cast<Index>(reps.size());
  if (!reps.empty()) {
    std::sort(reps.begin(), reps.end());
    auto quantile = [&](double q) {
      const auto idx = static_cast<std::size_t>(
          std::min<double>(q * static_cast<double>(reps.size() - 1),
                           static_cast<double>(reps.size() - 1)));
      return reps[idx];
    };
    fit.ci_lo = quantile(0.025);
    fit.ci_hi = quantile(0.975);
  }
  return fit;
}

// --------------------------------------------------------------------------
// Eigenvalue concentration sweep
// --------------------------------------------------------------------------

std::vector<EigenSweepRow> eigen_concentration_sweep(const EigenSweepConfig& cfg) {
  if (cfg.row_list.empty() || cfg.trials < 1)
    throw std::invalid_argument("eigen_concentration_sweep: empty config");
  const IndexSet fixed_support =
      random_sparse<double>(cfg.ambient, cfg.sparsity, MagnitudeLaw::unit,
                            {cfg.master_seed, experiment_stream(0, 0, 3)})
          .support;
  std::vector<EigenSweepRow> out;
  for (std::size_t idx = 0; idx < cfg.row_list.size(); ++idx) {
    const Index rows = cfg.row_list[idx];
    const IndexSet omega = omega_preset(
        cfg.preset, cfg.ambient, rows,
        {cfg.master_seed, experiment_stream(static_cast<Index>(idx), 0, 2)});
    std::vector<double> deltas;
    deltas.reserve(static_cast<std::size_t>(cfg.trials));
    for (Index t = 0; t < cfg.trials; ++t) {
      auto gen = rademacher_generator<double>(
          cfg.kind, cfg.ambient,
          {cfg.master_seed, experiment_stream(static_cast<Index>(idx), t, 0)});
      auto op = make_operator(gen, omega, true);
      const IndexSet support =
          cfg.resample_support
              ? random_sparse<double>(
                    cfg.ambient, cfg.sparsity, MagnitudeLaw::unit,
                    {cfg.master_seed,
                     experiment_stream(static_cast<Index>(idx), t, 3)})
                    .support
              : fixed_support;
      deltas.push_back(submatrix_extremes(op, support).delta);
    }
    std::sort(deltas.begin(), deltas.end());
    auto rank = [&](double q) {
      const auto pos = static_cast<std::size_t>(
          std::min<double>(std::ceil(q * static_cast<double>(deltas.size())) - 1,
                           static_cast<double>(deltas.size() - 1)));
      return deltas[std::max<std::size_t>(pos, 0)];
    };
    EigenSweepRow row;
    row.rows = rows;
    row.median = rank(0.5);
    row.q90 = rank(0.9);
    row.q99 = rank(0.99);
    row.median_bound = 2.0 * std::numbers::pi *
                       std::sqrt(static_cast<double>(cfg.sparsity) /
                                 static_cast<double>(rows)) *
                       std::log(4.0 * static_cast<double>(cfg.sparsity) / 0.5);
    out.push_back(row);
  }
  if (!cfg.out_csv.empty()) {
    std::ofstream csv(cfg.out_csv);
    if (!csv) throw std::runtime_error("cannot open " + cfg.out_csv);
    write_eigen_sweep_csv(csv, cfg, out);
  }
  return out;
}

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_phase_csv_header(std::ostream& out) {
  out << "kind,preset,N,n,s,trial_count,successes,rate,seed,nonconverged,"
         "mean_iterations,mean_cert_margin\n";
}

void write_phase_csv_row(std::ostream& out, const PhaseCell& cell) {
  out << kind_name(cell.kind) << ',' << preset_name(cell.preset) << ','
      << cell.ambient << ',' << cell.rows << ',' << cell.sparsity << ','
      << cell.trials << ',' << cell.successes << ','
      << format_double(cell.success_rate) << ',' << cell.seed << ','
      << cell.nonconverged << ',' << format_double(cell.mean_iterations) << ','
      << format_double(cell.mean_certificate_margin) << '\n';
}

void write_phase_csv(std::ostream& out, const std::vector<PhaseCell>& cells) {
  write_phase_csv_header(out);
  for (const auto& c : cells) write_phase_csv_row(out, c);
}

std::vector<PhaseCell> read_phase_csv(std::istream& in) {
  std::vector<PhaseCell> cells;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 12) throw std::runtime_error("phase CSV: short row");
    PhaseCell c;
    c.kind = fields[0] == "toeplitz" ? OperatorKind::toeplitz : OperatorKind::circulant;
    c.preset = fields[1] == "downsample"     ? OmegaPreset::downsample
               : fields[1] == "first_n"      ? OmegaPreset::first_n
                                             : OmegaPreset::uniform_random;
    c.ambient = std::stoll(fields[2]);
    c.rows = std::stoll(fields[3]);
    c.sparsity = std::stoll(fields[4]);
    c.trials = std::stoll(fields[5]);
    c.successes = std::stoll(fields[6]);
    c.success_rate = std::stod(fields[7]);
    c.seed = std::stoull(fields[8]);
    c.nonconverged = std::stoll(fields[9]);
    c.mean_iterations = std::stod(fields[10]);
    c.mean_certificate_margin = std::stod(fields[11]);
    cells.push_back(c);
  }
  return cells;
}

void write_eigen_sweep_csv(std::ostream& out, const EigenSweepConfig& cfg,
                           const std::vector<EigenSweepRow>& rows) {
  out << "seed,trial,N,n,s,statistic,value,bound\n";
  for (const auto& r : rows) {
    const struct {
      const char* name;
      double value;
    } stats[] = {{"delta_median", r.median}, {"delta_q90", r.q90}, {"delta_q99", r.q99}};
    for (const auto& st : stats) {
      out << cfg.master_seed << ",-1," << cfg.ambient << ',' << r.rows << ','
          << cfg.sparsity << ',' << st.name << ',' << format_double(st.value) << ','
          << format_double(r.median_bound) << '\n';
    }
  }
}

}  // namespace csense
