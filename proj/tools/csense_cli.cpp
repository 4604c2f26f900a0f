// Command-line front end: instance generation, recovery, coherence and
// spectrum diagnostics, sample-complexity budgets, chaos inequality checks,
// phase-transition runs, scaling fits, and SVG plots.

#include "csense/analysis.hpp"
#include "csense/experiments.hpp"
#include "csense/json_io.hpp"
#include "csense/khintchine.hpp"
#include "csense/operators.hpp"
#include "csense/signals.hpp"
#include "csense/solver.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace csense;

OperatorKind kind_of(const std::string& s) {
  if (s == "circulant") return OperatorKind::circulant;
  if (s == "toeplitz") return OperatorKind::toeplitz;
  throw CLI::ValidationError("--kind must be circulant or toeplitz");
}

OmegaPreset preset_of(const std::string& s) {
  if (s == "first_n") return OmegaPreset::first_n;
  if (s == "downsample") return OmegaPreset::downsample;
  if (s == "uniform_random") return OmegaPreset::uniform_random;
  throw CLI::ValidationError("--preset must be first_n, downsample or uniform_random");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CLI::ValidationError("cannot open output file " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("cannot open input file " + path);
  return in;
}

struct InstanceFlags {
  std::string kind = "circulant";
  std::string preset = "uniform_random";
  Index ambient = 256;
  Index rows = 64;
  std::uint64_t seed = 0;
  Index trial = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kind", kind, "circulant or toeplitz");
    cmd->add_option("--preset", preset, "first_n, downsample or uniform_random");
    cmd->add_option("--N", ambient, "ambient dimension")->required();
    cmd->add_option("--n", rows, "number of rows kept")->required();
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--trial", trial, "trial index (stream id)");
  }

  StructuredOperator<double> build() const {
    auto gen = rademacher_generator<double>(
        kind_of(kind), ambient, {seed, experiment_stream(0, trial, 0)});
    auto omega = omega_preset(preset_of(preset), ambient, rows,
                              {seed, experiment_stream(0, 0, 2)});
    return make_operator(gen, omega, true);
  }
};

int cmd_gen(const InstanceFlags& flags, Index sparsity, const std::string& law,
            const std::string& out_path, const std::string& truth_path) {
  auto op = flags.build();
  auto signal = random_sparse<double>(
      flags.ambient, sparsity,
      law == "uniform12" ? MagnitudeLaw::uniform12 : MagnitudeLaw::unit,
      {flags.seed, experiment_stream(0, flags.trial, 1)});
  const Vec<double> y = apply<double>(op, signal.dense());
  auto out = open_out(out_path);
  write_instance_json(out, op, y);
  if (!truth_path.empty()) {
    auto truth = open_out(truth_path);
    write_signal_json(truth, signal);
  }
  std::cout << "wrote " << out_path << " (" << kind_name(op.kind()) << ", N="
            << op.cols() << ", n=" << op.rows() << ", s=" << sparsity << ")\n";
  return 0;
}

int cmd_recover(const std::string& in_path, const std::string& out_path,
                const SolverConfig<double>& cfg) {
  auto in = open_in(in_path);
  auto instance = read_instance_json(in);
  const auto result = basis_pursuit<double>(instance.op, instance.y, cfg);
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    write_recovery_json(out, result);
  } else {
    write_recovery_json(std::cout, result);
  }
  std::cerr << "status=" << status_name(result.status)
            << " iterations=" << result.iterations
            << " l1=" << format_double(result.l1_value)
            << " feas=" << format_double(result.feas_residual) << '\n';
  return result.status == SolveStatus::converged ? 0 : 1;
}

int cmd_coherence(const InstanceFlags& flags, double eps, Index mu_trials,
                  Index pair_trials) {
  if (mu_trials > 0 || pair_trials > 0) {
    CoherenceTailParams p;
    p.ambient = flags.ambient;
    p.rows = flags.rows;
    p.epsilon = eps;
    p.mu_trials = mu_trials;
    p.pair_trials = pair_trials;
    p.kind = kind_of(flags.kind);
    p.preset = preset_of(flags.preset);
    p.seed = {flags.seed, 0};
    const auto report = coherence_tail_check(p);
    std::cout << "bound=" << format_double(report.bound_value)
              << " exceed_fraction=" << format_double(report.exceed_fraction)
              << " (" << report.exceed_count << "/" << report.mu_trials << ")\n";
    for (const auto& row : report.per_pair)
      std::cout << "pair_tail u=" << row.u
                << " empirical=" << format_double(row.empirical)
                << " bound=" << format_double(row.bound)
                << " stderr=" << format_double(row.mc_stderr) << '\n';
    return 0;
  }
  auto op = flags.build();
  const auto res = coherence<double>(op, eps);
  std::cout << "mu=" << format_double(res.mu) << " argmax=(" << res.argmax_i << ','
            << res.argmax_l << ") bound=" << format_double(res.bound_value)
            << " eps=" << eps << '\n';
  return 0;
}

int cmd_certify(const InstanceFlags& flags, Index sparsity) {
  auto op = flags.build();
  auto signal = random_sparse<double>(flags.ambient, sparsity, MagnitudeLaw::unit,
                                      {flags.seed, experiment_stream(0, flags.trial, 1)});
  try {
    const auto cert = fuchs_tropp_certificate<double>(op, signal.support, signal.signs);
    const auto ext = submatrix_extremes(op, signal.support);
    std::cout << "max_abs_correlation=" << format_double(cert.max_abs_correlation)
              << " argmax_rho=" << cert.argmax_rho
              << " satisfied=" << (cert.satisfied ? "true" : "false")
              << " margin=" << format_double(cert.margin())
              << " lambda_min=" << format_double(ext.lambda_min)
              << " lambda_max=" << format_double(ext.lambda_max) << '\n';
    return cert.satisfied ? 0 : 1;
  } catch (const SingularGramError& err) {
    std::cerr << err.what() << '\n';
    return 2;
  }
}

int cmd_budget(Index ambient, Index sparsity, double eps, double n_given) {
  const auto budget = sample_complexity_budget(ambient, sparsity, eps);
  std::cout << "C_tilde=" << format_double(budget.c_tilde) << '\n'
            << "n_cond2=" << format_double(budget.n_cond2) << '\n'
            << "n_cond1=" << format_double(budget.n_cond1) << '\n'
            << "n_required=" << format_double(budget.n_required) << '\n';
  if (n_given > 0)
    std::cout << "failure_bound(n=" << n_given << ")="
              << format_double(recovery_failure_bound(ambient, sparsity, eps, n_given))
              << '\n';
  return 0;
}

int cmd_khintchine(const std::string& mode, Index m_order, double p_order, Index fam_m,
                   Index fam_r, Index fam_t, Index families, Index trials,
                   std::uint64_t seed, const std::string& method_str,
                   const std::string& out_path) {
  const MomentMethod method =
      method_str == "monte_carlo" ? MomentMethod::monte_carlo : MomentMethod::exhaustive;
  if (mode == "constants") {
    const auto k = khintchine_constants(m_order, p_order);
    std::cout << "B_m=" << format_double(k.b_m) << '\n'
              << "C_m=" << format_double(k.c_m) << '\n'
              << "D_m=" << format_double(k.d_m) << '\n'
              << "d_p=" << format_double(k.d_p) << '\n';
    return 0;
  }
  if (mode == "tail") {
    const auto out = moment_tail_bound(1.0, 4.0, 1.0, 2.0, p_order);
    std::cout << "threshold=" << format_double(out.threshold)
              << " bound=" << format_double(out.bound) << '\n';
    return 0;
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file = open_out(out_path);
    out = &file;
  }
  *out << "family_seed,M,r,t,order,lhs,rhs,ratio,active_term,method\n";
  int violations = 0;
  for (Index f = 0; f < families; ++f) {
    const SeedSpec fam_seed{seed, static_cast<std::uint64_t>(f)};
    if (mode == "chaos") {
      auto fam = random_family<double>(fam_m, fam_r, fam_t, fam_seed);
      const auto check = chaos_check(fam, m_order, method, trials, fam_seed);
      *out << f << ',' << fam_m << ',' << fam_r << ',' << fam_t << ',' << check.order
           << ',' << format_double(check.lhs) << ',' << format_double(check.rhs) << ','
           << format_double(check.lhs / check.rhs) << ',' << check.active_term << ','
           << method_name(check.method) << '\n';
      if (!check.holds) ++violations;
    } else if (mode == "scalar") {
      auto fam = random_family<double>(fam_m, 1, 1, fam_seed);
      Mat<double> a = Mat<double>::Zero(fam_m, fam_m);
      for (Index j = 0; j < fam_m; ++j)
        for (Index k = 0; k < fam_m; ++k) a(j, k) = fam.block(j, k)(0, 0);
      const auto check = scalar_chaos_check(a, p_order, method, trials, fam_seed);
      *out << f << ',' << fam_m << ",1,1," << check.order << ','
           << format_double(check.lhs) << ',' << format_double(check.rhs) << ','
           << format_double(check.lhs / check.rhs) << ",-1,"
           << method_name(check.method) << '\n';
      if (!check.holds) ++violations;
    } else if (mode == "decouple") {
      auto fam = random_family<double>(fam_m, fam_r, fam_t, fam_seed);
      const auto check = decoupling_check(fam, p_order, method, trials, fam_seed);
      *out << f << ',' << fam_m << ',' << fam_r << ',' << fam_t << ',' << check.order
           << ',' << format_double(check.coupled) << ','
           << format_double(check.bound_factor * check.decoupled) << ','
           << format_double(check.coupled /
                            std::max(check.bound_factor * check.decoupled, 1e-300))
           << ",-1," << method_name(check.method) << '\n';
      if (!check.holds) ++violations;
    } else {
      throw CLI::ValidationError("--mode must be constants|chaos|scalar|decouple|tail");
    }
  }
  std::cerr << "families=" << families << " violations=" << violations << '\n';
  return violations == 0 ? 0 : 1;
}

int cmd_spectra(const EigenSweepConfig& cfg) {
  const auto rows = eigen_concentration_sweep(cfg);
  for (const auto& r : rows)
    std::cout << "n=" << r.rows << " median=" << format_double(r.median)
              << " q90=" << format_double(r.q90) << " q99=" << format_double(r.q99)
              << " tail_prediction=" << format_double(r.median_bound) << '\n';
  return 0;
}

int cmd_phase(ExperimentConfig cfg) {
  const auto cells = run_phase_transition(cfg);
  std::cerr << "cells=" << cells.size();
  if (!cfg.out_csv.empty()) std::cerr << " -> " << cfg.out_csv;
  std::cerr << '\n';
  return 0;
}

int cmd_fit(const std::string& in_path, Index ambient, double level, Index reps,
            const std::string& out_path) {
  auto in = open_in(in_path);
  const auto cells = read_phase_csv(in);
  const auto fit = fit_scaling(cells, ambient, level, reps);
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    write_fit_json(out, fit);
  } else {
    write_fit_json(std::cout, fit);
  }
  return 0;
}

int cmd_plot(const std::string& in_path, Index ambient, const std::string& out_path,
             bool with_boundary) {
  auto in = open_in(in_path);
  auto cells = read_phase_csv(in);
  if (ambient > 0) {
    std::vector<PhaseCell> filtered;
    for (const auto& c : cells)
      if (c.ambient == ambient) filtered.push_back(c);
    cells = std::move(filtered);
  }
  if (cells.empty()) throw CLI::ValidationError("no cells to plot");
  ScalingFit fit;
  bool have_fit = false;
  if (with_boundary) {
    try {
      fit = fit_scaling(cells, cells[0].ambient);
      have_fit = true;
    } catch (const std::exception& err) {
      std::cerr << "boundary overlay skipped: " << err.what() << '\n';
    }
  }
  auto out = open_out(out_path);
  write_phase_heatmap_svg(out, cells, have_fit ? &fit : nullptr);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partial circulant/Toeplitz compressed sensing toolkit"};
  app.require_subcommand(1);

  // gen
  InstanceFlags gen_flags;
  Index gen_s = 4;
  std::string gen_law = "unit", gen_out = "instance.json", gen_truth;
  auto* gen = app.add_subcommand("gen", "generate a measurement instance JSON");
  gen_flags.attach(gen);
  gen->add_option("--s", gen_s, "sparsity of the planted signal");
  gen->add_option("--magnitude", gen_law, "unit or uniform12");
  gen->add_option("--out", gen_out, "instance output path");
  gen->add_option("--truth", gen_truth, "optional ground-truth signal JSON");

  // recover
  std::string rec_in, rec_out;
  SolverConfig<double> rec_cfg;
  auto* recover = app.add_subcommand("recover", "basis pursuit on an instance JSON");
  recover->add_option("--in", rec_in, "instance JSON")->required();
  recover->add_option("--out", rec_out, "result JSON (default: stdout)");
  recover->add_option("--feas-tol", rec_cfg.feas_tol, "feasibility tolerance");
  recover->add_option("--opt-tol", rec_cfg.opt_tol, "duality gap tolerance");
  recover->add_option("--max-iter", rec_cfg.max_iter, "iteration cap");

  // coherence
  InstanceFlags coh_flags;
  double coh_eps = 0.05;
  Index coh_mu_trials = 0, coh_pair_trials = 0;
  auto* coh = app.add_subcommand("coherence", "coherence of an instance or tail check");
  coh_flags.attach(coh);
  coh->add_option("--eps", coh_eps, "probability parameter in the bound");
  coh->add_option("--mu-trials", coh_mu_trials, "Monte-Carlo trials for the mu tail");
  coh->add_option("--pair-trials", coh_pair_trials, "trials for the per-pair tail");

  // certify
  InstanceFlags cert_flags;
  Index cert_s = 4;
  auto* cert = app.add_subcommand("certify", "Fuchs/Tropp certificate of an instance");
  cert_flags.attach(cert);
  cert->add_option("--s", cert_s, "sparsity of the planted signal");

  // spectra
  EigenSweepConfig sweep;
  std::string sweep_kind = "circulant", sweep_preset = "first_n";
  auto* spectra = app.add_subcommand("spectra", "eigenvalue concentration sweep");
  spectra->add_option("--N", sweep.ambient)->required();
  spectra->add_option("--s", sweep.sparsity)->required();
  spectra->add_option("--n", sweep.row_list, "row counts")->required()->delimiter(',');
  spectra->add_option("--trials", sweep.trials);
  spectra->add_option("--seed", sweep.master_seed);
  spectra->add_option("--kind", sweep_kind);
  spectra->add_option("--preset", sweep_preset);
  spectra->add_flag("--resample-support", sweep.resample_support,
                    "redraw the support per trial");
  spectra->add_option("--out", sweep.out_csv, "CSV output path");

  // budget
  Index bud_n_dim = 1024, bud_s = 8;
  double bud_eps = 0.05, bud_n = 0;
  auto* budget = app.add_subcommand("budget", "sample-complexity thresholds");
  budget->add_option("--N", bud_n_dim)->required();
  budget->add_option("--s", bud_s)->required();
  budget->add_option("--eps", bud_eps);
  budget->add_option("--n", bud_n, "evaluate the failure bound at this n");

  // khintchine
  std::string kh_mode = "constants", kh_method = "exhaustive", kh_out;
  Index kh_m = 1, kh_fam_m = 6, kh_fam_r = 2, kh_fam_t = 2, kh_families = 20,
        kh_trials = 0;
  double kh_p = 2.0;
  std::uint64_t kh_seed = 0;
  auto* kh = app.add_subcommand("khintchine", "moment inequality checks");
  kh->add_option("--mode", kh_mode, "constants|chaos|scalar|decouple|tail");
  kh->add_option("--m", kh_m, "moment order m (S_{2m})");
  kh->add_option("--p", kh_p, "moment order p (scalar/decouple/tail)");
  kh->add_option("--M", kh_fam_m, "family index count");
  kh->add_option("--r", kh_fam_r, "block rows");
  kh->add_option("--t", kh_fam_t, "block cols");
  kh->add_option("--families", kh_families, "number of random families");
  kh->add_option("--trials", kh_trials, "Monte-Carlo trials (monte_carlo method)");
  kh->add_option("--seed", kh_seed);
  kh->add_option("--method", kh_method, "exhaustive or monte_carlo");
  kh->add_option("--out", kh_out, "CSV output path");

  // phase
  ExperimentConfig phase_cfg;
  std::string phase_kind = "circulant", phase_preset = "first_n",
              phase_signs = "bernoulli", phase_law = "unit";
  auto* phase = app.add_subcommand("phase", "phase-transition grid");
  phase->add_option("--N", phase_cfg.ambient_list, "ambient dims")
      ->required()
      ->delimiter(',');
  phase->add_option("--s", phase_cfg.sparsity_list, "sparsities")
      ->required()
      ->delimiter(',');
  phase->add_option("--n", phase_cfg.row_list, "row counts (default: auto grid)")
      ->delimiter(',');
  phase->add_option("--trials", phase_cfg.trials);
  phase->add_option("--seed", phase_cfg.master_seed);
  phase->add_option("--kind", phase_kind);
  phase->add_option("--preset", phase_preset);
  phase->add_option("--signs", phase_signs, "bernoulli or positive");
  phase->add_option("--magnitude", phase_law, "unit or uniform12");
  phase->add_option("--out", phase_cfg.out_csv, "CSV output path");
  phase->add_option("--workers", phase_cfg.workers, "worker thread count");
  phase->add_option("--max-iter", phase_cfg.solver.max_iter);
  phase->add_option("--recovery-tol", phase_cfg.recovery_tol);

  // fit
  std::string fit_in, fit_out;
  Index fit_ambient = 0, fit_reps = 200;
  double fit_level = 0.5;
  auto* fit = app.add_subcommand("fit", "scaling-exponent fit from a phase CSV");
  fit->add_option("--in", fit_in, "phase CSV")->required();
  fit->add_option("--N", fit_ambient, "ambient dim to fit")->required();
  fit->add_option("--level", fit_level, "boundary success level");
  fit->add_option("--reps", fit_reps, "bootstrap repetitions");
  fit->add_option("--out", fit_out, "fit JSON (default: stdout)");

  // plot
  std::string plot_in, plot_out = "phase.svg";
  Index plot_ambient = 0;
  bool plot_boundary = false;
  auto* plot = app.add_subcommand("plot", "success-rate heatmap SVG from a phase CSV");
  plot->add_option("--in", plot_in, "phase CSV")->required();
  plot->add_option("--out", plot_out, "SVG output path");
  plot->add_option("--N", plot_ambient, "restrict to one ambient dim");
  plot->add_flag("--boundary", plot_boundary, "overlay the fitted 50% boundary");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_flags, gen_s, gen_law, gen_out, gen_truth);
    if (recover->parsed()) return cmd_recover(rec_in, rec_out, rec_cfg);
    if (coh->parsed())
      return cmd_coherence(coh_flags, coh_eps, coh_mu_trials, coh_pair_trials);
    if (cert->parsed()) return cmd_certify(cert_flags, cert_s);
    if (spectra->parsed()) {
      sweep.kind = kind_of(sweep_kind);
      sweep.preset = preset_of(sweep_preset);
      return cmd_spectra(sweep);
    }
    if (budget->parsed()) return cmd_budget(bud_n_dim, bud_s, bud_eps, bud_n);
    if (kh->parsed())
      return cmd_khintchine(kh_mode, kh_m, kh_p, kh_fam_m, kh_fam_r, kh_fam_t,
                            kh_families, kh_trials, kh_seed, kh_method, kh_out);
    if (phase->parsed()) {
      phase_cfg.kind = kind_of(phase_kind);
      phase_cfg.preset = preset_of(phase_preset);
      phase_cfg.sign_mode =
          phase_signs == "positive" ? SignMode::positive : SignMode::bernoulli;
      phase_cfg.magnitude_law =
          phase_law == "uniform12" ? MagnitudeLaw::uniform12 : MagnitudeLaw::unit;
      return cmd_phase(phase_cfg);
    }
    if (fit->parsed()) return cmd_fit(fit_in, fit_ambient, fit_level, fit_reps, fit_out);
    if (plot->parsed()) return cmd_plot(plot_in, plot_ambient, plot_out, plot_boundary);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
