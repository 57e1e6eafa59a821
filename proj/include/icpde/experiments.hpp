#pragma once

// The study runners: seen-parameter interpolation, prior mixing sweep, unseen
// coefficients, temporal extrapolation, multi-reaction composition, and the
// noise robustness grid. Every runner is deterministic under its config seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "icpde/dataset.hpp"
#include "icpde/metrics.hpp"
#include "icpde/prior.hpp"
#include "icpde/transformer.hpp"

namespace icpde {

enum class System {
  convection,
  diffusion,
  reaction,
  convection_diffusion,
  reaction_diffusion,
  cdr
};

inline const char* system_name(System s) {
  switch (s) {
    case System::convection:
      return "convection";
    case System::diffusion:
      return "diffusion";
    case System::reaction:
      return "reaction";
    case System::convection_diffusion:
      return "convection-diffusion";
    case System::reaction_diffusion:
      return "reaction-diffusion";
    case System::cdr:
      return "cdr";
  }
  return "unknown";
}

inline System system_from_name(const std::string& name) {
  if (name == "convection") return System::convection;
  if (name == "diffusion") return System::diffusion;
  if (name == "reaction") return System::reaction;
  if (name == "convection-diffusion") return System::convection_diffusion;
  if (name == "reaction-diffusion") return System::reaction_diffusion;
  if (name == "cdr") return System::cdr;
  throw Error("config", "unknown system: " + name);
}

// Integer-grid coefficient space with the system's active axes on [lo, hi].
inline ParameterSpace system_space(System s, double lo, double hi) {
  ParameterSpace sp;
  auto on = [&](std::size_t axis) { sp.set_range(axis, lo, hi); };
  switch (s) {
    case System::convection:
      on(ParameterSpace::kBeta);
      break;
    case System::diffusion:
      on(ParameterSpace::kNu);
      break;
    case System::reaction:
      on(ParameterSpace::kRho1);
      break;
    case System::convection_diffusion:
      on(ParameterSpace::kBeta);
      on(ParameterSpace::kNu);
      break;
    case System::reaction_diffusion:
      on(ParameterSpace::kNu);
      on(ParameterSpace::kRho1);
      break;
    case System::cdr:
      on(ParameterSpace::kBeta);
      on(ParameterSpace::kNu);
      on(ParameterSpace::kRho1);
      break;
  }
  return sp;
}

// The single varying coefficient of a one-axis system, for sweep studies.
inline CdrParams single_axis_params(System s, double value) {
  CdrParams p;
  switch (s) {
    case System::convection:
      p.beta = value;
      return p;
    case System::diffusion:
      p.nu = value;
      return p;
    case System::reaction:
      p.rho[0] = value;
      return p;
    default:
      throw Error("config", "coefficient sweeps need a single-axis system");
  }
}

struct RunConfig {
  Grid grid{};
  InitialCondition ic{};
  PinnConfig pinn{};
  ModelConfig model{};
  double pinn_ratio = 0.0;
  NoiseSpec noise{};
  std::uint64_t seed = 0;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string run_note(const std::string& what, const RunConfig& cfg) {
  std::ostringstream os;
  os << what << " ratio=" << cfg.pinn_ratio << " noise=" << noise_kind_name(cfg.noise.kind)
     << "@" << cfg.noise.level << " grid=" << cfg.grid.nx << "x" << cfg.grid.nt
     << " ic=" << preset_name(cfg.ic.preset) << " epochs<=" << cfg.model.epochs
     << " seed=" << cfg.seed;
  return os.str();
}

}  // namespace detail

struct TrainedPipeline {
  PriorStore store;
  std::vector<SampleSet> sets;
  IclModel model;
  std::vector<double> epoch_loss;
};

inline TrainedPipeline train_pipeline_on(PriorStore store, std::vector<SampleSet> sets,
                                         const RunConfig& cfg) {
  TrainedPipeline p;
  p.store = std::move(store);
  p.sets = std::move(sets);
  ModelConfig mc = cfg.model;
  mc.seed = derive_seed(cfg.seed, 52, 0);
  auto res =
      train_model(IclModel::random(mc, derive_seed(cfg.seed, 51, 0)), p.store, p.sets, mc);
  p.model = std::move(res.model);
  p.epoch_loss = std::move(res.epoch_loss);
  return p;
}

inline TrainedPipeline train_pipeline_on(PriorStore store, const RunConfig& cfg) {
  auto sets = sample_all(store, derive_seed(cfg.seed, 50, 0));
  return train_pipeline_on(std::move(store), std::move(sets), cfg);
}

inline TrainedPipeline train_pipeline(const ParameterSpace& space, const RunConfig& cfg) {
  return train_pipeline_on(
      build_prior(space, cfg.pinn_ratio, cfg.noise, cfg.pinn, cfg.ic, cfg.grid, cfg.seed), cfg);
}

inline ErrorPair eval_zero_shot(const IclModel& m, const SampleSet& s) {
  return l2_errors(predict_zero_shot(m, s.test_context, s.test_query), s.test_query.u);
}

// Zero-shot evaluation on a coefficient vector outside the training store:
// solve it, sample test context/queries from the truth, predict.
inline ErrorPair eval_fresh_instance(const IclModel& m, const CdrParams& params,
                                     const RunConfig& cfg, std::uint64_t sample_seed,
                                     SampleSet* out_set = nullptr) {
  const SolutionField truth = solve_cdr(params, cfg.ic, cfg.grid);
  SampleSet s = sample_points(truth, truth, sample_seed);
  const ErrorPair e = eval_zero_shot(m, s);
  if (out_set) *out_set = std::move(s);
  return e;
}

inline ExperimentReport run_seen_interpolation(System system, double lo, double hi,
                                               const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = train_pipeline(system_space(system, lo, hi), cfg);
  ExperimentReport r;
  r.id = std::string("seen_") + system_name(system);
  for (std::size_t i = 0; i < p.store.size(); ++i)
    r.rows.push_back({p.store.params[i], eval_zero_shot(p.model, p.sets[i]), false, ""});
  finalize_report(r);
  r.wall_seconds = detail::seconds_since(t0);
  r.config_note = detail::run_note(r.id + " range=[" + std::to_string(lo) + "," +
                                       std::to_string(hi) + "]",
                                   cfg);
  return r;
}

// Deliberately hard settings: fast convection with the shifted-sine profile,
// and a wide reaction range. Errors here are expected to be large.
inline std::vector<ExperimentReport> run_failure_modes(const RunConfig& cfg) {
  RunConfig a = cfg;
  a.ic.preset = InitialCondition::Preset::one_plus_sin;
  auto r1 = run_seen_interpolation(System::convection, 30, 40, a);
  r1.id = "failure_convection";
  auto r2 = run_seen_interpolation(System::reaction, 1, 10, cfg);
  r2.id = "failure_reaction";
  return {std::move(r1), std::move(r2)};
}

struct RatioSweepResult {
  std::vector<double> ratios;
  std::vector<ExperimentReport> reports;  // aligned with ratios
  ErrorPair prior_error;                  // surrogate fields vs truth over the full grid
};

inline RatioSweepResult run_prior_ratio_sweep(System system, double lo, double hi,
                                              const RunConfig& cfg,
                                              std::vector<double> ratios = {0.0, 0.2, 0.4, 0.6,
                                                                            0.8, 1.0}) {
  const auto space = system_space(system, lo, hi);
  const auto store0 =
      build_prior(space, 0.0, cfg.noise, cfg.pinn, cfg.ic, cfg.grid, cfg.seed);
  const auto store1 =
      build_prior(space, 1.0, cfg.noise, cfg.pinn, cfg.ic, cfg.grid, cfg.seed);

  RatioSweepResult out;
  out.ratios = std::move(ratios);
  {
    double sa = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < store1.size(); ++i) {
      const Eigen::Map<const Eigen::RowVectorXd> p(store1.prior[i].values.data(),
                                                   store1.prior[i].values.size());
      const Eigen::Map<const Eigen::RowVectorXd> t(store1.truth[i].values.data(),
                                                   store1.truth[i].values.size());
      const ErrorPair e = l2_errors(p, t);
      sa += e.abs;
      sr += e.rel;
    }
    out.prior_error = {sa / double(store1.size()), sr / double(store1.size())};
  }

  for (const double ratio : out.ratios) {
    const auto t0 = std::chrono::steady_clock::now();
    PriorStore store = ratio == 0.0   ? store0
                       : ratio == 1.0 ? store1
                                      : mix_prior(store0, store1, ratio);
    const auto p = train_pipeline_on(std::move(store), cfg);
    ExperimentReport r;
    r.id = std::string("ratio_") + system_name(system) + "_" +
           std::to_string(int(std::lround(ratio * 100)));
    for (std::size_t i = 0; i < p.store.size(); ++i)
      r.rows.push_back({p.store.params[i], eval_zero_shot(p.model, p.sets[i]), false, ""});
    finalize_report(r);
    r.wall_seconds = detail::seconds_since(t0);
    RunConfig shown = cfg;
    shown.pinn_ratio = ratio;
    r.config_note = detail::run_note(r.id, shown);
    out.reports.push_back(std::move(r));
  }
  return out;
}

struct UnseenParamsResult {
  ExperimentReport seen;    // the trained integers, evaluated zero-shot
  ExperimentReport unseen;  // half-integer probes; extrapolated rows flagged
};

inline UnseenParamsResult run_unseen_params(System system, double lo, double hi,
                                            const RunConfig& cfg,
                                            std::size_t extrapolation_count = 11) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = train_pipeline(system_space(system, lo, hi), cfg);

  UnseenParamsResult out;
  out.seen.id = std::string("unseen_") + system_name(system) + "_seen_baseline";
  for (std::size_t i = 0; i < p.store.size(); ++i)
    out.seen.rows.push_back({p.store.params[i], eval_zero_shot(p.model, p.sets[i]), false, ""});
  finalize_report(out.seen);
  out.seen.wall_seconds = detail::seconds_since(t0);
  out.seen.config_note = detail::run_note(out.seen.id, cfg);

  const auto t1 = std::chrono::steady_clock::now();
  out.unseen.id = std::string("unseen_") + system_name(system);
  std::size_t k = 0;
  for (double v = lo + 0.5; v < hi; v += 1.0, ++k) {
    const CdrParams params = single_axis_params(system, v);
    out.unseen.rows.push_back(
        {params, eval_fresh_instance(p.model, params, cfg, derive_seed(cfg.seed, 53, k)), false,
         "interpolation"});
  }
  for (std::size_t j = 0; j < extrapolation_count; ++j, ++k) {
    const double v = hi + 0.5 + double(j);
    const CdrParams params = single_axis_params(system, v);
    out.unseen.rows.push_back(
        {params, eval_fresh_instance(p.model, params, cfg, derive_seed(cfg.seed, 53, k)), true,
         "extrapolation"});
  }
  finalize_report(out.unseen);
  out.unseen.wall_seconds = detail::seconds_since(t1);
  out.unseen.config_note = detail::run_note(out.unseen.id, cfg);
  return out;
}

struct TimeExtrapolationResult {
  ExperimentReport report;  // one row per test coefficient
  Eigen::MatrixXd profile;  // 4 x n rows (x, t, predicted, truth) for profile_beta
  double profile_beta = 0.0;
};

inline TimeExtrapolationResult run_time_extrapolation(const RunConfig& cfg,
                                                      double trained_lo = 1.0,
                                                      double trained_hi = 10.0,
                                                      std::vector<double> test_betas = {},
                                                      double t_split = 0.6) {
  const auto t0 = std::chrono::steady_clock::now();
  // Training mirrors the evaluation protocol: context before the split, the
  // regression queries after it, so the optimized objective is exactly the
  // forecast conditional the study scores.
  auto store = build_prior(system_space(System::convection, trained_lo, trained_hi),
                           cfg.pinn_ratio, cfg.noise, cfg.pinn, cfg.ic, cfg.grid, cfg.seed);
  std::vector<SampleSet> sets;
  sets.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i)
    sets.push_back(sample_points_horizon(store.prior[i], store.truth[i],
                                         derive_seed(cfg.seed, 57, i), t_split));
  const auto p = train_pipeline_on(std::move(store), std::move(sets), cfg);

  TimeExtrapolationResult out;
  out.report.id = "time_extrapolation";
  if (test_betas.empty())
    for (double v = 1.5; v <= 8.5; v += 1.0) test_betas.push_back(v);
  out.profile_beta = *std::max_element(test_betas.begin(), test_betas.end());

  for (std::size_t k = 0; k < test_betas.size(); ++k) {
    const CdrParams params = single_axis_params(System::convection, test_betas[k]);
    const SolutionField truth = solve_cdr(params, cfg.ic, cfg.grid);
    const SampleSet s =
        sample_points_time_split(truth, truth, derive_seed(cfg.seed, 54, k), t_split);
    if (s.test_context.xt.row(1).maxCoeff() > t_split)
      throw Error("config", "temporal split leaked a late context point");
    const Eigen::RowVectorXd pred = predict_zero_shot(p.model, s.test_context, s.test_query);
    out.report.rows.push_back({params, l2_errors(pred, s.test_query.u), true, ""});

    if (test_betas[k] == out.profile_beta) {
      out.profile.resize(4, pred.size());
      out.profile.row(0) = s.test_query.xt.row(0);
      out.profile.row(1) = s.test_query.xt.row(1);
      out.profile.row(2) = pred;
      out.profile.row(3) = s.test_query.u;
    }
  }
  finalize_report(out.report);
  out.report.wall_seconds = detail::seconds_since(t0);
  out.report.config_note = detail::run_note(out.report.id + " trained=[" +
                                                std::to_string(trained_lo) + "," +
                                                std::to_string(trained_hi) + "]",
                                            cfg);
  return out;
}

struct MultiReactionResult {
  ExperimentReport report;  // pure-term probes, labeled
  double fisher_rel = 0.0, allen_cahn_rel = 0.0, zeldovich_rel = 0.0;
};

inline MultiReactionResult run_multi_reaction(const RunConfig& cfg, double lo = 1.0,
                                              double hi = 3.0) {
  const auto t0 = std::chrono::steady_clock::now();
  ParameterSpace space;
  space.set_range(ParameterSpace::kRho1, lo, hi);
  space.set_range(ParameterSpace::kRho2, lo, hi);
  space.set_range(ParameterSpace::kRho3, lo, hi);
  const auto p = train_pipeline(space, cfg);

  MultiReactionResult out;
  out.report.id = "multi_reaction";
  const char* labels[3] = {"fisher", "allen_cahn", "zeldovich"};
  double sums[3] = {0, 0, 0};
  std::size_t counts[3] = {0, 0, 0};
  std::size_t k = 0;
  for (int term = 0; term < 3; ++term)
    for (double v = lo; v <= hi; v += 1.0, ++k) {
      CdrParams params;
      params.rho[std::size_t(term)] = v;
      const ErrorPair e =
          eval_fresh_instance(p.model, params, cfg, derive_seed(cfg.seed, 55, k));
      out.report.rows.push_back({params, e, false, labels[term]});
      sums[term] += e.rel;
      ++counts[term];
    }
  out.fisher_rel = sums[0] / double(counts[0]);
  out.allen_cahn_rel = sums[1] / double(counts[1]);
  out.zeldovich_rel = sums[2] / double(counts[2]);
  finalize_report(out.report);
  out.report.wall_seconds = detail::seconds_since(t0);
  out.report.config_note = detail::run_note(out.report.id + " combos=[" + std::to_string(lo) +
                                                "," + std::to_string(hi) + "]^3",
                                            cfg);
  return out;
}

struct NoiseStudyResult {
  ExperimentReport baseline;             // the noiseless run
  std::vector<ExperimentReport> runs;    // kind x level grid
};

inline NoiseStudyResult run_noise_study(System system, double lo, double hi, const RunConfig& cfg,
                                        std::vector<NoiseSpec::Kind> kinds = {NoiseSpec::Kind::P2,
                                                                              NoiseSpec::Kind::P3,
                                                                              NoiseSpec::Kind::P4},
                                        std::vector<double> levels = {0.01, 0.05, 0.10}) {
  NoiseStudyResult out;
  RunConfig base = cfg;
  base.noise = NoiseSpec{};
  out.baseline = run_seen_interpolation(system, lo, hi, base);
  out.baseline.id = std::string("noise_") + system_name(system) + "_P1";

  std::size_t k = 0;
  for (const auto kind : kinds)
    for (const double level : levels) {
      RunConfig noisy = cfg;
      noisy.noise = NoiseSpec{kind, level, derive_seed(cfg.seed, 56, k++)};
      auto r = run_seen_interpolation(system, lo, hi, noisy);
      r.id = std::string("noise_") + system_name(system) + "_" + noise_kind_name(kind) + "_" +
             std::to_string(int(std::lround(level * 100)));
      for (auto& row : r.rows) row.label = noise_kind_name(kind);
      out.runs.push_back(std::move(r));
    }
  return out;
}

}  // namespace icpde
