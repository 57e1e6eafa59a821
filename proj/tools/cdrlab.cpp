// cdrlab: command-line front end for the PDE family lab. Subcommands generate
// reference and surrogate datasets, train and evaluate the in-context model,
// and run the canned studies. Errors leave one JSON line on stderr.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icpde/config.hpp"
#include "icpde/report.hpp"

namespace fs = std::filesystem;
using namespace icpde;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

HarnessConfig effective_config(const Options& o) {
  HarnessConfig cfg;
  if (!o.config_path.empty()) cfg = load_harness_config(o.config_path);
  if (o.seed_given) cfg.run.seed = o.seed;
  return cfg;
}

fs::path resolved(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

void emit(const ExperimentReport& r, const fs::path& dir, bool svg) {
  write_report_files(r, dir, svg);
  std::cout << report_csv_path(dir, r.id).string() << ": n=" << r.rows.size()
            << " mean_abs=" << r.mean_abs << " mean_rel=" << r.mean_rel << "\n";
}

int run_gen(const Options& o, bool surrogate) {
  const auto cfg = effective_config(o);
  HarnessConfig c = cfg;
  if (!surrogate) {
    // reference-only dataset: prior columns repeat the solver output
    c.run.pinn_ratio = 0.0;
    c.run.noise = NoiseSpec{};
  }
  const auto store = build_prior(system_space(c.system, c.lo, c.hi), c.run.pinn_ratio,
                                 c.run.noise, c.run.pinn, c.run.ic, c.run.grid, c.run.seed);
  const auto sets = sample_all(store, derive_seed(c.run.seed, 50, 0));
  const fs::path dir = fs::path(o.out_dir) / "dataset";
  save_dataset(store, sets, dir);
  std::cout << dir.string() << ": " << store.size() << " coefficient vectors, "
            << (surrogate ? "surrogate" : "reference") << " prior\n";
  return 0;
}

int run_train(const Options& o, const std::string& data, const std::string& model_out) {
  const auto cfg = effective_config(o);
  const auto [store, sets] = load_dataset(resolved(data, fs::path(o.out_dir) / "dataset"));
  ModelConfig mc = cfg.run.model;
  mc.seed = derive_seed(cfg.run.seed, 52, 0);
  auto res = train_model(IclModel::random(mc, derive_seed(cfg.run.seed, 51, 0)), store, sets, mc);

  const fs::path model_path = resolved(model_out, fs::path(o.out_dir) / "model.bin");
  fs::create_directories(model_path.parent_path().empty() ? "." : model_path.parent_path());
  save_model(res.model, model_path);

  std::string loss_csv = "epoch,loss\n";
  for (std::size_t i = 0; i < res.epoch_loss.size(); ++i) {
    loss_csv += std::to_string(i);
    loss_csv += ',';
    detail::append_g17(loss_csv, res.epoch_loss[i]);
    loss_csv += '\n';
  }
  const fs::path loss_path = fs::path(o.out_dir) / "train_loss.csv";
  std::ofstream(loss_path, std::ios::binary) << loss_csv;

  std::cout << model_path.string() << ": " << res.epoch_loss.size() << " epochs, final loss "
            << (res.epoch_loss.empty() ? 0.0 : res.epoch_loss.back()) << "\n";
  return 0;
}

int run_eval(const Options& o, const std::string& data, const std::string& model_path,
             const std::string& id) {
  const auto cfg = effective_config(o);
  const auto model = load_model(resolved(model_path, fs::path(o.out_dir) / "model.bin"));
  const auto [store, sets] = load_dataset(resolved(data, fs::path(o.out_dir) / "dataset"));

  ExperimentReport r;
  r.id = id;
  for (std::size_t i = 0; i < store.size(); ++i)
    r.rows.push_back({store.params[i], eval_zero_shot(model, sets[i]), false, ""});
  finalize_report(r);
  r.config_note = "zero-shot evaluation of a saved checkpoint";
  emit(r, o.out_dir, cfg.svg);
  return 0;
}

int run_experiment(const Options& o, const std::string& id) {
  const auto cfg = effective_config(o);
  const fs::path dir(o.out_dir);
  const auto& rc = cfg.run;

  if (id == "seen") {
    emit(run_seen_interpolation(cfg.system, cfg.lo, cfg.hi, rc), dir, cfg.svg);
  } else if (id == "ratio") {
    const auto sweep = run_prior_ratio_sweep(cfg.system, cfg.lo, cfg.hi, rc);
    for (const auto& r : sweep.reports) emit(r, dir, cfg.svg);
    ExperimentReport prior;
    prior.id = std::string("ratio_") + system_name(cfg.system) + "_prior";
    prior.rows.push_back({CdrParams{}, sweep.prior_error, false, "prior"});
    finalize_report(prior);
    prior.config_note = "surrogate fields vs reference over the full grid, ratio 1";
    emit(prior, dir, false);
  } else if (id == "unseen") {
    const auto res = run_unseen_params(cfg.system, cfg.lo, cfg.hi, rc);
    emit(res.seen, dir, cfg.svg);
    emit(res.unseen, dir, cfg.svg);
  } else if (id == "time") {
    const auto res = run_time_extrapolation(rc, cfg.lo, cfg.hi);
    emit(res.report, dir, cfg.svg);
    char tag[32];
    std::snprintf(tag, sizeof tag, "beta_%g", res.profile_beta);
    std::cout << write_profile_csv(res.profile, dir, tag).string() << "\n";
  } else if (id == "multi") {
    const auto res = run_multi_reaction(rc, cfg.lo, cfg.hi);
    emit(res.report, dir, cfg.svg);
    std::cout << "pure-term mean rel: fisher=" << res.fisher_rel
              << " allen_cahn=" << res.allen_cahn_rel << " zeldovich=" << res.zeldovich_rel
              << "\n";
  } else if (id == "noise") {
    const auto res = run_noise_study(cfg.system, cfg.lo, cfg.hi, rc);
    emit(res.baseline, dir, cfg.svg);
    for (const auto& r : res.runs) emit(r, dir, cfg.svg);
  } else if (id == "failure") {
    for (const auto& r : run_failure_modes(rc)) emit(r, dir, cfg.svg);
  } else {
    throw Error("config",
                "unknown experiment '" + id +
                    "' (expected seen, ratio, unseen, time, multi, noise, or failure)");
  }
  return 0;
}

int run_report(const Options& o) {
  const fs::path dir(o.out_dir);
  if (!fs::is_directory(dir)) throw Error("missing_file", dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("report_", 0) == 0 && e.path().extension() == ".csv")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("missing_file", "no report CSVs under " + dir.string());

  for (const auto& f : files) {
    const auto rep = parse_report_csv(f);
    double ma = 0, mr = 0;
    for (std::size_t i = 0; i < rep.abs_err.size(); ++i) {
      ma += rep.abs_err[i];
      mr += rep.rel_err[i];
    }
    const auto n = double(std::max<std::size_t>(rep.abs_err.size(), 1));
    std::cout << f.filename().string() << ": n=" << rep.abs_err.size()
              << " mean_abs=" << ma / n << " mean_rel=" << mr / n << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"in-context PDE family lab"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Options o;
  app.add_option("--config", o.config_path, "JSON config file; absent keys keep defaults");
  app.add_option("--out-dir", o.out_dir, "output directory (default: out)");
  auto* seed_opt = app.add_option("--seed", o.seed, "master seed (overrides config)");
  app.add_option("--threads", o.threads,
                 "worker threads; computation is sequential, values > 1 are accepted only "
                 "for interface stability")
      ->check(CLI::PositiveNumber);

  auto* gen_truth = app.add_subcommand("gen-truth", "solve the range and write a dataset");
  auto* gen_prior =
      app.add_subcommand("gen-prior", "write a dataset with the configured surrogate prior");

  std::string data, model_out, model_in, eval_id = "eval";
  auto* train = app.add_subcommand("train", "train the in-context model on a dataset");
  train->add_option("--data", data, "dataset directory (default: <out-dir>/dataset)");
  train->add_option("--model-out", model_out, "checkpoint path (default: <out-dir>/model.bin)");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint zero-shot on a dataset");
  eval->add_option("--data", data, "dataset directory (default: <out-dir>/dataset)");
  eval->add_option("--model", model_in, "checkpoint path (default: <out-dir>/model.bin)");
  eval->add_option("--id", eval_id, "report id (default: eval)");

  std::string experiment_id;
  auto* experiment = app.add_subcommand("experiment", "run a canned study");
  experiment->add_option("id", experiment_id, "seen|ratio|unseen|time|multi|noise|failure")
      ->required();

  auto* report = app.add_subcommand("report", "summarize the report CSVs in out-dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << nlohmann::json{{"error", "cli"}, {"message", e.what()}}.dump() << "\n";
    return e.get_exit_code();
  }
  o.seed_given = seed_opt->count() > 0;

  try {
    if (gen_truth->parsed()) return run_gen(o, false);
    if (gen_prior->parsed()) return run_gen(o, true);
    if (train->parsed()) return run_train(o, data, model_out);
    if (eval->parsed()) return run_eval(o, data, model_in, eval_id);
    if (experiment->parsed()) return run_experiment(o, experiment_id);
    if (report->parsed()) return run_report(o);
  } catch (const Error& e) {
    std::cerr << nlohmann::json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
