#pragma once

// JSON config file covering every tunable the tools expose. Every key is
// optional; absent keys keep the compiled-in defaults.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "icpde/experiments.hpp"

namespace icpde {

struct HarnessConfig {
  RunConfig run{};
  System system = System::reaction;
  double lo = 1.0;
  double hi = 5.0;
  bool svg = false;
};

inline nlohmann::json harness_config_json(const HarnessConfig& c) {
  nlohmann::json j;
  j["system"] = system_name(c.system);
  j["range"] = {c.lo, c.hi};
  j["seed"] = c.run.seed;
  j["svg"] = c.svg;
  j["grid"] = {{"nx", c.run.grid.nx}, {"nt", c.run.grid.nt}};
  j["initial_condition"] = {{"preset", preset_name(c.run.ic.preset)},
                            {"mean", c.run.ic.mean},
                            {"sigma", c.run.ic.sigma},
                            {"level", c.run.ic.level}};
  j["pinn_ratio"] = c.run.pinn_ratio;
  j["noise"] = {{"kind", noise_kind_name(c.run.noise.kind)},
                {"level", c.run.noise.level},
                {"seed", c.run.noise.seed}};
  j["pinn"] = {{"threshold", c.run.pinn.threshold},
               {"max_epochs", c.run.pinn.max_epochs},
               {"steps_per_epoch", c.run.pinn.steps_per_epoch},
               {"learning_rate", c.run.pinn.learning_rate},
               {"n_collocation", c.run.pinn.n_collocation},
               {"n_initial", c.run.pinn.n_initial},
               {"n_boundary", c.run.pinn.n_boundary},
               {"widths", c.run.pinn.widths}};
  j["model"] = {{"layers", c.run.model.layers},
                {"hidden", c.run.model.hidden},
                {"heads", c.run.model.heads},
                {"ffn_width", c.run.model.ffn_width},
                {"lr", c.run.model.lr},
                {"epochs", c.run.model.epochs},
                {"patience", c.run.model.patience},
                {"min_rel_improvement", c.run.model.min_rel_improvement}};
  return j;
}

inline HarnessConfig harness_config_from_json(const nlohmann::json& j) {
  HarnessConfig c;
  try {
    if (j.contains("system")) c.system = system_from_name(j.at("system").get<std::string>());
    if (j.contains("range")) {
      const auto& r = j.at("range");
      if (!r.is_array() || r.size() != 2) throw Error("config", "range must be [lo, hi]");
      c.lo = r[0].get<double>();
      c.hi = r[1].get<double>();
    }
    c.run.seed = j.value("seed", c.run.seed);
    c.svg = j.value("svg", c.svg);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      c.run.grid.nx = g.value("nx", c.run.grid.nx);
      c.run.grid.nt = g.value("nt", c.run.grid.nt);
      c.run.grid.validate();
    }
    if (j.contains("initial_condition")) {
      const auto& ic = j.at("initial_condition");
      if (ic.contains("preset"))
        c.run.ic.preset = preset_from_name(ic.at("preset").get<std::string>());
      c.run.ic.mean = ic.value("mean", c.run.ic.mean);
      c.run.ic.sigma = ic.value("sigma", c.run.ic.sigma);
      c.run.ic.level = ic.value("level", c.run.ic.level);
    }
    c.run.pinn_ratio = j.value("pinn_ratio", c.run.pinn_ratio);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      if (n.contains("kind"))
        c.run.noise.kind = noise_kind_from_name(n.at("kind").get<std::string>());
      c.run.noise.level = n.value("level", c.run.noise.level);
      c.run.noise.seed = n.value("seed", c.run.noise.seed);
    }
    if (j.contains("pinn")) {
      const auto& p = j.at("pinn");
      c.run.pinn.threshold = p.value("threshold", c.run.pinn.threshold);
      c.run.pinn.max_epochs = p.value("max_epochs", c.run.pinn.max_epochs);
      c.run.pinn.steps_per_epoch = p.value("steps_per_epoch", c.run.pinn.steps_per_epoch);
      c.run.pinn.learning_rate = p.value("learning_rate", c.run.pinn.learning_rate);
      c.run.pinn.n_collocation = p.value("n_collocation", c.run.pinn.n_collocation);
      c.run.pinn.n_initial = p.value("n_initial", c.run.pinn.n_initial);
      c.run.pinn.n_boundary = p.value("n_boundary", c.run.pinn.n_boundary);
      if (p.contains("widths")) {
        c.run.pinn.widths.clear();
        for (const auto& w : p.at("widths")) c.run.pinn.widths.push_back(w.get<Eigen::Index>());
      }
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      c.run.model.layers = m.value("layers", c.run.model.layers);
      c.run.model.hidden = m.value("hidden", c.run.model.hidden);
      c.run.model.heads = m.value("heads", c.run.model.heads);
      c.run.model.ffn_width = m.value("ffn_width", c.run.model.ffn_width);
      c.run.model.lr = m.value("lr", c.run.model.lr);
      c.run.model.epochs = m.value("epochs", c.run.model.epochs);
      c.run.model.patience = m.value("patience", c.run.model.patience);
      c.run.model.min_rel_improvement =
          m.value("min_rel_improvement", c.run.model.min_rel_improvement);
      c.run.model.validate();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("config", std::string("bad config value: ") + e.what());
  }
  return c;
}

inline HarnessConfig load_harness_config(const std::filesystem::path& path) {
  const std::string text = detail::read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("config", path.string() + " is not valid JSON: " + e.what());
  }
  return harness_config_from_json(j);
}

}  // namespace icpde
