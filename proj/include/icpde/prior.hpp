#pragma once

// Assembles the training prior over a parameter space: every alpha gets a
// reference (numerical) run, a seeded subset gets surrogate fields from the
// physics-informed net instead, and numerical fields may be noise-corrupted.

#include <cmath>
#include <cstdint>
#include <vector>

#include "icpde/core.hpp"
#include "icpde/pinn.hpp"
#include "icpde/sampling.hpp"
#include "icpde/solver.hpp"

namespace icpde {

struct PriorStore {
  std::vector<CdrParams> params;     // enumeration order of the space
  std::vector<SolutionField> prior;  // aligned with params
  std::vector<SolutionField> truth;  // aligned with params
  Grid grid;
  InitialCondition ic;
  double pinn_ratio = 0.0;
  NoiseSpec noise{};
  std::uint64_t seed = 0;

  std::size_t size() const { return params.size(); }

  std::size_t index_of(const CdrParams& p) const {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i] == p) return i;
    throw Error("config", "parameters not in the prior store: " + describe(p));
  }
};

inline PriorStore build_prior(const ParameterSpace& space, double pinn_ratio,
                              const NoiseSpec& noise, const PinnConfig& pinn_cfg,
                              const InitialCondition& ic = {}, const Grid& grid = {},
                              std::uint64_t seed = 0) {
  if (pinn_ratio < 0.0 || pinn_ratio > 1.0)
    throw Error("config", "pinn mix ratio must lie in [0, 1]");

  PriorStore store;
  store.params = enumerate_parameters(space);
  store.grid = grid;
  store.ic = ic;
  store.pinn_ratio = pinn_ratio;
  store.noise = noise;
  store.seed = seed;

  const std::size_t n = store.params.size();
  const auto n_pinn = static_cast<std::size_t>(std::llround(pinn_ratio * static_cast<double>(n)));
  std::vector<char> use_pinn(n, 0);
  {
    Rng rng(derive_seed(seed, 20, 0));
    for (auto i : rng.sample_without_replacement(n, n_pinn)) use_pinn[i] = 1;
  }

  store.prior.reserve(n);
  store.truth.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CdrParams& p = store.params[i];
    SolutionField ref = solve_cdr(p, ic, grid);
    SolutionField field;
    if (use_pinn[i]) {
      PinnConfig cfg = pinn_cfg;
      cfg.seed = derive_seed(seed, 21, i);
      field = train_pinn(p, cfg, ic, grid).field;
    } else if (noise.kind != NoiseSpec::Kind::P1) {
      NoiseSpec per_field = noise;
      per_field.seed = derive_seed(noise.seed, 22, i);
      field = inject_noise(ref, per_field);
    } else {
      field = ref;
    }
    store.truth.push_back(std::move(ref));
    store.prior.push_back(std::move(field));
  }
  return store;
}

// Combines a ratio-0 store and a ratio-1 store into a mixed store without
// retraining anything. Uses the same seeded subset selection as build_prior,
// so the result is bit-identical to building at that ratio directly.
inline PriorStore mix_prior(const PriorStore& numerical, const PriorStore& pinn, double ratio) {
  if (ratio < 0.0 || ratio > 1.0) throw Error("config", "pinn mix ratio must lie in [0, 1]");
  if (numerical.params != pinn.params || numerical.seed != pinn.seed)
    throw Error("config", "mixing requires stores over the same space and seed");

  PriorStore out = numerical;
  out.pinn_ratio = ratio;
  const std::size_t n = out.size();
  const auto n_pinn = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  Rng rng(derive_seed(out.seed, 20, 0));
  for (auto i : rng.sample_without_replacement(n, n_pinn)) out.prior[i] = pinn.prior[i];
  return out;
}

// One sampled context/query bundle per alpha, seeded per entry.
inline std::vector<SampleSet> sample_all(const PriorStore& store, std::uint64_t seed) {
  std::vector<SampleSet> sets;
  sets.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i)
    sets.push_back(sample_points(store.prior[i], store.truth[i], derive_seed(seed, 23, i)));
  return sets;
}

}  // namespace icpde
