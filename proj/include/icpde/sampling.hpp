#pragma once

// Context/query sampling and the noise priors. All randomness is seeded;
// noise is applied once to a field, never resampled.

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "icpde/core.hpp"
#include "icpde/rng.hpp"

namespace icpde {

struct NoiseSpec {
  enum class Kind { P1, P2, P3, P4 };
  Kind kind = Kind::P1;
  double level = 0.0;  // P2/P4: scale as a fraction of the field mean; P3: flip probability
  std::uint64_t seed = 0;
};

inline const char* noise_kind_name(NoiseSpec::Kind k) {
  switch (k) {
    case NoiseSpec::Kind::P1:
      return "P1";
    case NoiseSpec::Kind::P2:
      return "P2";
    case NoiseSpec::Kind::P3:
      return "P3";
    case NoiseSpec::Kind::P4:
      return "P4";
  }
  return "unknown";
}

inline NoiseSpec::Kind noise_kind_from_name(const std::string& name) {
  if (name == "P1") return NoiseSpec::Kind::P1;
  if (name == "P2") return NoiseSpec::Kind::P2;
  if (name == "P3") return NoiseSpec::Kind::P3;
  if (name == "P4") return NoiseSpec::Kind::P4;
  throw Error("config", "unknown noise kind: " + name);
}

inline SolutionField inject_noise(const SolutionField& field, const NoiseSpec& spec) {
  if (!field.finite()) throw Error("config", "noise injection requires a finite field");
  if (spec.level < 0.0) throw Error("config", "noise level must be >= 0");
  if (spec.kind == NoiseSpec::Kind::P1) return field;

  SolutionField out = field;
  out.provenance = Provenance::noisy;
  Rng rng(derive_seed(spec.seed, 30, 0));
  double* data = out.values.data();
  const Eigen::Index n = out.values.size();
  const double mean = field.values.mean();

  switch (spec.kind) {
    case NoiseSpec::Kind::P2: {
      const double sigma = spec.level * std::abs(mean);
      for (Eigen::Index i = 0; i < n; ++i) data[i] += rng.normal(0.0, sigma);
      break;
    }
    case NoiseSpec::Kind::P3: {
      // Each value is scaled by min(U) or max(U) of its own field with
      // probability level/2 apiece, else kept.
      const double gamma = spec.level;
      const double lo = field.values.minCoeff();
      const double hi = field.values.maxCoeff();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = rng.uniform();
        if (u < 0.5 * gamma)
          data[i] *= lo;
        else if (u < gamma)
          data[i] *= hi;
      }
      break;
    }
    case NoiseSpec::Kind::P4: {
      const double eps = spec.level * std::abs(mean);
      for (Eigen::Index i = 0; i < n; ++i) data[i] += rng.uniform(-eps, eps);
      break;
    }
    case NoiseSpec::Kind::P1:
      break;
  }
  return out;
}

// Sampled sets per parameter vector: context D and train queries T carry
// prior values; test context and test queries carry reference values.
struct PointSet {
  Eigen::MatrixXd xt;                // 2 x n (row 0 = x, row 1 = t)
  Eigen::RowVectorXd u;              // 1 x n
  std::vector<std::size_t> node;     // flat grid index it * nx + ix per point
};

inline constexpr std::size_t kContextCount = 240;
inline constexpr std::size_t kTrainQueryCount = 560;
inline constexpr std::size_t kTestContextCount = 200;
inline constexpr std::size_t kTestQueryCount = 1000;
inline constexpr std::size_t kCollocationCount =
    kContextCount + kTrainQueryCount + kTestContextCount;

struct SampleSet {
  CdrParams params;
  std::uint64_t seed = 0;
  PointSet context;       // D
  PointSet train_query;   // T
  PointSet test_context;  // test-time context, values from the reference run
  PointSet test_query;    // held-out queries, values from the reference run
};

namespace detail {

inline PointSet make_point_set(const SolutionField& src, const std::vector<std::size_t>& nodes) {
  PointSet s;
  s.node = nodes;
  s.xt.resize(2, static_cast<Eigen::Index>(nodes.size()));
  s.u.resize(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t ix = nodes[i] % src.grid.nx;
    const std::size_t it = nodes[i] / src.grid.nx;
    s.xt(0, static_cast<Eigen::Index>(i)) = src.grid.x(ix);
    s.xt(1, static_cast<Eigen::Index>(i)) = src.grid.t(it);
    s.u(static_cast<Eigen::Index>(i)) =
        src.values(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(it));
  }
  return s;
}

}  // namespace detail

namespace detail {

inline std::vector<std::size_t> pick_from_pool(Rng& rng, const std::vector<std::size_t>& pool,
                                               std::size_t k) {
  const auto pick = rng.sample_without_replacement(pool.size(), k);
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = pool[pick[i]];
  return out;
}

}  // namespace detail

inline SampleSet sample_points(const SolutionField& field, const SolutionField& truth,
                               std::uint64_t seed) {
  if (field.grid != truth.grid) throw Error("grid_mismatch", "prior and reference grids differ");
  const std::size_t nx = field.grid.nx;
  const std::size_t interior = nx * (field.grid.nt - 1);
  if (interior < kCollocationCount + kTestQueryCount)
    throw Error("config", "grid too small for the sampling contract");

  Rng rng(derive_seed(seed, 10, 0));

  // 1000 interior nodes; 800 of them split 30/70 into context and train
  // queries, the remaining 200 become test context.
  auto coll = rng.sample_without_replacement(interior, kCollocationCount);
  for (auto& k : coll) k += nx;  // interior index -> flat node index (skip t = 0)
  rng.shuffle(coll);
  const std::vector<std::size_t> d_nodes(coll.begin(), coll.begin() + kContextCount);
  const std::vector<std::size_t> t_nodes(coll.begin() + kContextCount,
                                         coll.begin() + kContextCount + kTrainQueryCount);
  const std::vector<std::size_t> dt_nodes(coll.begin() + kContextCount + kTrainQueryCount,
                                          coll.end());

  // Test queries: interior nodes never used as collocation nodes.
  std::vector<char> used(interior + nx, 0);
  for (auto k : coll) used[k] = 1;
  std::vector<std::size_t> pool;
  pool.reserve(interior - kCollocationCount);
  for (std::size_t k = nx; k < interior + nx; ++k)
    if (!used[k]) pool.push_back(k);
  const auto pick = rng.sample_without_replacement(pool.size(), kTestQueryCount);
  std::vector<std::size_t> tq_nodes(kTestQueryCount);
  for (std::size_t i = 0; i < kTestQueryCount; ++i) tq_nodes[i] = pool[pick[i]];

  SampleSet out;
  out.params = field.params;
  out.seed = seed;
  out.context = detail::make_point_set(field, d_nodes);
  out.train_query = detail::make_point_set(field, t_nodes);
  out.test_context = detail::make_point_set(truth, dt_nodes);
  out.test_query = detail::make_point_set(truth, tq_nodes);
  return out;
}

namespace detail {

inline void split_by_time(const Grid& g, double t_split, std::vector<std::size_t>& low,
                          std::vector<std::size_t>& high) {
  for (std::size_t it = 1; it < g.nt; ++it) {
    auto& dst = g.t(it) <= t_split ? low : high;
    for (std::size_t ix = 0; ix < g.nx; ++ix) dst.push_back(it * g.nx + ix);
  }
}

}  // namespace detail

// Temporal-generalization split: everything context-like lives at t <= t_split,
// test queries live strictly beyond it.
inline SampleSet sample_points_time_split(const SolutionField& field, const SolutionField& truth,
                                          std::uint64_t seed, double t_split = 0.6) {
  if (field.grid != truth.grid) throw Error("grid_mismatch", "prior and reference grids differ");
  std::vector<std::size_t> low, high;
  detail::split_by_time(field.grid, t_split, low, high);
  if (low.size() < kCollocationCount || high.size() < kTestQueryCount)
    throw Error("config", "grid too small for the temporal split");

  Rng rng(derive_seed(seed, 11, 0));
  auto coll = detail::pick_from_pool(rng, low, kCollocationCount);
  rng.shuffle(coll);
  const std::vector<std::size_t> d_nodes(coll.begin(), coll.begin() + kContextCount);
  const std::vector<std::size_t> t_nodes(coll.begin() + kContextCount,
                                         coll.begin() + kContextCount + kTrainQueryCount);
  const std::vector<std::size_t> dt_nodes(coll.begin() + kContextCount + kTrainQueryCount,
                                          coll.end());
  const auto tq_nodes = detail::pick_from_pool(rng, high, kTestQueryCount);

  SampleSet out;
  out.params = field.params;
  out.seed = seed;
  out.context = detail::make_point_set(field, d_nodes);
  out.train_query = detail::make_point_set(field, t_nodes);
  out.test_context = detail::make_point_set(truth, dt_nodes);
  out.test_query = detail::make_point_set(truth, tq_nodes);
  return out;
}

// Forecast split, the training-side counterpart: both context sets stay at
// t <= t_split while both query sets move past it, so regression on these
// sets optimizes carrying early observations forward in time.
inline SampleSet sample_points_horizon(const SolutionField& field, const SolutionField& truth,
                                       std::uint64_t seed, double t_split = 0.6) {
  if (field.grid != truth.grid) throw Error("grid_mismatch", "prior and reference grids differ");
  std::vector<std::size_t> low, high;
  detail::split_by_time(field.grid, t_split, low, high);
  if (low.size() < kContextCount + kTestContextCount ||
      high.size() < kTrainQueryCount + kTestQueryCount)
    throw Error("config", "grid too small for the temporal split");

  Rng rng(derive_seed(seed, 12, 0));
  auto ctx = detail::pick_from_pool(rng, low, kContextCount + kTestContextCount);
  rng.shuffle(ctx);
  const std::vector<std::size_t> d_nodes(ctx.begin(), ctx.begin() + kContextCount);
  const std::vector<std::size_t> dt_nodes(ctx.begin() + kContextCount, ctx.end());
  auto qry = detail::pick_from_pool(rng, high, kTrainQueryCount + kTestQueryCount);
  rng.shuffle(qry);
  const std::vector<std::size_t> t_nodes(qry.begin(), qry.begin() + kTrainQueryCount);
  const std::vector<std::size_t> tq_nodes(qry.begin() + kTrainQueryCount, qry.end());

  SampleSet out;
  out.params = field.params;
  out.seed = seed;
  out.context = detail::make_point_set(field, d_nodes);
  out.train_query = detail::make_point_set(field, t_nodes);
  out.test_context = detail::make_point_set(truth, dt_nodes);
  out.test_query = detail::make_point_set(truth, tq_nodes);
  return out;
}

}  // namespace icpde
