#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "icpde/sampling.hpp"
#include "icpde/solver.hpp"

using namespace icpde;

namespace {

SolutionField constant_field(double value) {
  SolutionField f;
  f.grid = Grid{};
  f.values = Eigen::MatrixXd::Constant(256, 100, value);
  f.provenance = Provenance::numerical;
  return f;
}

SolutionField ramp_field() {
  SolutionField f;
  f.grid = Grid{};
  f.values.resize(256, 100);
  for (Eigen::Index j = 0; j < 100; ++j)
    for (Eigen::Index i = 0; i < 256; ++i) f.values(i, j) = 0.2 + 0.6 * double(i) / 255.0;
  f.provenance = Provenance::numerical;
  return f;
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("sample counts follow the 240/560/200/1000 contract") {
  const auto truth = solve_cdr({1.0, 0.0, {0, 0, 0}}, {}, Grid{});
  const auto s = sample_points(truth, truth, 7);
  REQUIRE(s.context.node.size() == 240);
  REQUIRE(s.train_query.node.size() == 560);
  REQUIRE(s.test_context.node.size() == 200);
  REQUIRE(s.test_query.node.size() == 1000);
}

TEST_CASE("sets are internally duplicate-free and mutually disjoint") {
  const auto truth = solve_cdr({1.0, 0.0, {0, 0, 0}}, {}, Grid{});
  const auto s = sample_points(truth, truth, 19);

  const auto d = as_set(s.context.node);
  const auto t = as_set(s.train_query.node);
  const auto dt = as_set(s.test_context.node);
  const auto tq = as_set(s.test_query.node);
  REQUIRE(d.size() == 240);
  REQUIRE(t.size() == 560);
  REQUIRE(dt.size() == 200);
  REQUIRE(tq.size() == 1000);

  auto disjoint = [](const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
    return std::none_of(a.begin(), a.end(), [&](std::size_t k) { return b.count(k) > 0; });
  };
  REQUIRE(disjoint(d, t));
  REQUIRE(disjoint(d, dt));
  REQUIRE(disjoint(t, dt));
  REQUIRE(disjoint(tq, d));
  REQUIRE(disjoint(tq, t));
  REQUIRE(disjoint(tq, dt));
}

TEST_CASE("sampled points sit on interior grid nodes with matching coordinates") {
  const auto truth = solve_cdr({0.0, 1.0, {0, 0, 0}}, {}, Grid{});
  const auto s = sample_points(truth, truth, 3);
  const Grid& g = truth.grid;
  for (const PointSet* ps : {&s.context, &s.train_query, &s.test_context, &s.test_query}) {
    for (std::size_t i = 0; i < ps->node.size(); ++i) {
      const std::size_t ix = ps->node[i] % g.nx;
      const std::size_t it = ps->node[i] / g.nx;
      REQUIRE(it >= 1);  // never the initial slice
      REQUIRE(it < g.nt);
      REQUIRE(ps->xt(0, Eigen::Index(i)) == g.x(ix));
      REQUIRE(ps->xt(1, Eigen::Index(i)) == g.t(it));
      REQUIRE(ps->u(Eigen::Index(i)) ==
              truth.values(Eigen::Index(ix), Eigen::Index(it)));
    }
  }
}

TEST_CASE("identical seeds reproduce the sets; different seeds move them") {
  const auto truth = solve_cdr({1.0, 0.0, {0, 0, 0}}, {}, Grid{});
  const auto a = sample_points(truth, truth, 42);
  const auto b = sample_points(truth, truth, 42);
  REQUIRE(a.context.node == b.context.node);
  REQUIRE(a.train_query.node == b.train_query.node);
  REQUIRE(a.test_context.node == b.test_context.node);
  REQUIRE(a.test_query.node == b.test_query.node);
  REQUIRE(a.context.u == b.context.u);

  const auto c = sample_points(truth, truth, 43);
  REQUIRE(a.context.node != c.context.node);
}

TEST_CASE("context values come from the prior field, test values from the reference") {
  const auto truth = solve_cdr({1.0, 0.0, {0, 0, 0}}, {}, Grid{});
  SolutionField prior = truth;
  prior.values.array() += 0.25;  // make the two distinguishable
  prior.provenance = Provenance::pinn;
  const auto s = sample_points(prior, truth, 8);
  const Grid& g = truth.grid;
  auto value_at = [&](const SolutionField& f, std::size_t node) {
    return f.values(Eigen::Index(node % g.nx), Eigen::Index(node / g.nx));
  };
  for (std::size_t i = 0; i < 240; ++i)
    REQUIRE(s.context.u(Eigen::Index(i)) == value_at(prior, s.context.node[i]));
  for (std::size_t i = 0; i < 200; ++i)
    REQUIRE(s.test_context.u(Eigen::Index(i)) == value_at(truth, s.test_context.node[i]));
  for (std::size_t i = 0; i < 1000; ++i)
    REQUIRE(s.test_query.u(Eigen::Index(i)) == value_at(truth, s.test_query.node[i]));
}

TEST_CASE("mismatched grids are rejected") {
  const auto a = solve_cdr({1.0, 0.0, {0, 0, 0}}, {}, Grid{});
  const auto b = solve_cdr({1.0, 0.0, {0, 0, 0}}, {}, Grid{128, 100});
  try {
    sample_points(a, b, 0);
    FAIL("expected grid_mismatch");
  } catch (const Error& e) {
    REQUIRE(e.kind() == "grid_mismatch");
  }
}

TEST_CASE("noiseless kinds leave values untouched") {
  const auto clean = constant_field(0.5);
  const auto p1 = inject_noise(clean, {NoiseSpec::Kind::P1, 0.10, 1});
  REQUIRE(p1.values == clean.values);
  REQUIRE(p1.provenance == Provenance::numerical);

  const auto p3_zero = inject_noise(clean, {NoiseSpec::Kind::P3, 0.0, 1});
  REQUIRE(p3_zero.values == clean.values);

  const auto p2_zero = inject_noise(clean, {NoiseSpec::Kind::P2, 0.0, 1});
  REQUIRE(p2_zero.values == clean.values);
  REQUIRE(p2_zero.provenance == Provenance::noisy);
}

TEST_CASE("gaussian noise at 10 percent of a 0.5-mean field has sd near 0.05") {
  const auto clean = constant_field(0.5);
  const auto noisy = inject_noise(clean, {NoiseSpec::Kind::P2, 0.10, 77});
  const Eigen::ArrayXXd delta = noisy.values.array() - clean.values.array();
  const double n = double(delta.size());
  const double sd = std::sqrt(delta.square().sum() / n);
  REQUIRE(sd >= 0.0475);
  REQUIRE(sd <= 0.0525);
  // Sample mean of the added noise concentrates around zero.
  REQUIRE(std::abs(delta.mean()) < 3.0 * 0.05 / std::sqrt(n));
  REQUIRE(noisy.provenance == Provenance::noisy);
}

TEST_CASE("uniform noise respects its hard amplitude bound") {
  const auto clean = constant_field(0.5);
  const auto noisy = inject_noise(clean, {NoiseSpec::Kind::P4, 0.05, 12});
  const double bound = 0.05 * 0.5;
  REQUIRE(((noisy.values - clean.values).array().abs() <= bound).all());
}

TEST_CASE("salt-and-pepper flips scale by the field extremes at rate gamma") {
  const auto clean = ramp_field();
  const double lo = clean.values.minCoeff();
  const double hi = clean.values.maxCoeff();
  const double gamma = 0.3;
  const auto noisy = inject_noise(clean, {NoiseSpec::Kind::P3, gamma, 5});

  std::size_t flipped = 0;
  for (Eigen::Index j = 0; j < clean.values.cols(); ++j)
    for (Eigen::Index i = 0; i < clean.values.rows(); ++i) {
      const double v = clean.values(i, j);
      const double w = noisy.values(i, j);
      const bool is_clean = w == v;
      const bool is_lo = w == v * lo;
      const bool is_hi = w == v * hi;
      REQUIRE((is_clean || is_lo || is_hi));
      flipped += !is_clean;
    }
  const double n = double(clean.values.size());
  const double frac = double(flipped) / n;
  const double sd = std::sqrt(gamma * (1.0 - gamma) / n);
  REQUIRE(std::abs(frac - gamma) < 5.0 * sd);
}

TEST_CASE("noise injection is deterministic per seed") {
  const auto clean = ramp_field();
  const auto a = inject_noise(clean, {NoiseSpec::Kind::P2, 0.05, 31});
  const auto b = inject_noise(clean, {NoiseSpec::Kind::P2, 0.05, 31});
  REQUIRE(a.values == b.values);
  const auto c = inject_noise(clean, {NoiseSpec::Kind::P2, 0.05, 32});
  REQUIRE(a.values != c.values);
}
