#pragma once

// Physics-informed training of the tanh MLP against one parameter vector:
// initial-condition mismatch + residual of u_t - (-beta u_x + nu u_xx +
// sum rho_j f_j(u)) + periodic-boundary mismatch, all full-batch Adam.
// The point is a cheap, deliberately imperfect surrogate solution.

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "icpde/adam.hpp"
#include "icpde/core.hpp"
#include "icpde/mlp.hpp"

namespace icpde {

struct PinnConfig {
  double threshold = 1e-3;
  int max_epochs = 100;
  // One epoch applies this many full-batch Adam steps; the stop threshold is
  // checked between epochs. A single step per epoch leaves the surrogate far
  // too crude to carry any signal, so an epoch is a short inner run.
  int steps_per_epoch = 100;
  double learning_rate = 1e-2;
  std::size_t n_collocation = 1000;
  std::size_t n_initial = 256;
  std::size_t n_boundary = 100;
  std::vector<Eigen::Index> widths{2, 64, 64, 64, 1};
  std::uint64_t seed = 0;
};

struct PinnPoints {
  Eigen::MatrixXd initial;      // 2 x N_u, all at t = 0
  Eigen::MatrixXd collocation;  // 2 x N_f, interior t > 0
  Eigen::MatrixXd boundary_lo;  // 2 x N_b, x = 0
  Eigen::MatrixXd boundary_hi;  // 2 x N_b, x = 2pi, same time levels
};

inline PinnPoints make_pinn_points(const Grid& grid, const PinnConfig& cfg) {
  grid.validate();
  Rng rng(derive_seed(cfg.seed, 1, 0));
  PinnPoints pts;

  auto pick_nodes = [&](std::size_t want, std::size_t have) {
    std::vector<std::size_t> idx;
    if (want >= have) {
      idx.resize(have);
      for (std::size_t i = 0; i < have; ++i) idx[i] = i;
    } else {
      idx = rng.sample_without_replacement(have, want);
      std::sort(idx.begin(), idx.end());
    }
    return idx;
  };

  const auto init_nodes = pick_nodes(cfg.n_initial, grid.nx);
  pts.initial.resize(2, static_cast<Eigen::Index>(init_nodes.size()));
  for (std::size_t i = 0; i < init_nodes.size(); ++i) {
    pts.initial(0, static_cast<Eigen::Index>(i)) = grid.x(init_nodes[i]);
    pts.initial(1, static_cast<Eigen::Index>(i)) = 0.0;
  }

  const std::size_t interior = grid.nx * (grid.nt - 1);
  if (cfg.n_collocation > interior)
    throw Error("config", "more collocation points requested than interior grid nodes");
  const auto coll = rng.sample_without_replacement(interior, cfg.n_collocation);
  pts.collocation.resize(2, static_cast<Eigen::Index>(coll.size()));
  for (std::size_t i = 0; i < coll.size(); ++i) {
    const std::size_t ix = coll[i] % grid.nx;
    const std::size_t it = coll[i] / grid.nx + 1;
    pts.collocation(0, static_cast<Eigen::Index>(i)) = grid.x(ix);
    pts.collocation(1, static_cast<Eigen::Index>(i)) = grid.t(it);
  }

  const auto b_nodes = pick_nodes(cfg.n_boundary, grid.nt);
  pts.boundary_lo.resize(2, static_cast<Eigen::Index>(b_nodes.size()));
  pts.boundary_hi.resize(2, static_cast<Eigen::Index>(b_nodes.size()));
  for (std::size_t i = 0; i < b_nodes.size(); ++i) {
    const double tv = grid.t(b_nodes[i]);
    pts.boundary_lo.col(static_cast<Eigen::Index>(i)) << 0.0, tv;
    pts.boundary_hi.col(static_cast<Eigen::Index>(i)) << kTwoPi, tv;
  }
  return pts;
}

struct PinnLoss {
  double total = 0.0, l_u = 0.0, l_f = 0.0, l_b = 0.0;
};

namespace detail {

inline PinnLoss pinn_loss_impl(const PinnNet& net, const PinnPoints& pts, const CdrParams& params,
                               const InitialCondition& ic, Eigen::VectorXd* grad) {
  const Eigen::Index nu = pts.initial.cols();
  const Eigen::Index nf = pts.collocation.cols();
  const Eigen::Index nb = pts.boundary_lo.cols();
  if (nu == 0 || nf == 0 || nb == 0) throw Error("config", "pinn point sets must be nonempty");

  PinnLoss out;

  ValueTrace tr_u;
  const Eigen::RowVectorXd pred0 = mlp_values(net, pts.initial, grad ? &tr_u : nullptr);
  Eigen::RowVectorXd u0(nu);
  for (Eigen::Index i = 0; i < nu; ++i) u0(i) = eval_initial_condition(ic, pts.initial(0, i));
  const Eigen::RowVectorXd du = pred0 - u0;
  out.l_u = du.array().square().mean();

  JetTrace tr_f;
  const JetBatch jets = mlp_jets(net, pts.collocation, grad ? &tr_f : nullptr);
  const auto u = jets.v.array();
  const Eigen::ArrayXXd reaction = params.rho[0] * u * (1.0 - u) +
                                   params.rho[1] * u * (1.0 - u.square()) +
                                   params.rho[2] * u.square() * (1.0 - u);
  const Eigen::ArrayXXd r =
      jets.t.array() + params.beta * jets.x.array() - params.nu * jets.xx.array() - reaction;
  out.l_f = r.square().mean();

  ValueTrace tr_lo, tr_hi;
  const Eigen::RowVectorXd v_lo = mlp_values(net, pts.boundary_lo, grad ? &tr_lo : nullptr);
  const Eigen::RowVectorXd v_hi = mlp_values(net, pts.boundary_hi, grad ? &tr_hi : nullptr);
  const Eigen::RowVectorXd d = v_lo - v_hi;
  out.l_b = d.array().square().mean();

  if (!std::isfinite(out.l_u)) throw Error("non_finite_loss", "initial-condition loss is not finite");
  if (!std::isfinite(out.l_f)) throw Error("non_finite_loss", "residual loss is not finite");
  if (!std::isfinite(out.l_b)) throw Error("non_finite_loss", "boundary loss is not finite");
  out.total = out.l_u + out.l_f + out.l_b;

  if (grad) {
    grad->setZero(net.param_count());
    mlp_values_backward(net, tr_u, (2.0 / static_cast<double>(nu)) * du, *grad);

    const Eigen::ArrayXXd rw = (2.0 / static_cast<double>(nf)) * r;
    const Eigen::ArrayXXd reaction_du = params.rho[0] * (1.0 - 2.0 * u) +
                                        params.rho[1] * (1.0 - 3.0 * u.square()) +
                                        params.rho[2] * (2.0 * u - 3.0 * u.square());
    JetBatch adj;
    adj.v = (-rw * reaction_du).matrix();
    adj.x = (params.beta * rw).matrix();
    adj.t = rw.matrix();
    adj.xx = (-params.nu * rw).matrix();
    mlp_jets_backward(net, tr_f, adj, *grad);

    mlp_values_backward(net, tr_lo, (2.0 / static_cast<double>(nb)) * d, *grad);
    mlp_values_backward(net, tr_hi, (-2.0 / static_cast<double>(nb)) * d, *grad);
  }
  return out;
}

}  // namespace detail

inline PinnLoss pinn_loss(const PinnNet& net, const PinnPoints& pts, const CdrParams& params,
                          const InitialCondition& ic) {
  return detail::pinn_loss_impl(net, pts, params, ic, nullptr);
}

inline PinnLoss pinn_loss_grad(const PinnNet& net, const PinnPoints& pts, const CdrParams& params,
                               const InitialCondition& ic, Eigen::VectorXd& grad) {
  return detail::pinn_loss_impl(net, pts, params, ic, &grad);
}

inline SolutionField eval_pinn_on_grid(const PinnNet& net, const Grid& grid,
                                       const CdrParams& params) {
  SolutionField f;
  f.grid = grid;
  f.params = params;
  f.provenance = Provenance::pinn;
  Eigen::MatrixXd xs(2, static_cast<Eigen::Index>(grid.nx * grid.nt));
  for (std::size_t it = 0; it < grid.nt; ++it)
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const auto col = static_cast<Eigen::Index>(it * grid.nx + ix);
      xs(0, col) = grid.x(ix);
      xs(1, col) = grid.t(it);
    }
  const Eigen::RowVectorXd vals = mlp_values(net, xs);
  f.values.resize(static_cast<Eigen::Index>(grid.nx), static_cast<Eigen::Index>(grid.nt));
  for (std::size_t it = 0; it < grid.nt; ++it)
    for (std::size_t ix = 0; ix < grid.nx; ++ix)
      f.values(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(it)) =
          vals(static_cast<Eigen::Index>(it * grid.nx + ix));
  return f;
}

struct PinnResult {
  PinnNet net;
  SolutionField field;
  PinnLoss final_loss;
  int epochs_run = 0;
  std::vector<double> epoch_loss;  // total loss as of the end of each epoch
};

inline PinnResult train_pinn(const CdrParams& params, const PinnConfig& cfg,
                             const InitialCondition& ic, const Grid& grid = {}) {
  if (cfg.max_epochs < 1) throw Error("config", "pinn max_epochs must be >= 1");
  if (cfg.steps_per_epoch < 1) throw Error("config", "pinn steps_per_epoch must be >= 1");
  if (cfg.threshold <= 0.0) throw Error("config", "pinn loss threshold must be positive");
  if (!params.valid()) throw Error("config", "invalid pde coefficients: " + describe(params));

  const PinnPoints pts = make_pinn_points(grid, cfg);
  PinnNet net = PinnNet::random(cfg.widths, derive_seed(cfg.seed, 2, 0));
  AdamState opt(net.param_count(), cfg.learning_rate);
  Eigen::VectorXd grad(net.param_count());

  PinnLoss last{};
  int epochs = 0;
  std::vector<double> history;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (int s = 0; s < cfg.steps_per_epoch; ++s) {
      last = pinn_loss_grad(net, pts, params, ic, grad);
      if (!std::isfinite(last.total) || last.total > 1e6)
        throw Error("divergence", "pinn training diverged for " + describe(params));
      opt.update(net.theta, grad);
    }
    epochs = epoch;
    history.push_back(last.total);
    if (last.total < cfg.threshold) break;
  }

  PinnResult res{std::move(net), {}, last, epochs, std::move(history)};
  res.field = eval_pinn_on_grid(res.net, grid, params);
  if (!res.field.finite())
    throw Error("divergence", "pinn surrogate is not finite for " + describe(params));
  return res;
}

}  // namespace icpde
