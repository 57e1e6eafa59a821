#pragma once

// Tanh MLP u~(x,t), with forward value evaluation, forward propagation of the
// (value, d/dx, d/dt, d2/dx2) jet, and hand-rolled reverse passes for both.
// Parameters live in one flat vector so the optimizer and checkpoints treat
// every network identically.

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "icpde/core.hpp"
#include "icpde/rng.hpp"

namespace icpde {

struct InputJet {
  double u = 0.0;
  double du_dx = 0.0;
  double du_dt = 0.0;
  double d2u_dx2 = 0.0;
};

class PinnNet {
 public:
  explicit PinnNet(std::vector<Eigen::Index> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2 || widths_.front() != 2 || widths_.back() != 1)
      throw Error("config", "pinn mlp must map (x,t) to one output");
    Eigen::Index total = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      w_off_.push_back(total);
      total += widths_[l + 1] * widths_[l];
      b_off_.push_back(total);
      total += widths_[l + 1];
    }
    theta = Eigen::VectorXd::Zero(total);
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) on weights and biases.
  static PinnNet random(std::vector<Eigen::Index> widths, std::uint64_t seed) {
    PinnNet net(std::move(widths));
    Rng rng(seed);
    for (Eigen::Index l = 0; l < net.layers(); ++l) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(net.widths_[l]));
      auto w = net.weight(l);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-scale, scale);
      auto b = net.bias(l);
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-scale, scale);
    }
    return net;
  }

  Eigen::Index layers() const { return static_cast<Eigen::Index>(widths_.size()) - 1; }
  const std::vector<Eigen::Index>& widths() const { return widths_; }
  Eigen::Index param_count() const { return theta.size(); }

  Eigen::Map<Eigen::MatrixXd> weight(Eigen::Index l) {
    return {theta.data() + w_off_[l], widths_[l + 1], widths_[l]};
  }
  Eigen::Map<const Eigen::MatrixXd> weight(Eigen::Index l) const {
    return {theta.data() + w_off_[l], widths_[l + 1], widths_[l]};
  }
  Eigen::Map<Eigen::VectorXd> bias(Eigen::Index l) {
    return {theta.data() + b_off_[l], widths_[l + 1]};
  }
  Eigen::Map<const Eigen::VectorXd> bias(Eigen::Index l) const {
    return {theta.data() + b_off_[l], widths_[l + 1]};
  }

  Eigen::VectorXd theta;

 private:
  std::vector<Eigen::Index> widths_;
  std::vector<Eigen::Index> w_off_, b_off_;
};

// ---- value-only pass (initial and boundary losses) ----

struct ValueTrace {
  std::vector<Eigen::MatrixXd> input;  // input[l]: activations entering layer l
};

// xs is 2 x N (row 0 = x, row 1 = t); returns 1 x N of predictions.
inline Eigen::RowVectorXd mlp_values(const PinnNet& net, const Eigen::MatrixXd& xs,
                                     ValueTrace* trace = nullptr) {
  Eigen::MatrixXd z = xs;
  if (trace) trace->input.assign(static_cast<std::size_t>(net.layers()), {});
  for (Eigen::Index l = 0; l < net.layers(); ++l) {
    if (trace) trace->input[static_cast<std::size_t>(l)] = z;
    Eigen::MatrixXd a = (net.weight(l) * z).colwise() + net.bias(l);
    if (l + 1 == net.layers())
      z = std::move(a);
    else
      z = a.array().tanh().matrix();
  }
  return z.row(0);
}

// Accumulates dL/dtheta into grad given dL/doutput for the traced pass.
inline void mlp_values_backward(const PinnNet& net, const ValueTrace& trace,
                                const Eigen::RowVectorXd& out_adj, Eigen::VectorXd& grad) {
  Eigen::MatrixXd adj = out_adj;
  for (Eigen::Index l = net.layers() - 1; l >= 0; --l) {
    const auto& in = trace.input[static_cast<std::size_t>(l)];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + (net.weight(l).data() - net.theta.data()),
                                   net.weight(l).rows(), net.weight(l).cols());
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + (net.bias(l).data() - net.theta.data()),
                                   net.bias(l).size());
    gw.noalias() += adj * in.transpose();
    gb += adj.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd up = net.weight(l).transpose() * adj;
    // in holds tanh outputs of layer l-1, so tanh' = 1 - in^2 elementwise.
    adj = (up.array() * (1.0 - in.array().square())).matrix();
  }
}

// ---- jet pass (residual loss needs u, u_x, u_t, u_xx) ----

struct JetBatch {
  Eigen::MatrixXd v, x, t, xx;
};

struct JetTrace {
  std::vector<JetBatch> input;  // jets entering layer l
  std::vector<JetBatch> pre;    // pre-activation jets of layer l
};

inline JetBatch mlp_jets(const PinnNet& net, const Eigen::MatrixXd& xs, JetTrace* trace = nullptr) {
  const Eigen::Index n = xs.cols();
  JetBatch z;
  z.v = xs;
  z.x = Eigen::MatrixXd::Zero(2, n);
  z.x.row(0).setOnes();
  z.t = Eigen::MatrixXd::Zero(2, n);
  z.t.row(1).setOnes();
  z.xx = Eigen::MatrixXd::Zero(2, n);

  if (trace) {
    trace->input.assign(static_cast<std::size_t>(net.layers()), {});
    trace->pre.assign(static_cast<std::size_t>(net.layers()), {});
  }

  for (Eigen::Index l = 0; l < net.layers(); ++l) {
    if (trace) trace->input[static_cast<std::size_t>(l)] = z;
    const auto w = net.weight(l);
    JetBatch a;
    a.v = (w * z.v).colwise() + net.bias(l);
    a.x = w * z.x;
    a.t = w * z.t;
    a.xx = w * z.xx;
    if (trace) trace->pre[static_cast<std::size_t>(l)] = a;
    if (l + 1 == net.layers()) {
      z = std::move(a);
      break;
    }
    // s = tanh(a); jets follow from s' = 1-s^2 and s'' = -2 s (1-s^2).
    const Eigen::ArrayXXd s = a.v.array().tanh();
    const Eigen::ArrayXXd d1 = 1.0 - s.square();
    z.v = s.matrix();
    z.x = (d1 * a.x.array()).matrix();
    z.t = (d1 * a.t.array()).matrix();
    z.xx = (d1 * a.xx.array() - 2.0 * s * d1 * a.x.array().square()).matrix();
  }
  return z;
}

// Reverse pass through the jet propagation. adj carries dL/d(u, u_x, u_t,
// u_xx) at the output, each 1 x N; dL/dtheta accumulates into grad.
inline void mlp_jets_backward(const PinnNet& net, const JetTrace& trace, const JetBatch& adj,
                              Eigen::VectorXd& grad) {
  Eigen::MatrixXd av = adj.v, ax = adj.x, at = adj.t, axx = adj.xx;
  for (Eigen::Index l = net.layers() - 1; l >= 0; --l) {
    const auto& in = trace.input[static_cast<std::size_t>(l)];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + (net.weight(l).data() - net.theta.data()),
                                   net.weight(l).rows(), net.weight(l).cols());
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + (net.bias(l).data() - net.theta.data()),
                                   net.bias(l).size());
    gw.noalias() += av * in.v.transpose() + ax * in.x.transpose() + at * in.t.transpose() +
                    axx * in.xx.transpose();
    gb += av.rowwise().sum();  // bias feeds only the value stream
    if (l == 0) break;

    const auto wt = net.weight(l).transpose();
    Eigen::MatrixXd sv = wt * av, sx = wt * ax, st = wt * at, sxx = wt * axx;

    // Adjoint of s = tanh(a) with jets: needs tanh', tanh'', tanh'''.
    const auto& p = trace.pre[static_cast<std::size_t>(l - 1)];
    const auto s = in.v.array();  // tanh outputs of layer l-1
    const Eigen::ArrayXXd d1 = 1.0 - s.square();
    const Eigen::ArrayXXd d2 = -2.0 * s * d1;
    const Eigen::ArrayXXd d3 = -2.0 * d1 * (d1 - 2.0 * s.square());
    const auto pax = p.x.array();

    av = (sv.array() * d1 + sx.array() * d2 * pax + st.array() * d2 * p.t.array() +
          sxx.array() * (d2 * p.xx.array() + d3 * pax.square()))
             .matrix();
    ax = (sx.array() * d1 + 2.0 * sxx.array() * d2 * pax).matrix();
    at = (st.array() * d1).matrix();
    axx = (sxx.array() * d1).matrix();
  }
}

// ---- scalar conveniences ----

inline double mlp_forward(const PinnNet& net, double x, double t) {
  Eigen::MatrixXd xs(2, 1);
  xs << x, t;
  return mlp_values(net, xs)(0);
}

inline InputJet mlp_input_jet(const PinnNet& net, double x, double t) {
  Eigen::MatrixXd xs(2, 1);
  xs << x, t;
  const JetBatch out = mlp_jets(net, xs);
  return {out.v(0, 0), out.x(0, 0), out.t(0, 0), out.xx(0, 0)};
}

}  // namespace icpde
