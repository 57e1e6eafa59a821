#pragma once

// Adam with bias correction, operating on flat parameter vectors.

#include <Eigen/Core>

#include "icpde/core.hpp"

namespace icpde {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  Eigen::VectorXd m, v;

  explicit AdamState(Eigen::Index n = 0, double learning_rate = 1e-3)
      : lr(learning_rate), m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void update(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (params.size() != m.size() || grad.size() != m.size())
      throw Error("shape_mismatch", "adam: parameter/gradient/moment sizes disagree");
    ++step;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.array().square().matrix();
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon);
  }
};

}  // namespace icpde
