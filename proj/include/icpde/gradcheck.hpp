#pragma once

// Central finite differences over a scalar loss: the reference oracle every
// analytic gradient in this library is checked against.

#include <Eigen/Core>
#include <vector>

namespace icpde {

// d loss / d params[i]; params is restored before returning.
template <class F>
double fd_gradient_at(F&& loss, Eigen::VectorXd& params, Eigen::Index i, double h = 1e-5) {
  const double saved = params[i];
  params[i] = saved + h;
  const double up = loss(params);
  params[i] = saved - h;
  const double down = loss(params);
  params[i] = saved;
  return (up - down) / (2.0 * h);
}

template <class F>
Eigen::VectorXd fd_gradient(F&& loss, Eigen::VectorXd& params, double h = 1e-5) {
  Eigen::VectorXd g(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) g[i] = fd_gradient_at(loss, params, i, h);
  return g;
}

}  // namespace icpde
