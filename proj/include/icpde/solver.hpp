#pragma once

// Reference solver: Fourier pseudo-spectral in x with the linear part
// (-beta u_x + nu u_xx) handled exactly by an integrating factor, RK4 on the
// reaction term, 2/3-rule dealiasing. Unconditionally stable in the linear
// terms, so large beta and nu cost nothing extra.

#include <complex>
#include <vector>

#include "icpde/core.hpp"
#include "icpde/fft.hpp"

namespace icpde {

struct SolverOptions {
  // Cap on the internal substep between stored time levels; 0 selects
  // min(1e-3, 0.5/max(1, total reaction strength)). Tests tighten it to
  // study time refinement.
  double dt_max = 0.0;
};

inline double default_dt_max(const CdrParams& p) {
  return std::min(1e-3, 0.5 / std::max(1.0, p.rho_total()));
}

inline SolutionField solve_cdr(const CdrParams& params, const InitialCondition& ic,
                               const Grid& grid, const SolverOptions& opts = {}) {
  grid.validate();
  if (!params.valid()) throw Error("config", "invalid pde coefficients: " + describe(params));

  const std::size_t nx = grid.nx;
  const std::size_t nt = grid.nt;

  SolutionField field;
  field.grid = grid;
  field.params = params;
  field.provenance = Provenance::numerical;
  field.values.resize(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nt));

  std::vector<double> u0(nx);
  for (std::size_t i = 0; i < nx; ++i) u0[i] = eval_initial_condition(ic, grid.x(i));
  for (std::size_t i = 0; i < nx; ++i) field.values(static_cast<Eigen::Index>(i), 0) = u0[i];

  auto uhat = fft_real(u0);

  // Linear symbol per Fourier mode: L_k = -i beta k - nu k^2.
  std::vector<std::complex<double>> lin(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double k = fft_wavenumber(i, nx);
    lin[i] = std::complex<double>(-params.nu * k * k, -params.beta * k);
  }

  const bool has_reaction = params.rho_total() > 0.0;
  const double dt_grid = grid.dt();

  auto check_level = [&](std::size_t it) {
    if (!field.values.col(static_cast<Eigen::Index>(it)).allFinite())
      throw Error("solver_failure",
                  "solution blew up at t=" + std::to_string(grid.t(it)) + " for " + describe(params));
  };

  auto store_level = [&](std::size_t it) {
    auto copy = uhat;
    ifft(copy);
    for (std::size_t i = 0; i < nx; ++i)
      field.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(it)) = copy[i].real();
    check_level(it);
  };

  if (!has_reaction) {
    // Pure linear problem: one exact exponential step per stored level.
    std::vector<std::complex<double>> e_level(nx);
    for (std::size_t i = 0; i < nx; ++i) e_level[i] = std::exp(lin[i] * dt_grid);
    for (std::size_t it = 1; it < nt; ++it) {
      for (std::size_t i = 0; i < nx; ++i) uhat[i] *= e_level[i];
      store_level(it);
    }
    return field;
  }

  const double dt_cap = opts.dt_max > 0.0 ? opts.dt_max : default_dt_max(params);
  const auto substeps = static_cast<std::size_t>(std::ceil(dt_grid / dt_cap));
  const double h = dt_grid / static_cast<double>(substeps);

  std::vector<std::complex<double>> e_half(nx), e_full(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    e_half[i] = std::exp(lin[i] * (0.5 * h));
    e_full[i] = std::exp(lin[i] * h);
  }

  // 2/3-rule: drop modes with |k| > nx/3 from the nonlinear term.
  const int k_keep = static_cast<int>(nx / 3);

  std::vector<std::complex<double>> a(nx), b(nx), c(nx), d(nx), stage(nx);

  // out = dealias(FFT(reaction(IFFT(what)))).
  auto nonlinear = [&](const std::vector<std::complex<double>>& what,
                       std::vector<std::complex<double>>& out) {
    out = what;
    ifft(out);
    for (std::size_t i = 0; i < nx; ++i) out[i] = eval_reaction(out[i].real(), params.rho);
    fft(out);
    for (std::size_t i = 0; i < nx; ++i)
      if (std::abs(fft_wavenumber(i, nx)) > k_keep) out[i] = 0.0;
  };

  for (std::size_t it = 1; it < nt; ++it) {
    for (std::size_t s = 0; s < substeps; ++s) {
      // RK4 in the integrating-factor variable w = exp(-L t) uhat, written
      // out in unscaled quantities.
      nonlinear(uhat, a);
      for (std::size_t i = 0; i < nx; ++i) stage[i] = e_half[i] * (uhat[i] + 0.5 * h * a[i]);
      nonlinear(stage, b);
      for (std::size_t i = 0; i < nx; ++i) stage[i] = e_half[i] * uhat[i] + 0.5 * h * b[i];
      nonlinear(stage, c);
      for (std::size_t i = 0; i < nx; ++i) stage[i] = e_full[i] * uhat[i] + h * e_half[i] * c[i];
      nonlinear(stage, d);
      for (std::size_t i = 0; i < nx; ++i)
        uhat[i] = e_full[i] * uhat[i] +
                  (h / 6.0) * (e_full[i] * a[i] + 2.0 * e_half[i] * (b[i] + c[i]) + d[i]);
    }
    store_level(it);
  }
  return field;
}

}  // namespace icpde
