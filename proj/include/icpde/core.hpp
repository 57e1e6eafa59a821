#pragma once

// Problem family: 1D convection-diffusion-reaction equations
//   u_t + beta u_x - nu u_xx - sum_j rho_j f_j(u) = 0
// on the periodic domain x in [0, 2pi), t in [0, 1], with the reaction
// dictionary f1 = u(1-u), f2 = u(1-u^2), f3 = u^2(1-u).

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "icpde/fft.hpp"
#include "icpde/rng.hpp"

namespace icpde {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Every failure is thrown as an Error carrying a machine-readable kind tag;
// the CLI turns uncaught ones into a single JSON line and a nonzero exit.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct CdrParams {
  double beta = 0.0;
  double nu = 0.0;
  std::array<double, 3> rho{0.0, 0.0, 0.0};

  double rho_total() const { return std::abs(rho[0]) + std::abs(rho[1]) + std::abs(rho[2]); }

  bool valid() const {
    return std::isfinite(beta) && std::isfinite(nu) && nu >= 0.0 && std::isfinite(rho[0]) &&
           std::isfinite(rho[1]) && std::isfinite(rho[2]);
  }

  auto operator<=>(const CdrParams&) const = default;
};

inline std::string describe(const CdrParams& p) {
  std::ostringstream os;
  os << "beta=" << p.beta << " nu=" << p.nu << " rho=(" << p.rho[0] << "," << p.rho[1] << ","
     << p.rho[2] << ")";
  return os.str();
}

inline double eval_reaction(double u, const std::array<double, 3>& rho) {
  const double u2 = u * u;
  return rho[0] * u * (1.0 - u) + rho[1] * u * (1.0 - u2) + rho[2] * u2 * (1.0 - u);
}

// d/du of eval_reaction, used by residual derivatives.
inline double eval_reaction_du(double u, const std::array<double, 3>& rho) {
  const double u2 = u * u;
  return rho[0] * (1.0 - 2.0 * u) + rho[1] * (1.0 - 3.0 * u2) + rho[2] * (2.0 * u - 3.0 * u2);
}

struct InitialCondition {
  enum class Preset { gaussian_bump, one_plus_sin, sin, constant };

  Preset preset = Preset::gaussian_bump;
  double mean = std::numbers::pi;         // gaussian_bump center
  double sigma = std::numbers::pi / 2.0;  // gaussian_bump width
  double level = 0.5;                     // constant preset value
};

inline double eval_initial_condition(const InitialCondition& ic, double x) {
  switch (ic.preset) {
    case InitialCondition::Preset::gaussian_bump: {
      const double z = (x - ic.mean) / ic.sigma;
      return std::exp(-0.5 * z * z);
    }
    case InitialCondition::Preset::one_plus_sin:
      return 1.0 + std::sin(x);
    case InitialCondition::Preset::sin:
      return std::sin(x);
    case InitialCondition::Preset::constant:
      return ic.level;
  }
  throw Error("config", "unknown initial-condition preset");
}

inline const char* preset_name(InitialCondition::Preset p) {
  switch (p) {
    case InitialCondition::Preset::gaussian_bump:
      return "gaussian_bump";
    case InitialCondition::Preset::one_plus_sin:
      return "one_plus_sin";
    case InitialCondition::Preset::sin:
      return "sin";
    case InitialCondition::Preset::constant:
      return "constant";
  }
  return "unknown";
}

inline InitialCondition::Preset preset_from_name(const std::string& name) {
  if (name == "gaussian_bump") return InitialCondition::Preset::gaussian_bump;
  if (name == "one_plus_sin") return InitialCondition::Preset::one_plus_sin;
  if (name == "sin") return InitialCondition::Preset::sin;
  if (name == "constant") return InitialCondition::Preset::constant;
  throw Error("config", "unknown initial-condition preset: " + name);
}

// Uniform nx x nt grid; x_i = 2pi i/nx (periodic, no duplicated endpoint),
// t_j = j/(nt-1) so t spans [0, 1] inclusive.
struct Grid {
  std::size_t nx = 256;
  std::size_t nt = 100;

  double x(std::size_t ix) const { return kTwoPi * static_cast<double>(ix) / static_cast<double>(nx); }
  double t(std::size_t it) const { return static_cast<double>(it) / static_cast<double>(nt - 1); }
  double dx() const { return kTwoPi / static_cast<double>(nx); }
  double dt() const { return 1.0 / static_cast<double>(nt - 1); }

  void validate() const {
    if (nx < 8 || !is_power_of_two(nx)) throw Error("config", "grid nx must be a power of two >= 8");
    if (nt < 2) throw Error("config", "grid nt must be >= 2");
  }

  auto operator<=>(const Grid&) const = default;
};

enum class Provenance { numerical, pinn, noisy };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::numerical:
      return "numerical";
    case Provenance::pinn:
      return "pinn";
    case Provenance::noisy:
      return "noisy";
  }
  return "unknown";
}

inline Provenance provenance_from_name(const std::string& name) {
  if (name == "numerical") return Provenance::numerical;
  if (name == "pinn") return Provenance::pinn;
  if (name == "noisy") return Provenance::noisy;
  throw Error("data_format", "unknown provenance: " + name);
}

struct SolutionField {
  Grid grid;
  Eigen::MatrixXd values;  // nx rows, nt columns; values(ix, it) = u(x_ix, t_it)
  Provenance provenance = Provenance::numerical;
  CdrParams params;

  bool finite() const { return values.allFinite(); }
};

// Which coefficients vary and over what values. Inactive axes stay at zero.
// Integer-grid mode enumerates the Cartesian product of active axes in
// the fixed order (beta, nu, rho1, rho2, rho3), outermost first; an axis may
// instead carry an explicit value list (used for half-integer probe sets).
// Uniform-real mode draws seeded i.i.d. vectors.
struct ParameterSpace {
  enum class Mode { integer_grid, uniform_real };

  struct Axis {
    bool active = false;
    bool explicit_list = false;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> values;
  };

  static constexpr std::size_t kBeta = 0, kNu = 1, kRho1 = 2, kRho2 = 3, kRho3 = 4;

  Mode mode = Mode::integer_grid;
  std::array<Axis, 5> axes{};
  std::size_t draw_count = 0;  // uniform_real only
  std::uint64_t seed = 0;      // uniform_real only

  ParameterSpace& set_range(std::size_t i, double lo, double hi) {
    axes.at(i) = Axis{true, false, lo, hi, {}};
    return *this;
  }
  ParameterSpace& set_values(std::size_t i, std::vector<double> v) {
    axes.at(i) = Axis{true, true, 0.0, 0.0, std::move(v)};
    return *this;
  }
};

namespace detail {

inline std::vector<double> integer_axis_values(const ParameterSpace::Axis& a) {
  if (!a.active) return {0.0};
  if (a.explicit_list) {
    if (a.values.empty()) throw Error("empty_range", "parameter axis has an empty value list");
    return a.values;
  }
  const auto lo = static_cast<long long>(std::ceil(a.lo));
  const auto hi = static_cast<long long>(std::floor(a.hi));
  if (lo > hi) throw Error("empty_range", "parameter axis contains no integers");
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (long long k = lo; k <= hi; ++k) v.push_back(static_cast<double>(k));
  return v;
}

inline CdrParams params_from_coeffs(const std::array<double, 5>& c) {
  return CdrParams{c[0], c[1], {c[2], c[3], c[4]}};
}

}  // namespace detail

inline std::vector<CdrParams> enumerate_parameters(const ParameterSpace& space) {
  std::vector<CdrParams> out;

  if (space.mode == ParameterSpace::Mode::uniform_real) {
    if (space.draw_count == 0) throw Error("empty_range", "uniform-real space with draw_count 0");
    Rng rng(space.seed);
    out.reserve(space.draw_count);
    for (std::size_t n = 0; n < space.draw_count; ++n) {
      std::array<double, 5> c{};
      for (std::size_t i = 0; i < 5; ++i) {
        const auto& a = space.axes[i];
        if (!a.active) {
          c[i] = 0.0;
        } else if (a.explicit_list) {
          if (a.values.empty()) throw Error("empty_range", "parameter axis has an empty value list");
          c[i] = a.values[rng.uniform_index(a.values.size())];
        } else {
          if (a.lo > a.hi) throw Error("empty_range", "parameter axis has lo > hi");
          c[i] = rng.uniform(a.lo, a.hi);
        }
      }
      out.push_back(detail::params_from_coeffs(c));
    }
    return out;
  }

  std::array<std::vector<double>, 5> axis_values;
  std::size_t total = 1;
  for (std::size_t i = 0; i < 5; ++i) {
    axis_values[i] = detail::integer_axis_values(space.axes[i]);
    total *= axis_values[i].size();
    if (total > 1000000) throw Error("config", "parameter space too large to enumerate");
  }

  out.reserve(total);
  std::array<double, 5> c{};
  for (double b : axis_values[0]) {
    c[0] = b;
    for (double n : axis_values[1]) {
      c[1] = n;
      for (double r1 : axis_values[2]) {
        c[2] = r1;
        for (double r2 : axis_values[3]) {
          c[3] = r2;
          for (double r3 : axis_values[4]) {
            c[4] = r3;
            CdrParams p = detail::params_from_coeffs(c);
            if (!p.valid()) throw Error("config", "invalid coefficients: " + describe(p));
            out.push_back(p);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace icpde
