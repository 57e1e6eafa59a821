// Solves one reaction-diffusion instance and sketches the solution in the
// terminal: one row per sampled time, one column per sampled x position.

#include <cstdio>

#include "icpde/solver.hpp"

int main() {
  using namespace icpde;

  CdrParams p;
  p.nu = 1.0;
  p.rho[0] = 4.0;  // logistic growth pulls the bump toward u = 1

  const Grid grid{256, 100};
  const SolutionField field = solve_cdr(p, {}, grid);

  const char shades[] = " .:-=+*#%@";
  std::printf("u_t = %.0f u_xx + %.0f u(1-u), gaussian start\n\n", p.nu, p.rho[0]);
  for (std::size_t it = 0; it < grid.nt; it += 11) {
    std::printf("t=%.2f |", grid.t(it));
    for (std::size_t ix = 0; ix < grid.nx; ix += 4) {
      const double u = field.values(Eigen::Index(ix), Eigen::Index(it));
      const int level = std::clamp(int(u * 9.999), 0, 9);
      std::putchar(shades[level]);
    }
    std::printf("|\n");
  }
  std::printf("\nfield range [%.4f, %.4f]\n", field.values.minCoeff(), field.values.maxCoeff());
  return 0;
}
