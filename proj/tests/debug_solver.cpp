// Scratch diagnostic for solver convergence on pipeline-scale instances.
#include "obcs/core.hpp"
#include "obcs/dictionaries.hpp"
#include "obcs/pipeline.hpp"
#include "obcs/solvers.hpp"

#include <cmath>
#include <cstdio>

using namespace obcs;

int main() {
  const Index n = 16;
  const int s = 2;
  const Index m = static_cast<Index>(std::ceil(50.0 * s * std::log(static_cast<double>(n))));
  const RngStream root(23);

  const Dictionary dict = identity_dictionary(n);
  Vector f = Vector::Zero(n);
  f[3] = 1.2;
  f[11] = -0.9;
  f /= f.norm();

  const Matrix A = gaussian_matrix(m, n, root.child(1));
  const Vector tau = gaussian_vector(m, root.child(2));
  const Vector bits = one_bit_measure(A, f, tau);

  SolverParams params;
  SignConstraintSet cons{A, tau, bits, 10.0};
  try {
    const SolveReport rep = solve_sign_constrained_l1(dict, cons, params);
    std::printf("converged=%d iters=%d primal=%.3e dual=%.3e viol=%.3e obj=%.6f\n",
                rep.converged, rep.iterations, rep.primal_residual, rep.dual_residual,
                rep.feasibility_violation, rep.objective);
    std::printf("err=%.4f\n", (rep.solution - f).norm());
  } catch (const InfeasibleProblemError& e) {
    std::printf("declared infeasible: %s\n", e.what());
  }
  return 0;
}
