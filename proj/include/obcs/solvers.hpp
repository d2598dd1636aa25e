#pragma once

#include "obcs/core.hpp"
#include "obcs/dictionaries.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

namespace obcs {

struct SolverParams {
  double rho = 1.0;                // ADMM penalty (rescaled adaptively)
  int max_iterations = 20000;
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  double constraint_tol = 1e-6;    // feasibility required of a converged solve
  double over_relaxation = 1.7;
  bool adaptive_rho = true;
  std::ostream* iteration_log = nullptr;  // CSV: iteration,primal_residual,dual_residual,objective

  void validate() const;
};

struct SolveReport {
  Vector solution;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double feasibility_violation = 0.0;
  bool converged = false;
  double objective = 0.0;
  /// Best-so-far primal residual sampled every 50 iterations; non-increasing
  /// by construction, consumed by the stall/infeasibility monitor.
  std::vector<double> windowed_primal_best;
};

/// Raised when the divergence heuristic declares the constraints unsatisfiable.
class InfeasibleProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Feasible region {z : y_j (a_j^T z - t_j) >= 0 for all j, ||z||_2 <= R}.
/// A_block is a view into the caller's measurement matrix and must outlive
/// the set.
struct SignConstraintSet {
  Eigen::Ref<const Matrix> A_block;  // q x n
  Vector thresholds;                 // t in R^q
  Vector signs;                      // y in {+1,-1}^q
  double radius = 0.0;               // R

  void validate() const;
  /// max(0, max_j -y_j(a_j^T z - t_j), ||z||_2 - R)
  double violation(const Vector& z) const;
};

Vector project_l2_ball(const Vector& v, double radius);
Vector project_halfspace(const Vector& v, const Vector& normal, double offset);

/// Exact Euclidean projection onto {w : ||w||_1 <= c} via stable
/// sort-and-threshold (descending magnitude, ties keep input order).
Vector project_l1_ball(const Vector& w, double c);

/// Internal row scaling applied to a q-row constraint block; the feasible set
/// is unchanged, the splitting becomes well conditioned.
double sign_solve_row_scale(Index q);

/// Cholesky factor of D D^T + k^2 A^T A + I (k the row scale), reused across
/// ADMM iterations and across solves sharing the same (D, A-block) pair.
/// Immutable once built.
class SignSolveFactorization {
 public:
  SignSolveFactorization(const Dictionary& dict, Eigen::Ref<const Matrix> A_block);
  Vector solve(const Vector& rhs) const;

 private:
  Eigen::LLT<Matrix> llt_;
};

/// min ||D^T z||_1 subject to z in cons, by consensus ADMM over the splits
/// (w = D^T z, u = A z, v = z): soft-threshold on w, per-coordinate halfspace
/// clipping on u, l2-ball projection on v, and a prefactorized normal-equation
/// solve for z. Pass `initial` to start away from zero and `factorization`
/// to reuse a cached factor.
SolveReport solve_sign_constrained_l1(const Dictionary& dict, const SignConstraintSet& cons,
                                      const SolverParams& params,
                                      const Vector* initial = nullptr,
                                      const SignSolveFactorization* factorization = nullptr);

/// min ||z - v||_2 subject to ||D^T z||_1 <= c. Square orthonormal
/// dictionaries reduce to the exact coefficient-space kernel; otherwise ADMM
/// on the split w = D^T z.
SolveReport project_analysis_l1(const Vector& v, const Dictionary& dict, double c,
                                const SolverParams& params);

}  // namespace obcs
