#include "obcs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace obcs {

namespace {

constexpr int kMonitorWindow = 50;        // iterations per monitor sample
constexpr int kRhoAdaptInterval = 25;     // iterations between penalty updates
constexpr int kDivergenceLookback = 100;  // monitor samples (= 5000 iterations)
constexpr double kDivergenceViolation = 1e-3;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;

double soft_threshold(double x, double kappa) {
  if (x > kappa) return x - kappa;
  if (x < -kappa) return x + kappa;
  return 0.0;
}

void log_header(std::ostream* os) {
  if (os != nullptr) *os << "iteration,primal_residual,dual_residual,objective\n";
}

void log_row(std::ostream* os, int iter, double pri, double dua, double obj) {
  if (os != nullptr) *os << iter << ',' << pri << ',' << dua << ',' << obj << '\n';
}

}  // namespace

void SolverParams::validate() const {
  if (!(rho > 0.0) || !(primal_tol > 0.0) || !(dual_tol > 0.0) || !(constraint_tol > 0.0)) {
    throw std::invalid_argument("SolverParams: penalty and tolerances must be positive");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("SolverParams: max_iterations must be >= 1");
  }
  if (!(over_relaxation > 0.0) || over_relaxation >= 2.0) {
    throw std::invalid_argument("SolverParams: over_relaxation must lie in (0, 2)");
  }
}

void SignConstraintSet::validate() const {
  const Index q = A_block.rows();
  if (thresholds.size() != q || signs.size() != q) {
    throw std::invalid_argument("SignConstraintSet: dimension mismatch");
  }
  if (!(radius > 0.0)) {
    throw std::invalid_argument("SignConstraintSet: radius must be positive");
  }
  for (Index j = 0; j < q; ++j) {
    if (signs[j] != 1.0 && signs[j] != -1.0) {
      throw std::invalid_argument("SignConstraintSet: signs must be +1 or -1");
    }
  }
}

double SignConstraintSet::violation(const Vector& z) const {
  const Vector margins = signs.cwiseProduct(A_block * z - thresholds);
  double worst = z.norm() - radius;
  if (margins.size() > 0) worst = std::max(worst, -margins.minCoeff());
  return std::max(0.0, worst);
}

Vector project_l2_ball(const Vector& v, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_l2_ball: radius must be positive");
  const double norm = v.norm();
  if (norm <= radius) return v;
  return v * (radius / norm);
}

Vector project_halfspace(const Vector& v, const Vector& normal, double offset) {
  const double nn = normal.squaredNorm();
  if (nn == 0.0) throw std::invalid_argument("project_halfspace: zero normal");
  const double value = normal.dot(v);
  if (value >= offset) return v;
  return v + normal * ((offset - value) / nn);
}

Vector project_l1_ball(const Vector& w, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("project_l1_ball: bound must be positive");
  if (w.lpNorm<1>() <= c) return w;

  const Index d = w.size();
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&w](Index a, Index b) {
    return std::abs(w[a]) > std::abs(w[b]);
  });

  // Largest k with mu_k > (sum of top-k magnitudes - c) / k.
  double prefix = 0.0;
  double theta = 0.0;
  for (Index k = 0; k < d; ++k) {
    const double mu = std::abs(w[order[static_cast<std::size_t>(k)]]);
    prefix += mu;
    const double candidate = (prefix - c) / static_cast<double>(k + 1);
    if (mu - candidate <= 0.0) break;
    theta = candidate;
  }

  Vector out(d);
  for (Index i = 0; i < d; ++i) {
    const double mag = soft_threshold(std::abs(w[i]), theta);
    out[i] = (mag == 0.0) ? 0.0 : std::copysign(mag, w[i]);
  }
  return out;
}

double sign_solve_row_scale(Index q) { return 1.0 / std::sqrt(static_cast<double>(std::max<Index>(q, 1))); }

SignSolveFactorization::SignSolveFactorization(const Dictionary& dict,
                                               Eigen::Ref<const Matrix> A_block) {
  const Index n = dict.n();
  if (A_block.cols() != n) {
    throw std::invalid_argument("SignSolveFactorization: A-block column count != dictionary rows");
  }
  // The sign constraints are invariant to positive row scaling, so the block
  // enters the splitting scaled by 1/sqrt(q); that keeps the three consensus
  // blocks of D D^T + k^2 A^T A + I on a common scale.
  const double k2 = sign_solve_row_scale(A_block.rows()) * sign_solve_row_scale(A_block.rows());
  Matrix M = dict.D * dict.D.transpose();
  M.noalias() += k2 * (A_block.transpose() * A_block);
  M += Matrix::Identity(n, n);
  llt_.compute(M);
  if (llt_.info() != Eigen::Success) {
    throw std::runtime_error("SignSolveFactorization: factorization failed");
  }
}

Vector SignSolveFactorization::solve(const Vector& rhs) const { return llt_.solve(rhs); }

SolveReport solve_sign_constrained_l1(const Dictionary& dict, const SignConstraintSet& cons,
                                      const SolverParams& params, const Vector* initial,
                                      const SignSolveFactorization* factorization) {
  params.validate();
  cons.validate();
  const Index n = dict.n();
  const Index N = dict.N();
  const Index q = cons.A_block.rows();
  if (cons.A_block.cols() != n) {
    throw std::invalid_argument("solve_sign_constrained_l1: A-block/dictionary mismatch");
  }

  std::optional<SignSolveFactorization> local;
  if (factorization == nullptr) {
    local.emplace(dict, cons.A_block);
    factorization = &*local;
  }

  const Matrix& D = dict.D;
  const auto& A = cons.A_block;
  const double R = cons.radius;
  const double alpha = params.over_relaxation;
  double rho = params.rho;

  // Work against the row-scaled block (same feasible set, balanced splits).
  const double k = sign_solve_row_scale(q);
  const Vector t_scaled = k * cons.thresholds;

  Vector z = (initial != nullptr) ? *initial : Vector::Zero(n);
  if (initial != nullptr && initial->size() != n) {
    throw std::invalid_argument("solve_sign_constrained_l1: initial point has wrong size");
  }
  Vector w = D.transpose() * z;
  Vector u = k * (A * z);
  Vector v = project_l2_ball(z, R);
  Vector lw = Vector::Zero(N), lu = Vector::Zero(q), lv = Vector::Zero(n);

  log_header(params.iteration_log);

  SolveReport report;
  double window_best = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    Vector rhs = D * (w - lw);
    rhs.noalias() += k * (A.transpose() * (u - lu));
    rhs += v - lv;
    z = factorization->solve(rhs);

    const Vector Dz = D.transpose() * z;
    const Vector Az = k * (A * z);

    const Vector w_old = w, u_old = u, v_old = v;
    const Vector hw = alpha * Dz + (1.0 - alpha) * w_old;
    const Vector hu = alpha * Az + (1.0 - alpha) * u_old;
    const Vector hv = alpha * z + (1.0 - alpha) * v_old;

    const double kappa = 1.0 / rho;
    w = (hw + lw).unaryExpr([kappa](double x) { return soft_threshold(x, kappa); });

    Vector cu = hu + lu;
    for (Index j = 0; j < q; ++j) {
      const double t = t_scaled[j];
      u[j] = cons.signs[j] > 0.0 ? std::max(cu[j], t) : std::min(cu[j], t);
    }

    v = project_l2_ball(hv + lv, R);

    lw += hw - w;
    lu += hu - u;
    lv += hv - v;

    const double primal = std::sqrt((Dz - w).squaredNorm() + (Az - u).squaredNorm() +
                                    (z - v).squaredNorm());
    Vector dvec = D * (w - w_old);
    dvec.noalias() += k * (A.transpose() * (u - u_old));
    dvec += v - v_old;
    const double dual = rho * dvec.norm();

    const double objective = Dz.lpNorm<1>();
    const double viol = cons.violation(z);

    log_row(params.iteration_log, iter, primal, dual, objective);

    window_best = std::min(window_best, primal);
    if (iter % kMonitorWindow == 0) {
      report.windowed_primal_best.push_back(window_best);
    }

    const double pri_scale = std::max(
        {1.0, std::sqrt(Dz.squaredNorm() + Az.squaredNorm() + z.squaredNorm()),
         std::sqrt(w.squaredNorm() + u.squaredNorm() + v.squaredNorm())});
    Vector dual_vec = D * lw;
    dual_vec.noalias() += k * (A.transpose() * lu);
    dual_vec += lv;
    const double dual_scale = std::max(1.0, rho * dual_vec.norm());

    report.iterations = iter;
    report.primal_residual = primal;
    report.dual_residual = dual;
    report.feasibility_violation = viol;
    report.objective = objective;

    if (primal <= params.primal_tol * pri_scale && dual <= params.dual_tol * dual_scale &&
        viol <= params.constraint_tol) {
      report.converged = true;
      break;
    }

    // Divergence heuristic: no 10x progress on the monitored primal residual
    // across the lookback while the iterate stays clearly infeasible.
    const auto& mon = report.windowed_primal_best;
    if (mon.size() > static_cast<std::size_t>(kDivergenceLookback)) {
      const double old_best = mon[mon.size() - 1 - kDivergenceLookback];
      if (mon.back() > 0.1 * old_best && viol > kDivergenceViolation) {
        throw InfeasibleProblemError(
            "solve_sign_constrained_l1: residuals stalled while infeasible; "
            "constraints appear unsatisfiable");
      }
    }

    if (params.adaptive_rho && iter % kRhoAdaptInterval == 0) {
      if (primal > 10.0 * dual && rho * 2.0 <= kRhoMax) {
        rho *= 2.0;
        lw *= 0.5;
        lu *= 0.5;
        lv *= 0.5;
      } else if (dual > 10.0 * primal && rho * 0.5 >= kRhoMin) {
        rho *= 0.5;
        lw *= 2.0;
        lu *= 2.0;
        lv *= 2.0;
      }
    }
  }

  report.solution = std::move(z);
  return report;
}

SolveReport project_analysis_l1(const Vector& v, const Dictionary& dict, double c,
                                const SolverParams& params) {
  params.validate();
  if (!(c > 0.0)) throw std::invalid_argument("project_analysis_l1: bound must be positive");
  const Index n = dict.n();
  const Index N = dict.N();
  if (v.size() != n) throw std::invalid_argument("project_analysis_l1: dimension mismatch");

  const Matrix& D = dict.D;

  SolveReport report;

  if (dict.analyze(v).lpNorm<1>() <= c) {
    report.solution = v;
    report.converged = true;
    report.objective = 0.0;
    return report;
  }

  // Square orthonormal dictionaries: the isometry reduces the projection to
  // the exact coefficient-space kernel.
  if (dict.is_orthonormal_basis(1e-12)) {
    const Vector coeffs = project_l1_ball(dict.analyze(v), c);
    report.solution = D * coeffs;
    report.converged = true;
    report.objective = (report.solution - v).norm();
    report.feasibility_violation =
        std::max(0.0, dict.analyze(report.solution).lpNorm<1>() - c);
    return report;
  }

  const bool tight = dict.is_tight(1e-12);
  const double alpha = params.over_relaxation;
  double rho = params.rho;

  Eigen::LLT<Matrix> llt;
  double factored_rho = -1.0;
  auto refactor = [&]() {
    if (tight) return;  // (I + rho D D^T) = (1 + rho) I for tight frames
    if (rho == factored_rho) return;
    Matrix M = rho * (D * D.transpose());
    M += Matrix::Identity(n, n);
    llt.compute(M);
    factored_rho = rho;
  };
  refactor();

  Vector z = v;
  Vector w = D.transpose() * z;
  Vector lw = Vector::Zero(N);

  log_header(params.iteration_log);
  double window_best = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    const Vector rhs = v + rho * (D * (w - lw));
    z = tight ? Vector(rhs / (1.0 + rho)) : Vector(llt.solve(rhs));

    const Vector Dz = D.transpose() * z;
    const Vector w_old = w;
    const Vector hw = alpha * Dz + (1.0 - alpha) * w_old;
    w = project_l1_ball(hw + lw, c);
    lw += hw - w;

    const double primal = (Dz - w).norm();
    const double dual = rho * (D * (w - w_old)).norm();
    const double objective = (z - v).norm();
    const double viol = std::max(0.0, Dz.lpNorm<1>() - c);

    log_row(params.iteration_log, iter, primal, dual, objective);

    window_best = std::min(window_best, primal);
    if (iter % kMonitorWindow == 0) report.windowed_primal_best.push_back(window_best);

    const double pri_scale = std::max({1.0, Dz.norm(), w.norm()});
    const double dual_scale = std::max(1.0, rho * (D * lw).norm());

    report.iterations = iter;
    report.primal_residual = primal;
    report.dual_residual = dual;
    report.feasibility_violation = viol;
    report.objective = objective;

    if (primal <= params.primal_tol * pri_scale && dual <= params.dual_tol * dual_scale &&
        viol <= params.constraint_tol) {
      report.converged = true;
      break;
    }

    if (params.adaptive_rho && iter % kRhoAdaptInterval == 0) {
      if (primal > 10.0 * dual && rho * 2.0 <= kRhoMax) {
        rho *= 2.0;
        lw *= 0.5;
        refactor();
      } else if (dual > 10.0 * primal && rho * 0.5 >= kRhoMin) {
        rho *= 0.5;
        lw *= 2.0;
        refactor();
      }
    }
  }

  report.solution = std::move(z);
  return report;
}

}  // namespace obcs
