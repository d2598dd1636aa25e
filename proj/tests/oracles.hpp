#pragma once

// Independent oracles for solver and kernel verification. These deliberately
// avoid the library's algorithmic paths: naive loops, bisection, exhaustive
// grid refinement, KKT enumeration, and a long-run subgradient method.

#include "obcs/core.hpp"
#include "obcs/dictionaries.hpp"
#include "obcs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracles {

using obcs::Index;
using obcs::Matrix;
using obcs::Vector;

// Triple-loop adjoint product (analysis coefficients).
inline Vector naive_adjoint_product(const Matrix& D, const Vector& f) {
  Vector out = Vector::Zero(D.cols());
  for (Index j = 0; j < D.cols(); ++j) {
    double acc = 0.0;
    for (Index i = 0; i < D.rows(); ++i) {
      acc += D(i, j) * f[i];
    }
    out[j] = acc;
  }
  return out;
}

// Projection onto the l1 ball by bisection on the KKT threshold theta:
// g(theta) = sum_i max(|v_i| - theta, 0) is strictly decreasing past zero.
inline Vector l1_ball_projection_bisection(const Vector& v, double c) {
  auto shrunk_l1 = [&v](double theta) {
    double total = 0.0;
    for (Index i = 0; i < v.size(); ++i) total += std::max(std::abs(v[i]) - theta, 0.0);
    return total;
  };
  if (shrunk_l1(0.0) <= c) return v;
  double lo = 0.0, hi = v.cwiseAbs().maxCoeff();
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (shrunk_l1(mid) > c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double theta = 0.5 * (lo + hi);
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(std::abs(v[i]) - theta, 0.0);
    out[i] = (mag == 0.0) ? 0.0 : std::copysign(mag, v[i]);
  }
  return out;
}

struct GridSolveResult {
  Vector argmin;
  double objective = std::numeric_limits<double>::infinity();
  bool found_feasible = false;
};

// Multi-resolution exhaustive search for
//   min ||D^T z||_1  s.t.  y_j (a_j^T z - t_j) >= 0, ||z||_2 <= R,
// intended for n <= 3. `center_hint` seeds the search box (any known feasible
// point works; the box always starts wide enough to cover the whole ball).
inline GridSolveResult grid_refine_sign_solve(const Matrix& D, const Matrix& A,
                                              const Vector& t, const Vector& y, double R,
                                              const Vector& center_hint, int points_per_dim = 15,
                                              int levels = 9) {
  const Index n = A.cols();
  GridSolveResult best;

  Vector center = Vector::Zero(n);
  double half_width = R;

  auto evaluate_box = [&](const Vector& box_center, double hw) {
    std::vector<Index> idx(static_cast<std::size_t>(n), 0);
    const Index pts = points_per_dim;
    Vector z(n);
    bool improved = false;
    while (true) {
      for (Index d = 0; d < n; ++d) {
        const double frac =
            pts == 1 ? 0.5 : static_cast<double>(idx[static_cast<std::size_t>(d)]) /
                                 static_cast<double>(pts - 1);
        z[d] = box_center[d] - hw + 2.0 * hw * frac;
      }
      const bool ball_ok = z.norm() <= R + 1e-12;
      bool signs_ok = true;
      if (ball_ok) {
        const Vector margins = y.cwiseProduct(A * z - t);
        signs_ok = margins.minCoeff() >= -1e-12;
      }
      if (ball_ok && signs_ok) {
        const double obj = (D.transpose() * z).lpNorm<1>();
        if (obj < best.objective) {
          best.objective = obj;
          best.argmin = z;
          best.found_feasible = true;
          improved = true;
        }
      }
      Index d = 0;
      while (d < n) {
        if (++idx[static_cast<std::size_t>(d)] < pts) break;
        idx[static_cast<std::size_t>(d)] = 0;
        ++d;
      }
      if (d == n) break;
    }
    return improved;
  };

  for (int level = 0; level < levels; ++level) {
    evaluate_box(center, half_width);
    if (!best.found_feasible) {
      // Thin feasible set: recenter on the caller's hint and keep the width.
      center = center_hint;
      evaluate_box(center, half_width);
    }
    if (best.found_feasible) {
      center = best.argmin;
      // Keep a margin of a few cells around the incumbent.
      half_width = std::max(half_width * 3.0 / static_cast<double>(points_per_dim - 1),
                            1e-12);
    }
  }
  return best;
}

// Exact projection onto {z : ||D^T z||_1 <= c} by enumerating KKT sign
// patterns; practical for N <= 6. At optimality z = v - D g~ where g~ lies in
// the scaled l1 subdifferential: g~_j = mu s_j on the active signed support
// and |g~_j| <= mu on the zero set Z.
inline Vector kkt_enumeration_projection(const Vector& v, const Matrix& D, double c) {
  const Index n = D.rows();
  const Index N = D.cols();
  if ((D.transpose() * v).lpNorm<1>() <= c) return v;

  Vector best = v;
  double best_dist = std::numeric_limits<double>::infinity();

  // pattern[j] in {0: zero coordinate, 1: +, 2: -}
  std::vector<int> pattern(static_cast<std::size_t>(N), 0);
  const long long combos = static_cast<long long>(std::pow(3.0, static_cast<double>(N)));
  for (long long code = 0; code < combos; ++code) {
    long long rem = code;
    Index zero_count = 0;
    for (Index j = 0; j < N; ++j) {
      pattern[static_cast<std::size_t>(j)] = static_cast<int>(rem % 3);
      rem /= 3;
      if (pattern[static_cast<std::size_t>(j)] == 0) ++zero_count;
    }
    if (zero_count == N) continue;  // cannot have ||D^T z||_1 = c > 0

    // Unknowns: z (n), mu (1), h_Z (zero_count). Equations:
    //   z + mu * D_active s + D_Z h = v
    //   d_j^T z = 0 for j in Z
    //   sum_{j active} s_j d_j^T z = c
    const Index dim = n + 1 + zero_count;
    Matrix M = Matrix::Zero(dim, dim);
    Vector rhs = Vector::Zero(dim);

    M.topLeftCorner(n, n) = Matrix::Identity(n, n);
    Vector ds = Vector::Zero(n);  // D_active s
    for (Index j = 0; j < N; ++j) {
      const int p = pattern[static_cast<std::size_t>(j)];
      if (p == 1) ds += D.col(j);
      if (p == 2) ds -= D.col(j);
    }
    M.block(0, n, n, 1) = ds;
    {
      // Zero-coordinate equations occupy rows n..n+Z-1; the budget equation
      // is the last row.
      Index k = 0;
      for (Index j = 0; j < N; ++j) {
        if (pattern[static_cast<std::size_t>(j)] == 0) {
          M.block(0, n + 1 + k, n, 1) = D.col(j);
          M.block(n + k, 0, 1, n) = D.col(j).transpose();
          ++k;
        }
      }
    }
    M.block(dim - 1, 0, 1, n) = ds.transpose();
    rhs.head(n) = v;
    rhs[dim - 1] = c;

    Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible()) continue;
    const Vector sol = lu.solve(rhs);
    const Vector z = sol.head(n);
    const double mu = sol[n];
    if (!(mu >= -1e-10)) continue;

    bool consistent = true;
    Index k = 0;
    const Vector coeffs = D.transpose() * z;
    for (Index j = 0; j < N && consistent; ++j) {
      const int p = pattern[static_cast<std::size_t>(j)];
      if (p == 0) {
        const double h = sol[n + 1 + k];
        ++k;
        if (std::abs(h) > mu * (1.0 + 1e-9) + 1e-10) consistent = false;
      } else {
        const double s = (p == 1) ? 1.0 : -1.0;
        if (s * coeffs[j] < -1e-10) consistent = false;
      }
    }
    if (!consistent) continue;

    const double dist = (z - v).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = z;
    }
  }
  return best;
}

// Long-run switching subgradient method for the same projection: Polyak
// feasibility steps while outside the analysis-l1 ball, diminishing gradient
// steps toward v while inside.
inline Vector subgradient_projection_oracle(const Vector& v, const Matrix& D, double c,
                                            long long iterations = 400000) {
  Vector z = v;
  for (long long k = 1; k <= iterations; ++k) {
    const Vector w = D.transpose() * z;
    const double l1 = w.lpNorm<1>();
    if (l1 > c) {
      Vector g = Vector::Zero(z.size());
      for (Index j = 0; j < w.size(); ++j) {
        if (w[j] > 0.0) {
          g += D.col(j);
        } else if (w[j] < 0.0) {
          g -= D.col(j);
        }
      }
      const double gn = g.squaredNorm();
      if (gn == 0.0) break;
      z -= ((l1 - c) / gn) * g;
    } else {
      const double alpha = 2.0 / (static_cast<double>(k) + 2.0);
      z -= alpha * (z - v);
    }
  }
  // Finish on the constraint so the returned point is feasible.
  for (int polish = 0; polish < 200; ++polish) {
    const Vector w = D.transpose() * z;
    const double l1 = w.lpNorm<1>();
    if (l1 <= c * (1.0 + 1e-14)) break;
    Vector g = Vector::Zero(z.size());
    for (Index j = 0; j < w.size(); ++j) {
      if (w[j] > 0.0) {
        g += D.col(j);
      } else if (w[j] < 0.0) {
        g -= D.col(j);
      }
    }
    const double gn = g.squaredNorm();
    if (gn == 0.0) break;
    z -= ((l1 - c) / gn) * g;
  }
  return z;
}

}  // namespace oracles
