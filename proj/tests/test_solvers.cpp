#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "obcs/core.hpp"
#include "obcs/dictionaries.hpp"
#include "obcs/solvers.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace obcs;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Random tiny sign-constrained instance with a known feasible witness z0.
struct TinyInstance {
  Dictionary dict;
  Matrix A;
  Vector t, y, z0;
  double R = 0.0;
};

TinyInstance make_tiny_instance(Index n, Index N, Index q, const RngStream& rng) {
  TinyInstance inst;
  inst.dict = random_tight_dictionary(n, N, rng.child(0));
  inst.A = gaussian_matrix(q, n, rng.child(1));
  inst.t = gaussian_vector(q, rng.child(2));
  inst.R = 1.0 + GaussianSampler(rng.child(3)).uniform();
  Vector z0 = gaussian_vector(n, rng.child(4));
  z0 *= (0.8 * inst.R) / z0.norm();
  inst.z0 = z0;
  inst.y = sign_vector(inst.A * z0 - inst.t);
  return inst;
}

}  // namespace

TEST_CASE("project_l2_ball hand values") {
  CHECK(project_l2_ball(vec2(3, 4), 10.0) == vec2(3, 4));
  CHECK(project_l2_ball(vec2(3, 4), 5.0) == vec2(3, 4));  // boundary unchanged
  const Vector p = project_l2_ball(vec2(3, 4), 1.0);
  CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-14));
  CHECK_THROWS_AS(project_l2_ball(vec2(1, 1), 0.0), std::invalid_argument);
}

TEST_CASE("project_halfspace hand values") {
  CHECK(project_halfspace(vec2(0, 0), vec2(1, 0), -1.0) == vec2(0, 0));
  const Vector p = project_halfspace(vec2(0, 0), vec2(1, 0), 2.0);
  CHECK(p[0] == doctest::Approx(2.0));
  CHECK(p[1] == doctest::Approx(0.0));
  CHECK_THROWS_AS(project_halfspace(vec2(0, 0), vec2(0, 0), 1.0), std::invalid_argument);

  const RngStream rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector v = gaussian_vector(4, rng.child(2 * rep));
    const Vector a = gaussian_vector(4, rng.child(2 * rep + 1));
    const double b = GaussianSampler(rng.child(1000 + rep)).normal();
    const Vector out = project_halfspace(v, a, b);
    CHECK(a.dot(out) >= b - 1e-12);
  }
}

TEST_CASE("project_l1_ball hand values") {
  CHECK(project_l1_ball(vec2(0.2, 0.3), 1.0) == vec2(0.2, 0.3));
  const Vector a = project_l1_ball(vec2(3, 0), 1.0);
  CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a[1] == 0.0);
  const Vector b = project_l1_ball(vec2(2, 1), 1.0);
  CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b[1] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("project_l1_ball against the bisection oracle") {
  const RngStream rng(2);
  for (int rep = 0; rep < 300; ++rep) {
    const Index d = 1 + rep % 6;
    const Vector v = gaussian_vector(d, rng.child(rep));
    for (double c : {0.3, 1.0, 2.7}) {
      const Vector mine = project_l1_ball(v, c);
      const Vector ref = oracles::l1_ball_projection_bisection(v, c);
      CHECK((mine - ref).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(mine.lpNorm<1>() <= std::min(c, v.lpNorm<1>()) + 1e-10);
      CHECK(std::abs(mine.lpNorm<1>() - std::min(c, v.lpNorm<1>())) <= 1e-10);
    }
  }
}

TEST_CASE("projections are idempotent and non-expansive") {
  const RngStream rng(3);
  for (int rep = 0; rep < 1000; ++rep) {
    const RngStream r = rng.child(rep);
    const Vector u = gaussian_vector(5, r.child(0));
    const Vector v = gaussian_vector(5, r.child(1));
    const double c = 0.5 + GaussianSampler(r.child(2)).uniform() * 2.0;

    const Vector pu = project_l1_ball(u, c);
    const Vector pv = project_l1_ball(v, c);
    CHECK((project_l1_ball(pu, c) - pu).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((pu - pv).norm() <= (u - v).norm() + 1e-12);

    const Vector bu = project_l2_ball(u, c);
    const Vector bv = project_l2_ball(v, c);
    CHECK((project_l2_ball(bu, c) - bu).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((bu - bv).norm() <= (u - v).norm() + 1e-12);
  }
}

TEST_CASE("sign-constrained solve: 1-D instances with hand solutions") {
  const Dictionary dict = identity_dictionary(1);
  Matrix A(1, 1);
  A << 1.0;
  const SolverParams params;

  {
    // z >= 0.5, ||z|| <= 2: the l1 minimizer on [0.5, 2] is 0.5.
    SignConstraintSet cons{A, Vector::Constant(1, 0.5), Vector::Constant(1, 1.0), 2.0};
    const SolveReport rep = solve_sign_constrained_l1(dict, cons, params);
    CHECK(rep.converged);
    CHECK(rep.solution[0] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(rep.objective == doctest::Approx(0.5).epsilon(1e-5));
  }
  {
    // z <= 0.5 with radius 2: zero is feasible and minimizes |z|.
    SignConstraintSet cons{A, Vector::Constant(1, 0.5), Vector::Constant(1, -1.0), 2.0};
    const SolveReport rep = solve_sign_constrained_l1(dict, cons, params);
    CHECK(rep.converged);
    CHECK(std::abs(rep.solution[0]) <= 1e-5);
    CHECK(rep.objective <= 1e-5);
  }
}

TEST_CASE("sign-constrained solve: feasible witness bounds the objective") {
  const SolverParams params;
  const RngStream rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const TinyInstance inst = make_tiny_instance(3, 5, 4, rng.child(rep));
    SignConstraintSet cons{inst.A, inst.t, inst.y, inst.R};
    const SolveReport report = solve_sign_constrained_l1(inst.dict, cons, params);
    CHECK(report.converged);
    CHECK(report.feasibility_violation <= params.constraint_tol);
    const double witness_objective = inst.dict.analyze(inst.z0).lpNorm<1>();
    CHECK(report.objective <= witness_objective + 1e-4);
  }
}

TEST_CASE("sign-constrained solve matches the grid-refinement oracle") {
  const SolverParams params;
  const RngStream rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    const Index n = 1 + rep % 3;
    const TinyInstance inst = make_tiny_instance(n, n + 1, 3, rng.child(rep));
    SignConstraintSet cons{inst.A, inst.t, inst.y, inst.R};
    const SolveReport report = solve_sign_constrained_l1(inst.dict, cons, params);
    REQUIRE(report.converged);
    const auto oracle = oracles::grid_refine_sign_solve(inst.dict.D, inst.A, inst.t, inst.y,
                                                        inst.R, inst.z0);
    REQUIRE(oracle.found_feasible);
    CHECK(report.objective == doctest::Approx(oracle.objective).epsilon(1e-2));
  }
}

TEST_CASE("sign-constrained solve detects infeasible constraints") {
  const Dictionary dict = identity_dictionary(1);
  Matrix A(2, 1);
  A << 1.0, 1.0;
  Vector t(2), y(2);
  t << 1.0, -1.0;
  y << 1.0, -1.0;  // z >= 1 and z <= -1
  SignConstraintSet cons{A, t, y, 5.0};
  SolverParams params;
  CHECK_THROWS_AS(solve_sign_constrained_l1(dict, cons, params), InfeasibleProblemError);
}

TEST_CASE("solver input validation") {
  const Dictionary dict = identity_dictionary(2);
  Matrix A(1, 2);
  A << 1.0, 0.0;
  SignConstraintSet bad_sign{A, Vector::Zero(1), Vector::Constant(1, 0.5), 1.0};
  SolverParams params;
  CHECK_THROWS_AS(solve_sign_constrained_l1(dict, bad_sign, params), std::invalid_argument);

  SignConstraintSet bad_radius{A, Vector::Zero(1), Vector::Constant(1, 1.0), 0.0};
  CHECK_THROWS_AS(solve_sign_constrained_l1(dict, bad_radius, params), std::invalid_argument);

  SolverParams bad_params;
  bad_params.max_iterations = 0;
  SignConstraintSet ok{A, Vector::Zero(1), Vector::Constant(1, 1.0), 1.0};
  CHECK_THROWS_AS(solve_sign_constrained_l1(dict, ok, bad_params), std::invalid_argument);
}

TEST_CASE("monitored residuals are non-increasing over 50-iteration windows") {
  const SolverParams params;
  const TinyInstance inst = make_tiny_instance(3, 6, 4, RngStream(6));
  SignConstraintSet cons{inst.A, inst.t, inst.y, inst.R};
  const SolveReport report = solve_sign_constrained_l1(inst.dict, cons, params);
  for (std::size_t i = 1; i < report.windowed_primal_best.size(); ++i) {
    CHECK(report.windowed_primal_best[i] <= report.windowed_primal_best[i - 1]);
  }
}

TEST_CASE("analysis projection returns feasible inputs unchanged") {
  const Dictionary dict = random_tight_dictionary(3, 6, RngStream(7));
  const Vector v = 0.01 * gaussian_vector(3, RngStream(8));
  const double c = dict.analyze(v).lpNorm<1>() + 1.0;
  const SolveReport rep = project_analysis_l1(v, dict, c, SolverParams{});
  CHECK(rep.converged);
  CHECK(rep.solution == v);
  CHECK(rep.iterations == 0);
}

TEST_CASE("analysis projection reduces to the l1 kernel for identity dictionaries") {
  const Dictionary dict = identity_dictionary(5);
  const SolverParams params;
  const RngStream rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector v = gaussian_vector(5, rng.child(rep));
    const double c = 0.5 + GaussianSampler(rng.child(1000 + rep)).uniform();
    const SolveReport report = project_analysis_l1(v, dict, c, params);
    CHECK(report.converged);
    const Vector kernel = project_l1_ball(v, c);
    CHECK((report.solution - kernel).norm() <= 1e-6);
  }
}

TEST_CASE("analysis projection on redundant frames matches independent oracles") {
  const SolverParams params;
  const RngStream rng(10);
  for (int rep = 0; rep < 5; ++rep) {
    const Dictionary dict = random_tight_dictionary(2, 3, rng.child(3 * rep));
    const Vector v = gaussian_vector(2, rng.child(3 * rep + 1));
    const double c = 0.5 * dict.analyze(v).lpNorm<1>();
    if (c <= 0.0) continue;
    const SolveReport report = project_analysis_l1(v, dict, c, params);
    REQUIRE(report.converged);
    CHECK(dict.analyze(report.solution).lpNorm<1>() <= c + params.constraint_tol);

    const Vector exact = oracles::kkt_enumeration_projection(v, dict.D, c);
    CHECK((report.solution - exact).norm() <= 1e-5);

    const Vector subgrad = oracles::subgradient_projection_oracle(v, dict.D, c);
    CHECK((report.solution - subgrad).norm() <= 1e-4);
  }
}

TEST_CASE("subgradient oracle self-check against the exact kernel") {
  // Validates the oracle itself where a closed form exists (D = I).
  const RngStream rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector v = gaussian_vector(3, rng.child(rep));
    const double c = 0.4 * v.lpNorm<1>();
    if (c <= 0.0) continue;
    const Vector kernel = project_l1_ball(v, c);
    const Vector oracle = oracles::subgradient_projection_oracle(v, Matrix::Identity(3, 3), c);
    CHECK((kernel - oracle).norm() <= 1e-5);
    const Vector kkt = oracles::kkt_enumeration_projection(v, Matrix::Identity(3, 3), c);
    CHECK((kernel - kkt).norm() <= 1e-9);
  }
}
