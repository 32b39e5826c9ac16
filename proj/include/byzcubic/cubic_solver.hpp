#pragma once

#include <functional>
#include <optional>

#include "byzcubic/common.hpp"

namespace byzcubic {

/// min_s  g^T s + (gamma/2) s^T H s + (M/6) gamma^2 ||s||^3
struct CubicSubproblem {
  Vector g;
  Matrix H;  // symmetric
  double M = 10.0;
  double gamma = 1.0;
};

struct CubicSolverOptions {
  /// Inner step size. Unset: 1 / (2 (gamma ||H||_F + M gamma^2 r + 1)) with
  /// r = 2 ||g|| / (M gamma^2 + 1).
  std::optional<double> step;
  /// Residual tolerance. Unset: 1e-6 (1 + ||g||).
  std::optional<double> tol;
  int max_iters = 50000;
  double divergence_guard = 1e8;
  /// Skip the eigenvalue computation behind second_order_slack (reported as
  /// NaN) when the caller has no use for it.
  bool second_order_certificate = true;
  /// Invoked after every inner step with the iteration count and iterate.
  std::function<void(int, const Vector&)> observer;
};

/// Optimality certificates of a candidate solution s.
struct Certificates {
  /// ||g + gamma H s + (M gamma^2 / 2) ||s|| s||
  double residual_norm = 0.0;
  /// lambda_min(gamma H + (M gamma^2 / 2) ||s|| I); >= 0 at a global minimizer.
  double second_order_slack = 0.0;
  /// g^T s + (gamma/2) s^T H s + (M/4) gamma^2 ||s||^3; <= 0 at a global
  /// minimizer.
  double descent_slack = 0.0;
};

struct CubicSolution {
  Vector s;
  double residual_norm = 0.0;
  int inner_iters = 0;
  bool converged = false;
  double descent_slack = 0.0;
  double second_order_slack = 0.0;
  double step = 0.0;
  double tol = 0.0;
};

double cubic_objective(const CubicSubproblem& prob, const Vector& s);

/// Gradient of the subproblem objective at s.
Vector cubic_gradient(const CubicSubproblem& prob, const Vector& s);

double default_inner_step(const CubicSubproblem& prob);
double default_inner_tol(const CubicSubproblem& prob);

/// Plain gradient descent on the subproblem from s = 0, stopping once the
/// gradient norm is at most tol. gamma = 0 short-circuits to s = -g, the
/// gradient-descent direction, since the loop would never move G.
///
/// Hitting max_iters is reported through `converged = false`, not thrown.
/// Throws DivergenceError when ||s|| exceeds the divergence guard.
CubicSolution solve_cubic(const CubicSubproblem& prob,
                          const CubicSolverOptions& options = {});

Certificates certify(const CubicSubproblem& prob, const Vector& s);

}  // namespace byzcubic
