#include "byzcubic/cubic_solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace byzcubic {

namespace {

void validate(const CubicSubproblem& prob) {
  const auto d = prob.g.size();
  if (prob.H.rows() != d || prob.H.cols() != d) {
    throw DimensionError(fmt::format("cubic subproblem: g has size {}, H is {}x{}",
                                     d, prob.H.rows(), prob.H.cols()));
  }
  if (!(prob.M > 0)) throw ConfigError(fmt::format("cubic subproblem: M = {} must be > 0", prob.M));
  if (!(prob.gamma >= 0)) {
    throw ConfigError(fmt::format("cubic subproblem: gamma = {} must be >= 0", prob.gamma));
  }
}

double min_eigenvalue(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

double second_order_slack(const CubicSubproblem& prob, double s_norm) {
  return prob.gamma * min_eigenvalue(prob.H) +
         0.5 * prob.M * prob.gamma * prob.gamma * s_norm;
}

double descent_slack(const CubicSubproblem& prob, const Vector& s) {
  const double n = s.norm();
  return prob.g.dot(s) + 0.5 * prob.gamma * s.dot(prob.H * s) +
         0.25 * prob.M * prob.gamma * prob.gamma * n * n * n;
}

}  // namespace

double cubic_objective(const CubicSubproblem& prob, const Vector& s) {
  const double n = s.norm();
  return prob.g.dot(s) + 0.5 * prob.gamma * s.dot(prob.H * s) +
         prob.M / 6.0 * prob.gamma * prob.gamma * n * n * n;
}

Vector cubic_gradient(const CubicSubproblem& prob, const Vector& s) {
  const double cubic = 0.5 * prob.M * prob.gamma * prob.gamma * s.norm();
  return prob.g + prob.gamma * (prob.H * s) + cubic * s;
}

double default_inner_step(const CubicSubproblem& prob) {
  const double mg2 = prob.M * prob.gamma * prob.gamma;
  const double radius = 2.0 * prob.g.norm() / (mg2 + 1.0);
  return 1.0 / (2.0 * (prob.gamma * prob.H.norm() + mg2 * radius + 1.0));
}

double default_inner_tol(const CubicSubproblem& prob) {
  return 1e-6 * (1.0 + prob.g.norm());
}

CubicSolution solve_cubic(const CubicSubproblem& prob,
                          const CubicSolverOptions& options) {
  validate(prob);
  CubicSolution out;
  out.step = options.step.value_or(default_inner_step(prob));
  out.tol = options.tol.value_or(default_inner_tol(prob));
  if (!(out.step > 0) || !(out.tol > 0)) {
    throw ConfigError(fmt::format("inner step {} and tolerance {} must be > 0",
                                  out.step, out.tol));
  }

  if (prob.gamma == 0.0) {
    out.s = -prob.g;
    out.residual_norm = prob.g.norm();
    out.converged = true;
    out.descent_slack = descent_slack(prob, out.s);
    out.second_order_slack = 0.0;
    return out;
  }

  Vector s = Vector::Zero(prob.g.size());
  Vector grad = prob.g;
  double grad_norm = grad.norm();
  int iters = 0;
  while (grad_norm > out.tol && iters < options.max_iters) {
    s -= out.step * grad;
    grad = cubic_gradient(prob, s);
    grad_norm = grad.norm();
    ++iters;
    const double s_norm = s.norm();
    if (!(s_norm <= options.divergence_guard)) {
      throw DivergenceError(fmt::format(
          "cubic solver iterate norm {:g} exceeded guard {:g} after {} steps; "
          "try a smaller inner step (current {:g})",
          s_norm, options.divergence_guard, iters, out.step));
    }
    if (options.observer) options.observer(iters, s);
  }

  out.s = std::move(s);
  out.inner_iters = iters;
  out.residual_norm = grad_norm;
  out.converged = grad_norm <= out.tol;
  out.descent_slack = descent_slack(prob, out.s);
  out.second_order_slack =
      options.second_order_certificate
          ? second_order_slack(prob, out.s.norm())
          : std::numeric_limits<double>::quiet_NaN();
  return out;
}

Certificates certify(const CubicSubproblem& prob, const Vector& s) {
  validate(prob);
  if (s.size() != prob.g.size()) {
    throw DimensionError(fmt::format("certify: s has size {}, expected {}",
                                     s.size(), prob.g.size()));
  }
  Certificates c;
  c.residual_norm = cubic_gradient(prob, s).norm();
  c.second_order_slack = second_order_slack(prob, s.norm());
  c.descent_slack = descent_slack(prob, s);
  return c;
}

}  // namespace byzcubic
