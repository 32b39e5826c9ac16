#pragma once

// Test-only reference computations. Nothing here calls into the solver or
// the analytic derivative code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "byzcubic/common.hpp"
#include "byzcubic/dataset.hpp"
#include "byzcubic/losses.hpp"

namespace oracle {

using byzcubic::Matrix;
using byzcubic::Vector;

inline Vector central_gradient(const byzcubic::LossModel& f, const Vector& w,
                               double h = 1e-5) {
  Vector g(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    Vector wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    g[j] = (f.value(wp) - f.value(wm)) / (2 * h);
  }
  return g;
}

/// Hessian-vector product from central differences of the gradient.
inline Vector central_hessian_vector(const byzcubic::LossModel& f,
                                     const Vector& w, const Vector& v,
                                     double h = 1e-5) {
  return (f.gradient(w + h * v) - f.gradient(w - h * v)) / (2 * h);
}

inline double relative_error(const Vector& a, const Vector& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-8});
  return (a - b).norm() / scale;
}

/// Global minimizer of g^T s + (gamma/2) s^T H s + (M/6) gamma^2 ||s||^3
/// through the eigen-basis reduction: s(r) = -(gamma H + (M gamma^2/2) r I)^{-1} g
/// with r = ||s(r)|| found by bisection on the interval where the shifted
/// matrix is positive definite. Valid outside the measure-zero hard case.
inline Vector cubic_minimizer(const Vector& g, const Matrix& H, double M,
                              double gamma) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  const Vector lam = eig.eigenvalues();
  const Matrix& Q = eig.eigenvectors();
  const Vector b = Q.transpose() * g;
  const double c = 0.5 * M * gamma * gamma;
  auto coeff = [&](double r, Eigen::Index j) { return gamma * lam[j] + c * r; };
  auto norm_at = [&](double r) {
    double acc = 0;
    for (Eigen::Index j = 0; j < b.size(); ++j) acc += std::pow(b[j] / coeff(r, j), 2);
    return std::sqrt(acc);
  };
  double lo = std::max(0.0, -gamma * lam[0] / c);
  double hi = lo + 1.0;
  while (norm_at(hi) > hi) hi = lo + 2 * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (norm_at(mid) > mid ? lo : hi) = mid;
  }
  const double r = hi;
  Vector y(b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) y[j] = -b[j] / coeff(r, j);
  return Q * y;
}

/// Smallest eigenvalue by power iteration on (sigma I - A) with sigma a
/// Gershgorin upper bound on the spectrum. Stops once the Rayleigh-quotient
/// residual ||A v - rho v|| falls below tol * sigma.
inline double power_min_eigenvalue(const Matrix& A, int max_iters = 1000000,
                                   double tol = 1e-9) {
  double sigma = 0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    sigma = std::max(sigma, A.row(i).cwiseAbs().sum());
  }
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  Vector v(A.rows());
  for (auto& x : v) x = normal(rng);
  v.normalize();
  double rho = v.dot(A * v);
  for (int it = 0; it < max_iters; ++it) {
    const Vector av = A * v;
    rho = v.dot(av);
    if ((av - rho * v).norm() <= tol * sigma) break;
    v = sigma * v - av;
    v.normalize();
  }
  return rho;
}

/// Random sparse samples with real features in [-1, 1] and labels in
/// {-1, +1}.
inline std::vector<byzcubic::Sample> random_samples(int n, int dim,
                                                    double density,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution active(density), positive(0.5);
  std::vector<byzcubic::Sample> out(n);
  for (auto& s : out) {
    for (int j = 0; j < dim; ++j) {
      if (active(rng)) s.features.push_back({j, unif(rng)});
    }
    if (s.features.empty()) s.features.push_back({0, unif(rng)});
    s.label = positive(rng) ? 1.0 : -1.0;
  }
  return out;
}

inline byzcubic::SampleSet share(std::vector<byzcubic::Sample> v) {
  return std::make_shared<const std::vector<byzcubic::Sample>>(std::move(v));
}

inline Vector random_vector(Eigen::Index d, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(d);
  for (auto& x : v) x = normal(rng);
  return v;
}

inline Matrix random_symmetric(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = normal(rng);
  }
  return a;
}

}  // namespace oracle
