#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "byzcubic/common.hpp"
#include "byzcubic/dataset.hpp"
#include "byzcubic/losses.hpp"

namespace byzcubic {

/// Smallest eigenvalue of a symmetric matrix (full symmetric eigensolve).
double min_eigenvalue(const Matrix& a);

/// Spectral norm of a symmetric matrix, max |lambda|.
double symmetric_spectral_norm(const Matrix& a);

struct Stationarity {
  bool first_order_ok = false;   // ||grad f(x)|| <= eps
  bool second_order_ok = false;  // lambda_min(hess f(x)) >= -sqrt(eps)
  double grad_norm = 0.0;
  double lambda_min = 0.0;
};

/// Epsilon-second-order stationarity verdict of x for `loss`.
Stationarity stationarity(const Vector& x, const LossModel& loss, double eps);

/// Per-worker distance of the local gradient / Hessian from the full-data
/// ones, in l2 / spectral norm.
struct DeviationReport {
  std::vector<double> gradient;
  std::vector<double> hessian;
  std::vector<std::size_t> shard_sizes;
};

DeviationReport measure_deviation(std::span<const LossModel> shard_losses,
                                  const Vector& x, const LossModel& full);

/// Fraction of samples with sign(x^T features) == label, where a zero margin
/// predicts +1. nullopt for losses that are not classifiers.
std::optional<double> test_accuracy(const Vector& x,
                                    const std::vector<Sample>& test,
                                    LossKind loss);

/// One row of the per-round metrics stream.
struct IterationRecord {
  int k = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::optional<double> lambda_min;     // only on evaluation rounds
  std::optional<double> test_accuracy;  // classification only
  int comm_rounds = 0;
  std::vector<int> kept_ids;
  std::vector<int> trimmed_ids;
  double wall_ms = 0.0;

  // Simulator-side diagnostics, not part of the CSV.
  double max_kept_norm = 0.0;
  double max_honest_norm = 0.0;
  int max_inner_iters = 0;
  bool all_inner_converged = true;
};

inline constexpr const char* kCsvHeader =
    "k,f,grad_norm,lambda_min,test_acc,comm_rounds,kept,wall_ms";

/// Header plus one line per record. Reals use shortest round-trip form;
/// missing values are written as NA; kept ids are ';'-separated.
void write_csv(std::ostream& out, std::span<const IterationRecord> records);

}  // namespace byzcubic
