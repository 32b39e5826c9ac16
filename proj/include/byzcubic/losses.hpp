#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "byzcubic/common.hpp"
#include "byzcubic/dataset.hpp"

namespace byzcubic {

enum class LossKind {
  logistic,  // ridge logistic regression, labels in {-1, +1}
  robust,    // non-convex robust linear regression
  saddle,    // (w_1^2 - 1)^2 + sum_{j>=2} w_j^2, no data
};

std::string_view to_string(LossKind kind);
std::optional<LossKind> parse_loss_kind(std::string_view name);

/// Largest dimension for which a dense Hessian is formed.
inline constexpr int kDenseHessianLimit = 2000;

using SampleSet = std::shared_ptr<const std::vector<Sample>>;

/// Value / gradient / Hessian oracle of an empirical loss bound to a fixed
/// sample set (a shard or the full training set).
///
/// Per-sample sums are accumulated in long double in the stored sample
/// order, so results do not depend on who calls or from which thread.
/// Hessians are assembled from the upper triangle and mirrored, hence exactly
/// symmetric.
class LossModel {
 public:
  static LossModel logistic(SampleSet data, int dim, double ridge_lambda);
  static LossModel robust_linear(SampleSet data, int dim);
  static LossModel strict_saddle(int dim);

  /// Builds the data-bound model selected by `kind`. For `saddle` the data
  /// is ignored.
  static LossModel make(LossKind kind, SampleSet data, int dim,
                        double ridge_lambda);

  LossKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double ridge_lambda() const { return ridge_lambda_; }
  std::size_t num_samples() const { return data_ ? data_->size() : 0; }
  const SampleSet& samples() const { return data_; }

  /// Sample count n in the ridge term lambda / (2n) ||w||^2.
  double ridge_count() const { return ridge_count_; }

  /// Same loss family and parameters over another sample set. The ridge
  /// normalizer is kept, so shard losses average to the full-data loss.
  LossModel rebind(SampleSet data) const;

  void set_hessian_limit(int limit) { hessian_limit_ = limit; }
  int hessian_limit() const { return hessian_limit_; }

  double value(const Vector& w) const;
  Vector gradient(const Vector& w) const;

  /// Dense Hessian. Throws CapabilityError when dim() exceeds the limit;
  /// Hessian-free operation is not supported.
  Matrix hessian(const Vector& w) const;

 private:
  LossModel(LossKind kind, SampleSet data, int dim, double ridge_lambda);

  void check_dim(const Vector& w) const;

  LossKind kind_;
  SampleSet data_;
  int dim_;
  double ridge_lambda_;
  double ridge_count_ = 1.0;
  int hessian_limit_ = kDenseHessianLimit;
};

}  // namespace byzcubic
