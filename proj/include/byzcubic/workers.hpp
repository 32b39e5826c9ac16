#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "byzcubic/common.hpp"
#include "byzcubic/cubic_solver.hpp"
#include "byzcubic/dataset.hpp"
#include "byzcubic/losses.hpp"

namespace byzcubic {

namespace role {
struct Honest {};
/// Adds i.i.d. N(0, sigma^2) noise to every coordinate of the honest update.
struct GaussianNoise {
  double sigma = 1.0;
};
/// Trains on labels resampled uniformly from the shard's label set, once per
/// run.
struct RandomLabel {
  std::uint64_t seed = 0;
};
/// Trains on y -> -y.
struct FlippedLabel {};
/// Sends -c * s for the honest update s, c in (0, 1).
struct NegativeUpdate {
  double c = 0.5;
};
}  // namespace role

using WorkerRole = std::variant<role::Honest, role::GaussianNoise,
                                role::RandomLabel, role::FlippedLabel,
                                role::NegativeUpdate>;

bool is_byzantine(const WorkerRole& r);
std::string role_name(const WorkerRole& r);

struct WorkerSpec {
  int worker_id = 0;
  Shard shard;  // empty for the data-free saddle loss
  WorkerRole role = role::Honest{};
};

/// Everything a worker needs for one round besides its own state.
struct StepContext {
  const Vector* x = nullptr;
  /// Global gradient broadcast in two-round mode; replaces the local one.
  const Vector* g_override = nullptr;
  double M = 10.0;
  double gamma = 1.0;
  CubicSolverOptions solver;
  std::uint64_t master_seed = 0;
  int round = 0;
  /// Std-dev of additive Gaussian noise on the local gradient (emulates
  /// sub-sampling for the data-free saddle loss). 0 disables it.
  double gradient_noise = 0.0;
};

struct WorkerUpdate {
  int worker_id = 0;
  Vector s;
  int inner_iters = 0;
  bool converged = false;
  // Certificates of the underlying honest-form solve.
  double residual_norm = 0.0;
  double descent_slack = 0.0;
  double second_order_slack = 0.0;
};

/// A worker bound to its shard. The canonical loss is never modified; label
/// attacks optimize a separate copy built once at construction.
class Worker {
 public:
  /// `prototype` fixes the loss family and parameters; it is rebound to the
  /// worker's shard.
  Worker(WorkerSpec spec, const LossModel& prototype);

  int id() const { return spec_.worker_id; }
  const WorkerRole& role() const { return spec_.role; }
  bool byzantine() const { return is_byzantine(spec_.role); }
  const Shard& shard() const { return spec_.shard; }

  /// Loss on the worker's true shard.
  const LossModel& loss() const { return loss_; }
  /// Loss the worker actually optimizes (differs for label attacks).
  const LossModel& training_loss() const {
    return attacked_loss_ ? *attacked_loss_ : loss_;
  }

  /// Gradient of the training loss at x plus optional simulation noise.
  Vector local_gradient(const StepContext& ctx) const;

  /// What the worker sends during the gradient round of two-round mode.
  /// Update-level attacks are applied to the gradient as well.
  Vector sent_gradient(const StepContext& ctx) const;

  /// Dispatches to honest_step or byzantine_step by role.
  WorkerUpdate step(const StepContext& ctx) const;

 private:
  WorkerSpec spec_;
  LossModel loss_;
  std::optional<LossModel> attacked_loss_;
};

/// Local gradient (or ctx.g_override) and Hessian of the training loss at
/// ctx.x, then solve_cubic. Label attackers reach this through their
/// attacked loss.
WorkerUpdate honest_step(const Worker& worker, const StepContext& ctx);

/// Applies the worker's attack. Requires a Byzantine role.
WorkerUpdate byzantine_step(const Worker& worker, const StepContext& ctx);

}  // namespace byzcubic
