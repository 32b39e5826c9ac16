#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "byzcubic/common.hpp"
#include "byzcubic/config.hpp"
#include "byzcubic/dataset.hpp"
#include "byzcubic/metrics.hpp"
#include "byzcubic/workers.hpp"

namespace byzcubic {

struct TrimResult {
  std::vector<int> kept_ids;     // ascending
  std::vector<int> trimmed_ids;  // ascending
};

/// Norm-based thresholding: orders updates by (||s||, worker id) and drops
/// the ceil(beta m) largest. Throws ConfigError when nothing would be kept.
TrimResult trim_by_norm(std::span<const WorkerUpdate> updates, double beta);

/// x + eta * mean of the kept updates, summed in ascending worker-id order.
/// Throws RoundAbort naming the first kept worker whose update is not finite.
Vector aggregate_and_step(const Vector& x, std::span<const WorkerUpdate> updates,
                          std::span<const int> kept_ids, double eta);

/// Step size eta_k and cubic weight gamma_k per round.
class StepSchedule {
 public:
  explicit StepSchedule(const RunConfig& cfg);
  double eta(int round) const;
  double gamma(int round) const;

 private:
  EtaSchedule kind_;
  double eta_;
  int horizon_;
  GammaMode gamma_mode_;
  double gamma_;
  double alpha_;
  double beta_;
  int m_;
};

/// In-memory problem: training data (possibly empty for the saddle loss),
/// held-out data, and the feature dimension.
struct ProblemData {
  std::vector<Sample> train;
  std::vector<Sample> test;
  int dim = 0;
};

struct RunResult {
  std::vector<IterationRecord> records;
  std::vector<std::string> warnings;
  std::vector<int> byzantine_ids;
  bool aborted = false;
  std::string abort_reason;
  /// First record index whose gradient norm met stop_tol.
  std::optional<int> stop_round;
  Vector final_x;
  Stationarity final_stationarity;
};

/// Builds the workers of a run: shards from shard_iid, the last
/// floor(alpha m) ids Byzantine with the configured attack.
std::vector<Worker> make_workers(const RunConfig& cfg, const ProblemData& data,
                                 const LossModel& prototype);

/// The outer loop: broadcast, fan out worker steps, trim, aggregate, record.
/// Record k holds metrics at x_k; record 0 is the initial point. Metrics are
/// computed on the full training set and never reach the workers.
RunResult run(const RunConfig& cfg, const ProblemData& data);

}  // namespace byzcubic
