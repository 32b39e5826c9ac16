#include "byzcubic/coordinator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include <fmt/format.h>

#include "byzcubic/parallel.hpp"
#include "byzcubic/seeding.hpp"

namespace byzcubic {

namespace {

constexpr double kDivergedLoss = 1e12;

double sort_key(const WorkerUpdate& u) {
  const double n = u.s.norm();
  return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
}

WorkerRole attack_role(const RunConfig& cfg, int worker_id) {
  switch (cfg.attack) {
    case AttackKind::none: return role::Honest{};
    case AttackKind::gauss: return role::GaussianNoise{cfg.attack_sigma};
    case AttackKind::random_label:
      return role::RandomLabel{derive_seed(
          cfg.seed, {salt::kRandomLabel, static_cast<std::uint64_t>(worker_id)})};
    case AttackKind::flip: return role::FlippedLabel{};
    case AttackKind::negative: return role::NegativeUpdate{cfg.attack_c};
  }
  return role::Honest{};
}

IterationRecord evaluate(const RunConfig& cfg, const LossModel& full,
                         const ProblemData& data, const Vector& x, int k) {
  IterationRecord rec;
  rec.k = k;
  rec.loss = full.value(x);
  rec.grad_norm = full.gradient(x).norm();
  if (k % cfg.eval_every == 0 && std::isfinite(rec.loss)) {
    rec.lambda_min = min_eigenvalue(full.hessian(x));
  }
  rec.test_accuracy = test_accuracy(x, data.test, cfg.loss);
  return rec;
}

}  // namespace

TrimResult trim_by_norm(std::span<const WorkerUpdate> updates, double beta) {
  const int m = static_cast<int>(updates.size());
  if (m < 1) throw ConfigError("trim_by_norm: no updates");
  if (!(beta >= 0 && beta <= 0.5)) {
    throw ConfigError(fmt::format("trim_by_norm: beta = {} outside [0, 1/2]", beta));
  }
  const int trimmed = trim_count(beta, m);
  if (trimmed >= m) {
    throw ConfigError(fmt::format("trim_by_norm: beta = {} would trim all {} updates", beta, m));
  }

  std::vector<std::pair<double, int>> order;
  order.reserve(updates.size());
  for (const auto& u : updates) order.emplace_back(sort_key(u), u.worker_id);
  std::sort(order.begin(), order.end());

  TrimResult out;
  for (int i = 0; i < m; ++i) {
    (i < m - trimmed ? out.kept_ids : out.trimmed_ids).push_back(order[i].second);
  }
  std::sort(out.kept_ids.begin(), out.kept_ids.end());
  std::sort(out.trimmed_ids.begin(), out.trimmed_ids.end());
  return out;
}

Vector aggregate_and_step(const Vector& x, std::span<const WorkerUpdate> updates,
                          std::span<const int> kept_ids, double eta) {
  if (kept_ids.empty()) throw ConfigError("aggregate_and_step: no kept updates");
  std::vector<const WorkerUpdate*> by_id;
  for (const auto& u : updates) {
    if (std::find(kept_ids.begin(), kept_ids.end(), u.worker_id) != kept_ids.end()) {
      by_id.push_back(&u);
    }
  }
  if (by_id.size() != kept_ids.size()) {
    throw Error("aggregate_and_step: kept id without a matching update");
  }
  std::sort(by_id.begin(), by_id.end(),
            [](const auto* a, const auto* b) { return a->worker_id < b->worker_id; });

  Vector sum = Vector::Zero(x.size());
  for (const auto* u : by_id) {
    if (u->s.size() != x.size()) {
      throw DimensionError(fmt::format("worker {} sent an update of size {}, expected {}",
                                       u->worker_id, u->s.size(), x.size()));
    }
    if (!u->s.allFinite()) {
      throw RoundAbort(u->worker_id,
                       fmt::format("worker {} sent a non-finite update", u->worker_id));
    }
    sum += u->s;
  }
  return x + eta * (sum / static_cast<double>(by_id.size()));
}

StepSchedule::StepSchedule(const RunConfig& cfg)
    : kind_(cfg.eta_schedule),
      eta_(cfg.eta),
      horizon_(cfg.rounds),
      gamma_mode_(cfg.gamma_mode),
      gamma_(cfg.gamma),
      alpha_(cfg.alpha),
      beta_(cfg.beta),
      m_(cfg.workers) {}

double StepSchedule::eta(int) const {
  return kind_ == EtaSchedule::constant ? eta_ : eta_ / horizon_;
}

double StepSchedule::gamma(int round) const {
  switch (gamma_mode_) {
    case GammaMode::fixed: return gamma_;
    case GammaMode::match_eta: return eta(round);
    case GammaMode::byz_formula:
      return eta(round) * (1.0 - alpha_) * (1.0 + alpha_ * m_) / (1.0 - beta_);
  }
  return gamma_;
}

std::vector<Worker> make_workers(const RunConfig& cfg, const ProblemData& data,
                                 const LossModel& prototype) {
  std::vector<Shard> shards;
  if (cfg.loss == LossKind::saddle) {
    shards.resize(static_cast<std::size_t>(cfg.workers));
    for (int i = 0; i < cfg.workers; ++i) shards[i].worker_id = i;
  } else {
    shards = shard_iid(data.train, cfg.workers, cfg.seed);
  }
  const int first_byzantine = cfg.workers - byzantine_count(cfg.alpha, cfg.workers);
  std::vector<Worker> workers;
  workers.reserve(shards.size());
  for (auto& shard : shards) {
    const int id = shard.worker_id;
    WorkerSpec spec{id, std::move(shard),
                    id >= first_byzantine ? attack_role(cfg, id) : role::Honest{}};
    workers.emplace_back(std::move(spec), prototype);
  }
  return workers;
}

namespace {

// stop_tol = 0 disables early stopping; a saddle point has zero gradient.
bool meets_stop(const RunConfig& cfg, const IterationRecord& rec) {
  return cfg.stop_tol > 0 && rec.grad_norm <= cfg.stop_tol;
}

}  // namespace

RunResult run(const RunConfig& cfg, const ProblemData& data) {
  RunResult result;
  result.warnings = validate(cfg);

  const int dim = cfg.loss == LossKind::saddle ? cfg.dim : data.dim;
  const LossModel full =
      LossModel::make(cfg.loss, std::make_shared<const std::vector<Sample>>(data.train),
                      dim, cfg.ridge_lambda);
  const auto workers = make_workers(cfg, data, full);
  for (const auto& w : workers) {
    if (w.byzantine()) result.byzantine_ids.push_back(w.id());
  }

  const StepSchedule schedule(cfg);
  const double noise = cfg.loss == LossKind::saddle ? cfg.saddle_noise : 0.0;
  CubicSolverOptions solver;
  solver.step = cfg.inner_step;
  solver.tol = cfg.inner_tol;
  solver.max_iters = cfg.inner_max_iters;
  solver.divergence_guard = cfg.inner_guard;

  const std::size_t m = workers.size();
  Vector x = Vector::Zero(dim);
  int comm_rounds = 0;

  result.records.push_back(evaluate(cfg, full, data, x, 0));
  if (meets_stop(cfg, result.records.back())) result.stop_round = 0;

  for (int k = 0; k < cfg.rounds && !result.stop_round; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    StepContext ctx;
    ctx.x = &x;
    ctx.M = cfg.big_m;
    ctx.gamma = schedule.gamma(k);
    ctx.solver = solver;
    ctx.master_seed = cfg.seed;
    ctx.round = k;
    ctx.gradient_noise = noise;

    std::vector<WorkerUpdate> updates(m);
    TrimResult trim;
    try {
      Vector global_gradient;
      if (cfg.two_round) {
        std::vector<Vector> grads(m);
        parallel_for(m, cfg.threads, [&](std::size_t i) { grads[i] = workers[i].sent_gradient(ctx); });
        global_gradient = Vector::Zero(dim);
        for (const auto& g : grads) global_gradient += g;
        global_gradient /= static_cast<double>(m);
        ctx.g_override = &global_gradient;
        ++comm_rounds;
      }
      parallel_for(m, cfg.threads, [&](std::size_t i) { updates[i] = workers[i].step(ctx); });
      ++comm_rounds;

      trim = trim_by_norm(updates, cfg.beta);
      x = aggregate_and_step(x, updates, trim.kept_ids, schedule.eta(k));
    } catch (const Error& e) {
      result.aborted = true;
      result.abort_reason = fmt::format("round {}: {}", k, e.what());
      break;
    }

    IterationRecord rec = evaluate(cfg, full, data, x, k + 1);
    rec.comm_rounds = comm_rounds;
    rec.kept_ids = trim.kept_ids;
    rec.trimmed_ids = trim.trimmed_ids;
    for (const auto& u : updates) {
      const double norm = u.s.norm();
      const bool kept = std::binary_search(trim.kept_ids.begin(), trim.kept_ids.end(), u.worker_id);
      if (kept) rec.max_kept_norm = std::max(rec.max_kept_norm, norm);
      if (!workers[u.worker_id].byzantine()) {
        rec.max_honest_norm = std::max(rec.max_honest_norm, norm);
      }
      rec.max_inner_iters = std::max(rec.max_inner_iters, u.inner_iters);
      rec.all_inner_converged = rec.all_inner_converged && u.converged;
    }
    if (cfg.record_wall_time) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0).count();
    }
    result.records.push_back(std::move(rec));

    const auto& last = result.records.back();
    if (!std::isfinite(last.loss) || last.loss > kDivergedLoss || !x.allFinite()) {
      result.aborted = true;
      result.abort_reason = fmt::format("round {}: loss diverged ({})", k, last.loss);
      break;
    }
    if (meets_stop(cfg, last)) result.stop_round = last.k;
  }

  result.final_x = x;
  if (x.allFinite()) {
    result.final_stationarity =
        stationarity(x, full, cfg.stop_tol > 0 ? cfg.stop_tol : 1e-3);
  }
  return result;
}

}  // namespace byzcubic
