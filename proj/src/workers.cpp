#include "byzcubic/workers.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include <fmt/format.h>

#include "byzcubic/seeding.hpp"

namespace byzcubic {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

enum class NoisePhase : std::uint64_t { update = 0, gradient = 1 };

Vector gaussian_vector(Eigen::Index d, double sigma, std::uint64_t master,
                       std::uint64_t salt_id, int worker, int round,
                       NoisePhase phase) {
  auto rng = make_stream(master, {salt_id, static_cast<std::uint64_t>(worker),
                                  static_cast<std::uint64_t>(round),
                                  static_cast<std::uint64_t>(phase)});
  std::normal_distribution<double> normal(0.0, sigma);
  Vector v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = normal(rng);
  return v;
}

SampleSet relabel_random(const std::vector<Sample>& samples, std::uint64_t seed) {
  std::set<double> label_set;
  for (const auto& s : samples) label_set.insert(s.label);
  const std::vector<double> labels(label_set.begin(), label_set.end());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  auto out = std::make_shared<std::vector<Sample>>(samples);
  for (auto& s : *out) s.label = labels[pick(rng)];
  return out;
}

SampleSet relabel_flipped(const std::vector<Sample>& samples) {
  auto out = std::make_shared<std::vector<Sample>>(samples);
  for (auto& s : *out) s.label = -s.label;
  return out;
}

void check_context(const StepContext& ctx) {
  if (ctx.x == nullptr) throw Error("worker step: no iterate in context");
}

}  // namespace

bool is_byzantine(const WorkerRole& r) {
  return !std::holds_alternative<role::Honest>(r);
}

std::string role_name(const WorkerRole& r) {
  return std::visit(
      overloaded{
          [](const role::Honest&) -> std::string { return "honest"; },
          [](const role::GaussianNoise&) -> std::string { return "gauss"; },
          [](const role::RandomLabel&) -> std::string { return "random_label"; },
          [](const role::FlippedLabel&) -> std::string { return "flip"; },
          [](const role::NegativeUpdate&) -> std::string { return "negative"; },
      },
      r);
}

Worker::Worker(WorkerSpec spec, const LossModel& prototype)
    : spec_(std::move(spec)),
      loss_(prototype.kind() == LossKind::saddle
                ? prototype
                : prototype.rebind(std::make_shared<const std::vector<Sample>>(
                      spec_.shard.samples))) {
  const bool label_attack =
      std::holds_alternative<role::RandomLabel>(spec_.role) ||
      std::holds_alternative<role::FlippedLabel>(spec_.role);
  if (label_attack && prototype.kind() == LossKind::saddle) {
    throw ConfigError(fmt::format("worker {}: {} attack needs labelled data",
                                  spec_.worker_id, role_name(spec_.role)));
  }
  if (const auto* g = std::get_if<role::GaussianNoise>(&spec_.role); g && !(g->sigma >= 0)) {
    throw ConfigError(fmt::format("gaussian attack sigma {} must be >= 0", g->sigma));
  }
  if (const auto* n = std::get_if<role::NegativeUpdate>(&spec_.role);
      n && !(n->c > 0 && n->c < 1)) {
    throw ConfigError(fmt::format("negative attack c = {} must lie in (0, 1)", n->c));
  }
  if (const auto* r = std::get_if<role::RandomLabel>(&spec_.role)) {
    attacked_loss_ = loss_.rebind(relabel_random(spec_.shard.samples, r->seed));
  } else if (std::holds_alternative<role::FlippedLabel>(spec_.role)) {
    attacked_loss_ = loss_.rebind(relabel_flipped(spec_.shard.samples));
  }
}

Vector Worker::local_gradient(const StepContext& ctx) const {
  check_context(ctx);
  Vector g = training_loss().gradient(*ctx.x);
  if (ctx.gradient_noise > 0) {
    g += gaussian_vector(g.size(), ctx.gradient_noise, ctx.master_seed,
                         salt::kGradientNoise, id(), ctx.round,
                         NoisePhase::update);
  }
  return g;
}

Vector Worker::sent_gradient(const StepContext& ctx) const {
  Vector g = local_gradient(ctx);
  if (const auto* a = std::get_if<role::GaussianNoise>(&spec_.role); a && a->sigma > 0) {
    g += gaussian_vector(g.size(), a->sigma, ctx.master_seed, salt::kAttackNoise,
                         id(), ctx.round, NoisePhase::gradient);
  } else if (const auto* n = std::get_if<role::NegativeUpdate>(&spec_.role)) {
    g *= -n->c;
  }
  return g;
}

WorkerUpdate Worker::step(const StepContext& ctx) const {
  return byzantine() ? byzantine_step(*this, ctx) : honest_step(*this, ctx);
}

WorkerUpdate honest_step(const Worker& worker, const StepContext& ctx) {
  check_context(ctx);
  CubicSubproblem prob;
  prob.g = ctx.g_override ? *ctx.g_override : worker.local_gradient(ctx);
  if (prob.g.size() != ctx.x->size()) {
    throw DimensionError(fmt::format("gradient override has size {}, expected {}",
                                     prob.g.size(), ctx.x->size()));
  }
  prob.H = worker.training_loss().hessian(*ctx.x);
  prob.M = ctx.M;
  prob.gamma = ctx.gamma;
  auto sol = solve_cubic(prob, ctx.solver);

  WorkerUpdate out;
  out.worker_id = worker.id();
  out.s = std::move(sol.s);
  out.inner_iters = sol.inner_iters;
  out.converged = sol.converged;
  out.residual_norm = sol.residual_norm;
  out.descent_slack = sol.descent_slack;
  out.second_order_slack = sol.second_order_slack;
  return out;
}

WorkerUpdate byzantine_step(const Worker& worker, const StepContext& ctx) {
  if (!worker.byzantine()) {
    throw Error(fmt::format("worker {} is honest", worker.id()));
  }
  // Label attacks are honest solves on the relabelled shard.
  WorkerUpdate out = honest_step(worker, ctx);
  if (const auto* a = std::get_if<role::GaussianNoise>(&worker.role()); a && a->sigma > 0) {
    out.s += gaussian_vector(out.s.size(), a->sigma, ctx.master_seed,
                             salt::kAttackNoise, worker.id(), ctx.round,
                             NoisePhase::update);
  } else if (const auto* n = std::get_if<role::NegativeUpdate>(&worker.role())) {
    out.s *= -n->c;
  }
  return out;
}

}  // namespace byzcubic
