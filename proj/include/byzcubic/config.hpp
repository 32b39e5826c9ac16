#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "byzcubic/losses.hpp"

namespace byzcubic {

enum class EtaSchedule { constant, c_over_t };
enum class GammaMode { fixed, match_eta, byz_formula };
enum class AttackKind { none, gauss, random_label, flip, negative };

std::string_view to_string(EtaSchedule v);
std::string_view to_string(GammaMode v);
std::string_view to_string(AttackKind v);
std::optional<EtaSchedule> parse_eta_schedule(std::string_view s);
std::optional<GammaMode> parse_gamma_mode(std::string_view s);
std::optional<AttackKind> parse_attack(std::string_view s);

/// Fully resolved experiment configuration. Defaults are the values every
/// run uses unless overridden by a config file or a flag.
struct RunConfig {
  // data
  /// LIBSVM file, or "synthetic:<a9a|w8a>[:n]". Ignored by the saddle loss.
  std::string dataset;
  /// Separate test file; when empty the training data is split.
  std::string test_dataset;
  double test_fraction = 0.3;

  // model
  LossKind loss = LossKind::logistic;
  double ridge_lambda = 1.0;
  int dim = 3;                 // saddle loss only
  double saddle_noise = 0.01;  // per-worker gradient noise, saddle loss only

  // run
  int workers = 20;
  int rounds = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  double stop_tol = 1e-3;
  int eval_every = 1;
  bool two_round = false;
  /// When false the CSV wall_ms column is written as 0, which keeps output
  /// byte-reproducible.
  bool record_wall_time = false;

  // step sizes
  double eta = 1.0;  // constant eta, or c in eta = c / T
  EtaSchedule eta_schedule = EtaSchedule::constant;
  GammaMode gamma_mode = GammaMode::match_eta;
  double gamma = 1.0;  // used by GammaMode::fixed
  double big_m = 10.0;

  // Byzantine setting
  double alpha = 0.0;
  double beta = 0.0;
  AttackKind attack = AttackKind::none;
  double attack_sigma = 1.0;
  double attack_c = 0.5;

  // inner cubic solver; unset step/tol use the solver defaults
  std::optional<double> inner_step;
  std::optional<double> inner_tol;
  int inner_max_iters = 50000;
  double inner_guard = 1e8;

  std::string out_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Nested JSON form, every field materialized.
nlohmann::json to_json(const RunConfig& cfg);

/// Applies the keys present in `j` on top of `base`. Unknown sections or
/// keys and ill-typed values raise ConfigError.
RunConfig merge_json(RunConfig base, const nlohmann::json& j);

RunConfig load_config_file(const std::string& path);

/// Hard constraints; throws ConfigError. Returns warnings for legal but
/// suspicious settings (e.g. beta < alpha).
std::vector<std::string> validate(const RunConfig& cfg);

/// Number of Byzantine workers floor(alpha m); they take the last ids.
int byzantine_count(double alpha, int m);

/// Number of updates removed by norm trimming, ceil(beta m).
int trim_count(double beta, int m);

}  // namespace byzcubic
