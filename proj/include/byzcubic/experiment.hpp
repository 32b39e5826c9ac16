#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "byzcubic/config.hpp"
#include "byzcubic/coordinator.hpp"

namespace byzcubic {

/// Loads the training data named by cfg.dataset (a LIBSVM path or
/// "synthetic:<a9a|w8a>[:n[:seed]]") and produces the test set, either from
/// cfg.test_dataset or by a seeded split. The saddle loss needs no data.
ProblemData load_problem(const RunConfig& cfg);

/// Flag values given on the command line; set fields win over the config
/// file.
struct Overrides {
  std::optional<std::string> dataset, test_dataset, out_dir;
  std::optional<LossKind> loss;
  std::optional<int> workers, rounds, threads, eval_every, dim, inner_max_iters;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta, gamma, big_m, alpha, beta, stop_tol, ridge_lambda,
      attack_sigma, attack_c, saddle_noise, inner_step, inner_tol, test_fraction;
  std::optional<AttackKind> attack;
  std::optional<EtaSchedule> eta_schedule;
  std::optional<GammaMode> gamma_mode;
  std::optional<bool> two_round, record_wall_time;
};

/// Applies overrides on top of `base`. An explicit gamma without an explicit
/// gamma mode selects GammaMode::fixed.
RunConfig apply_overrides(RunConfig base, const Overrides& o);

inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kGridIndexFile = "grid_index.json";

/// Config echo, warnings, outcome and terminal stationarity verdict.
nlohmann::json summary_json(const RunConfig& cfg, const RunResult& result);

struct SingleRunOutcome {
  RunResult result;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

/// Loads data, runs, and writes metrics.csv and summary.json under
/// cfg.out_dir. Throws on validation and I/O errors; an aborted run is
/// reported through result.aborted.
SingleRunOutcome run_single(const RunConfig& cfg);

/// Cross product of experiment axes over a base configuration. An absent
/// axis contributes the base value; an empty axis yields zero cells.
struct GridSpec {
  RunConfig base;
  std::vector<std::string> datasets;
  std::vector<LossKind> losses;
  std::vector<AttackKind> attacks;
  std::vector<double> alphas;
  /// Fixed beta, or unset for beta = alpha + 2/m.
  std::optional<double> beta;
  int parallel_cells = 1;
};

GridSpec parse_grid_spec(const nlohmann::json& j);
GridSpec load_grid_spec(const std::string& path);

struct GridCell {
  int index = 0;
  RunConfig config;
};

/// Deterministic cell list, ordered dataset > loss > attack > alpha. Cell
/// seeds are derive_seed(master seed, cell index); outputs go to
/// <out_dir>/cell_NNN.
std::vector<GridCell> expand_grid(const GridSpec& spec, const std::string& out_dir);

/// Runs every cell (failures are recorded, not fatal) and writes
/// grid_index.json. Returns the index document.
nlohmann::json run_grid(const GridSpec& spec, const std::string& out_dir);

}  // namespace byzcubic
