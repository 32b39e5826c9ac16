// Experiment runner: single runs (default), experiment grids, and synthetic
// dataset generation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "byzcubic/config.hpp"
#include "byzcubic/experiment.hpp"
#include "byzcubic/synthetic.hpp"

namespace {

using namespace byzcubic;

template <class Enum>
std::map<std::string, Enum> choices(std::initializer_list<Enum> values) {
  std::map<std::string, Enum> out;
  for (auto v : values) out.emplace(std::string(to_string(v)), v);
  return out;
}

// Binds an optional<T> override to a CLI option.
template <class T>
CLI::Option* bind_override(CLI::App& app, const std::string& name, std::optional<T>& slot,
                  const std::string& help) {
  return app.add_option_function<T>(name, [&slot](const T& v) { slot = v; }, help);
}

template <class Enum>
CLI::Option* bind_enum(CLI::App& app, const std::string& name, std::optional<Enum>& slot,
                       std::map<std::string, Enum> map, const std::string& help) {
  return app
      .add_option_function<std::string>(
          name, [&slot, map](const std::string& v) { slot = map.at(v); }, help)
      ->check(CLI::IsMember(map));
}

int print_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robust distributed cubic-regularized Newton simulator"};
  app.require_subcommand(0, 1);

  std::string config_path;
  Overrides o;
  app.add_option("--config", config_path, "JSON config file (nested sections)")
      ->check(CLI::ExistingFile);
  bind_override(app, "--dataset", o.dataset, "LIBSVM file or synthetic:<a9a|w8a>[:n[:seed]]");
  bind_override(app, "--test-dataset", o.test_dataset, "separate LIBSVM test file");
  bind_override(app, "--test-fraction", o.test_fraction, "held-out fraction when no test file");
  bind_enum(app, "--loss", o.loss,
            choices({LossKind::logistic, LossKind::robust, LossKind::saddle}), "loss");
  bind_override(app, "--ridge-lambda", o.ridge_lambda, "logistic ridge parameter");
  bind_override(app, "--dim", o.dim, "dimension of the saddle loss");
  bind_override(app, "--saddle-noise", o.saddle_noise, "worker gradient noise for the saddle loss");
  bind_override(app, "--workers", o.workers, "number of workers m");
  bind_override(app, "--rounds", o.rounds, "maximum rounds T");
  bind_override(app, "--seed", o.seed, "master seed");
  bind_override(app, "--threads", o.threads, "worker threads");
  bind_override(app, "--eta", o.eta, "step size (or c for --eta-schedule c_over_t)");
  bind_enum(app, "--eta-schedule", o.eta_schedule,
            choices({EtaSchedule::constant, EtaSchedule::c_over_t}), "step-size schedule");
  bind_override(app, "--gamma", o.gamma, "fixed gamma (selects --gamma-mode fixed)");
  bind_enum(app, "--gamma-mode", o.gamma_mode,
            choices({GammaMode::fixed, GammaMode::match_eta, GammaMode::byz_formula}),
            "how gamma is chosen");
  bind_override(app, "--big-m,--M", o.big_m, "cubic regularization M");
  bind_override(app, "--alpha", o.alpha, "Byzantine fraction");
  bind_override(app, "--beta", o.beta, "trimmed fraction");
  bind_enum(app, "--attack", o.attack,
            choices({AttackKind::none, AttackKind::gauss, AttackKind::random_label,
                     AttackKind::flip, AttackKind::negative}),
            "Byzantine attack");
  bind_override(app, "--attack-sigma", o.attack_sigma, "gauss attack noise scale");
  bind_override(app, "--attack-c", o.attack_c, "negative attack factor c in (0,1)");
  app.add_flag_function("--two-round", [&](std::int64_t) { o.two_round = true; },
                        "exact-gradient mode (one extra communication round)");
  bind_override(app, "--stop-tol", o.stop_tol, "stop when ||grad f|| <= this (0 disables)");
  bind_override(app, "--eval-every", o.eval_every, "rounds between lambda_min evaluations");
  bind_override(app, "--inner-step", o.inner_step, "cubic solver step size");
  bind_override(app, "--inner-tol", o.inner_tol, "cubic solver tolerance");
  bind_override(app, "--inner-max-iters", o.inner_max_iters, "cubic solver iteration cap");
  app.add_flag_function("--record-wall-time", [&](std::int64_t) { o.record_wall_time = true; },
                        "write measured wall_ms instead of 0");
  bind_override(app, "--out", o.out_dir, "output directory");

  auto* grid = app.add_subcommand("grid", "run an experiment grid");
  std::string grid_spec_path, grid_out = "grid_out";
  grid->add_option("--spec", grid_spec_path, "grid spec JSON")->required()->check(CLI::ExistingFile);
  grid->add_option("--out", grid_out, "grid output directory");

  auto* synth = app.add_subcommand("synth", "write a synthetic LIBSVM dataset");
  std::string synth_shape = "a9a", synth_out;
  std::size_t synth_n = 0;
  std::uint64_t synth_seed = 0;
  synth->add_option("--shape", synth_shape, "a9a or w8a")->check(CLI::IsMember({"a9a", "w8a"}));
  synth->add_option("--n", synth_n, "sample count (default: benchmark size)");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*grid) {
      const auto spec = load_grid_spec(grid_spec_path);
      const auto index = run_grid(spec, grid_out);
      int failed = 0;
      for (const auto& cell : index.at("cells")) failed += cell.at("status") == "failed";
      std::cout << fmt::format("{} cells written to {} ({} failed)\n",
                               index.at("cell_count").get<int>(), grid_out, failed);
      return EXIT_SUCCESS;
    }
    if (*synth) {
      const auto shape = *parse_synthetic_shape(synth_shape);
      const auto data = make_synthetic(
          shape, synth_n ? synth_n : default_sample_count(shape), synth_seed);
      std::ofstream out(synth_out);
      if (!out) throw Error(fmt::format("cannot write '{}'", synth_out));
      write_libsvm(out, data.samples);
      return EXIT_SUCCESS;
    }

    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    cfg = apply_overrides(cfg, o);
    for (const auto& w : validate(cfg)) std::cerr << "warning: " << w << '\n';
    const auto outcome = run_single(cfg);
    const auto& r = outcome.result;
    const auto& last = r.records.back();
    if (r.aborted) {
      std::cerr << "run aborted: " << r.abort_reason << '\n';
      return 2;
    }
    std::cout << fmt::format(
        "{} after {} rounds ({} communication rounds): f = {:.6g}, ||grad f|| = {:.3e}\n",
        r.stop_round ? "converged" : "stopped", last.k, last.comm_rounds, last.loss,
        last.grad_norm);
    std::cout << fmt::format("wrote {} and {}\n", outcome.csv_path.string(),
                             outcome.summary_path.string());
    return EXIT_SUCCESS;
  } catch (const std::exception& e) {
    return print_error(e);
  }
}
