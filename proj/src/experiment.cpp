#include "byzcubic/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "byzcubic/parallel.hpp"
#include "byzcubic/seeding.hpp"
#include "byzcubic/synthetic.hpp"

namespace byzcubic {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kSyntheticPrefix = "synthetic:";

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_u64(const std::string& s, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("bad {} '{}' in synthetic dataset spec", what, s));
  }
  return v;
}

Dataset load_dataset(const std::string& spec, std::optional<int> expected_dim) {
  if (spec.rfind(kSyntheticPrefix, 0) == 0) {
    const auto parts = split(std::string_view(spec).substr(kSyntheticPrefix.size()), ':');
    const auto shape = parse_synthetic_shape(parts[0]);
    if (!shape || parts.size() > 3) {
      throw ConfigError(fmt::format(
          "bad synthetic dataset '{}'; expected synthetic:<a9a|w8a>[:n[:seed]]", spec));
    }
    const std::size_t n = parts.size() > 1 ? parse_u64(parts[1], "sample count")
                                           : default_sample_count(*shape);
    const std::uint64_t seed = parts.size() > 2 ? parse_u64(parts[2], "seed") : 0;
    return make_synthetic(*shape, n, seed);
  }
  if (!fs::exists(spec)) {
    throw ConfigError(fmt::format("dataset '{}' does not exist", spec));
  }
  return load_libsvm(spec, expected_dim);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_or_null(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

std::string status_of(const RunResult& r) {
  if (r.aborted) return "aborted";
  return r.stop_round ? "converged" : "max_rounds";
}

template <class T>
std::vector<T> axis(const json& j, const char* key, T base,
                    T (*convert)(const json&)) {
  if (!j.contains(key)) return {base};
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ConfigError(fmt::format("grid axis '{}' must be an array", key));
  std::vector<T> out;
  for (const auto& v : arr) out.push_back(convert(v));
  return out;
}

}  // namespace

ProblemData load_problem(const RunConfig& cfg) {
  ProblemData out;
  if (cfg.loss == LossKind::saddle) {
    out.dim = cfg.dim;
    return out;
  }
  if (cfg.dataset.empty()) throw ConfigError("no dataset given");
  Dataset train = load_dataset(cfg.dataset, std::nullopt);
  if (!cfg.test_dataset.empty()) {
    Dataset test = load_dataset(cfg.test_dataset, std::nullopt);
    out.dim = std::max(train.dim, test.dim);
    out.train = std::move(train.samples);
    out.test = std::move(test.samples);
  } else {
    out.dim = train.dim;
    auto [tr, te] = split_train_test(train.samples, cfg.test_fraction, cfg.seed);
    out.train = std::move(tr);
    out.test = std::move(te);
  }
  if (out.train.empty()) throw ConfigError("training set is empty after the split");
  return out;
}

RunConfig apply_overrides(RunConfig c, const Overrides& o) {
  auto set = [](auto& field, const auto& opt) {
    if (opt) field = *opt;
  };
  set(c.dataset, o.dataset);
  set(c.test_dataset, o.test_dataset);
  set(c.out_dir, o.out_dir);
  set(c.loss, o.loss);
  set(c.workers, o.workers);
  set(c.rounds, o.rounds);
  set(c.threads, o.threads);
  set(c.eval_every, o.eval_every);
  set(c.dim, o.dim);
  set(c.inner_max_iters, o.inner_max_iters);
  set(c.seed, o.seed);
  set(c.eta, o.eta);
  set(c.big_m, o.big_m);
  set(c.alpha, o.alpha);
  set(c.beta, o.beta);
  set(c.stop_tol, o.stop_tol);
  set(c.ridge_lambda, o.ridge_lambda);
  set(c.attack_sigma, o.attack_sigma);
  set(c.attack_c, o.attack_c);
  set(c.saddle_noise, o.saddle_noise);
  set(c.test_fraction, o.test_fraction);
  set(c.attack, o.attack);
  set(c.eta_schedule, o.eta_schedule);
  set(c.two_round, o.two_round);
  set(c.record_wall_time, o.record_wall_time);
  if (o.inner_step) c.inner_step = *o.inner_step;
  if (o.inner_tol) c.inner_tol = *o.inner_tol;
  if (o.gamma) {
    c.gamma = *o.gamma;
    c.gamma_mode = GammaMode::fixed;
  }
  set(c.gamma_mode, o.gamma_mode);
  return c;
}

json summary_json(const RunConfig& cfg, const RunResult& r) {
  json final_row = nullptr;
  if (!r.records.empty()) {
    const auto& last = r.records.back();
    final_row = {{"k", last.k},
                 {"loss", number_or_null(last.loss)},
                 {"grad_norm", number_or_null(last.grad_norm)},
                 {"lambda_min", optional_or_null(last.lambda_min)},
                 {"test_accuracy", optional_or_null(last.test_accuracy)},
                 {"comm_rounds", last.comm_rounds}};
  }
  const double eps = cfg.stop_tol > 0 ? cfg.stop_tol : 1e-3;
  return json{
      {"config", to_json(cfg)},
      {"warnings", r.warnings},
      {"byzantine_ids", r.byzantine_ids},
      {"status", status_of(r)},
      {"abort_reason", r.abort_reason},
      {"rounds_run", r.records.empty() ? 0 : r.records.back().k},
      {"stop_round", r.stop_round ? json(*r.stop_round) : json(nullptr)},
      {"final", final_row},
      {"stationarity",
       {{"eps", eps},
        {"first_order_ok", r.final_stationarity.first_order_ok},
        {"second_order_ok", r.final_stationarity.second_order_ok},
        {"grad_norm", number_or_null(r.final_stationarity.grad_norm)},
        {"lambda_min", number_or_null(r.final_stationarity.lambda_min)}}},
  };
}

SingleRunOutcome run_single(const RunConfig& cfg) {
  validate(cfg);
  const ProblemData data = load_problem(cfg);
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(fmt::format("cannot create output dir '{}': {}", dir.string(), ec.message()));

  SingleRunOutcome out;
  out.result = run(cfg, data);
  out.csv_path = dir / kMetricsFile;
  out.summary_path = dir / kSummaryFile;

  std::ostringstream csv;
  write_csv(csv, out.result.records);
  write_text(out.csv_path, csv.str());
  write_text(out.summary_path, summary_json(cfg, out.result).dump(2) + "\n");
  return out;
}

GridSpec parse_grid_spec(const json& j) {
  if (!j.is_object()) throw ConfigError("grid spec must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    static const std::vector<std::string> known = {
        "base", "datasets", "losses", "attacks", "alphas", "beta", "parallel_cells"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(fmt::format("unknown grid key '{}'", key));
    }
  }
  GridSpec spec;
  if (j.contains("base")) spec.base = merge_json(RunConfig{}, j.at("base"));
  try {
    spec.datasets = axis<std::string>(j, "datasets", spec.base.dataset,
                                      [](const json& v) { return v.get<std::string>(); });
    spec.losses = axis<LossKind>(j, "losses", spec.base.loss, [](const json& v) {
      auto k = parse_loss_kind(v.get<std::string>());
      if (!k) throw ConfigError(fmt::format("unknown loss '{}'", v.get<std::string>()));
      return *k;
    });
    spec.attacks = axis<AttackKind>(j, "attacks", spec.base.attack, [](const json& v) {
      auto a = parse_attack(v.get<std::string>());
      if (!a) throw ConfigError(fmt::format("unknown attack '{}'", v.get<std::string>()));
      return *a;
    });
    spec.alphas = axis<double>(j, "alphas", spec.base.alpha,
                               [](const json& v) { return v.get<double>(); });
    if (j.contains("beta")) {
      const auto& b = j.at("beta");
      if (b.is_string()) {
        if (b.get<std::string>() != "alpha_plus_2_over_m") {
          throw ConfigError(fmt::format("unknown beta rule '{}'", b.get<std::string>()));
        }
      } else {
        spec.beta = b.get<double>();
      }
    }
    if (j.contains("parallel_cells")) spec.parallel_cells = j.at("parallel_cells").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("grid spec: {}", e.what()));
  }
  return spec;
}

GridSpec load_grid_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open grid spec '{}'", path));
  try {
    return parse_grid_spec(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("grid spec '{}': {}", path, e.what()));
  }
}

std::vector<GridCell> expand_grid(const GridSpec& spec, const std::string& out_dir) {
  std::vector<GridCell> cells;
  for (const auto& dataset : spec.datasets) {
    for (auto loss : spec.losses) {
      for (auto attack : spec.attacks) {
        for (double alpha : spec.alphas) {
          GridCell cell;
          cell.index = static_cast<int>(cells.size());
          cell.config = spec.base;
          cell.config.dataset = dataset;
          cell.config.loss = loss;
          cell.config.attack = alpha > 0 ? attack : AttackKind::none;
          cell.config.alpha = alpha;
          cell.config.beta = spec.beta.value_or(
              alpha > 0 ? alpha + 2.0 / spec.base.workers : 0.0);
          cell.config.seed = derive_seed(
              spec.base.seed, {salt::kGridCell, static_cast<std::uint64_t>(cell.index)});
          cell.config.out_dir =
              (fs::path(out_dir) / fmt::format("cell_{:03d}", cell.index)).string();
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

json run_grid(const GridSpec& spec, const std::string& out_dir) {
  const auto cells = expand_grid(spec, out_dir);
  std::vector<json> entries(cells.size());
  parallel_for(cells.size(), spec.parallel_cells, [&](std::size_t i) {
    const auto& cell = cells[i];
    const auto& c = cell.config;
    const auto rel = fs::path(c.out_dir).filename().string();
    json entry = {{"index", cell.index},
                  {"dataset", c.dataset},
                  {"loss", to_string(c.loss)},
                  {"attack", to_string(c.attack)},
                  {"alpha", c.alpha},
                  {"beta", c.beta},
                  {"seed", c.seed},
                  {"dir", rel},
                  {"csv", rel + "/" + kMetricsFile},
                  {"summary", rel + "/" + kSummaryFile}};
    try {
      auto outcome = run_single(c);
      entry["status"] = status_of(outcome.result);
      entry["error"] = outcome.result.abort_reason;
    } catch (const std::exception& e) {
      entry["status"] = "failed";
      entry["error"] = e.what();
    }
    entries[i] = std::move(entry);
  });

  json index = {{"master_seed", spec.base.seed},
                {"cell_count", cells.size()},
                {"cells", entries}};
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(fmt::format("cannot create output dir '{}': {}", out_dir, ec.message()));
  write_text(fs::path(out_dir) / kGridIndexFile, index.dump(2) + "\n");
  return index;
}

}  // namespace byzcubic
