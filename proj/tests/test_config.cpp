#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "byzcubic/config.hpp"
#include "byzcubic/experiment.hpp"

using namespace byzcubic;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "byzcubic_test_config" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny_run(const fs::path& out) {
  RunConfig c;
  c.dataset = "synthetic:a9a:600:3";
  c.workers = 4;
  c.rounds = 4;
  c.seed = 9;
  c.out_dir = out.string();
  return c;
}

}  // namespace

TEST_CASE("json round-trip preserves every field") {
  RunConfig c;
  c.dataset = "data/a9a";
  c.test_dataset = "data/a9a.t";
  c.loss = LossKind::robust;
  c.workers = 7;
  c.seed = 123456789012345ULL;
  c.eta_schedule = EtaSchedule::c_over_t;
  c.gamma_mode = GammaMode::byz_formula;
  c.alpha = 0.15;
  c.beta = 0.25;
  c.attack = AttackKind::random_label;
  c.inner_step = 0.01;
  c.two_round = true;
  c.out_dir = "elsewhere";
  const json j = to_json(c);
  CHECK(merge_json(RunConfig{}, j) == c);
  CHECK(merge_json(RunConfig{}, json::parse(j.dump())) == c);
  CHECK(merge_json(RunConfig{}, to_json(RunConfig{})) == RunConfig{});
}

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.workers == 20);
  CHECK(c.big_m == 10.0);
  CHECK(c.eta == 1.0);
  CHECK(c.ridge_lambda == 1.0);
  CHECK(c.stop_tol == 1e-3);
  CHECK(c.attack_sigma == 1.0);
  CHECK(c.attack_c == 0.5);
  CHECK(c.gamma_mode == GammaMode::match_eta);
  CHECK_FALSE(c.two_round);
}

TEST_CASE("partial json overrides only the keys present") {
  const auto c = merge_json(RunConfig{}, json::parse(R"({"run": {"workers": 8}, "step": {"M": 15}})"));
  CHECK(c.workers == 8);
  CHECK(c.big_m == 15.0);
  CHECK(c.rounds == RunConfig{}.rounds);
}

TEST_CASE("unknown or ill-typed keys are rejected") {
  CHECK_THROWS_AS(merge_json(RunConfig{}, json::parse(R"({"runn": {}})")), ConfigError);
  CHECK_THROWS_AS(merge_json(RunConfig{}, json::parse(R"({"run": {"wokers": 3}})")), ConfigError);
  CHECK_THROWS_AS(merge_json(RunConfig{}, json::parse(R"({"run": {"workers": "many"}})")), ConfigError);
  CHECK_THROWS_AS(merge_json(RunConfig{}, json::parse(R"({"model": {"loss": "hinge"}})")), ConfigError);
  CHECK_THROWS_AS(merge_json(RunConfig{}, json::parse("[1, 2]")), ConfigError);
}

TEST_CASE("config files load and report parse errors") {
  const auto dir = scratch("files");
  {
    std::ofstream(dir / "good.json") << R"({"byzantine": {"alpha": 0.1, "attack": "flip"}})";
    std::ofstream(dir / "bad.json") << "{ not json";
  }
  const auto c = load_config_file((dir / "good.json").string());
  CHECK(c.alpha == 0.1);
  CHECK(c.attack == AttackKind::flip);
  CHECK_THROWS_AS(load_config_file((dir / "bad.json").string()), ConfigError);
  CHECK_THROWS_AS(load_config_file((dir / "missing.json").string()), ConfigError);
}

TEST_CASE("flag overrides win over file values field by field") {
  RunConfig file;
  file.workers = 5;
  file.eta = 0.5;
  file.attack = AttackKind::gauss;
  Overrides o;
  o.workers = 9;
  const auto c = apply_overrides(file, o);
  CHECK(c.workers == 9);
  CHECK(c.eta == 0.5);
  CHECK(c.attack == AttackKind::gauss);

  Overrides g;
  g.gamma = 0.0;
  CHECK(apply_overrides(file, g).gamma_mode == GammaMode::fixed);
  g.gamma_mode = GammaMode::match_eta;
  CHECK(apply_overrides(file, g).gamma_mode == GammaMode::match_eta);
}

TEST_CASE("validation") {
  RunConfig c;
  c.dataset = "x";
  CHECK(validate(c).empty());

  auto bad = [&](auto mutate) {
    RunConfig b = c;
    mutate(b);
    CHECK_THROWS_AS(validate(b), ConfigError);
  };
  bad([](RunConfig& b) { b.workers = 0; });
  bad([](RunConfig& b) { b.rounds = 0; });
  bad([](RunConfig& b) { b.alpha = 0.6; });
  bad([](RunConfig& b) { b.beta = 0.75; });
  bad([](RunConfig& b) { b.alpha = 0.2; });  // Byzantine workers without an attack
  bad([](RunConfig& b) { b.attack_c = 1.0; });
  bad([](RunConfig& b) { b.dataset.clear(); });
  bad([](RunConfig& b) { b.workers = 1, b.beta = 0.5; });
  bad([](RunConfig& b) { b.loss = LossKind::saddle, b.attack = AttackKind::flip, b.alpha = 0.2; });

  RunConfig warn = c;
  warn.alpha = 0.2;
  warn.beta = 0.1;
  warn.attack = AttackKind::negative;
  CHECK(validate(warn).size() == 1);

  RunConfig saddle;
  saddle.loss = LossKind::saddle;
  CHECK_NOTHROW(validate(saddle));
}

TEST_CASE("counts tolerate floating-point products") {
  CHECK(trim_count(0.2 + 2.0 / 20, 20) == 6);
  CHECK(trim_count(0.15 + 2.0 / 20, 20) == 5);
  CHECK(trim_count(0.1 + 2.0 / 20, 20) == 4);
  CHECK(trim_count(0.2, 5) == 1);
  CHECK(trim_count(0.21, 5) == 2);
  CHECK(byzantine_count(0.15, 20) == 3);
  CHECK(byzantine_count(0.1, 20) == 2);
  CHECK(byzantine_count(0.2, 20) == 4);
  CHECK(byzantine_count(0.0, 20) == 0);
}

TEST_CASE("grid expansion") {
  const auto spec = parse_grid_spec(json::parse(R"({
    "base": {"data": {"path": "synthetic:a9a"}, "run": {"seed": 5}},
    "attacks": ["gauss", "random_label", "flip", "negative"],
    "alphas": [0.1, 0.15, 0.2]
  })"));
  const auto cells = expand_grid(spec, "out");
  REQUIRE(cells.size() == 12);
  CHECK(cells[0].config.attack == AttackKind::gauss);
  CHECK(cells[0].config.alpha == 0.1);
  CHECK(cells[0].config.beta == doctest::Approx(0.2));
  CHECK(cells[11].config.attack == AttackKind::negative);
  CHECK(trim_count(cells[11].config.beta, 20) == 6);
  CHECK(fs::path(cells[3].config.out_dir).filename() == "cell_003");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].index == static_cast<int>(i));
    for (std::size_t j = 0; j < i; ++j) CHECK(cells[i].config.seed != cells[j].config.seed);
  }
  const auto again = expand_grid(spec, "out");
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(again[i].config == cells[i].config);

  const auto fixed = parse_grid_spec(json::parse(R"({"alphas": [0.0, 0.1], "beta": 0.3, "attacks": ["flip"]})"));
  const auto fc = expand_grid(fixed, "o");
  CHECK(fc[0].config.attack == AttackKind::none);
  CHECK(fc[1].config.beta == 0.3);

  CHECK(expand_grid(parse_grid_spec(json::parse(R"({"attacks": []})")), "o").empty());
  CHECK_THROWS_AS(parse_grid_spec(json::parse(R"({"alpha": [0.1]})")), ConfigError);
  CHECK_THROWS_AS(parse_grid_spec(json::parse(R"({"beta": "alpha_times_2"})")), ConfigError);
}

TEST_CASE("empty grid writes an index with zero cells") {
  const auto dir = scratch("empty_grid");
  const auto index = run_grid(parse_grid_spec(json::parse(R"({"alphas": []})")), dir.string());
  CHECK(index["cells"].empty());
  CHECK(fs::exists(dir / kGridIndexFile));
}

TEST_CASE("single runs write artifacts and the echo reproduces them") {
  const auto dir = scratch("echo");
  const auto cfg = tiny_run(dir / "a");
  const auto first = run_single(cfg);
  REQUIRE(fs::exists(first.csv_path));
  const auto summary = json::parse(slurp(first.summary_path));
  CHECK(summary["config"] == to_json(cfg));
  CHECK(summary["rounds_run"] == 4);
  CHECK(summary["status"] == "max_rounds");

  auto echoed = merge_json(RunConfig{}, summary["config"]);
  CHECK(echoed == cfg);
  echoed.out_dir = (dir / "b").string();
  const auto second = run_single(echoed);
  CHECK(slurp(second.csv_path) == slurp(first.csv_path));
}

TEST_CASE("grid runs are repeatable and record per-cell failures") {
  const auto dir = scratch("grid");
  const auto spec = parse_grid_spec(json::parse(R"({
    "base": {"run": {"workers": 10, "rounds": 2}},
    "datasets": ["synthetic:a9a:400:1", "no/such/file"],
    "attacks": ["flip"],
    "alphas": [0.2]
  })"));
  const auto a = run_grid(spec, (dir / "a").string());
  const auto b = run_grid(spec, (dir / "b").string());
  REQUIRE(a["cells"].size() == 2);
  CHECK(a["cells"][0]["status"] == "max_rounds");
  CHECK(a["cells"][1]["status"] == "failed");
  CHECK(a == b);
  CHECK(slurp(dir / "a" / "cell_000" / kMetricsFile) == slurp(dir / "b" / "cell_000" / kMetricsFile));
}

TEST_CASE("problem loading") {
  RunConfig c;
  c.dataset = "synthetic:w8a:1000:4";
  c.test_fraction = 0.25;
  const auto p = load_problem(c);
  CHECK(p.dim == 300);
  CHECK(p.train.size() == 750);
  CHECK(p.test.size() == 250);
  c.dataset = "synthetic:mnist";
  CHECK_THROWS_AS(load_problem(c), ConfigError);
  c.dataset = "does/not/exist.svm";
  CHECK_THROWS_AS(load_problem(c), ConfigError);
}
