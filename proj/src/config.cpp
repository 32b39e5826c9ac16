#include "byzcubic/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "byzcubic/common.hpp"

namespace byzcubic {

using nlohmann::json;

std::string_view to_string(EtaSchedule v) {
  return v == EtaSchedule::constant ? "constant" : "c_over_t";
}

std::string_view to_string(GammaMode v) {
  switch (v) {
    case GammaMode::fixed: return "fixed";
    case GammaMode::match_eta: return "match_eta";
    case GammaMode::byz_formula: return "byz_formula";
  }
  return "unknown";
}

std::string_view to_string(AttackKind v) {
  switch (v) {
    case AttackKind::none: return "none";
    case AttackKind::gauss: return "gauss";
    case AttackKind::random_label: return "random_label";
    case AttackKind::flip: return "flip";
    case AttackKind::negative: return "negative";
  }
  return "unknown";
}

std::optional<EtaSchedule> parse_eta_schedule(std::string_view s) {
  if (s == "constant") return EtaSchedule::constant;
  if (s == "c_over_t") return EtaSchedule::c_over_t;
  return std::nullopt;
}

std::optional<GammaMode> parse_gamma_mode(std::string_view s) {
  if (s == "fixed") return GammaMode::fixed;
  if (s == "match_eta") return GammaMode::match_eta;
  if (s == "byz_formula") return GammaMode::byz_formula;
  return std::nullopt;
}

std::optional<AttackKind> parse_attack(std::string_view s) {
  for (auto a : {AttackKind::none, AttackKind::gauss, AttackKind::random_label,
                 AttackKind::flip, AttackKind::negative}) {
    if (s == to_string(a)) return a;
  }
  return std::nullopt;
}

namespace {

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class Enum>
Enum parse_enum(const json& v, std::optional<Enum> (*parse)(std::string_view),
                std::string_view key) {
  const auto s = v.get<std::string>();
  auto e = parse(s);
  if (!e) throw ConfigError(fmt::format("unknown value '{}' for '{}'", s, key));
  return *e;
}

using Setter = std::function<void(RunConfig&, const json&)>;
using Section = std::map<std::string, Setter>;

const std::map<std::string, Section>& schema() {
  static const std::map<std::string, Section> table = {
      {"data",
       {
           {"path", [](RunConfig& c, const json& v) { c.dataset = v.get<std::string>(); }},
           {"test_path", [](RunConfig& c, const json& v) { c.test_dataset = v.get<std::string>(); }},
           {"test_fraction", [](RunConfig& c, const json& v) { c.test_fraction = v.get<double>(); }},
       }},
      {"model",
       {
           {"loss", [](RunConfig& c, const json& v) { c.loss = parse_enum<LossKind>(v, parse_loss_kind, "model.loss"); }},
           {"ridge_lambda", [](RunConfig& c, const json& v) { c.ridge_lambda = v.get<double>(); }},
           {"dim", [](RunConfig& c, const json& v) { c.dim = v.get<int>(); }},
           {"saddle_noise", [](RunConfig& c, const json& v) { c.saddle_noise = v.get<double>(); }},
       }},
      {"run",
       {
           {"workers", [](RunConfig& c, const json& v) { c.workers = v.get<int>(); }},
           {"rounds", [](RunConfig& c, const json& v) { c.rounds = v.get<int>(); }},
           {"seed", [](RunConfig& c, const json& v) { c.seed = v.get<std::uint64_t>(); }},
           {"threads", [](RunConfig& c, const json& v) { c.threads = v.get<int>(); }},
           {"stop_tol", [](RunConfig& c, const json& v) { c.stop_tol = v.get<double>(); }},
           {"eval_every", [](RunConfig& c, const json& v) { c.eval_every = v.get<int>(); }},
           {"two_round", [](RunConfig& c, const json& v) { c.two_round = v.get<bool>(); }},
           {"record_wall_time", [](RunConfig& c, const json& v) { c.record_wall_time = v.get<bool>(); }},
       }},
      {"step",
       {
           {"eta", [](RunConfig& c, const json& v) { c.eta = v.get<double>(); }},
           {"eta_schedule", [](RunConfig& c, const json& v) { c.eta_schedule = parse_enum<EtaSchedule>(v, parse_eta_schedule, "step.eta_schedule"); }},
           {"gamma_mode", [](RunConfig& c, const json& v) { c.gamma_mode = parse_enum<GammaMode>(v, parse_gamma_mode, "step.gamma_mode"); }},
           {"gamma", [](RunConfig& c, const json& v) { c.gamma = v.get<double>(); }},
           {"M", [](RunConfig& c, const json& v) { c.big_m = v.get<double>(); }},
       }},
      {"byzantine",
       {
           {"alpha", [](RunConfig& c, const json& v) { c.alpha = v.get<double>(); }},
           {"beta", [](RunConfig& c, const json& v) { c.beta = v.get<double>(); }},
           {"attack", [](RunConfig& c, const json& v) { c.attack = parse_enum<AttackKind>(v, parse_attack, "byzantine.attack"); }},
           {"sigma", [](RunConfig& c, const json& v) { c.attack_sigma = v.get<double>(); }},
           {"c", [](RunConfig& c, const json& v) { c.attack_c = v.get<double>(); }},
       }},
      {"inner",
       {
           {"step", [](RunConfig& c, const json& v) { c.inner_step = v.is_null() ? std::nullopt : std::optional(v.get<double>()); }},
           {"tol", [](RunConfig& c, const json& v) { c.inner_tol = v.is_null() ? std::nullopt : std::optional(v.get<double>()); }},
           {"max_iters", [](RunConfig& c, const json& v) { c.inner_max_iters = v.get<int>(); }},
           {"guard", [](RunConfig& c, const json& v) { c.inner_guard = v.get<double>(); }},
       }},
      {"output",
       {
           {"dir", [](RunConfig& c, const json& v) { c.out_dir = v.get<std::string>(); }},
       }},
  };
  return table;
}

}  // namespace

json to_json(const RunConfig& c) {
  return json{
      {"data", {{"path", c.dataset}, {"test_path", c.test_dataset}, {"test_fraction", c.test_fraction}}},
      {"model",
       {{"loss", to_string(c.loss)},
        {"ridge_lambda", c.ridge_lambda},
        {"dim", c.dim},
        {"saddle_noise", c.saddle_noise}}},
      {"run",
       {{"workers", c.workers},
        {"rounds", c.rounds},
        {"seed", c.seed},
        {"threads", c.threads},
        {"stop_tol", c.stop_tol},
        {"eval_every", c.eval_every},
        {"two_round", c.two_round},
        {"record_wall_time", c.record_wall_time}}},
      {"step",
       {{"eta", c.eta},
        {"eta_schedule", to_string(c.eta_schedule)},
        {"gamma_mode", to_string(c.gamma_mode)},
        {"gamma", c.gamma},
        {"M", c.big_m}}},
      {"byzantine",
       {{"alpha", c.alpha},
        {"beta", c.beta},
        {"attack", to_string(c.attack)},
        {"sigma", c.attack_sigma},
        {"c", c.attack_c}}},
      {"inner",
       {{"step", optional_number(c.inner_step)},
        {"tol", optional_number(c.inner_tol)},
        {"max_iters", c.inner_max_iters},
        {"guard", c.inner_guard}}},
      {"output", {{"dir", c.out_dir}}},
  };
}

RunConfig merge_json(RunConfig base, const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  const auto& table = schema();
  for (const auto& [section, body] : j.items()) {
    auto sec = table.find(section);
    if (sec == table.end()) throw ConfigError(fmt::format("unknown config section '{}'", section));
    if (!body.is_object()) throw ConfigError(fmt::format("config section '{}' must be an object", section));
    for (const auto& [key, value] : body.items()) {
      auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        throw ConfigError(fmt::format("unknown config key '{}.{}'", section, key));
      }
      try {
        setter->second(base, value);
      } catch (const json::exception& e) {
        throw ConfigError(fmt::format("bad value for '{}.{}': {}", section, key, e.what()));
      }
    }
  }
  return base;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config file '{}': {}", path, e.what()));
  }
  return merge_json(RunConfig{}, j);
}

int byzantine_count(double alpha, int m) {
  // Tolerance absorbs products such as 0.15 * 20 landing just below 3.
  return static_cast<int>(std::floor(alpha * m + 1e-9));
}

int trim_count(double beta, int m) {
  // 0.2 + 2/20 evaluates to 0.30000000000000004; the ceiling must still be 6.
  return static_cast<int>(std::ceil(beta * m - 1e-9));
}

std::vector<std::string> validate(const RunConfig& c) {
  auto fail = [](std::string msg) { throw ConfigError(std::move(msg)); };
  if (c.workers < 1) fail(fmt::format("workers = {} must be >= 1", c.workers));
  if (c.rounds < 1) fail(fmt::format("rounds = {} must be >= 1", c.rounds));
  if (c.threads < 1) fail(fmt::format("threads = {} must be >= 1", c.threads));
  if (c.eval_every < 1) fail(fmt::format("eval_every = {} must be >= 1", c.eval_every));
  if (!(c.stop_tol >= 0)) fail(fmt::format("stop_tol = {} must be >= 0", c.stop_tol));
  if (!(c.eta > 0)) fail(fmt::format("eta = {} must be > 0", c.eta));
  if (!(c.big_m > 0)) fail(fmt::format("M = {} must be > 0", c.big_m));
  if (!(c.gamma >= 0)) fail(fmt::format("gamma = {} must be >= 0", c.gamma));
  if (!(c.ridge_lambda >= 0)) fail(fmt::format("ridge_lambda = {} must be >= 0", c.ridge_lambda));
  if (!(c.test_fraction >= 0 && c.test_fraction < 1)) {
    fail(fmt::format("test_fraction = {} outside [0, 1)", c.test_fraction));
  }
  if (!(c.alpha >= 0 && c.alpha <= 0.5)) fail(fmt::format("alpha = {} outside [0, 1/2]", c.alpha));
  if (!(c.beta >= 0 && c.beta <= 0.5)) fail(fmt::format("beta = {} outside [0, 1/2]", c.beta));
  if (!(c.attack_sigma >= 0)) fail(fmt::format("attack sigma = {} must be >= 0", c.attack_sigma));
  if (!(c.attack_c > 0 && c.attack_c < 1)) fail(fmt::format("attack c = {} outside (0, 1)", c.attack_c));
  if (c.inner_step && !(*c.inner_step > 0)) fail("inner step must be > 0");
  if (c.inner_tol && !(*c.inner_tol > 0)) fail("inner tolerance must be > 0");
  if (c.inner_max_iters < 0) fail("inner max_iters must be >= 0");
  if (!(c.inner_guard > 0)) fail("inner guard must be > 0");
  if (c.loss == LossKind::saddle) {
    if (c.dim < 1) fail(fmt::format("saddle dim = {} must be >= 1", c.dim));
    if (!(c.saddle_noise >= 0)) fail("saddle_noise must be >= 0");
    if (c.attack == AttackKind::random_label || c.attack == AttackKind::flip) {
      fail(fmt::format("{} attack needs labelled data; the saddle loss has none",
                       to_string(c.attack)));
    }
  } else if (c.dataset.empty()) {
    fail("no dataset given (--dataset PATH or synthetic:<a9a|w8a>[:n])");
  }

  if (trim_count(c.beta, c.workers) >= c.workers) {
    fail(fmt::format("beta = {} trims all {} workers", c.beta, c.workers));
  }

  const int byz = byzantine_count(c.alpha, c.workers);
  if (byz > 0 && c.attack == AttackKind::none) {
    fail(fmt::format("alpha = {} makes {} workers Byzantine but attack is 'none'",
                     c.alpha, byz));
  }

  std::vector<std::string> warnings;
  if (c.alpha > 0 && c.beta < c.alpha) {
    warnings.push_back(fmt::format(
        "beta = {} < alpha = {}: trimming cannot remove every Byzantine worker",
        c.beta, c.alpha));
  }
  if (byz == 0 && c.attack != AttackKind::none) {
    warnings.push_back(fmt::format("attack '{}' selected but alpha * m < 1; no worker is Byzantine",
                                   to_string(c.attack)));
  }
  return warnings;
}

}  // namespace byzcubic
