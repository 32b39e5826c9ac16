#include "byzcubic/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "byzcubic/common.hpp"
#include "byzcubic/seeding.hpp"

namespace byzcubic {

namespace {

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view tok, long& out) {
  if (tok.empty()) return false;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed,
                                            std::uint64_t stream) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto rng = make_stream(seed, {stream});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<int> expected_dim) {
  Dataset data;
  long max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    Sample sample;
    if (!parse_double(tokens[0], sample.label)) {
      throw ParseError(lineno, fmt::format("bad label '{}'", tokens[0]));
    }
    if (sample.label == 0.0) sample.label = -1.0;

    long prev = 0;
    sample.features.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      auto tok = tokens[t];
      auto colon = tok.find(':');
      long idx = 0;
      double val = 0.0;
      if (colon == std::string_view::npos ||
          !parse_index(tok.substr(0, colon), idx) ||
          !parse_double(tok.substr(colon + 1), val) || idx < 1) {
        throw ParseError(lineno, fmt::format("malformed feature '{}'", tok));
      }
      if (idx <= prev) {
        throw ParseError(lineno,
                         fmt::format("index {} does not increase (previous {})",
                                     idx, prev));
      }
      if (expected_dim && idx > *expected_dim) {
        throw DimensionError(fmt::format(
            "line {}: index {} exceeds expected dimension {}", lineno, idx,
            *expected_dim));
      }
      prev = idx;
      sample.features.push_back({static_cast<int>(idx - 1), val});
    }
    max_index = std::max(max_index, prev);
    data.samples.push_back(std::move(sample));
  }
  data.dim = static_cast<int>(max_index);
  if (expected_dim) data.dim = std::max(data.dim, *expected_dim);
  return data;
}

Dataset load_libsvm(const std::string& path, std::optional<int> expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open dataset '{}'", path));
  return parse_libsvm(in, expected_dim);
}

std::string format_libsvm(const Sample& sample) {
  std::string out = fmt::format("{}", sample.label);
  for (const auto& f : sample.features) {
    out += fmt::format(" {}:{}", f.index + 1, f.value);
  }
  return out;
}

void write_libsvm(std::ostream& out, const std::vector<Sample>& samples) {
  for (const auto& s : samples) out << format_libsvm(s) << '\n';
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_train_test(
    const std::vector<Sample>& samples, double test_fraction,
    std::uint64_t seed) {
  if (samples.empty()) throw Error("split_train_test: empty input");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw Error(fmt::format("test fraction {} outside [0, 1)", test_fraction));
  }
  const std::size_t n = samples.size();
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  const auto perm = seeded_permutation(n, seed, salt::kSplit);

  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  out.first.reserve(n - n_test);
  out.second.reserve(n_test);
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n - n_test ? out.first : out.second;
    dst.push_back(samples[perm[i]]);
  }
  return out;
}

std::vector<Shard> shard_iid(const std::vector<Sample>& train, int m,
                             std::uint64_t seed) {
  if (m < 1) throw Error(fmt::format("shard_iid: m = {} must be >= 1", m));
  const std::size_t n = train.size();
  const auto workers = static_cast<std::size_t>(m);
  if (n < workers) {
    throw Error(fmt::format("shard_iid: {} samples cannot fill {} shards", n, m));
  }
  const auto perm = seeded_permutation(n, seed, salt::kShard);
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;

  std::vector<Shard> shards(workers);
  std::size_t pos = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t size = base + (w < extra ? 1 : 0);
    shards[w].worker_id = static_cast<int>(w);
    shards[w].samples.reserve(size);
    for (std::size_t j = 0; j < size; ++j) {
      shards[w].samples.push_back(train[perm[pos++]]);
    }
  }
  return shards;
}

}  // namespace byzcubic
