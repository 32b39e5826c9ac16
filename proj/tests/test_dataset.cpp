#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "byzcubic/common.hpp"
#include "byzcubic/dataset.hpp"
#include "byzcubic/synthetic.hpp"
#include "oracles.hpp"

using namespace byzcubic;

namespace {

Dataset parse(const std::string& text, std::optional<int> dim = std::nullopt) {
  std::istringstream in(text);
  return parse_libsvm(in, dim);
}

std::vector<Sample> numbered(int n) {
  std::vector<Sample> out(n);
  for (int i = 0; i < n; ++i) out[i] = Sample{{{0, static_cast<double>(i)}}, 1.0};
  return out;
}

// Multiset key of a sample.
std::string key(const Sample& s) { return format_libsvm(s); }

}  // namespace

TEST_CASE("parse a well-formed line") {
  const auto d = parse("+1 3:0.5 7:1\n");
  REQUIRE(d.samples.size() == 1);
  CHECK(d.samples[0].label == 1.0);
  CHECK(d.samples[0].features == std::vector<Feature>{{2, 0.5}, {6, 1.0}});
  CHECK(d.dim == 7);
}

TEST_CASE("label 0 maps to -1, other labels are kept") {
  const auto d = parse("0 1:2\n-1 2:1\n1 1:1\n2.5 3:1\n");
  CHECK(d.samples[0].label == -1.0);
  CHECK(d.samples[0].features == std::vector<Feature>{{0, 2.0}});
  CHECK(d.samples[1].label == -1.0);
  CHECK(d.samples[2].label == 1.0);
  CHECK(d.samples[3].label == 2.5);
}

TEST_CASE("expected dimension widens but never truncates") {
  CHECK(parse("1 2:1\n", 10).dim == 10);
  CHECK_THROWS_AS(parse("1 2:1 11:1\n", 10), DimensionError);
}

TEST_CASE("blank lines are skipped and CRLF is tolerated") {
  const auto d = parse("\n1 1:1\r\n\n   \n-1 2:3\n");
  CHECK(d.samples.size() == 2);
  CHECK(d.samples[1].features[0].value == 3.0);
}

TEST_CASE("parse errors carry the line number") {
  auto line_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("1 5:1 3:1\n") == 1);   // non-increasing
  CHECK(line_of("1 1:1\n1 2:1 2:3\n") == 2);  // repeated index
  CHECK(line_of("1 1:1\nx 1:1\n") == 2);
  CHECK(line_of("1 1:1\n1 3\n") == 2);
  CHECK(line_of("1 0:1\n") == 1);
  CHECK(line_of("1 a:1\n") == 1);
  CHECK(line_of("1 1:b\n") == 1);
}

TEST_CASE("serializing then parsing reproduces every sample") {
  const auto original = oracle::random_samples(200, 30, 0.2, 3);
  std::ostringstream out;
  write_libsvm(out, original);
  const auto back = parse(out.str());
  CHECK(back.samples == original);
}

TEST_CASE("split cardinalities and disjointness") {
  const auto all = numbered(10);
  auto [train, test] = split_train_test(all, 0.3, 7);
  CHECK(train.size() == 7);
  CHECK(test.size() == 3);
  std::multiset<std::string> seen;
  for (const auto& s : train) seen.insert(key(s));
  for (const auto& s : test) seen.insert(key(s));
  std::multiset<std::string> expected;
  for (const auto& s : all) expected.insert(key(s));
  CHECK(seen == expected);
}

TEST_CASE("split with zero test fraction keeps everything for training") {
  auto [train, test] = split_train_test(numbered(10), 0.0, 1);
  CHECK(train.size() == 10);
  CHECK(test.empty());
}

TEST_CASE("split is deterministic in the seed") {
  const auto all = numbered(50);
  CHECK(split_train_test(all, 0.3, 7) == split_train_test(all, 0.3, 7));
  CHECK(split_train_test(all, 0.3, 7) != split_train_test(all, 0.3, 8));
}

TEST_CASE("split rejects empty input and bad fractions") {
  CHECK_THROWS_AS(split_train_test({}, 0.3, 1), Error);
  CHECK_THROWS_AS(split_train_test(numbered(3), 1.0, 1), Error);
  CHECK_THROWS_AS(split_train_test(numbered(3), -0.1, 1), Error);
}

TEST_CASE("balanced shard sizes") {
  auto sizes = [](int n, int m) {
    std::vector<std::size_t> out;
    for (const auto& s : shard_iid(numbered(n), m, 5)) out.push_back(s.samples.size());
    return out;
  };
  CHECK(sizes(100, 20) == std::vector<std::size_t>(20, 5));
  CHECK(sizes(7, 3) == std::vector<std::size_t>{3, 2, 2});
  const auto one = shard_iid(numbered(9), 1, 5);
  REQUIRE(one.size() == 1);
  CHECK(one[0].samples.size() == 9);
  CHECK_THROWS_AS(shard_iid(numbered(2), 3, 1), Error);
  CHECK_THROWS_AS(shard_iid(numbered(2), 0, 1), Error);
}

TEST_CASE("shards partition the training set for any seed") {
  const auto all = oracle::random_samples(137, 10, 0.4, 21);
  std::multiset<std::string> expected;
  for (const auto& s : all) expected.insert(key(s));
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const int m = 1 + static_cast<int>(seed % 13);
    const auto shards = shard_iid(all, m, seed);
    std::multiset<std::string> seen;
    for (int w = 0; w < m; ++w) {
      CHECK(shards[w].worker_id == w);
      CHECK_FALSE(shards[w].samples.empty());
      for (const auto& s : shards[w].samples) seen.insert(key(s));
    }
    CHECK(seen == expected);
  }
}

TEST_CASE("equal seeds give identical shard assignments") {
  const auto all = oracle::random_samples(80, 5, 0.5, 2);
  const auto a = shard_iid(all, 6, 42);
  const auto b = shard_iid(all, 6, 42);
  for (int w = 0; w < 6; ++w) CHECK(a[w].samples == b[w].samples);
}

TEST_CASE("synthetic stand-ins have the benchmark shapes") {
  const auto a9a = make_synthetic(SyntheticShape::a9a, 2000, 1);
  CHECK(a9a.dim == 123);
  for (const auto& s : a9a.samples) CHECK(s.features.size() == 14);
  const auto w8a = make_synthetic(SyntheticShape::w8a, 2000, 1);
  CHECK(w8a.dim == 300);
  double nnz = 0, positives = 0;
  for (const auto& s : w8a.samples) {
    nnz += static_cast<double>(s.features.size());
    positives += s.label > 0;
    CHECK(std::is_sorted(s.features.begin(), s.features.end(),
                         [](const Feature& a, const Feature& b) { return a.index < b.index; }));
  }
  CHECK(nnz / 2000 == doctest::Approx(11.6).epsilon(0.1));
  CHECK(positives > 200);
  CHECK(positives < 1800);
  CHECK(make_synthetic(SyntheticShape::w8a, 50, 9).samples ==
        make_synthetic(SyntheticShape::w8a, 50, 9).samples);
}
