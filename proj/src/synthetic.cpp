#include "byzcubic/synthetic.hpp"

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "byzcubic/common.hpp"
#include "byzcubic/seeding.hpp"

namespace byzcubic {

namespace {

// Category counts of the 14 one-hot groups; they sum to 123.
constexpr std::array<int, 14> kA9aGroups = {9, 16, 16, 7, 15, 6, 5,
                                            2, 2, 14, 5, 5, 13, 8};
constexpr int kW8aDim = 300;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

std::vector<double> planted_weights(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(dim);
  for (auto& v : w) v = normal(rng);
  return w;
}

Dataset make_a9a_like(std::size_t n, std::mt19937_64& rng) {
  int dim = 0;
  std::vector<std::discrete_distribution<int>> groups;
  std::vector<int> offsets;
  for (int size : kA9aGroups) {
    std::vector<double> weights(size);
    for (int c = 0; c < size; ++c) weights[c] = 1.0 / (c + 1.0);
    groups.emplace_back(weights.begin(), weights.end());
    offsets.push_back(dim);
    dim += size;
  }
  const auto w = planted_weights(dim, rng);
  double mean_score = 0.0;
  std::vector<std::vector<double>> scale(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto probs = groups[g].probabilities();
    scale[g].resize(probs.size());
    for (std::size_t c = 0; c < probs.size(); ++c) {
      mean_score += probs[c] * w[offsets[g] + static_cast<int>(c)];
      scale[g][c] = 1.0 / std::sqrt(probs[c]);
    }
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Dataset data;
  data.dim = dim;
  data.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    double score = -mean_score;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const int c = groups[g](rng);
      const int idx = offsets[g] + c;
      s.features.push_back({idx, scale[g][c]});
      score += w[idx];
    }
    s.label = unif(rng) < sigmoid(score) ? 1.0 : -1.0;
    data.samples.push_back(std::move(s));
  }
  return data;
}

Dataset make_w8a_like(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> p(kW8aDim);
  for (int j = 0; j < kW8aDim; ++j) p[j] = 0.74 * std::pow(j + 1.0, -0.7);
  const auto w = planted_weights(kW8aDim, rng);
  double mean_score = 0.0;
  for (int j = 0; j < kW8aDim; ++j) mean_score += p[j] * w[j];
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Dataset data;
  data.dim = kW8aDim;
  data.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    double score = -mean_score;
    for (int j = 0; j < kW8aDim; ++j) {
      if (unif(rng) < p[j]) {
        s.features.push_back({j, 1.0 / std::sqrt(p[j])});
        score += w[j];
      }
    }
    s.label = unif(rng) < sigmoid(score) ? 1.0 : -1.0;
    data.samples.push_back(std::move(s));
  }
  return data;
}

}  // namespace

std::optional<SyntheticShape> parse_synthetic_shape(std::string_view name) {
  if (name == "a9a") return SyntheticShape::a9a;
  if (name == "w8a") return SyntheticShape::w8a;
  return std::nullopt;
}

std::size_t default_sample_count(SyntheticShape shape) {
  return shape == SyntheticShape::a9a ? 32561 : 49749;
}

Dataset make_synthetic(SyntheticShape shape, std::size_t n,
                       std::uint64_t seed) {
  if (n == 0) throw Error("make_synthetic: n must be positive");
  auto rng = make_stream(seed, {salt::kSynthetic, static_cast<std::uint64_t>(shape)});
  return shape == SyntheticShape::a9a ? make_a9a_like(n, rng)
                                      : make_w8a_like(n, rng);
}

}  // namespace byzcubic
