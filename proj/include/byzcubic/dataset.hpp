#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace byzcubic {

/// One nonzero of a sparse feature row; `index` is 0-based.
struct Feature {
  int index = 0;
  double value = 0.0;

  friend bool operator==(const Feature&, const Feature&) = default;
};

/// A labelled example. Features are sorted by strictly increasing index.
struct Sample {
  std::vector<Feature> features;
  double label = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  int dim = 0;
};

/// Training data owned by one worker.
struct Shard {
  int worker_id = 0;
  std::vector<Sample> samples;
};

/// Parses LIBSVM text (`<label> <idx>:<val> ...`, 1-based indices).
///
/// Labels equal to 0 are mapped to -1 so binary {0,1} data becomes {-1,+1};
/// every other label is kept as written. The inferred dimension is the
/// largest index seen, or `expected_dim` when that is larger.
///
/// Throws ParseError (with line number) on malformed tokens or
/// non-increasing indices, and DimensionError when an index exceeds
/// `expected_dim`.
Dataset parse_libsvm(std::istream& in,
                     std::optional<int> expected_dim = std::nullopt);

/// Opens `path` and parses it. Throws Error if the file cannot be read.
Dataset load_libsvm(const std::string& path,
                    std::optional<int> expected_dim = std::nullopt);

/// Formats one sample as a LIBSVM line (no trailing newline), 1-based.
std::string format_libsvm(const Sample& sample);

void write_libsvm(std::ostream& out, const std::vector<Sample>& samples);

/// Seeded shuffle, then the last round(test_fraction * n) samples become the
/// test set. Throws Error on empty input or a fraction outside [0, 1).
std::pair<std::vector<Sample>, std::vector<Sample>> split_train_test(
    const std::vector<Sample>& samples, double test_fraction,
    std::uint64_t seed);

/// Seeded shuffle, then a balanced contiguous split into `m` shards. The
/// first n % m shards hold one extra sample.
std::vector<Shard> shard_iid(const std::vector<Sample>& train, int m,
                             std::uint64_t seed);

}  // namespace byzcubic
