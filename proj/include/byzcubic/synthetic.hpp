#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "byzcubic/dataset.hpp"

namespace byzcubic {

/// Stand-ins for the LIBSVM benchmark sets when the real files are absent.
/// Sparsity pattern and dimension follow the benchmark; each active feature
/// j carries the value 1/sqrt(P[j active]) so every column has unit second
/// moment. Labels come from a planted logistic model on the binary pattern,
/// so the data is learnable but not separable.
enum class SyntheticShape {
  a9a,  // d = 123, one-hot over 14 categorical groups
  w8a,  // d = 300, independent sparse binary features, ~11.6 nonzeros/row
};

std::optional<SyntheticShape> parse_synthetic_shape(std::string_view name);

/// Default sample count of the benchmark each shape mimics.
std::size_t default_sample_count(SyntheticShape shape);

Dataset make_synthetic(SyntheticShape shape, std::size_t n,
                       std::uint64_t seed);

}  // namespace byzcubic
