#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gaugetc/shape.hpp"

namespace gaugetc {

/// Evaluates `fn` at every index of `shape` into a row-major array (last mode
/// fastest, matching Shape::flat_index). Test-oracle support; refuses shapes
/// above `max_entries`.
std::vector<double> materialize_dense(
    const std::function<double(const EntryIndex&)>& fn, const Shape& shape,
    int64_t max_entries = 1'000'000);

}  // namespace gaugetc
