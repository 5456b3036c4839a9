#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gaugetc {

/// Zero-based multi-index of a tensor entry. One-based coordinates appear
/// only at file/CLI boundaries.
struct EntryIndex {
  std::vector<int> coords;

  bool operator==(const EntryIndex& other) const = default;
};

/// Mode sizes r_1..r_p of an order-p tensor, with the derived order, sum of
/// dims and entry count. Immutable after construction.
class Shape {
 public:
  explicit Shape(std::vector<int> dims);

  int order() const { return static_cast<int>(dims_.size()); }
  int dim(int mode) const { return dims_[static_cast<size_t>(mode)]; }
  const std::vector<int>& dims() const { return dims_; }

  /// Sum of mode sizes (the length of a flattened per-mode sign vector).
  int sum_dims() const { return sum_; }
  /// Product of mode sizes. Construction fails if this overflows int64.
  int64_t entry_count() const { return count_; }
  /// Start of mode `mode` inside a flat sum_dims()-length vector.
  int mode_offset(int mode) const { return offsets_[static_cast<size_t>(mode)]; }

  bool contains(const EntryIndex& x) const;
  /// Throws std::out_of_range naming the offending mode.
  void require_contains(const EntryIndex& x) const;

  /// Row-major flat position, last mode fastest.
  int64_t flat_index(const EntryIndex& x) const;
  EntryIndex index_from_flat(int64_t flat) const;

  std::string to_string() const;

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }
  bool operator!=(const Shape& other) const { return dims_ != other.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int sum_ = 0;
  int64_t count_ = 1;
};

}  // namespace gaugetc
