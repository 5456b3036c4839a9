#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gaugetc/shape.hpp"

namespace gaugetc {

/// A vertex of the unit sign polytope: p per-mode sign vectors in {-1,+1},
/// stored flat (sum_dims entries, mode k starting at Shape::mode_offset(k)).
/// The induced rank-1 tensor entry at x is the product of the selected signs,
/// so a vertex costs O(sum of dims) regardless of the entry count.
class SignVertex {
 public:
  SignVertex(const Shape& shape, std::vector<int8_t> flat_signs);
  SignVertex(const Shape& shape, const std::vector<std::vector<int8_t>>& per_mode);

  static SignVertex all_plus(const Shape& shape);

  const Shape& shape() const { return shape_; }
  const std::vector<int8_t>& flat_signs() const { return signs_; }
  int sign(int mode, int coord) const {
    return signs_[static_cast<size_t>(shape_.mode_offset(mode) + coord)];
  }

  /// Product of the p selected signs; always +/-1.
  int entry(const EntryIndex& x) const;

  /// Elementwise entry() over `indices`, in their given order.
  std::vector<int8_t> project(std::span<const EntryIndex> indices) const;

  /// Equivalent vertex (identical induced tensor) with the leading sign of
  /// every mode after the first fixed to +1; flips are absorbed by mode 1.
  /// Idempotent. Two whole-mode flips cancel in every entry product, so this
  /// collapses the 2^(p-1)-fold representation symmetry.
  SignVertex canonicalized() const;
  bool is_canonical() const;

  /// Vertex of the negated tensor (first mode flipped entirely). Preserves
  /// canonical form.
  SignVertex negated() const;

  bool operator==(const SignVertex& other) const {
    return shape_ == other.shape_ && signs_ == other.signs_;
  }
  /// Lexicographic order on the flat sign pattern, used for deterministic
  /// tie-breaking.
  bool lex_less(const SignVertex& other) const { return signs_ < other.signs_; }

 private:
  Shape shape_;
  std::vector<int8_t> signs_;
};

}  // namespace gaugetc
