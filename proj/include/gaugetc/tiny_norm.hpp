#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gaugetc/shape.hpp"
#include "gaugetc/sign_vertex.hpp"

namespace gaugetc {

/// All 2^(sum_dims - order + 1) canonical vertices of the unit sign polytope,
/// in a fixed deterministic order (counter bits over the free sign positions,
/// first free position least significant; counter 0 is the all-plus vertex).
std::vector<SignVertex> enumerate_canonical_vertices(const Shape& shape,
                                                     int max_free_bits = 24);

/// Exact gauge norm of a small dense tensor (row-major, last mode fastest):
/// the optimum of  min sum_v a_v  s.t.  sum_v a_v * v = psi, a >= 0  over the
/// canonical vertex set, solved by a self-contained two-phase simplex.
/// Test-oracle only; guarded to sum_dims <= 16.
double tiny_norm_oracle(std::span<const double> dense, const Shape& shape);

}  // namespace gaugetc
