#pragma once

#include <string>
#include <vector>

#include "gaugetc/shape.hpp"
#include "gaugetc/sign_vertex.hpp"

namespace gaugetc {

struct WeightedVertex {
  double weight = 0.0;
  SignVertex vertex;
};

/// A lambda-scaled convex combination of sign vertices: the solver iterate,
/// the output estimator, and a constructive certificate that the gauge norm
/// is at most lambda (weights are nonnegative and sum to at most 1).
/// Vertices are kept in canonical form with no duplicates.
class AtomicModel {
 public:
  AtomicModel(Shape shape, double lambda, std::vector<WeightedVertex> terms);

  static AtomicModel zero(const Shape& shape) { return AtomicModel(shape, 0.0, {}); }

  const Shape& shape() const { return shape_; }
  double lambda() const { return lambda_; }
  const std::vector<WeightedVertex>& terms() const { return terms_; }
  int term_count() const { return static_cast<int>(terms_.size()); }
  double weight_sum() const;

  /// lambda * sum_v a_v * vertex_entry(v, x).
  double entry(const EntryIndex& x) const;

  /// entry() over a list of indices, in order.
  std::vector<double> project(std::span<const EntryIndex> indices) const;

 private:
  Shape shape_;
  double lambda_;
  std::vector<WeightedVertex> terms_;
};

/// Frobenius inner product via the rank-1 factorization identity
///   <m1, m2> = l1*l2 * sum_v sum_w a_v a_w prod_k <theta_v^k, theta_w^k>,
/// costing O(|terms1|*|terms2|*sum_dims) with no materialization.
double inner_product(const AtomicModel& a, const AtomicModel& b);

/// Dense row-major entries of a small model (test-oracle support).
std::vector<double> materialize_dense(const AtomicModel& model,
                                      int64_t max_entries = 1'000'000);

/// JSON schema:
///   {"shape":[r1,...,rp],"lambda":L,
///    "terms":[{"weight":w,"signs":[[+-1,...],...]}]}
std::string model_to_json(const AtomicModel& model);
AtomicModel model_from_json(const std::string& text);
void save_model(const AtomicModel& model, const std::string& path);
AtomicModel load_model(const std::string& path);

}  // namespace gaugetc
