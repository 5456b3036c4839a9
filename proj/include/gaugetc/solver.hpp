#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gaugetc/atomic_model.hpp"
#include "gaugetc/samples.hpp"
#include "gaugetc/separation.hpp"
#include "gaugetc/shape.hpp"
#include "gaugetc/sign_vertex.hpp"

namespace gaugetc {

struct SolverConfig {
  double lambda = 1.0;
  double epsilon = 1e-4;  // target duality gap, absolute
  double accuracy_k = 2.0;
  int64_t max_iterations = 100000;
  int am_restarts = 5;
  int am_pass_cap = 10;
  int64_t bnb_node_budget = int64_t{1} << 33;
  uint64_t seed = 0;
  /// Re-checks the active-set invariants every iteration (test use; slow).
  bool validate_invariants = false;

  double phi_floor() const { return epsilon / 2.0; }
  void validate() const;
};

/// Convex combination of sign vertices restricted to the observed indices.
/// Weights stay nonnegative with sum at most 1 (slack is the implicit zero
/// point of the ball), so the iterate is feasible by construction.
class ActiveSet {
 public:
  struct Entry {
    SignVertex vertex;             // canonical
    std::vector<int8_t> projection;  // entries over U, in sample order
    double weight = 0.0;
  };

  explicit ActiveSet(const SampleSet& samples) : samples_(&samples) {}

  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  double weight_sum() const;

  /// Adds weight to the entry for `vertex` (inserted if absent). The vertex
  /// is canonicalized and its projection cached.
  void add(const SignVertex& vertex, double weight);
  void scale_weights(double factor);
  void set_weight(size_t i, double weight) { entries_[i].weight = weight; }

  /// Removes entries with weight <= floor; returns the dropped weight mass.
  double drop_below(double floor, std::vector<double>& psi, double lambda);

  void validate(std::span<const double> psi, double lambda) const;

 private:
  const SampleSet* samples_;
  std::vector<Entry> entries_;
};

/// (1/n) * sum_i (y_i - psi_{x_i})^2, computed through the per-unique-index
/// aggregates (psi is over the unique indices, in sample order).
double objective_value(std::span<const double> psi, const SampleSet& samples);

/// d objective / d psi_x = (2/n) * m_x * (psi_x - ybar_x); zero off U.
std::vector<double> gradient(std::span<const double> psi, const SampleSet& samples);

/// Exact step for the quadratic objective along `direction`, clamped to
/// [0, 1]. Rejects an identically-zero direction.
double line_search(std::span<const double> psi, std::span<const double> direction,
                   const SampleSet& samples);

/// Largest pairwise gap <g, lambda*(u_away - s_toward)> over the active set;
/// zero for fewer than two entries.
double local_gap(const ActiveSet& active, std::span<const double> grad, double lambda);

struct LocalStepResult {
  bool moved = false;
  double step = 0.0;
};

/// Pairwise weight transfer from the worst active vertex toward the best one
/// under the current gradient, with exact line search capped by the away
/// weight. No-op when the active set has fewer than two entries or the two
/// coincide.
LocalStepResult local_step(ActiveSet& active, std::vector<double>& psi,
                           std::span<const double> grad, const SampleSet& samples,
                           double lambda);

enum class SolveStatus {
  converged,
  iteration_limit,
  oracle_inconclusive,
};

struct TraceRow {
  int64_t iteration = 0;
  std::string phase;  // "local" | "global" | "halve"
  double objective = 0.0;
  double phi = 0.0;
  int active_size = 0;
  double oracle_seconds = 0.0;
};

struct Diagnostics {
  SolveStatus status = SolveStatus::iteration_limit;
  int64_t iterations = 0;
  int64_t oracle_calls = 0;
  int64_t heuristic_separations = 0;
  int64_t search_separations = 0;
  int64_t no_separation_events = 0;
  int64_t search_nodes = 0;
  double final_phi = 0.0;
  double final_objective = 0.0;
  /// Upper bound on the terminal duality gap implied by the phi chain.
  double certified_gap_bound = 0.0;
  bool initial_call_exact = true;
  double seconds = 0.0;
  std::vector<TraceRow> trace;
};

struct SolveResult {
  AtomicModel model;
  Diagnostics diagnostics;
};

/// Blended conditional-gradient loop over the observed indices: cheap
/// pairwise steps inside the active set while they beat the gap estimate phi,
/// oracle steps toward new vertices otherwise, phi shrinking on certified
/// no-separation answers until it reaches epsilon/2.
SolveResult solve(const SampleSet& samples, const SolverConfig& config);

std::string trace_to_jsonl(const std::vector<TraceRow>& trace);

}  // namespace gaugetc
