#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gaugetc/shape.hpp"
#include "gaugetc/sign_vertex.hpp"

namespace gaugetc {

/// One linear separation problem over the scaled sign polytope: find a vertex
/// v maximizing  sum_x c_x * (psi_x - lambda * v_x)  against the thresholds
/// phi (gap estimate) and accuracy_k. c and psi are aligned with `indices`;
/// entries with c_x = 0 contribute nothing.
struct SeparationRequest {
  Shape shape{std::vector<int>{1}};
  double lambda = 1.0;
  std::vector<EntryIndex> indices;
  std::vector<double> c;
  std::vector<double> psi;
  double phi = 1.0;
  double accuracy_k = 2.0;

  void validate() const;
};

struct Separated {
  SignVertex vertex;
  double gap = 0.0;
  /// True when the vertex came out of the exact search rather than the
  /// alternating-maximization heuristic.
  bool via_search = false;
};

struct NoSeparation {
  /// Upper bound on the gap over every vertex; at most phi.
  double certified_bound = 0.0;
};

using SeparationResult = std::variant<Separated, NoSeparation>;

struct OracleOptions {
  int am_restarts = 5;
  int am_pass_cap = 10;
  int64_t node_budget = int64_t{1} << 33;
  uint64_t seed = 0;
  const SignVertex* incumbent = nullptr;
};

struct OracleStats {
  bool ran_search = false;
  int64_t search_nodes = 0;
};

/// Thrown when the exact search exhausts its node budget before reaching the
/// target or proving a bound. Never silently converted into a certificate.
class OracleInconclusive : public std::runtime_error {
 public:
  explicit OracleInconclusive(const std::string& what) : std::runtime_error(what) {}
};

/// sum_i c_i * (psi_i - lambda * vertex_entry(v, x_i)), accumulated in the
/// request's index order. This is the reference evaluation every other
/// routine is checked against.
double separation_gap(const SeparationRequest& req, const SignVertex& v);

struct AmTrace {
  int passes = 0;
  int64_t flips = 0;
  std::vector<double> gap_trajectory;  // gap after each accepted flip
};

/// Coordinate-flip ascent on the gap: passes over every (mode, coordinate),
/// keeping a tentative flip iff the gap strictly increases, until a full pass
/// makes no flip or pass_cap is hit. Each flip test costs time proportional
/// to the number of supported terms using that coordinate.
SignVertex alternating_max(const SeparationRequest& req, const SignVertex& start,
                           int pass_cap = 10, AmTrace* trace = nullptr);

/// Best vertex over alternating_max runs started from `options.incumbent`
/// (when given) and options.am_restarts random sign patterns, canonicalized;
/// ties broken toward the lexicographically smaller vertex. Second element is
/// its gap. Requires nonzero support.
std::pair<SignVertex, double> best_heuristic(const SeparationRequest& req,
                                             const OracleOptions& options);

struct BnbResult {
  SignVertex best;
  double incumbent_gap = 0.0;
  /// Valid upper bound on the gap over all vertices; equals incumbent_gap
  /// (the exact optimum) when exhausted.
  double dual_bound = 0.0;
  bool exhausted = false;
  bool reached_target = false;
  int64_t nodes = 0;
};

/// Depth-first exact maximization of the gap over canonical sign
/// assignments: modes in index order, coordinates within a mode by
/// descending sum|c| mass, +1 branch first; interval bound
/// (assigned-term sums minus remaining mass) pruned against the incumbent.
/// Terminates early once the incumbent reaches `target`. Candidate gaps are
/// always re-evaluated through separation_gap, so an exhausted run returns
/// the same float optimum a brute-force scan of canonical vertices computes.
BnbResult exact_branch_and_bound(
    const SeparationRequest& req,
    double target = std::numeric_limits<double>::infinity(),
    int64_t node_budget = int64_t{1} << 33, const SignVertex* warm_start = nullptr);

/// Two-way oracle: either Separated{v, gap >= phi/K} or NoSeparation with a
/// certified bound (<= phi) on every vertex's gap. Throws OracleInconclusive
/// when the search budget runs out undecided.
SeparationResult weak_separation_oracle(const SeparationRequest& req,
                                        const OracleOptions& options = {},
                                        OracleStats* stats = nullptr);

}  // namespace gaugetc
