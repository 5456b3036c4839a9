#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaugetc/atomic_model.hpp"
#include "gaugetc/samples.hpp"
#include "gaugetc/shape.hpp"
#include "gaugetc/solver.hpp"

namespace gaugetc {

/// Dense CP factors: factors[k] is r_k x rank, row-major. Entry value is
/// sum_a prod_k factors[k][x_k][a].
struct FactorModel {
  Shape shape;
  int rank = 0;
  std::vector<std::vector<double>> factors;

  double entry(const EntryIndex& x) const;
};

/// Frobenius inner products through the rank-1 factorization identity; no
/// materialization, valid at any entry count.
double inner_product(const FactorModel& a, const FactorModel& b);
double inner_product(const FactorModel& a, const AtomicModel& b);

/// |est - truth|_F^2 / |truth|_F^2, expanded into factored inner products.
double nmse(const AtomicModel& estimate, const AtomicModel& truth);
double nmse(const FactorModel& estimate, const AtomicModel& truth);

/// Random convex combination of `terms` distinct canonical vertices with
/// uniform i.i.d. signs; weights are normalized exponentials (flat over the
/// simplex); lambda = 1, so the result certifies gauge norm <= 1 and rank at
/// most `terms`.
AtomicModel generate_truth(const Shape& shape, int terms, uint64_t seed);

/// n draws with indices uniform over the full index range with replacement;
/// y = truth entry plus Gaussian noise of the given standard deviation
/// (zero keeps the observations exact).
std::vector<SampleRow> draw_observations(const AtomicModel& truth, int64_t n,
                                         double noise_std, uint64_t seed);
SampleSet sample_observations(const AtomicModel& truth, int64_t n, double noise_std,
                              uint64_t seed);

struct AlsConfig {
  int rank = 10;
  double l2_reg = 1e-3;
  int iterations = 50;
  uint64_t seed = 0;
};

/// Observed-entry alternating least squares with ridge regularization:
/// cycles over modes, solving each mode's rows exactly with the others held
/// fixed. Appends the penalized objective after each full cycle to
/// `objective_trace` when given.
FactorModel als_baseline(const SampleSet& samples, const AlsConfig& config,
                         std::vector<double>* objective_trace = nullptr);

struct ExperimentSpec {
  Shape shape{std::vector<int>{2, 2}};
  int truth_terms = 10;
  int64_t n = 1000;
  double noise_std = 0.0;
  int replicates = 10;
  uint64_t seed = 0;
  std::vector<uint64_t> seeds;  // optional explicit per-trial seeds
  std::vector<std::string> methods{"gauge", "als", "naive"};
  SolverConfig solver;
  AlsConfig als;
  int threads = 1;

  uint64_t trial_seed(int trial) const;
};

struct TrialResult {
  int trial = 0;
  uint64_t seed = 0;
  std::string method;
  double nmse = 0.0;
  double seconds = 0.0;
  int64_t iterations = 0;
  int64_t oracle_calls = 0;
  std::string error;  // empty on success
};

struct MethodAggregate {
  std::string method;
  int trials = 0;  // successful trials
  double mean_nmse = 0.0;
  double median_nmse = 0.0;
  double std_nmse = 0.0;
  double mean_seconds = 0.0;
};

/// Per replicate: generate a truth, sample it, run every method, score NMSE.
/// The naive mean predictor is always included as a sanity floor. Trials are
/// independent and may run on spec.threads workers; per-trial seeding keeps
/// the output schedule-invariant. Individual trial failures land in the
/// error column rather than aborting the run.
std::vector<TrialResult> run_benchmark(const ExperimentSpec& spec);

std::vector<MethodAggregate> aggregate_results(const std::vector<TrialResult>& trials);

std::string trials_to_csv(const std::vector<TrialResult>& trials);
std::string aggregates_to_csv(const std::vector<MethodAggregate>& aggregates);

ExperimentSpec spec_from_json(const std::string& text);
ExperimentSpec load_spec(const std::string& path);

}  // namespace gaugetc
