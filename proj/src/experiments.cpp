#include "gaugetc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "gaugetc/numfmt.hpp"
#include "gaugetc/rng.hpp"

namespace gaugetc {

double FactorModel::entry(const EntryIndex& x) const {
  shape.require_contains(x);
  double acc = 0.0;
  for (int a = 0; a < rank; ++a) {
    double prod = 1.0;
    for (int k = 0; k < shape.order(); ++k) {
      prod *= factors[static_cast<size_t>(k)]
                     [static_cast<size_t>(x.coords[static_cast<size_t>(k)] * rank + a)];
    }
    acc += prod;
  }
  return acc;
}

double inner_product(const FactorModel& a, const FactorModel& b) {
  if (a.shape != b.shape) {
    throw std::invalid_argument("inner product: shape mismatch");
  }
  const int p = a.shape.order();
  double acc = 0.0;
  for (int i = 0; i < a.rank; ++i) {
    for (int j = 0; j < b.rank; ++j) {
      double prod = 1.0;
      for (int k = 0; k < p && prod != 0.0; ++k) {
        double dot = 0.0;
        const std::vector<double>& fa = a.factors[static_cast<size_t>(k)];
        const std::vector<double>& fb = b.factors[static_cast<size_t>(k)];
        for (int r = 0; r < a.shape.dim(k); ++r) {
          dot += fa[static_cast<size_t>(r * a.rank + i)] *
                 fb[static_cast<size_t>(r * b.rank + j)];
        }
        prod *= dot;
      }
      acc += prod;
    }
  }
  return acc;
}

double inner_product(const FactorModel& a, const AtomicModel& b) {
  if (a.shape != b.shape()) {
    throw std::invalid_argument("inner product: shape mismatch");
  }
  const int p = a.shape.order();
  double acc = 0.0;
  for (int i = 0; i < a.rank; ++i) {
    for (const WeightedVertex& term : b.terms()) {
      double prod = term.weight;
      for (int k = 0; k < p && prod != 0.0; ++k) {
        double dot = 0.0;
        const std::vector<double>& fa = a.factors[static_cast<size_t>(k)];
        for (int r = 0; r < a.shape.dim(k); ++r) {
          dot += fa[static_cast<size_t>(r * a.rank + i)] * term.vertex.sign(k, r);
        }
        prod *= dot;
      }
      acc += prod;
    }
  }
  return acc * b.lambda();
}

double nmse(const AtomicModel& estimate, const AtomicModel& truth) {
  if (estimate.shape() != truth.shape()) {
    throw std::invalid_argument("nmse: shape mismatch");
  }
  const double tt = inner_product(truth, truth);
  if (tt == 0.0) {
    throw std::invalid_argument("nmse: truth tensor is identically zero");
  }
  const double ee = inner_product(estimate, estimate);
  const double et = inner_product(estimate, truth);
  return (ee - 2.0 * et + tt) / tt;
}

double nmse(const FactorModel& estimate, const AtomicModel& truth) {
  if (estimate.shape != truth.shape()) {
    throw std::invalid_argument("nmse: shape mismatch");
  }
  const double tt = inner_product(truth, truth);
  if (tt == 0.0) {
    throw std::invalid_argument("nmse: truth tensor is identically zero");
  }
  const double ee = inner_product(estimate, estimate);
  const double et = inner_product(estimate, truth);
  return (ee - 2.0 * et + tt) / tt;
}

AtomicModel generate_truth(const Shape& shape, int terms, uint64_t seed) {
  if (terms < 1) {
    throw std::invalid_argument("generate truth: term count must be at least 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<WeightedVertex> chosen;
  std::vector<int8_t> flat(static_cast<size_t>(shape.sum_dims()));
  int attempts = 0;
  while (static_cast<int>(chosen.size()) < terms) {
    if (++attempts > 1000 * terms) {
      throw std::invalid_argument("generate truth: shape too small for distinct terms");
    }
    uint64_t bits = 0;
    int avail = 0;
    for (size_t i = 0; i < flat.size(); ++i) {
      if (avail == 0) {
        bits = rng();
        avail = 64;
      }
      flat[i] = (bits & 1) ? int8_t{-1} : int8_t{1};
      bits >>= 1;
      --avail;
    }
    SignVertex vertex = SignVertex(shape, flat).canonicalized();
    bool duplicate = false;
    for (const WeightedVertex& existing : chosen) {
      duplicate = duplicate || existing.vertex == vertex;
    }
    if (duplicate) continue;
    chosen.push_back(WeightedVertex{0.0, std::move(vertex)});
  }
  double total = 0.0;
  std::vector<double> draws(static_cast<size_t>(terms));
  for (double& d : draws) {
    d = exponential(rng);
    total += d;
  }
  for (int i = 0; i < terms; ++i) {
    chosen[static_cast<size_t>(i)].weight = draws[static_cast<size_t>(i)] / total;
  }
  return AtomicModel(shape, 1.0, std::move(chosen));
}

std::vector<SampleRow> draw_observations(const AtomicModel& truth, int64_t n,
                                         double noise_std, uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("observations: sample count must be at least 1");
  }
  const Shape& shape = truth.shape();
  std::mt19937_64 rng(seed);
  std::vector<SampleRow> rows;
  rows.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    SampleRow row;
    row.index.coords.resize(static_cast<size_t>(shape.order()));
    for (int k = 0; k < shape.order(); ++k) {
      row.index.coords[static_cast<size_t>(k)] =
          static_cast<int>(uniform_below(rng, static_cast<uint64_t>(shape.dim(k))));
    }
    row.value = truth.entry(row.index);
    if (noise_std > 0.0) {
      row.value += noise_std * normal(rng);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SampleSet sample_observations(const AtomicModel& truth, int64_t n, double noise_std,
                              uint64_t seed) {
  return SampleSet::ingest(truth.shape(), draw_observations(truth, n, noise_std, seed));
}

FactorModel als_baseline(const SampleSet& samples, const AlsConfig& config,
                         std::vector<double>* objective_trace) {
  if (config.rank < 1) {
    throw std::invalid_argument("als: rank must be at least 1");
  }
  if (!(config.l2_reg > 0.0)) {
    throw std::invalid_argument("als: l2 regularization must be positive");
  }
  const Shape& shape = samples.shape();
  const int p = shape.order();
  const int rank = config.rank;
  std::mt19937_64 rng(config.seed);

  FactorModel model{shape, rank, {}};
  model.factors.resize(static_cast<size_t>(p));
  const double init_scale = 1.0 / std::sqrt(static_cast<double>(rank));
  for (int k = 0; k < p; ++k) {
    std::vector<double>& f = model.factors[static_cast<size_t>(k)];
    f.resize(static_cast<size_t>(shape.dim(k) * rank));
    for (double& v : f) v = init_scale * normal(rng);
  }

  const std::vector<SampleRow>& rows = samples.rows();
  std::vector<double> krp(rows.size() * static_cast<size_t>(rank));

  auto penalized_objective = [&]() {
    double fit = 0.0;
    for (const SampleRow& row : rows) {
      const double dev = row.value - model.entry(row.index);
      fit += dev * dev;
    }
    double penalty = 0.0;
    for (const std::vector<double>& f : model.factors) {
      for (const double v : f) penalty += v * v;
    }
    return fit + config.l2_reg * penalty;
  };

  for (int cycle = 0; cycle < config.iterations; ++cycle) {
    for (int mode = 0; mode < p; ++mode) {
      // Row i's regressor: elementwise product of the other modes' factor
      // rows at the sampled coordinates.
      for (size_t i = 0; i < rows.size(); ++i) {
        double* k_row = &krp[i * static_cast<size_t>(rank)];
        for (int a = 0; a < rank; ++a) k_row[a] = 1.0;
        for (int k = 0; k < p; ++k) {
          if (k == mode) continue;
          const int coord = rows[i].index.coords[static_cast<size_t>(k)];
          const double* f =
              &model.factors[static_cast<size_t>(k)][static_cast<size_t>(coord * rank)];
          for (int a = 0; a < rank; ++a) k_row[a] *= f[a];
        }
      }
      // One ridge system per coordinate of this mode.
      for (int j = 0; j < shape.dim(mode); ++j) {
        std::vector<double> gram(static_cast<size_t>(rank * rank), 0.0);
        std::vector<double> rhs(static_cast<size_t>(rank), 0.0);
        for (int a = 0; a < rank; ++a) {
          gram[static_cast<size_t>(a * rank + a)] = config.l2_reg;
        }
        for (size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].index.coords[static_cast<size_t>(mode)] != j) continue;
          const double* k_row = &krp[i * static_cast<size_t>(rank)];
          for (int a = 0; a < rank; ++a) {
            for (int b = 0; b <= a; ++b) {
              gram[static_cast<size_t>(a * rank + b)] += k_row[a] * k_row[b];
            }
            rhs[static_cast<size_t>(a)] += rows[i].value * k_row[a];
          }
        }
        // Cholesky solve of the symmetric positive-definite system.
        for (int a = 0; a < rank; ++a) {
          for (int b = a; b < rank; ++b) {
            gram[static_cast<size_t>(a * rank + b)] = gram[static_cast<size_t>(b * rank + a)];
          }
        }
        std::vector<double> chol(gram);
        for (int a = 0; a < rank; ++a) {
          for (int b = 0; b <= a; ++b) {
            double sum = chol[static_cast<size_t>(a * rank + b)];
            for (int c = 0; c < b; ++c) {
              sum -= chol[static_cast<size_t>(a * rank + c)] *
                     chol[static_cast<size_t>(b * rank + c)];
            }
            if (a == b) {
              if (sum <= 0.0) {
                throw std::runtime_error("als: ridge system lost positive definiteness");
              }
              chol[static_cast<size_t>(a * rank + b)] = std::sqrt(sum);
            } else {
              chol[static_cast<size_t>(a * rank + b)] =
                  sum / chol[static_cast<size_t>(b * rank + b)];
            }
          }
        }
        std::vector<double> solution(rhs);
        for (int a = 0; a < rank; ++a) {
          double sum = solution[static_cast<size_t>(a)];
          for (int c = 0; c < a; ++c) {
            sum -= chol[static_cast<size_t>(a * rank + c)] * solution[static_cast<size_t>(c)];
          }
          solution[static_cast<size_t>(a)] = sum / chol[static_cast<size_t>(a * rank + a)];
        }
        for (int a = rank - 1; a >= 0; --a) {
          double sum = solution[static_cast<size_t>(a)];
          for (int c = a + 1; c < rank; ++c) {
            sum -= chol[static_cast<size_t>(c * rank + a)] * solution[static_cast<size_t>(c)];
          }
          solution[static_cast<size_t>(a)] = sum / chol[static_cast<size_t>(a * rank + a)];
        }
        double* target =
            &model.factors[static_cast<size_t>(mode)][static_cast<size_t>(j * rank)];
        for (int a = 0; a < rank; ++a) target[a] = solution[static_cast<size_t>(a)];
      }
    }
    if (objective_trace) objective_trace->push_back(penalized_objective());
  }
  return model;
}

uint64_t ExperimentSpec::trial_seed(int trial) const {
  if (!seeds.empty()) {
    if (trial < static_cast<int>(seeds.size())) {
      return seeds[static_cast<size_t>(trial)];
    }
    return mix64(seeds.back(), static_cast<uint64_t>(trial));
  }
  return mix64(seed, static_cast<uint64_t>(trial));
}

namespace {

AtomicModel constant_model(const Shape& shape, double value) {
  if (value == 0.0) return AtomicModel::zero(shape);
  std::vector<WeightedVertex> terms;
  SignVertex ones = SignVertex::all_plus(shape);
  terms.push_back(WeightedVertex{1.0, value > 0 ? ones : ones.negated()});
  return AtomicModel(shape, std::abs(value), std::move(terms));
}

TrialResult run_method(const ExperimentSpec& spec, const std::string& method, int trial,
                       uint64_t trial_seed, const AtomicModel& truth,
                       const SampleSet& samples) {
  TrialResult result;
  result.trial = trial;
  result.seed = trial_seed;
  result.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (method == "gauge") {
      SolverConfig config = spec.solver;
      config.seed = mix64(trial_seed, 3);
      const SolveResult solved = solve(samples, config);
      result.nmse = nmse(solved.model, truth);
      result.iterations = solved.diagnostics.iterations;
      result.oracle_calls = solved.diagnostics.oracle_calls;
      if (solved.diagnostics.status == SolveStatus::iteration_limit) {
        result.error = "not_converged";
      } else if (solved.diagnostics.status == SolveStatus::oracle_inconclusive) {
        result.error = "oracle_inconclusive";
      }
    } else if (method == "als") {
      AlsConfig config = spec.als;
      config.seed = mix64(trial_seed, 4);
      const FactorModel fitted = als_baseline(samples, config);
      result.nmse = nmse(fitted, truth);
      result.iterations = config.iterations;
    } else if (method == "naive") {
      double mean = 0.0;
      for (const SampleRow& row : samples.rows()) mean += row.value;
      mean /= static_cast<double>(samples.sample_count());
      result.nmse = nmse(constant_model(truth.shape(), mean), truth);
    } else {
      throw std::invalid_argument("unknown method '" + method + "'");
    }
  } catch (const std::exception& err) {
    result.error = err.what();
    result.nmse = std::numeric_limits<double>::quiet_NaN();
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace

std::vector<TrialResult> run_benchmark(const ExperimentSpec& spec) {
  if (spec.replicates < 1) {
    throw std::invalid_argument("benchmark: replicates must be at least 1");
  }
  std::vector<std::string> methods = spec.methods;
  if (std::find(methods.begin(), methods.end(), "naive") == methods.end()) {
    methods.push_back("naive");
  }

  const int total = spec.replicates;
  std::vector<std::vector<TrialResult>> per_trial(static_cast<size_t>(total));
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int trial = next.fetch_add(1);
      if (trial >= total) return;
      const uint64_t trial_seed = spec.trial_seed(trial);
      std::vector<TrialResult>& out = per_trial[static_cast<size_t>(trial)];
      try {
        const AtomicModel truth =
            generate_truth(spec.shape, spec.truth_terms, mix64(trial_seed, 1));
        const SampleSet samples =
            sample_observations(truth, spec.n, spec.noise_std, mix64(trial_seed, 2));
        for (const std::string& method : methods) {
          out.push_back(run_method(spec, method, trial, trial_seed, truth, samples));
        }
      } catch (const std::exception& err) {
        for (const std::string& method : methods) {
          TrialResult failed;
          failed.trial = trial;
          failed.seed = trial_seed;
          failed.method = method;
          failed.nmse = std::numeric_limits<double>::quiet_NaN();
          failed.error = err.what();
          out.push_back(failed);
        }
      }
    }
  };

  const int threads = std::max(1, std::min(spec.threads, total));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<TrialResult> results;
  for (const std::vector<TrialResult>& chunk : per_trial) {
    results.insert(results.end(), chunk.begin(), chunk.end());
  }
  return results;
}

std::vector<MethodAggregate> aggregate_results(const std::vector<TrialResult>& trials) {
  std::vector<std::string> methods;
  for (const TrialResult& t : trials) {
    if (std::find(methods.begin(), methods.end(), t.method) == methods.end()) {
      methods.push_back(t.method);
    }
  }
  std::vector<MethodAggregate> out;
  for (const std::string& method : methods) {
    MethodAggregate agg;
    agg.method = method;
    std::vector<double> values;
    double sum = 0.0;
    double time_sum = 0.0;
    for (const TrialResult& t : trials) {
      if (t.method != method || !t.error.empty()) continue;
      values.push_back(t.nmse);
      sum += t.nmse;
      time_sum += t.seconds;
    }
    agg.trials = static_cast<int>(values.size());
    if (!values.empty()) {
      agg.mean_nmse = sum / static_cast<double>(values.size());
      std::sort(values.begin(), values.end());
      const size_t mid = values.size() / 2;
      agg.median_nmse = values.size() % 2 == 1
                            ? values[mid]
                            : 0.5 * (values[mid - 1] + values[mid]);
      double ss = 0.0;
      for (const double v : values) ss += (v - agg.mean_nmse) * (v - agg.mean_nmse);
      agg.std_nmse = std::sqrt(ss / static_cast<double>(values.size()));
      agg.mean_seconds = time_sum / static_cast<double>(values.size());
    }
    out.push_back(std::move(agg));
  }
  return out;
}

std::string trials_to_csv(const std::vector<TrialResult>& trials) {
  std::ostringstream out;
  out << "trial,seed,method,nmse,seconds,iterations,oracle_calls,error\n";
  for (const TrialResult& t : trials) {
    out << t.trial << "," << t.seed << "," << t.method << ","
        << (std::isnan(t.nmse) ? "" : format_double(t.nmse)) << ","
        << format_double(t.seconds) << "," << t.iterations << "," << t.oracle_calls
        << "," << t.error << "\n";
  }
  return out.str();
}

std::string aggregates_to_csv(const std::vector<MethodAggregate>& aggregates) {
  std::ostringstream out;
  out << "method,trials,mean_nmse,median_nmse,std_nmse,mean_seconds\n";
  for (const MethodAggregate& a : aggregates) {
    out << a.method << "," << a.trials << "," << format_double(a.mean_nmse) << ","
        << format_double(a.median_nmse) << "," << format_double(a.std_nmse) << ","
        << format_double(a.mean_seconds) << "\n";
  }
  return out.str();
}

ExperimentSpec spec_from_json(const std::string& text) {
  nlohmann::json in;
  try {
    in = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw std::invalid_argument(std::string("benchmark spec: ") + err.what());
  }
  try {
    ExperimentSpec spec;
    spec.shape = Shape(in.at("shape").get<std::vector<int>>());
    spec.truth_terms = in.value("terms", spec.truth_terms);
    spec.n = in.value("n", spec.n);
    spec.noise_std = in.value("noise_std", spec.noise_std);
    spec.replicates = in.value("replicates", spec.replicates);
    spec.seed = in.value("seed", spec.seed);
    if (in.contains("seeds")) {
      spec.seeds = in.at("seeds").get<std::vector<uint64_t>>();
    }
    if (in.contains("methods")) {
      spec.methods = in.at("methods").get<std::vector<std::string>>();
    }
    spec.threads = in.value("threads", spec.threads);
    if (in.contains("solver")) {
      const nlohmann::json& js = in.at("solver");
      spec.solver.lambda = js.value("lambda", spec.solver.lambda);
      spec.solver.epsilon = js.value("epsilon", spec.solver.epsilon);
      spec.solver.accuracy_k = js.value("accuracy_k", spec.solver.accuracy_k);
      spec.solver.max_iterations = js.value("max_iterations", spec.solver.max_iterations);
      spec.solver.am_restarts = js.value("am_restarts", spec.solver.am_restarts);
      spec.solver.am_pass_cap = js.value("am_pass_cap", spec.solver.am_pass_cap);
      spec.solver.bnb_node_budget =
          js.value("bnb_node_budget", spec.solver.bnb_node_budget);
    }
    if (in.contains("als")) {
      const nlohmann::json& ja = in.at("als");
      spec.als.rank = ja.value("rank", spec.als.rank);
      spec.als.l2_reg = ja.value("l2_reg", spec.als.l2_reg);
      spec.als.iterations = ja.value("iterations", spec.als.iterations);
    }
    spec.solver.validate();
    return spec;
  } catch (const nlohmann::json::exception& err) {
    throw std::invalid_argument(std::string("benchmark spec: ") + err.what());
  }
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open benchmark spec '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return spec_from_json(buffer.str());
}

}  // namespace gaugetc
