#include "gaugetc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "gaugetc/numfmt.hpp"

namespace gaugetc {

namespace {

constexpr double kWeightFloor = 1e-14;

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("solver: lambda must be positive");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("solver: epsilon must be positive");
  }
  if (!(accuracy_k >= 1.0) || !std::isfinite(accuracy_k)) {
    throw std::invalid_argument("solver: accuracy must be at least 1");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("solver: max_iterations must be positive");
  }
}

double ActiveSet::weight_sum() const {
  double sum = 0.0;
  for (const Entry& entry : entries_) sum += entry.weight;
  return sum;
}

void ActiveSet::add(const SignVertex& vertex, double weight) {
  SignVertex canonical = vertex.canonicalized();
  for (Entry& entry : entries_) {
    if (entry.vertex == canonical) {
      entry.weight += weight;
      return;
    }
  }
  Entry entry{std::move(canonical), {}, weight};
  entry.projection = entry.vertex.project(samples_->unique_indices());
  entries_.push_back(std::move(entry));
}

void ActiveSet::scale_weights(double factor) {
  for (Entry& entry : entries_) entry.weight *= factor;
}

double ActiveSet::drop_below(double floor, std::vector<double>& psi, double lambda) {
  double dropped = 0.0;
  for (size_t i = entries_.size(); i > 0; --i) {
    Entry& entry = entries_[i - 1];
    if (entry.weight <= floor) {
      if (entry.weight != 0.0) {
        for (size_t j = 0; j < psi.size(); ++j) {
          psi[j] -= lambda * entry.weight * entry.projection[j];
        }
        dropped += entry.weight;
      }
      entries_.erase(entries_.begin() + static_cast<ptrdiff_t>(i - 1));
    }
  }
  return dropped;
}

void ActiveSet::validate(std::span<const double> psi, double lambda) const {
  double sum = 0.0;
  for (const Entry& entry : entries_) {
    if (!(entry.weight >= 0.0)) {
      throw std::logic_error("active set: negative weight");
    }
    if (!entry.vertex.is_canonical()) {
      throw std::logic_error("active set: non-canonical vertex");
    }
    if (entry.projection != entry.vertex.project(samples_->unique_indices())) {
      throw std::logic_error("active set: stale cached projection");
    }
    sum += entry.weight;
  }
  if (sum > 1.0 + 1e-9) {
    throw std::logic_error("active set: weights sum above 1");
  }
  for (size_t j = 0; j < psi.size(); ++j) {
    double acc = 0.0;
    for (const Entry& entry : entries_) {
      acc += entry.weight * entry.projection[j];
    }
    acc *= lambda;
    const double scale = std::max(1.0, std::abs(psi[j]));
    if (std::abs(acc - psi[j]) > 1e-9 * scale) {
      throw std::logic_error("active set: iterate inconsistent with weights");
    }
  }
}

double objective_value(std::span<const double> psi, const SampleSet& samples) {
  const std::vector<int64_t>& mult = samples.multiplicities();
  const std::vector<double>& mean = samples.means();
  double fit = 0.0;
  for (size_t i = 0; i < mean.size(); ++i) {
    const double dev = psi[i] - mean[i];
    fit += static_cast<double>(mult[i]) * dev * dev;
  }
  return (fit + samples.within_group_sse()) / static_cast<double>(samples.sample_count());
}

std::vector<double> gradient(std::span<const double> psi, const SampleSet& samples) {
  const std::vector<int64_t>& mult = samples.multiplicities();
  const std::vector<double>& mean = samples.means();
  std::vector<double> grad(mean.size());
  const double scale = 2.0 / static_cast<double>(samples.sample_count());
  for (size_t i = 0; i < mean.size(); ++i) {
    grad[i] = scale * static_cast<double>(mult[i]) * (psi[i] - mean[i]);
  }
  return grad;
}

double line_search(std::span<const double> psi, std::span<const double> direction,
                   const SampleSet& samples) {
  const std::vector<int64_t>& mult = samples.multiplicities();
  const std::vector<double>& mean = samples.means();
  double numer = 0.0;
  double denom = 0.0;
  for (size_t i = 0; i < mean.size(); ++i) {
    const double m = static_cast<double>(mult[i]);
    numer += m * (psi[i] - mean[i]) * direction[i];
    denom += m * direction[i] * direction[i];
  }
  if (denom == 0.0) {
    throw std::invalid_argument("line search: zero direction over the observed indices");
  }
  const double t = -numer / denom;
  return std::clamp(t, 0.0, 1.0);
}

namespace {

// Toward/away pair under the current gradient, ties broken toward the
// lexicographically smaller vertex.
struct Pair {
  int toward = -1;
  int away = -1;
  double toward_dot = 0.0;
  double away_dot = 0.0;
};

Pair pick_pair(const ActiveSet& active, std::span<const double> grad, double lambda) {
  Pair out;
  const std::vector<ActiveSet::Entry>& entries = active.entries();
  for (size_t v = 0; v < entries.size(); ++v) {
    double dot = 0.0;
    const std::vector<int8_t>& proj = entries[v].projection;
    for (size_t j = 0; j < proj.size(); ++j) dot += grad[j] * proj[j];
    dot *= lambda;
    if (out.toward < 0 || dot < out.toward_dot ||
        (dot == out.toward_dot &&
         entries[v].vertex.lex_less(entries[static_cast<size_t>(out.toward)].vertex))) {
      out.toward = static_cast<int>(v);
      out.toward_dot = dot;
    }
    if (out.away < 0 || dot > out.away_dot ||
        (dot == out.away_dot &&
         entries[v].vertex.lex_less(entries[static_cast<size_t>(out.away)].vertex))) {
      out.away = static_cast<int>(v);
      out.away_dot = dot;
    }
  }
  return out;
}

}  // namespace

double local_gap(const ActiveSet& active, std::span<const double> grad, double lambda) {
  if (active.size() < 2) return 0.0;
  const Pair pair = pick_pair(active, grad, lambda);
  return pair.away_dot - pair.toward_dot;
}

LocalStepResult local_step(ActiveSet& active, std::vector<double>& psi,
                           std::span<const double> grad, const SampleSet& samples,
                           double lambda) {
  if (active.size() < 2) return {};
  const Pair pair = pick_pair(active, grad, lambda);
  if (pair.toward == pair.away) return {};
  const ActiveSet::Entry& toward = active.entries()[static_cast<size_t>(pair.toward)];
  const ActiveSet::Entry& away = active.entries()[static_cast<size_t>(pair.away)];
  std::vector<double> direction(psi.size());
  bool nonzero = false;
  for (size_t j = 0; j < psi.size(); ++j) {
    direction[j] = lambda * (toward.projection[j] - away.projection[j]);
    nonzero = nonzero || direction[j] != 0.0;
  }
  if (!nonzero) return {};
  const double t_line = line_search(psi, direction, samples);
  const double t = std::min(t_line, away.weight);
  if (t <= 0.0) return {};
  for (size_t j = 0; j < psi.size(); ++j) psi[j] += t * direction[j];
  active.set_weight(static_cast<size_t>(pair.toward), toward.weight + t);
  active.set_weight(static_cast<size_t>(pair.away), away.weight - t);
  active.drop_below(kWeightFloor, psi, lambda);
  return {true, t};
}

std::string trace_to_jsonl(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  for (const TraceRow& row : trace) {
    out << "{\"iteration\":" << row.iteration << ",\"phase\":\"" << row.phase
        << "\",\"objective\":" << format_double(row.objective)
        << ",\"phi\":" << format_double(row.phi)
        << ",\"active_size\":" << row.active_size
        << ",\"oracle_seconds\":" << format_double(row.oracle_seconds) << "}\n";
  }
  return out.str();
}

SolveResult solve(const SampleSet& samples, const SolverConfig& config) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const Shape& shape = samples.shape();
  const size_t u_count = static_cast<size_t>(samples.unique_count());

  Diagnostics diag;
  std::vector<double> psi(u_count, 0.0);
  ActiveSet active(samples);

  auto make_request = [&](const std::vector<double>& grad, double phi) {
    SeparationRequest req;
    req.shape = shape;
    req.lambda = config.lambda;
    req.indices = samples.unique_indices();
    req.c = grad;
    req.psi = psi;
    req.phi = phi;
    req.accuracy_k = config.accuracy_k;
    return req;
  };
  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };

  // Initialization: one exact separation at psi = 0 supplies the first
  // vertex and the starting gap estimate. If the search cannot finish inside
  // the node budget, fall back to its interval bound, which is still a valid
  // gap estimate.
  double phi = 0.0;
  {
    std::vector<double> grad0 = gradient(psi, samples);
    SeparationRequest req = make_request(grad0, 1.0);
    OracleOptions opts;
    opts.am_restarts = config.am_restarts;
    opts.am_pass_cap = config.am_pass_cap;
    opts.node_budget = config.bnb_node_budget;
    opts.seed = mix_seed(config.seed, 0);
    bool has_support = false;
    for (const double v : grad0) has_support = has_support || v != 0.0;
    SignVertex v0 = SignVertex::all_plus(shape);
    double initial_gap = 0.0;
    if (has_support) {
      auto [heur, heur_gap] = best_heuristic(req, opts);
      const double t_oracle = elapsed();
      BnbResult search = exact_branch_and_bound(
          req, std::numeric_limits<double>::infinity(), opts.node_budget, &heur);
      diag.oracle_calls += 1;
      diag.search_nodes += search.nodes;
      diag.trace.push_back(TraceRow{0, "global", objective_value(psi, samples), 0.0,
                                    0, elapsed() - t_oracle});
      if (search.exhausted) {
        v0 = search.best;
        initial_gap = search.incumbent_gap;
      } else {
        v0 = search.best;
        initial_gap = search.dual_bound;
        diag.initial_call_exact = false;
      }
    } else {
      diag.trace.push_back(TraceRow{0, "global", objective_value(psi, samples), 0.0,
                                    0, 0.0});
    }
    phi = std::max(initial_gap, config.epsilon) / 2.0;
    diag.trace.back().phi = phi;

    const std::vector<int8_t> proj = v0.canonicalized().project(samples.unique_indices());
    std::vector<double> direction(u_count);
    for (size_t j = 0; j < u_count; ++j) direction[j] = config.lambda * proj[j];
    const double t0 = line_search(psi, direction, samples);
    if (t0 > 0.0) {
      for (size_t j = 0; j < u_count; ++j) psi[j] += t0 * direction[j];
      active.add(v0, t0);
      active.drop_below(kWeightFloor, psi, config.lambda);
    }
    diag.trace.back().objective = objective_value(psi, samples);
    diag.trace.back().active_size = static_cast<int>(active.size());
  }

  SolveStatus status = SolveStatus::iteration_limit;
  int64_t iteration = 0;
  while (true) {
    if (phi <= config.phi_floor()) {
      status = SolveStatus::converged;
      break;
    }
    if (iteration >= config.max_iterations) {
      status = SolveStatus::iteration_limit;
      break;
    }
    ++iteration;

    const std::vector<double> grad = gradient(psi, samples);
    TraceRow row;
    row.iteration = iteration;
    row.phi = phi;

    const double lg = local_gap(active, grad, config.lambda);
    if (active.size() >= 2 && lg >= phi) {
      local_step(active, psi, grad, samples, config.lambda);
      row.phase = "local";
    } else {
      SeparationRequest req = make_request(grad, phi);
      OracleOptions opts;
      opts.am_restarts = config.am_restarts;
      opts.am_pass_cap = config.am_pass_cap;
      opts.node_budget = config.bnb_node_budget;
      opts.seed = mix_seed(config.seed, static_cast<uint64_t>(diag.oracle_calls) + 1);
      const Pair pair = pick_pair(active, grad, config.lambda);
      if (pair.toward >= 0) {
        opts.incumbent = &active.entries()[static_cast<size_t>(pair.toward)].vertex;
      }
      OracleStats stats;
      const double t_oracle = elapsed();
      std::optional<SeparationResult> result;
      try {
        result = weak_separation_oracle(req, opts, &stats);
      } catch (const OracleInconclusive&) {
        status = SolveStatus::oracle_inconclusive;
        row.phase = "global";
        row.objective = objective_value(psi, samples);
        row.active_size = static_cast<int>(active.size());
        row.oracle_seconds = elapsed() - t_oracle;
        diag.oracle_calls += 1;
        diag.search_nodes += stats.search_nodes;
        diag.trace.push_back(std::move(row));
        break;
      }
      row.oracle_seconds = elapsed() - t_oracle;
      diag.oracle_calls += 1;
      diag.search_nodes += stats.search_nodes;

      if (const Separated* sep = std::get_if<Separated>(&*result)) {
        if (sep->via_search) {
          diag.search_separations += 1;
        } else {
          diag.heuristic_separations += 1;
        }
        const SignVertex vertex = sep->vertex.canonicalized();
        const std::vector<int8_t> proj = vertex.project(samples.unique_indices());
        std::vector<double> direction(u_count);
        for (size_t j = 0; j < u_count; ++j) {
          direction[j] = config.lambda * proj[j] - psi[j];
        }
        const double t = line_search(psi, direction, samples);
        for (size_t j = 0; j < u_count; ++j) psi[j] += t * direction[j];
        active.scale_weights(1.0 - t);
        active.add(vertex, t);
        active.drop_below(kWeightFloor, psi, config.lambda);
        row.phase = "global";
      } else {
        const double bound = std::get<NoSeparation>(*result).certified_bound;
        diag.no_separation_events += 1;
        // The exhausted search certifies the exact gap, so the estimate can
        // jump straight to it instead of only halving.
        phi = std::max(std::min(bound, phi / 2.0), config.phi_floor());
        row.phase = "halve";
        row.phi = phi;
      }
    }

    // Keep the cached combination consistent with the incrementally updated
    // iterate; drift shows up after many thousands of float steps.
    if (iteration % 256 == 0) {
      std::fill(psi.begin(), psi.end(), 0.0);
      for (const ActiveSet::Entry& entry : active.entries()) {
        for (size_t j = 0; j < u_count; ++j) {
          psi[j] += config.lambda * entry.weight * entry.projection[j];
        }
      }
    }
    const double wsum = active.weight_sum();
    if (wsum > 1.0) {
      const double factor = 1.0 / wsum;
      active.scale_weights(factor);
      for (size_t j = 0; j < u_count; ++j) psi[j] *= factor;
    }
    if (config.validate_invariants) {
      active.validate(psi, config.lambda);
    }

    row.objective = objective_value(psi, samples);
    row.active_size = static_cast<int>(active.size());
    diag.trace.push_back(std::move(row));
  }

  std::vector<WeightedVertex> terms;
  terms.reserve(active.size());
  for (const ActiveSet::Entry& entry : active.entries()) {
    terms.push_back(WeightedVertex{entry.weight, entry.vertex});
  }
  diag.status = status;
  diag.iterations = iteration;
  diag.final_phi = phi;
  diag.final_objective = objective_value(psi, samples);
  diag.certified_gap_bound = 2.0 * phi;
  diag.seconds = elapsed();
  return SolveResult{AtomicModel(shape, config.lambda, std::move(terms)),
                     std::move(diag)};
}

}  // namespace gaugetc
