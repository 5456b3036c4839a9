#include "gaugetc/separation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace gaugetc {

void SeparationRequest::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("separation: lambda must be positive");
  }
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw std::invalid_argument("separation: phi must be positive");
  }
  if (!(accuracy_k >= 1.0) || !std::isfinite(accuracy_k)) {
    throw std::invalid_argument("separation: accuracy must be at least 1");
  }
  if (c.size() != indices.size() || psi.size() != indices.size()) {
    throw std::invalid_argument("separation: c/psi not aligned with indices");
  }
  for (size_t i = 0; i < indices.size(); ++i) {
    shape.require_contains(indices[i]);
    if (!std::isfinite(c[i]) || !std::isfinite(psi[i])) {
      throw std::invalid_argument("separation: non-finite c or psi entry");
    }
  }
}

double separation_gap(const SeparationRequest& req, const SignVertex& v) {
  if (v.shape() != req.shape) {
    throw std::invalid_argument("separation gap: vertex shape mismatch");
  }
  const int p = req.shape.order();
  const std::vector<int8_t>& signs = v.flat_signs();
  double acc = 0.0;
  for (size_t i = 0; i < req.indices.size(); ++i) {
    int product = 1;
    const std::vector<int>& coords = req.indices[i].coords;
    for (int k = 0; k < p; ++k) {
      product *= signs[static_cast<size_t>(req.shape.mode_offset(k) +
                                           coords[static_cast<size_t>(k)])];
    }
    acc += req.c[i] * (req.psi[i] - req.lambda * product);
  }
  return acc;
}

namespace {

// Support terms (nonzero c) in a flat layout with per-(mode, coordinate)
// buckets of term ids.
struct Support {
  int p = 0;
  std::vector<double> coeff;
  std::vector<int32_t> coords;                     // term*p + mode
  std::vector<std::vector<std::vector<int32_t>>> buckets;  // [mode][coord]
  std::vector<std::vector<double>> bucket_mass;
  double total_mass = 0.0;
  double dot_c_psi = 0.0;  // over the full request order

  int64_t term_count() const { return static_cast<int64_t>(coeff.size()); }
};

Support build_support(const SeparationRequest& req) {
  Support sup;
  const Shape& shape = req.shape;
  sup.p = shape.order();
  sup.buckets.resize(static_cast<size_t>(sup.p));
  sup.bucket_mass.resize(static_cast<size_t>(sup.p));
  for (int k = 0; k < sup.p; ++k) {
    sup.buckets[static_cast<size_t>(k)].resize(static_cast<size_t>(shape.dim(k)));
    sup.bucket_mass[static_cast<size_t>(k)].assign(static_cast<size_t>(shape.dim(k)), 0.0);
  }
  for (size_t i = 0; i < req.indices.size(); ++i) {
    sup.dot_c_psi += req.c[i] * req.psi[i];
    if (req.c[i] == 0.0) continue;
    const int32_t t = static_cast<int32_t>(sup.coeff.size());
    sup.coeff.push_back(req.c[i]);
    for (int k = 0; k < sup.p; ++k) {
      const int coord = req.indices[i].coords[static_cast<size_t>(k)];
      sup.coords.push_back(coord);
      sup.buckets[static_cast<size_t>(k)][static_cast<size_t>(coord)].push_back(t);
      sup.bucket_mass[static_cast<size_t>(k)][static_cast<size_t>(coord)] +=
          std::abs(req.c[i]);
    }
    sup.total_mass += std::abs(req.c[i]);
  }
  return sup;
}

std::vector<int8_t> term_products(const Support& sup, const Shape& shape,
                                  const std::vector<int8_t>& signs) {
  std::vector<int8_t> prod(static_cast<size_t>(sup.term_count()), 1);
  for (int64_t t = 0; t < sup.term_count(); ++t) {
    int value = 1;
    for (int k = 0; k < sup.p; ++k) {
      value *= signs[static_cast<size_t>(
          shape.mode_offset(k) + sup.coords[static_cast<size_t>(t * sup.p + k)])];
    }
    prod[static_cast<size_t>(t)] = static_cast<int8_t>(value);
  }
  return prod;
}

void am_run(const SeparationRequest& req, const Support& sup,
            std::vector<int8_t>& signs, int pass_cap, AmTrace* trace) {
  const Shape& shape = req.shape;
  std::vector<int8_t> prod = term_products(sup, shape, signs);
  double s_value = 0.0;
  for (int64_t t = 0; t < sup.term_count(); ++t) {
    s_value += sup.coeff[static_cast<size_t>(t)] * prod[static_cast<size_t>(t)];
  }
  double gap = sup.dot_c_psi - req.lambda * s_value;
  for (int pass = 0; pass < pass_cap; ++pass) {
    bool flipped = false;
    for (int mode = 0; mode < sup.p; ++mode) {
      for (int coord = 0; coord < shape.dim(mode); ++coord) {
        const std::vector<int32_t>& bucket =
            sup.buckets[static_cast<size_t>(mode)][static_cast<size_t>(coord)];
        double delta = 0.0;
        for (const int32_t t : bucket) {
          delta += sup.coeff[static_cast<size_t>(t)] * prod[static_cast<size_t>(t)];
        }
        // Flipping this coordinate changes the gap by 2*lambda*delta.
        if (delta > 0.0) {
          const size_t pos = static_cast<size_t>(shape.mode_offset(mode) + coord);
          signs[pos] = static_cast<int8_t>(-signs[pos]);
          for (const int32_t t : bucket) {
            prod[static_cast<size_t>(t)] =
                static_cast<int8_t>(-prod[static_cast<size_t>(t)]);
          }
          gap += 2.0 * req.lambda * delta;
          flipped = true;
          if (trace) {
            trace->flips += 1;
            trace->gap_trajectory.push_back(gap);
          }
        }
      }
    }
    if (trace) trace->passes += 1;
    if (!flipped) break;
  }
}

}  // namespace

SignVertex alternating_max(const SeparationRequest& req, const SignVertex& start,
                           int pass_cap, AmTrace* trace) {
  req.validate();
  if (start.shape() != req.shape) {
    throw std::invalid_argument("alternating max: start vertex shape mismatch");
  }
  const Support sup = build_support(req);
  std::vector<int8_t> signs = start.flat_signs();
  am_run(req, sup, signs, pass_cap, trace);
  return SignVertex(req.shape, std::move(signs));
}

std::pair<SignVertex, double> best_heuristic(const SeparationRequest& req,
                                             const OracleOptions& options) {
  req.validate();
  const Support sup = build_support(req);
  const Shape& shape = req.shape;

  std::vector<std::vector<int8_t>> starts;
  if (options.incumbent != nullptr) {
    if (options.incumbent->shape() != shape) {
      throw std::invalid_argument("oracle: incumbent shape mismatch");
    }
    starts.push_back(options.incumbent->flat_signs());
  }
  std::mt19937_64 rng(options.seed);
  for (int r = 0; r < options.am_restarts; ++r) {
    std::vector<int8_t> signs(static_cast<size_t>(shape.sum_dims()));
    uint64_t bits = 0;
    int avail = 0;
    for (size_t i = 0; i < signs.size(); ++i) {
      if (avail == 0) {
        bits = rng();
        avail = 64;
      }
      signs[i] = (bits & 1) ? int8_t{-1} : int8_t{1};
      bits >>= 1;
      --avail;
    }
    starts.push_back(std::move(signs));
  }
  if (starts.empty()) {
    starts.push_back(SignVertex::all_plus(shape).flat_signs());
  }

  // Selection is by (gap, lexicographic vertex), so the outcome does not
  // depend on evaluation order.
  std::vector<SignVertex> results;
  results.reserve(starts.size());
  for (std::vector<int8_t>& signs : starts) {
    am_run(req, sup, signs, options.am_pass_cap, nullptr);
    results.push_back(SignVertex(shape, std::move(signs)).canonicalized());
  }
  int best = -1;
  double best_gap = 0.0;
  for (size_t i = 0; i < results.size(); ++i) {
    const double gap = separation_gap(req, results[i]);
    if (best < 0 || gap > best_gap ||
        (gap == best_gap && results[i].lex_less(results[static_cast<size_t>(best)]))) {
      best = static_cast<int>(i);
      best_gap = gap;
    }
  }
  return {results[static_cast<size_t>(best)], best_gap};
}

namespace {

struct BranchVar {
  int mode = 0;
  int coord = 0;
};

class BnbSearch {
 public:
  BnbSearch(const SeparationRequest& req, const Support& sup, double target,
            int64_t node_budget)
      : req_(req),
        sup_(sup),
        shape_(req.shape),
        target_(target),
        budget_(node_budget),
        signs_(static_cast<size_t>(req.shape.sum_dims()), 1),
        prod_(static_cast<size_t>(sup.term_count()), 1),
        best_(SignVertex::all_plus(req.shape)) {
    const int p = shape_.order();
    last_mode_ = p - 1;
    // Branch variables: modes before the last, skipping the canonically
    // fixed leading coordinate of modes after the first and coordinates no
    // supported term uses. Within a mode, heavier coordinates first.
    for (int mode = 0; mode + 1 < p; ++mode) {
      std::vector<BranchVar> vars;
      for (int coord = (mode == 0 ? 0 : 1); coord < shape_.dim(mode); ++coord) {
        if (sup_.bucket_mass[static_cast<size_t>(mode)][static_cast<size_t>(coord)] > 0.0) {
          vars.push_back(BranchVar{mode, coord});
        }
      }
      std::stable_sort(vars.begin(), vars.end(), [&](const BranchVar& a, const BranchVar& b) {
        return sup_.bucket_mass[static_cast<size_t>(a.mode)][static_cast<size_t>(a.coord)] >
               sup_.bucket_mass[static_cast<size_t>(b.mode)][static_cast<size_t>(b.coord)];
      });
      order_.insert(order_.end(), vars.begin(), vars.end());
    }
    for (int coord = (p >= 2 ? 1 : 0); coord < shape_.dim(last_mode_); ++coord) {
      if (sup_.bucket_mass[static_cast<size_t>(last_mode_)][static_cast<size_t>(coord)] > 0.0) {
        tail_free_.push_back(coord);
      }
    }
    trivial_bound_ = sup_.dot_c_psi + req_.lambda * sup_.total_mass;
    slack_ = 1e-9 * (std::abs(sup_.dot_c_psi) + req_.lambda * sup_.total_mass) + 1e-300;
  }

  void seed_incumbent(const SignVertex& vertex, double gap) {
    best_ = vertex;
    incumbent_ = gap;
    have_incumbent_ = true;
    if (incumbent_ >= target_) reached_ = true;
  }

  BnbResult run() {
    if (!reached_ && !sup_.coeff.empty()) {
      descend(0);
    } else if (sup_.coeff.empty()) {
      // No supported terms: every vertex has the same gap.
      const SignVertex flat = SignVertex::all_plus(shape_);
      const double gap = separation_gap(req_, flat);
      if (!have_incumbent_ || gap > incumbent_) {
        best_ = flat;
        incumbent_ = gap;
        have_incumbent_ = true;
      }
      if (incumbent_ >= target_) reached_ = true;
    }
    BnbResult result{best_, incumbent_,
                     /*dual_bound=*/0.0,
                     /*exhausted=*/!aborted_ && !reached_,
                     /*reached_target=*/reached_, nodes_};
    result.dual_bound = result.exhausted ? incumbent_ : trivial_bound_;
    return result;
  }

 private:
  // Returns false when the whole search must stop (target reached or budget
  // exhausted).
  bool descend(size_t depth) {
    if (++nodes_ > budget_) {
      aborted_ = true;
      return false;
    }
    // Above the tail mode no supported term is fully assigned, so the
    // interval bound is constant; it only prunes once the incumbent passes it.
    if (have_incumbent_ && trivial_bound_ <= incumbent_ - slack_) return true;
    if (depth == order_.size()) return evaluate_tail();
    const BranchVar var = order_[depth];
    const std::vector<int32_t>& bucket =
        sup_.buckets[static_cast<size_t>(var.mode)][static_cast<size_t>(var.coord)];
    const size_t pos = static_cast<size_t>(shape_.mode_offset(var.mode) + var.coord);
    for (const int8_t sign : {int8_t{1}, int8_t{-1}}) {
      signs_[pos] = sign;
      if (sign == -1) {
        for (const int32_t t : bucket) {
          prod_[static_cast<size_t>(t)] = static_cast<int8_t>(-prod_[static_cast<size_t>(t)]);
        }
      }
      const bool keep_going = descend(depth + 1);
      if (sign == -1) {
        for (const int32_t t : bucket) {
          prod_[static_cast<size_t>(t)] = static_cast<int8_t>(-prod_[static_cast<size_t>(t)]);
        }
      }
      if (!keep_going) {
        signs_[pos] = 1;
        return false;
      }
    }
    signs_[pos] = 1;
    return true;
  }

  double tail_sum(int coord) const {
    const std::vector<int32_t>& bucket =
        sup_.buckets[static_cast<size_t>(last_mode_)][static_cast<size_t>(coord)];
    double s = 0.0;
    for (const int32_t t : bucket) {
      s += sup_.coeff[static_cast<size_t>(t)] * prod_[static_cast<size_t>(t)];
    }
    return s;
  }

  // All modes before the last are assigned; the tail mode decouples into one
  // sign choice per coordinate. The minimizing choice is -sign of each
  // coordinate's partial sum, evaluated exactly; coordinates whose partial
  // sum is within float noise of zero fall back to explicit branching so an
  // exhausted search stays bitwise comparable with brute force.
  bool evaluate_tail() {
    const int r = shape_.dim(last_mode_);
    const int offset = shape_.mode_offset(last_mode_);
    std::vector<double> s(static_cast<size_t>(r), 0.0);
    double fixed = 0.0;
    double free_abs = 0.0;
    bool near_tie = false;
    if (shape_.order() >= 2) {
      fixed = tail_sum(0);
      s[0] = fixed;
    }
    for (const int coord : tail_free_) {
      const double sk = tail_sum(coord);
      s[static_cast<size_t>(coord)] = sk;
      free_abs += std::abs(sk);
      const double mass =
          sup_.bucket_mass[static_cast<size_t>(last_mode_)][static_cast<size_t>(coord)];
      if (std::abs(sk) <= 1e-12 * mass) near_tie = true;
    }
    const double est_gap = sup_.dot_c_psi - req_.lambda * (fixed - free_abs);
    if (have_incumbent_ && est_gap <= incumbent_ - slack_) return true;
    if (near_tie) return tail_descend(0, /*assigned=*/fixed, /*remaining=*/free_abs_mass());
    for (const int coord : tail_free_) {
      signs_[static_cast<size_t>(offset + coord)] =
          s[static_cast<size_t>(coord)] > 0.0 ? int8_t{-1} : int8_t{1};
    }
    const bool keep_going = consider_candidate();
    for (const int coord : tail_free_) {
      signs_[static_cast<size_t>(offset + coord)] = 1;
    }
    return keep_going;
  }

  double free_abs_mass() const {
    double mass = 0.0;
    for (const int coord : tail_free_) {
      mass += sup_.bucket_mass[static_cast<size_t>(last_mode_)][static_cast<size_t>(coord)];
    }
    return mass;
  }

  bool tail_descend(size_t idx, double assigned, double remaining) {
    if (++nodes_ > budget_) {
      aborted_ = true;
      return false;
    }
    const double bound = sup_.dot_c_psi - req_.lambda * (assigned - remaining);
    if (have_incumbent_ && bound <= incumbent_ - slack_) return true;
    if (idx == tail_free_.size()) return consider_candidate();
    const int coord = tail_free_[idx];
    const size_t pos = static_cast<size_t>(shape_.mode_offset(last_mode_) + coord);
    const double sk = tail_sum(coord);
    const double mass =
        sup_.bucket_mass[static_cast<size_t>(last_mode_)][static_cast<size_t>(coord)];
    for (const int8_t sign : {int8_t{1}, int8_t{-1}}) {
      signs_[pos] = sign;
      if (!tail_descend(idx + 1, assigned + sign * sk, remaining - mass)) {
        signs_[pos] = 1;
        return false;
      }
    }
    signs_[pos] = 1;
    return true;
  }

  bool consider_candidate() {
    const SignVertex candidate(shape_, signs_);
    const double gap = separation_gap(req_, candidate);
    if (!have_incumbent_ || gap > incumbent_) {
      best_ = candidate;
      incumbent_ = gap;
      have_incumbent_ = true;
      if (incumbent_ >= target_) {
        reached_ = true;
        return false;
      }
    }
    return true;
  }

  const SeparationRequest& req_;
  const Support& sup_;
  const Shape& shape_;
  double target_;
  int64_t budget_;
  std::vector<int8_t> signs_;
  std::vector<int8_t> prod_;
  SignVertex best_;
  std::vector<BranchVar> order_;
  std::vector<int> tail_free_;
  int last_mode_ = 0;
  double trivial_bound_ = 0.0;
  double slack_ = 0.0;
  double incumbent_ = 0.0;
  bool have_incumbent_ = false;
  bool reached_ = false;
  bool aborted_ = false;
  int64_t nodes_ = 0;
};

}  // namespace

BnbResult exact_branch_and_bound(const SeparationRequest& req, double target,
                                 int64_t node_budget, const SignVertex* warm_start) {
  req.validate();
  const Support sup = build_support(req);
  BnbSearch search(req, sup, target, node_budget);
  if (warm_start != nullptr) {
    const SignVertex warm = warm_start->canonicalized();
    search.seed_incumbent(warm, separation_gap(req, warm));
  } else {
    const SignVertex base = SignVertex::all_plus(req.shape);
    search.seed_incumbent(base, separation_gap(req, base));
  }
  return search.run();
}

SeparationResult weak_separation_oracle(const SeparationRequest& req,
                                        const OracleOptions& options,
                                        OracleStats* stats) {
  req.validate();
  if (stats) *stats = OracleStats{};

  bool has_support = false;
  for (const double v : req.c) {
    if (v != 0.0) {
      has_support = true;
      break;
    }
  }
  if (!has_support) {
    return NoSeparation{0.0};
  }

  const double target = req.phi / req.accuracy_k;
  auto [heuristic_vertex, heuristic_gap] = best_heuristic(req, options);
  if (heuristic_gap >= target) {
    return Separated{std::move(heuristic_vertex), heuristic_gap, /*via_search=*/false};
  }

  BnbResult search =
      exact_branch_and_bound(req, target, options.node_budget, &heuristic_vertex);
  if (stats) {
    stats->ran_search = true;
    stats->search_nodes = search.nodes;
  }
  if (search.reached_target) {
    return Separated{std::move(search.best), search.incumbent_gap, /*via_search=*/true};
  }
  if (search.exhausted) {
    // Exact optimum below phi/K, hence below phi: a valid certificate.
    return NoSeparation{search.incumbent_gap};
  }
  std::ostringstream msg;
  msg << "weak separation inconclusive: node budget " << options.node_budget
      << " exhausted with incumbent " << search.incumbent_gap << " below target "
      << target;
  throw OracleInconclusive(msg.str());
}

}  // namespace gaugetc
