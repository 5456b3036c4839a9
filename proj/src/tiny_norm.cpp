#include "gaugetc/tiny_norm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gaugetc {

std::vector<SignVertex> enumerate_canonical_vertices(const Shape& shape,
                                                     int max_free_bits) {
  // Free positions: all of mode 1, coordinates 1.. of every later mode.
  std::vector<int> free_pos;
  for (int j = 0; j < shape.dim(0); ++j) free_pos.push_back(j);
  for (int k = 1; k < shape.order(); ++k) {
    for (int j = 1; j < shape.dim(k); ++j) {
      free_pos.push_back(shape.mode_offset(k) + j);
    }
  }
  const int bits = static_cast<int>(free_pos.size());
  if (bits > max_free_bits) {
    std::ostringstream msg;
    msg << "canonical enumeration: " << bits << " free sign bits exceeds limit "
        << max_free_bits;
    throw std::invalid_argument(msg.str());
  }
  std::vector<SignVertex> vertices;
  vertices.reserve(size_t{1} << bits);
  std::vector<int8_t> flat(static_cast<size_t>(shape.sum_dims()), 1);
  for (uint64_t ctr = 0; ctr < (uint64_t{1} << bits); ++ctr) {
    for (int b = 0; b < bits; ++b) {
      flat[static_cast<size_t>(free_pos[static_cast<size_t>(b)])] =
          (ctr >> b) & 1 ? int8_t{-1} : int8_t{1};
    }
    vertices.emplace_back(shape, flat);
  }
  return vertices;
}

namespace {

constexpr double kPivotTol = 1e-9;

// Dense two-phase simplex for  min c^T a  s.t.  M a = b, a >= 0.
// Dantzig pricing with a permanent switch to Bland's rule after a stall, so
// the search terminates on degenerate bases.
class DenseSimplex {
 public:
  DenseSimplex(std::vector<std::vector<double>> columns, std::vector<double> rhs)
      : m_(static_cast<int>(rhs.size())),
        n_(static_cast<int>(columns.size())),
        rhs_(std::move(rhs)) {
    // Rows are oriented so the right-hand side is nonnegative.
    std::vector<double> row_sign(static_cast<size_t>(m_), 1.0);
    for (int i = 0; i < m_; ++i) {
      if (rhs_[static_cast<size_t>(i)] < 0) {
        row_sign[static_cast<size_t>(i)] = -1.0;
        rhs_[static_cast<size_t>(i)] = -rhs_[static_cast<size_t>(i)];
      }
    }
    const int total = n_ + m_;
    tab_.assign(static_cast<size_t>(m_), std::vector<double>(static_cast<size_t>(total), 0.0));
    for (int j = 0; j < n_; ++j) {
      const std::vector<double>& col = columns[static_cast<size_t>(j)];
      for (int i = 0; i < m_; ++i) {
        tab_[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            row_sign[static_cast<size_t>(i)] * col[static_cast<size_t>(i)];
      }
    }
    for (int i = 0; i < m_; ++i) {
      tab_[static_cast<size_t>(i)][static_cast<size_t>(n_ + i)] = 1.0;
    }
    basis_.resize(static_cast<size_t>(m_));
    for (int i = 0; i < m_; ++i) basis_[static_cast<size_t>(i)] = n_ + i;
  }

  /// Runs both phases; returns the phase-2 optimum of min sum(a).
  double minimize_weight_sum() {
    std::vector<double> phase1(static_cast<size_t>(n_ + m_), 0.0);
    for (int j = n_; j < n_ + m_; ++j) phase1[static_cast<size_t>(j)] = 1.0;
    run_phase(phase1, /*allow_artificial=*/true);
    if (objective(phase1) > 1e-7) {
      throw std::logic_error("tiny norm: vertex system reported infeasible");
    }
    evict_artificials();
    std::vector<double> phase2(static_cast<size_t>(n_ + m_), 0.0);
    for (int j = 0; j < n_; ++j) phase2[static_cast<size_t>(j)] = 1.0;
    run_phase(phase2, /*allow_artificial=*/false);
    return objective(phase2);
  }

 private:
  double objective(const std::vector<double>& cost) const {
    double z = 0.0;
    for (int i = 0; i < m_; ++i) {
      z += cost[static_cast<size_t>(basis_[static_cast<size_t>(i)])] *
           rhs_[static_cast<size_t>(i)];
    }
    return z;
  }

  void run_phase(const std::vector<double>& cost, bool allow_artificial) {
    const int total = n_ + m_;
    std::vector<double> red(static_cast<size_t>(total), 0.0);
    auto recompute_reduced = [&]() {
      for (int j = 0; j < total; ++j) {
        double priced = 0.0;
        for (int i = 0; i < m_; ++i) {
          priced += cost[static_cast<size_t>(basis_[static_cast<size_t>(i)])] *
                    tab_[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
        red[static_cast<size_t>(j)] = cost[static_cast<size_t>(j)] - priced;
      }
    };
    recompute_reduced();
    int stall = 0;
    bool bland = false;
    double last_z = objective(cost);
    while (true) {
      int enter = -1;
      double best = -kPivotTol;
      const int limit = allow_artificial ? total : n_;
      for (int j = 0; j < limit; ++j) {
        const double r = red[static_cast<size_t>(j)];
        if (r < -kPivotTol) {
          if (bland) {
            enter = j;
            break;
          }
          if (r < best) {
            best = r;
            enter = j;
          }
        }
      }
      if (enter < 0) return;
      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = tab_[static_cast<size_t>(i)][static_cast<size_t>(enter)];
        if (a > kPivotTol) {
          const double ratio = rhs_[static_cast<size_t>(i)] / a;
          if (leave < 0 || ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 &&
               basis_[static_cast<size_t>(i)] < basis_[static_cast<size_t>(leave)])) {
            leave = i;
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) {
        throw std::logic_error("tiny norm: unbounded phase (bad column data)");
      }
      pivot(leave, enter, red);
      const double z = objective(cost);
      if (z > last_z - 1e-13) {
        if (++stall > 200) bland = true;
      } else {
        stall = 0;
      }
      last_z = z;
    }
  }

  void pivot(int leave, int enter, std::vector<double>& red) {
    const int total = n_ + m_;
    std::vector<double>& prow = tab_[static_cast<size_t>(leave)];
    const double pval = prow[static_cast<size_t>(enter)];
    for (int j = 0; j < total; ++j) prow[static_cast<size_t>(j)] /= pval;
    rhs_[static_cast<size_t>(leave)] /= pval;
    for (int i = 0; i < m_; ++i) {
      if (i == leave) continue;
      std::vector<double>& row = tab_[static_cast<size_t>(i)];
      const double f = row[static_cast<size_t>(enter)];
      if (f == 0.0) continue;
      for (int j = 0; j < total; ++j) row[static_cast<size_t>(j)] -= f * prow[static_cast<size_t>(j)];
      rhs_[static_cast<size_t>(i)] -= f * rhs_[static_cast<size_t>(leave)];
      if (rhs_[static_cast<size_t>(i)] < 0 && rhs_[static_cast<size_t>(i)] > -1e-12) {
        rhs_[static_cast<size_t>(i)] = 0.0;
      }
    }
    const double rf = red[static_cast<size_t>(enter)];
    if (rf != 0.0) {
      for (int j = 0; j < total; ++j) red[static_cast<size_t>(j)] -= rf * prow[static_cast<size_t>(j)];
    }
    basis_[static_cast<size_t>(leave)] = enter;
  }

  // Pivots zero-valued artificial variables out of the basis where a
  // structural column is available; remaining artificial rows are redundant
  // equations and are pinned to zero.
  void evict_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[static_cast<size_t>(i)] < n_) continue;
      int enter = -1;
      for (int j = 0; j < n_; ++j) {
        if (std::abs(tab_[static_cast<size_t>(i)][static_cast<size_t>(j)]) > kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter >= 0) {
        std::vector<double> dummy(static_cast<size_t>(n_ + m_), 0.0);
        pivot(i, enter, dummy);
      }
    }
  }

  int m_;
  int n_;
  std::vector<double> rhs_;
  std::vector<std::vector<double>> tab_;
  std::vector<int> basis_;
};

}  // namespace

double tiny_norm_oracle(std::span<const double> dense, const Shape& shape) {
  if (shape.sum_dims() > 16) {
    std::ostringstream msg;
    msg << "tiny norm: shape " << shape.to_string() << " has sign length "
        << shape.sum_dims() << ", above the enumeration guard of 16";
    throw std::invalid_argument(msg.str());
  }
  if (static_cast<int64_t>(dense.size()) != shape.entry_count()) {
    throw std::invalid_argument("tiny norm: dense array size does not match shape");
  }

  // Normalize the leading sign so mirrored inputs solve the identical
  // program; the gauge is symmetric, so the optimum is unchanged.
  std::vector<double> target(dense.begin(), dense.end());
  bool all_zero = true;
  for (const double v : target) {
    if (v != 0.0) {
      if (v < 0.0) {
        for (double& t : target) t = -t;
      }
      all_zero = false;
      break;
    }
  }
  if (all_zero) return 0.0;

  const std::vector<SignVertex> vertices = enumerate_canonical_vertices(shape);
  std::vector<std::vector<double>> columns;
  columns.reserve(vertices.size());
  const int64_t pi = shape.entry_count();
  for (const SignVertex& v : vertices) {
    std::vector<double> col(static_cast<size_t>(pi));
    for (int64_t flat = 0; flat < pi; ++flat) {
      col[static_cast<size_t>(flat)] =
          static_cast<double>(v.entry(shape.index_from_flat(flat)));
    }
    columns.push_back(std::move(col));
  }
  DenseSimplex lp(std::move(columns), std::move(target));
  return lp.minimize_weight_sum();
}

}  // namespace gaugetc
