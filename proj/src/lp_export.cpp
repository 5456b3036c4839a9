#include "gaugetc/lp_export.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gaugetc/numfmt.hpp"

namespace gaugetc {

std::pair<double, double> chain_link_interval(double theta, double y_next) {
  const double lo = std::max(-theta - y_next - 1.0, theta + y_next - 1.0);
  const double hi = std::min(theta - y_next + 1.0, -theta + y_next + 1.0);
  return {lo, hi};
}

namespace {

std::string y_name(int64_t flat_one_based, int k_one_based) {
  std::ostringstream out;
  out << "y_" << flat_one_based << "_" << k_one_based;
  return out.str();
}

std::string s_name(int mode_one_based, int coord_one_based) {
  std::ostringstream out;
  out << "s_" << mode_one_based << "_" << coord_one_based;
  return out.str();
}

}  // namespace

void export_milp(const SeparationRequest& req, std::ostream& out) {
  req.validate();
  const Shape& shape = req.shape;
  const int p = shape.order();

  // Support in ascending flat order; duplicate indices are not meaningful
  // in one separation problem.
  std::map<int64_t, std::pair<double, double>> support;  // flat -> (c, psi)
  double constant = 0.0;
  for (size_t i = 0; i < req.indices.size(); ++i) {
    if (req.c[i] == 0.0) continue;
    const int64_t flat = shape.flat_index(req.indices[i]);
    if (!support.emplace(flat, std::make_pair(req.c[i], req.psi[i])).second) {
      throw std::invalid_argument("lp export: duplicate support index");
    }
    constant += req.c[i] * req.psi[i];
  }

  std::set<std::pair<int, int>> sign_vars;  // (mode, coord), zero-based
  for (const auto& [flat, entry] : support) {
    const EntryIndex x = shape.index_from_flat(flat);
    for (int k = 0; k < p; ++k) {
      sign_vars.insert({k, x.coords[static_cast<size_t>(k)]});
    }
  }

  out << "\\ weak separation over the scaled sign-vertex polytope\n";
  out << "\\ shape " << shape.to_string() << ", lambda " << format_double(req.lambda)
      << ", support " << support.size() << "\n";
  out << "\\ objective includes the constant <c,psi> = " << format_double(constant)
      << "\n";
  out << "Maximize\n obj:";
  int per_line = 0;
  for (const auto& [flat, entry] : support) {
    const double coeff = -req.lambda * entry.first;
    if (per_line == 8) {
      out << "\n     ";
      per_line = 0;
    }
    out << (coeff < 0 ? " - " : " + ") << format_double(std::abs(coeff)) << " "
        << y_name(flat + 1, 1);
    ++per_line;
  }
  out << (constant < 0 ? " - " : " + ") << format_double(std::abs(constant)) << "\n";

  out << "Subject To\n";
  for (const auto& [flat, entry] : support) {
    const EntryIndex x = shape.index_from_flat(flat);
    const int64_t f1 = flat + 1;
    for (int k = 0; k + 1 < p; ++k) {
      const std::string y = y_name(f1, k + 1);
      const std::string ynext = y_name(f1, k + 2);
      const std::string s = s_name(k + 1, x.coords[static_cast<size_t>(k)] + 1);
      out << " c" << f1 << "_" << k + 1 << "a: " << y << " + " << ynext << " + 2 " << s
          << " >= 0\n";
      out << " c" << f1 << "_" << k + 1 << "b: " << y << " - " << ynext << " - 2 " << s
          << " >= -2\n";
      out << " c" << f1 << "_" << k + 1 << "c: " << y << " + " << ynext << " - 2 " << s
          << " <= 0\n";
      out << " c" << f1 << "_" << k + 1 << "d: " << y << " - " << ynext << " + 2 " << s
          << " <= 2\n";
    }
    out << " c" << f1 << "_tail: " << y_name(f1, p) << " - 2 "
        << s_name(p, x.coords[static_cast<size_t>(p - 1)] + 1) << " = -1\n";
  }

  out << "Bounds\n";
  for (const auto& [flat, entry] : support) {
    for (int k = 1; k <= p; ++k) {
      out << " -1 <= " << y_name(flat + 1, k) << " <= 1\n";
    }
  }

  out << "Binary\n";
  for (const auto& [mode, coord] : sign_vars) {
    out << " " << s_name(mode + 1, coord + 1) << "\n";
  }
  out << "End\n";
}

void export_milp_file(const SeparationRequest& req, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write lp file '" + path + "'");
  }
  export_milp(req, out);
  if (!out.flush()) {
    throw std::runtime_error("write failed for lp file '" + path + "'");
  }
}

}  // namespace gaugetc
