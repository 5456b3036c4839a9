#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "gaugetc/separation.hpp"

namespace gaugetc {

/// Feasible interval for one chain link given the two neighbouring values in
/// {-1,+1}: the intersection of the four linearization inequalities
///   y >= -theta - y_next - 1,  y >= theta + y_next - 1,
///   y <=  theta - y_next + 1,  y <= -theta + y_next + 1,
/// which pins y to the product theta * y_next.
std::pair<double, double> chain_link_interval(double theta, double y_next);

/// Writes the separation problem as a 0-1 integer program in LP text format:
/// maximize <c, psi> - lambda * sum_x c_x * y_x1 with y chains linking the
/// per-mode sign variables theta = 2*s - 1. Variables are named s_<k>_<j>
/// (mode k, coordinate j, one-based, binary) and y_<flat>_<k> (chain value k
/// for the support index with one-based flat position <flat>, in [-1, 1]).
/// Only indices with nonzero c are instantiated. Output is deterministic:
/// identical requests produce byte-identical files.
void export_milp(const SeparationRequest& req, std::ostream& out);
void export_milp_file(const SeparationRequest& req, const std::string& path);

}  // namespace gaugetc
