#pragma once

#include <string>

namespace gaugetc {

/// Shortest decimal form that round-trips the double exactly. Locale-free
/// and deterministic, so emitted files are byte-identical across runs.
std::string format_double(double value);

/// Strict double parse of an entire token; throws on trailing junk.
double parse_double(const std::string& token, const std::string& what);

/// Strict non-negative integer parse of an entire token.
int64_t parse_int(const std::string& token, const std::string& what);

}  // namespace gaugetc
