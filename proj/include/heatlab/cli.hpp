#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "heatlab/graph.hpp"

namespace heatlab::cli {

inline constexpr const char* kVersion = "heatlab 0.1.0";

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kInvalid = 2;
inline constexpr int kCheckFailed = 3;

/// args excludes the program name. Results go to -o files or `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "1,2,3", "a:b" (step 1), "a:b:step", "2^a:b" (powers of two); pieces may
/// be mixed with commas.
std::vector<int> parse_int_list(const std::string& s);

/// "1,2.5", "a:b:step" (inclusive), "2^a:b:step" (2 to each exponent).
std::vector<double> parse_real_list(const std::string& s);

/// A vertex id, or coordinates "i/j[/k...]": lattice coordinates (row-major)
/// or gasket triangular coordinates.
Vertex parse_vertex(const WeightedGraph& g, const std::string& token);
std::vector<Vertex> parse_vertex_list(const WeightedGraph& g, const std::string& s);

}  // namespace heatlab::cli
