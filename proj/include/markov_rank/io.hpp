#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "markov_rank/chain_core.hpp"

namespace markov_rank {

enum class InputFormat { Json, Csv };

/// Parses a decimal literal or a rational string "a/b" to double.
double parse_entry(std::string_view text);

/// Comma-separated list of entries, e.g. "1/6,1/3,1/2".
std::vector<double> parse_entry_list(std::string_view text);

/// JSON: {"kind":"stochastic"|"nonnegative","rows":[[entry,...],...]}.
/// CSV: one row per line, optional first line "#kind=stochastic".
/// Missing kind means stochastic.
TransitionMatrixd load_matrix(std::istream& source, InputFormat format);

TransitionMatrixd load_matrix_file(const std::string& path, InputFormat format);

/// Picks the format from the file extension (".csv" means CSV, otherwise JSON).
InputFormat format_from_path(const std::string& path);

}  // namespace markov_rank
