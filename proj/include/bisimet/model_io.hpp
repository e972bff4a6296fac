#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bisimet/model.hpp"

namespace bisimet {

/**
 * Loads a model from its JSON description:
 *
 *   {
 *     "states":      ["x", "y", ...],
 *     "actions":     ["a", ...],
 *     "transitions": {"a": [[p, ...], ...], ...},   // one row-stochastic matrix per action
 *     "rewards":     {"a": [r, ...], ...}           // one reward per state, in [0,1]
 *   }
 *
 * Malformed JSON raises `json_parse` with the byte offset, structural
 * problems raise `schema`, and numeric problems (row sums off by more than
 * 1e-9, entries outside [0,1]) raise `validation` naming the offending
 * action and state. Rows within tolerance are renormalized on load.
 */
Mdp load_model(const std::string& path);

/// Same as `load_model`, reading the JSON text directly.
Mdp load_model_from_string(const std::string& text);

/// Inverse of `load_model`: `load_model_from_string(serialize_model(m))`
/// reproduces `m` exactly (doubles are serialized round-trip safe).
std::string serialize_model(const Mdp& m);

/// Writes a metric matrix as CSV: a header row of state names, then one row
/// of values per state, each printed with 12 decimal digits.
void write_metric_csv(std::ostream& os, const std::vector<std::string>& names, const Mat& d);

/// Reads the CSV format produced by `write_metric_csv`.
std::pair<std::vector<std::string>, Mat> read_metric_csv(std::istream& is);

/// Reads a metric CSV from a file; `io_failure` if the file cannot be read.
std::pair<std::vector<std::string>, Mat> read_metric_csv_file(const std::string& path);

/// Fixed 12-decimal rendering used for all CSV numeric output.
std::string format_fixed12(Scalar v);

}  // namespace bisimet
