#pragma once

// UAI model, query and evidence files.

#include <string>
#include <utility>
#include <vector>

#include "mixmap/factor_model.hpp"

namespace mixmap {

/// Parses a MARKOV or BAYES document. Tables are converted to log values
/// (zero becomes -inf); all variables are Sum until a query is applied.
/// Throws ParseError on a malformed token stream and StructuralError when a
/// table length disagrees with its scope.
FactorModel parse_uai(const std::string& text);

/// MARKOV document with probability-domain tables printed at full precision.
std::string serialize_uai(const FactorModel& model);

/// "count i_1 ... i_count". Indices are checked against num_vars.
std::vector<int> parse_query(const std::string& text, int num_vars);

/// "count v_1 s_1 ... v_count s_count". Checked against the cardinalities.
std::vector<std::pair<int, int>> parse_evidence(const std::string& text, const std::vector<int>& cards);

std::string serialize_query(const std::vector<int>& max_vars);

/// Marks the listed variables as Max and all others as Sum.
FactorModel apply_query(const FactorModel& model, const std::vector<int>& max_vars);

/// Slices every table at the observed states. Clamped variables keep their
/// index and become cardinality 1, so their decoded state 0 stands for the
/// observed one.
FactorModel apply_evidence(const FactorModel& model, const std::vector<std::pair<int, int>>& evidence);

/// Whole file as a string. Throws Error if it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace mixmap
