#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mechsynth {

// ASCII lowercase copy.
std::string fold_case(std::string_view s);

// Strips leading/trailing whitespace.
std::string trim(std::string_view s);

// Lowercase alphanumeric tokens; every non-alphanumeric byte is a separator.
std::vector<std::string> tokenize(std::string_view s);

std::set<std::string> token_set(std::string_view s);

// |a ∩ b| / |a ∪ b|. Two empty sets count as identical (1.0).
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Case-folded token-set Jaccard similarity between two labels.
double label_similarity(std::string_view a, std::string_view b);

// Non-empty after trim, at most 120 chars, contains at least one
// alphanumeric character.
bool well_formed_label(std::string_view label);

// Rounds to six decimal places; all floats entering serialized artifacts
// pass through here so repeated writes are byte-identical.
double round6(double x);

}  // namespace mechsynth
