#pragma once

#include <string>
#include <vector>

namespace hdltex {

// Strips everything but ASCII letters and digits; runs of stripped
// characters collapse to one space, leading/trailing space removed.
// Lowercasing is on by default and idempotent either way.
std::string clean_text(const std::string& raw, bool lowercase = true);

// Splits cleaned text on single spaces. Empty input gives an empty list.
std::vector<std::string> tokenize(const std::string& cleaned);

}  // namespace hdltex
