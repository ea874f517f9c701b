#include "hdltex/text.hpp"

#include <cctype>

namespace hdltex {

std::string clean_text(const std::string& raw, bool lowercase) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isalnum(c) && c < 0x80) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(lowercase ? static_cast<char>(std::tolower(c))
                              : static_cast<char>(c));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& cleaned) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < cleaned.size()) {
    std::size_t end = cleaned.find(' ', start);
    if (end == std::string::npos) end = cleaned.size();
    if (end > start) tokens.emplace_back(cleaned.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

}  // namespace hdltex
