#pragma once

#include <map>
#include <string>

#include "hdltex/hierarchy.hpp"

namespace hdltex {

// Flat key=value text with [section] headers; '#' and ';' start comments.
// Keys are addressed as "section.key".
class KvConfig {
 public:
  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  std::string to_string() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// Experiment config <-> the training configuration struct. Every default in
// hdltex_config_defaults() matches HdltexConfig's initializers.
HdltexConfig config_from_kv(const KvConfig& kv);
KvConfig kv_from_config(const HdltexConfig& cfg);
std::string default_config_text();

}  // namespace hdltex
