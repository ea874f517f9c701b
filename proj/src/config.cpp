#include "hdltex/config.hpp"

#include <fstream>
#include <sstream>

#include "hdltex/common.hpp"

namespace hdltex {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

KvConfig KvConfig::parse_string(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw DataError("config line " + std::to_string(line_no) +
                        ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) +
                      ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw DataError("config line " + std::to_string(line_no) + ": empty key");
    }
    cfg.kv_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

bool KvConfig::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string KvConfig::get(const std::string& key,
                          const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw DataError("config key '" + key + "': expected a number, got '" +
                    it->second + "'");
  }
}

long long KvConfig::get_int(const std::string& key, long long fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw DataError("config key '" + key + "': expected an integer, got '" +
                    it->second + "'");
  }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw DataError("config key '" + key + "': expected true/false");
}

void KvConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::string KvConfig::to_string() const {
  // Group by section for readability; keys inside a section stay sorted.
  std::ostringstream out;
  std::string current_section;
  bool first = true;
  for (const auto& [key, value] : kv_) {
    const std::size_t dot = key.find('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (section != current_section || first) {
      if (!first) out << "\n";
      if (!section.empty()) out << "[" << section << "]\n";
      current_section = section;
      first = false;
    }
    out << name << " = " << value << "\n";
  }
  return out.str();
}

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

HdltexConfig config_from_kv(const KvConfig& kv) {
  HdltexConfig cfg;
  cfg.parent_kind = model_kind_from_string(
      kv.get("models.parent", model_kind_to_string(cfg.parent_kind)));
  cfg.child_kind = model_kind_from_string(
      kv.get("models.child", model_kind_to_string(cfg.child_kind)));

  cfg.features.max_n = static_cast<std::uint32_t>(
      kv.get_int("features.max_n", cfg.features.max_n));
  cfg.features.min_count = static_cast<std::uint32_t>(
      kv.get_int("features.min_count", cfg.features.min_count));
  cfg.features.max_features = static_cast<std::size_t>(
      kv.get_int("features.max_features",
                 static_cast<long long>(cfg.features.max_features)));
  cfg.features.max_len = static_cast<std::size_t>(
      kv.get_int("features.max_len",
                 static_cast<long long>(cfg.features.max_len)));
  cfg.features.lowercase =
      kv.get_bool("features.lowercase", cfg.features.lowercase);
  cfg.features.embed_dim = static_cast<std::uint32_t>(
      kv.get_int("features.embed_dim", cfg.features.embed_dim));
  cfg.features.embedding_path =
      kv.get("features.embedding_path", cfg.features.embedding_path);
  const std::string oov = kv.get("features.oov_policy", "zero-vector");
  if (oov == "zero-vector") {
    cfg.features.oov_policy = OovPolicy::kZeroVector;
  } else if (oov == "skip-token") {
    cfg.features.oov_policy = OovPolicy::kSkipToken;
  } else {
    throw DataError("features.oov_policy must be zero-vector or skip-token");
  }
  cfg.features.nbc_max_n = static_cast<std::uint32_t>(
      kv.get_int("features.nbc_max_n", cfg.features.nbc_max_n));

  cfg.opt.kind = opt_kind_from_string(
      kv.get("optimizer.kind", opt_kind_to_string(cfg.opt.kind)));
  cfg.opt.alpha = kv.get_double("optimizer.alpha", cfg.opt.alpha);
  cfg.opt.gamma = kv.get_double("optimizer.gamma", cfg.opt.gamma);
  cfg.opt.rho = kv.get_double("optimizer.rho", cfg.opt.rho);
  cfg.opt.beta1 = kv.get_double("optimizer.beta1", cfg.opt.beta1);
  cfg.opt.beta2 = kv.get_double("optimizer.beta2", cfg.opt.beta2);
  cfg.opt.eps = kv.get_double("optimizer.eps", cfg.opt.eps);
  cfg.opt.decay = kv.get_double("optimizer.decay", cfg.opt.decay);

  cfg.epochs = static_cast<std::size_t>(
      kv.get_int("training.epochs", static_cast<long long>(cfg.epochs)));
  cfg.batch_size = static_cast<std::size_t>(kv.get_int(
      "training.batch_size", static_cast<long long>(cfg.batch_size)));
  cfg.seed = static_cast<std::uint64_t>(
      kv.get_int("training.seed", static_cast<long long>(cfg.seed)));
  cfg.jobs = static_cast<std::size_t>(
      kv.get_int("training.jobs", static_cast<long long>(cfg.jobs)));
  const std::string scope = kv.get("training.child_vocab_scope", "per-domain");
  if (scope == "per-domain") {
    cfg.child_vocab_scope = VocabScope::kPerDomain;
  } else if (scope == "global") {
    cfg.child_vocab_scope = VocabScope::kGlobal;
  } else {
    throw DataError("training.child_vocab_scope must be per-domain or global");
  }

  cfg.dnn_width = static_cast<std::size_t>(
      kv.get_int("dnn.width", static_cast<long long>(cfg.dnn_width)));
  cfg.dnn_depth = static_cast<std::size_t>(
      kv.get_int("dnn.depth", static_cast<long long>(cfg.dnn_depth)));
  cfg.dnn_dropout = kv.get_double("dnn.dropout", cfg.dnn_dropout);
  cfg.rnn_hidden = static_cast<std::size_t>(
      kv.get_int("rnn.hidden", static_cast<long long>(cfg.rnn_hidden)));
  cfg.rnn_layers = static_cast<std::size_t>(
      kv.get_int("rnn.layers", static_cast<long long>(cfg.rnn_layers)));
  cfg.rnn_dropout = kv.get_double("rnn.dropout", cfg.rnn_dropout);
  cfg.rnn_clip_norm = kv.get_double("rnn.clip_norm", cfg.rnn_clip_norm);
  cfg.cnn_branch_filters = static_cast<std::size_t>(kv.get_int(
      "cnn.branch_filters", static_cast<long long>(cfg.cnn_branch_filters)));
  cfg.cnn_stage_filters = static_cast<std::size_t>(kv.get_int(
      "cnn.stage_filters", static_cast<long long>(cfg.cnn_stage_filters)));
  cfg.cnn_dense_width = static_cast<std::size_t>(kv.get_int(
      "cnn.dense_width", static_cast<long long>(cfg.cnn_dense_width)));
  cfg.cnn_dropout = kv.get_double("cnn.dropout", cfg.cnn_dropout);
  return cfg;
}

KvConfig kv_from_config(const HdltexConfig& cfg) {
  KvConfig kv;
  kv.set("models.parent", model_kind_to_string(cfg.parent_kind));
  kv.set("models.child", model_kind_to_string(cfg.child_kind));

  kv.set("features.max_n", std::to_string(cfg.features.max_n));
  kv.set("features.min_count", std::to_string(cfg.features.min_count));
  kv.set("features.max_features", std::to_string(cfg.features.max_features));
  kv.set("features.max_len", std::to_string(cfg.features.max_len));
  kv.set("features.lowercase", cfg.features.lowercase ? "true" : "false");
  kv.set("features.embed_dim", std::to_string(cfg.features.embed_dim));
  kv.set("features.embedding_path", cfg.features.embedding_path);
  kv.set("features.oov_policy",
         cfg.features.oov_policy == OovPolicy::kZeroVector ? "zero-vector"
                                                           : "skip-token");
  kv.set("features.nbc_max_n", std::to_string(cfg.features.nbc_max_n));

  kv.set("optimizer.kind", opt_kind_to_string(cfg.opt.kind));
  kv.set("optimizer.alpha", fmt(cfg.opt.alpha));
  kv.set("optimizer.gamma", fmt(cfg.opt.gamma));
  kv.set("optimizer.rho", fmt(cfg.opt.rho));
  kv.set("optimizer.beta1", fmt(cfg.opt.beta1));
  kv.set("optimizer.beta2", fmt(cfg.opt.beta2));
  kv.set("optimizer.eps", fmt(cfg.opt.eps));
  kv.set("optimizer.decay", fmt(cfg.opt.decay));

  kv.set("training.epochs", std::to_string(cfg.epochs));
  kv.set("training.batch_size", std::to_string(cfg.batch_size));
  kv.set("training.seed", std::to_string(cfg.seed));
  kv.set("training.jobs", std::to_string(cfg.jobs));
  kv.set("training.child_vocab_scope",
         cfg.child_vocab_scope == VocabScope::kPerDomain ? "per-domain"
                                                         : "global");

  kv.set("dnn.width", std::to_string(cfg.dnn_width));
  kv.set("dnn.depth", std::to_string(cfg.dnn_depth));
  kv.set("dnn.dropout", fmt(cfg.dnn_dropout));
  kv.set("rnn.hidden", std::to_string(cfg.rnn_hidden));
  kv.set("rnn.layers", std::to_string(cfg.rnn_layers));
  kv.set("rnn.dropout", fmt(cfg.rnn_dropout));
  kv.set("rnn.clip_norm", fmt(cfg.rnn_clip_norm));
  kv.set("cnn.branch_filters", std::to_string(cfg.cnn_branch_filters));
  kv.set("cnn.stage_filters", std::to_string(cfg.cnn_stage_filters));
  kv.set("cnn.dense_width", std::to_string(cfg.cnn_dense_width));
  kv.set("cnn.dropout", fmt(cfg.cnn_dropout));
  return kv;
}

std::string default_config_text() {
  return kv_from_config(HdltexConfig{}).to_string();
}

}  // namespace hdltex
