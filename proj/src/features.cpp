#include "hdltex/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "hdltex/common.hpp"
#include "hdltex/rng.hpp"

namespace hdltex {

double SparseVector::l2_norm() const {
  double s = 0.0;
  for (const auto& [idx, v] : items) s += v * v;
  return std::sqrt(s);
}

namespace {

void for_each_gram(const std::vector<std::string>& tokens, std::uint32_t max_n,
                   const std::function<void(const std::string&)>& fn) {
  std::string gram;
  for (std::uint32_t n = 1; n <= max_n; ++n) {
    if (tokens.size() < n) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      gram = tokens[i];
      for (std::uint32_t k = 1; k < n; ++k) {
        gram += ' ';
        gram += tokens[i + k];
      }
      fn(gram);
    }
  }
}

}  // namespace

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus,
                       std::uint32_t max_n, std::uint32_t min_count,
                       std::size_t max_features) {
  if (max_n < 1) throw DataError("max_n must be >= 1");
  if (max_features < 1) throw DataError("max_features must be >= 1");
  if (corpus.empty()) throw DataError("empty corpus");

  std::unordered_map<std::string, std::uint32_t> df;
  std::unordered_map<std::string, std::size_t> seen_in_doc;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for_each_gram(corpus[d], max_n, [&](const std::string& gram) {
      auto [it, inserted] = seen_in_doc.try_emplace(gram, d);
      if (inserted || it->second != d) {
        it->second = d;
        ++df[gram];
      }
    });
  }

  std::vector<std::pair<std::string, std::uint32_t>> kept;
  kept.reserve(df.size());
  for (auto& [gram, freq] : df) {
    if (freq >= min_count) kept.emplace_back(gram, freq);
  }
  if (kept.empty()) throw DataError("no features retained");

  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (kept.size() > max_features) kept.resize(max_features);

  Vocabulary vocab;
  vocab.max_n = max_n;
  vocab.num_docs_fit = corpus.size();
  vocab.gram_of.reserve(kept.size());
  vocab.doc_freq.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    vocab.entries.emplace(kept[i].first, static_cast<std::uint32_t>(i));
    vocab.gram_of.push_back(std::move(kept[i].first));
    vocab.doc_freq.push_back(kept[i].second);
  }
  return vocab;
}

SparseVector count_ngrams(const std::vector<std::string>& tokens,
                          const Vocabulary& vocab) {
  std::unordered_map<std::uint32_t, double> counts;
  for_each_gram(tokens, vocab.max_n, [&](const std::string& gram) {
    auto it = vocab.entries.find(gram);
    if (it != vocab.entries.end()) counts[it->second] += 1.0;
  });

  SparseVector out;
  out.dimension = static_cast<std::uint32_t>(vocab.size());
  out.items.assign(counts.begin(), counts.end());
  std::sort(out.items.begin(), out.items.end());
  return out;
}

std::vector<double> fit_idf(const std::vector<SparseVector>& count_vectors,
                            const Vocabulary& vocab) {
  if (count_vectors.empty()) throw DataError("fit_idf: empty vector list");
  std::vector<std::uint64_t> df(vocab.size(), 0);
  for (const auto& vec : count_vectors) {
    for (const auto& [idx, v] : vec.items) {
      if (v != 0.0) ++df[idx];
    }
  }
  const double n = static_cast<double>(count_vectors.size());
  std::vector<double> idf(vocab.size());
  for (std::size_t t = 0; t < idf.size(); ++t) {
    idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  }
  return idf;
}

SparseVector tfidf_vector(const SparseVector& counts,
                          const std::vector<double>& idf) {
  if (counts.dimension != idf.size()) {
    throw DataError("tfidf_vector: dimension mismatch");
  }
  SparseVector out;
  out.dimension = counts.dimension;
  out.items.reserve(counts.items.size());
  for (const auto& [idx, v] : counts.items) {
    double w = v * idf[idx];
    if (w != 0.0) out.items.emplace_back(idx, w);
  }
  double norm = out.l2_norm();
  if (norm > 0.0) {
    for (auto& [idx, v] : out.items) v /= norm;
  }
  return out;
}

EmbeddingTable load_embeddings(const std::string& path, std::uint32_t dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  if (dim == 0) throw DataError("embedding dim must be > 0");

  EmbeddingTable table;
  table.dim = dim;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vec(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      if (!(ss >> vec[i])) {
        throw DataError("embedding line " + std::to_string(line_no) +
                        ": expected " + std::to_string(dim) + " components");
      }
      if (!std::isfinite(vec[i])) {
        throw DataError("embedding line " + std::to_string(line_no) +
                        ": non-finite component");
      }
    }
    double extra;
    if (ss >> extra) {
      throw DataError("embedding line " + std::to_string(line_no) +
                      ": expected " + std::to_string(dim) + " components");
    }
    if (!table.vectors.emplace(token, vec).second) {
      std::cerr << "warning: duplicate embedding token '" << token
                << "' at line " << line_no << ", keeping last\n";
      table.vectors[token] = std::move(vec);
    }
  }
  return table;
}

EmbeddingTable random_embeddings(const std::vector<std::string>& tokens,
                                 std::uint32_t dim, std::uint64_t seed) {
  EmbeddingTable table;
  table.dim = dim;
  // Per-token seed (FNV-1a) so a vector does not depend on insertion order.
  auto fnv1a = [](const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
  };
  for (const auto& token : tokens) {
    if (table.vectors.count(token)) continue;
    Rng rng(Rng::derive(seed, fnv1a(token)));
    std::vector<double> vec(dim);
    double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (auto& v : vec) v = rng.uniform(-scale, scale);
    table.vectors.emplace(token, std::move(vec));
  }
  return table;
}

EncodedSequence encode_sequence(const std::vector<std::string>& tokens,
                                const EmbeddingTable& table,
                                std::size_t max_len) {
  if (max_len < 1) throw DataError("max_len must be >= 1");
  EncodedSequence seq;
  seq.max_len = max_len;
  seq.matrix = Tensor({max_len, table.dim});
  std::size_t row = 0;
  const std::size_t limit = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < limit; ++i) {
    auto it = table.vectors.find(tokens[i]);
    if (it == table.vectors.end()) {
      if (table.oov_policy == OovPolicy::kSkipToken) continue;
      ++row;  // zero-vector row
      continue;
    }
    for (std::uint32_t j = 0; j < table.dim; ++j) {
      seq.matrix.at(row, j) = it->second[j];
    }
    ++row;
  }
  seq.length = row;
  return seq;
}

}  // namespace hdltex
