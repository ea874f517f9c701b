#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hdltex/tensor.hpp"

namespace hdltex {

// n-gram -> column index map with document frequencies. Grams of 1..max_n
// tokens are stored joined by single spaces (tokens are space-free after
// cleaning, so the join is unambiguous). Index order is descending document
// frequency with lexicographic tie-break, which also fixes persistence order.
struct Vocabulary {
  std::unordered_map<std::string, std::uint32_t> entries;
  std::vector<std::string> gram_of;     // index -> gram
  std::vector<std::uint32_t> doc_freq;  // index -> df at fit time
  std::uint32_t max_n = 1;
  std::uint64_t num_docs_fit = 0;

  std::size_t size() const { return gram_of.size(); }
};

// Sorted (index, value) pairs with no duplicates and no explicit zeros.
struct SparseVector {
  std::uint32_t dimension = 0;
  std::vector<std::pair<std::uint32_t, double>> items;

  double l2_norm() const;
};

enum class OovPolicy : std::uint8_t { kZeroVector = 0, kSkipToken = 1 };

// token -> dense vector map for the sequence models.
struct EmbeddingTable {
  std::uint32_t dim = 0;
  OovPolicy oov_policy = OovPolicy::kZeroVector;
  std::unordered_map<std::string, std::vector<double>> vectors;
};

// l x dim matrix, rows beyond `length` all-zero padding.
struct EncodedSequence {
  Tensor matrix;  // {max_len, dim}
  std::size_t length = 0;
  std::size_t max_len = 0;
};

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus,
                       std::uint32_t max_n, std::uint32_t min_count,
                       std::size_t max_features);

SparseVector count_ngrams(const std::vector<std::string>& tokens,
                          const Vocabulary& vocab);

// Smoothed idf: ln((1+n)/(1+df)) + 1.
std::vector<double> fit_idf(const std::vector<SparseVector>& count_vectors,
                            const Vocabulary& vocab);

// count * idf, then L2-normalized; the all-zero vector passes through.
SparseVector tfidf_vector(const SparseVector& counts,
                          const std::vector<double>& idf);

// Text format: one line per token, token then `dim` space-separated reals.
// Duplicate tokens keep the last occurrence (warning on stderr).
EmbeddingTable load_embeddings(const std::string& path, std::uint32_t dim);

// Deterministic random table over `tokens`, used when no pretrained
// embedding file is configured.
EmbeddingTable random_embeddings(const std::vector<std::string>& tokens,
                                 std::uint32_t dim, std::uint64_t seed);

EncodedSequence encode_sequence(const std::vector<std::string>& tokens,
                                const EmbeddingTable& table,
                                std::size_t max_len);

}  // namespace hdltex
