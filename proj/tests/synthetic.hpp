// Deterministic synthetic two-level corpus: every child label has its own
// multinomial over a private support of words drawn from a shared
// vocabulary, so the hierarchy is learnable at small scale.
#pragma once

#include <string>
#include <vector>

#include "hdltex/corpus.hpp"
#include "hdltex/rng.hpp"

namespace synthetic {

struct Spec {
  std::size_t parents = 4;
  std::size_t children_per_parent = 3;
  std::size_t docs_per_child = 200;
  std::size_t vocab_words = 2000;
  std::size_t support_per_child = 50;
  std::size_t doc_len = 40;
  std::uint64_t seed = 2017;
};

inline hdltex::Dataset corpus(const Spec& spec) {
  hdltex::Rng rng(spec.seed);
  hdltex::Dataset ds;
  ds.name = "synthetic";

  auto word = [](std::size_t i) {
    std::string w = "w" + std::to_string(i);
    return w;
  };

  std::size_t next_word = 0;
  for (std::size_t p = 0; p < spec.parents; ++p) {
    const std::string parent = "domain" + std::to_string(p);
    for (std::size_t c = 0; c < spec.children_per_parent; ++c) {
      const std::string child = parent + "_area" + std::to_string(c);
      ds.labels.add_pair(parent, child);

      // Private support with random multinomial weights.
      std::vector<std::string> support;
      std::vector<double> cumulative;
      double total = 0.0;
      for (std::size_t k = 0; k < spec.support_per_child; ++k) {
        support.push_back(word(next_word % spec.vocab_words));
        ++next_word;
        total += rng.uniform(0.5, 1.5);
        cumulative.push_back(total);
      }

      for (std::size_t d = 0; d < spec.docs_per_child; ++d) {
        std::string text;
        for (std::size_t t = 0; t < spec.doc_len; ++t) {
          const double u = rng.uniform() * total;
          std::size_t lo = 0, hi = cumulative.size() - 1;
          while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cumulative[mid] < u) {
              lo = mid + 1;
            } else {
              hi = mid;
            }
          }
          if (!text.empty()) text += ' ';
          text += support[lo];
        }
        ds.documents.push_back(
            {static_cast<std::uint64_t>(ds.documents.size()), text, parent,
             child});
      }
    }
  }
  return ds;
}

}  // namespace synthetic
