#include "hdltex/naive_bayes.hpp"

#include <algorithm>
#include <cmath>

#include "hdltex/common.hpp"

namespace hdltex {

NaiveBayesModel nb_fit(const std::vector<SparseVector>& counts,
                       const std::vector<int>& labels, std::size_t num_classes,
                       std::uint32_t vocab_size, double alpha) {
  if (alpha <= 0.0) throw DataError("smoothing alpha must be > 0");
  if (counts.size() != labels.size() || counts.empty()) {
    throw DataError("nb_fit: counts/labels mismatch or empty");
  }
  if (num_classes < 1 || vocab_size < 1) {
    throw DataError("nb_fit: need >= 1 class and a non-empty vocabulary");
  }

  std::vector<double> doc_count(num_classes, 0.0);
  std::vector<std::vector<double>> word_count(
      num_classes, std::vector<double>(vocab_size, 0.0));
  std::vector<double> total_count(num_classes, 0.0);

  for (std::size_t i = 0; i < counts.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
      throw DataError("nb_fit: label out of range");
    }
    doc_count[c] += 1.0;
    for (const auto& [idx, v] : counts[i].items) {
      word_count[c][idx] += v;
      total_count[c] += v;
    }
  }

  NaiveBayesModel model;
  model.alpha = alpha;
  model.vocab_size = vocab_size;
  model.class_log_prior.resize(num_classes);
  model.word_log_likelihood.resize(num_classes);
  const double n_docs = static_cast<double>(counts.size());
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (doc_count[c] == 0.0) {
      throw DataError("nb_fit: class " + std::to_string(c) +
                      " has no documents");
    }
    model.class_log_prior[c] = std::log(doc_count[c] / n_docs);
    model.word_log_likelihood[c].resize(vocab_size);
    const double denom =
        total_count[c] + alpha * static_cast<double>(vocab_size);
    for (std::uint32_t w = 0; w < vocab_size; ++w) {
      model.word_log_likelihood[c][w] =
          std::log((word_count[c][w] + alpha) / denom);
    }
  }
  return model;
}

NbPosterior nb_posterior(const NaiveBayesModel& model,
                         const SparseVector& counts) {
  const std::size_t k = model.num_classes();
  NbPosterior post;
  post.log_posterior.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    double lp = model.class_log_prior[c];
    for (const auto& [idx, v] : counts.items) {
      lp += v * model.word_log_likelihood[c][idx];
    }
    post.log_posterior[c] = lp;
  }

  const double lmax =
      *std::max_element(post.log_posterior.begin(), post.log_posterior.end());
  double sum = 0.0;
  post.probabilities.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    post.probabilities[c] = std::exp(post.log_posterior[c] - lmax);
    sum += post.probabilities[c];
  }
  for (auto& p : post.probabilities) p /= sum;
  return post;
}

int nb_classify(const NaiveBayesModel& model, const SparseVector& counts) {
  auto post = nb_posterior(model, counts);
  int best = 0;
  for (std::size_t c = 1; c < post.log_posterior.size(); ++c) {
    if (post.log_posterior[c] > post.log_posterior[best]) {
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace hdltex
