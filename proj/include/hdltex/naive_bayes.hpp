#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hdltex/features.hpp"

namespace hdltex {

// Multinomial naive Bayes with Laplace smoothing over raw n-gram counts.
struct NaiveBayesModel {
  std::vector<double> class_log_prior;                 // ln P(c)
  std::vector<std::vector<double>> word_log_likelihood;  // [class][word]
  double alpha = 1.0;
  std::uint32_t vocab_size = 0;

  std::size_t num_classes() const { return class_log_prior.size(); }
};

// P(c) = class doc count / total; P(w|c) = (count(w,c)+alpha)/(total(c)+alpha|V|).
NaiveBayesModel nb_fit(const std::vector<SparseVector>& counts,
                       const std::vector<int>& labels, std::size_t num_classes,
                       std::uint32_t vocab_size, double alpha = 1.0);

struct NbPosterior {
  std::vector<double> log_posterior;  // unnormalized
  std::vector<double> probabilities;  // log-sum-exp normalized
};

NbPosterior nb_posterior(const NaiveBayesModel& model,
                         const SparseVector& counts);

// Argmax of the log-posterior; ties break to the lowest class index.
int nb_classify(const NaiveBayesModel& model, const SparseVector& counts);

}  // namespace hdltex
