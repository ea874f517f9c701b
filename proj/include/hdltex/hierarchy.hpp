#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hdltex/builders.hpp"
#include "hdltex/corpus.hpp"
#include "hdltex/naive_bayes.hpp"
#include "hdltex/network.hpp"
#include "hdltex/train.hpp"

namespace hdltex {

enum class ModelKind : std::uint8_t {
  kDnn = 0,
  kRnnGru = 1,
  kRnnLstm = 2,
  kCnn = 3,
  kNbc = 4
};

ModelKind model_kind_from_string(const std::string& name);
std::string model_kind_to_string(ModelKind kind);

struct FeatureConfig {
  std::uint32_t max_n = 2;
  std::uint32_t min_count = 2;
  std::size_t max_features = 75000;
  std::size_t max_len = 500;
  bool lowercase = true;
  std::uint32_t embed_dim = 100;
  // Empty: a deterministic random table is built from the training tokens.
  std::string embedding_path;
  OovPolicy oov_policy = OovPolicy::kZeroVector;
  std::uint32_t nbc_max_n = 1;
};

enum class VocabScope : std::uint8_t { kGlobal = 0, kPerDomain = 1 };

struct HdltexConfig {
  ModelKind parent_kind = ModelKind::kDnn;
  ModelKind child_kind = ModelKind::kDnn;
  FeatureConfig features;
  OptConfig opt;
  std::size_t epochs = 10;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  VocabScope child_vocab_scope = VocabScope::kPerDomain;
  std::size_t jobs = 1;  // child models of distinct domains may train in parallel

  // Architecture knobs; defaults are the full-scale stack.
  std::size_t dnn_width = 1024;
  std::size_t dnn_depth = 8;
  double dnn_dropout = 0.5;
  std::size_t rnn_hidden = 100;
  std::size_t rnn_layers = 2;
  double rnn_dropout = 0.25;
  double rnn_clip_norm = 5.0;
  std::size_t cnn_branch_filters = 128;
  std::size_t cnn_stage_filters = 128;
  std::size_t cnn_dense_width = 128;
  double cnn_dropout = 0.25;
};

// One trained classifier plus its feature pipeline.
struct SubModel {
  ModelKind kind = ModelKind::kDnn;
  std::vector<std::string> class_labels;

  // Bag-of-ngrams pipeline (dnn / nbc).
  Vocabulary vocab;
  std::vector<double> idf;  // dnn only

  // Sequence pipeline (rnn / cnn); the table is shared across submodels.
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::size_t max_len = 0;

  Network net;        // dnn / rnn / cnn
  NaiveBayesModel nb;  // nbc

  Feature encode(const std::vector<std::string>& tokens) const;
  // Class probabilities for one tokenized document.
  std::vector<double> predict_probs(const std::vector<std::string>& tokens) const;
};

struct HierarchicalModel {
  HdltexConfig config;
  LabelSpace labels;
  SubModel parent;
  std::vector<SubModel> children;  // indexed like labels.parents()
};

struct Prediction {
  std::string parent_label;
  std::string child_label;
  std::vector<double> parent_probs;
  std::vector<double> child_probs;
};

struct DomainAccuracy {
  std::string parent;
  double accuracy = 0.0;
  std::size_t test_count = 0;
};

struct LevelMetrics {
  double parent_accuracy = 0.0;
  std::vector<DomainAccuracy> per_domain_child_accuracy;
  double weighted_child_accuracy = 0.0;
  double combined_accuracy = 0.0;
  double end_to_end_accuracy = 0.0;
};

// Trains the parent model on every document and one child model per parent
// label on that domain's documents. Child jobs are independent and seeded
// from (seed, parent index), so results do not depend on `jobs`.
HierarchicalModel train_hierarchy(const HdltexConfig& cfg, const Dataset& train,
                                  std::ostream* log = nullptr);

// Routed prediction: the parent argmax picks the child model.
Prediction predict_document(const HierarchicalModel& model,
                            const std::string& text);

// Parent accuracy over all documents; child accuracies under oracle routing
// (the true parent selects the child model), weighted by domain test counts;
// combined = parent x weighted child; end-to-end requires both routed
// predictions correct.
LevelMetrics evaluate_hierarchy(const HierarchicalModel& model,
                                const Dataset& test);

// parent_acc x (sum acc_k * n_k / sum n_k).
double combined_accuracy(
    double parent_acc,
    const std::vector<std::pair<double, std::size_t>>& child);

}  // namespace hdltex
