#include "hdltex/hierarchy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "hdltex/common.hpp"
#include "hdltex/text.hpp"

namespace hdltex {

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "dnn") return ModelKind::kDnn;
  if (name == "rnn-gru" || name == "rnn") return ModelKind::kRnnGru;
  if (name == "rnn-lstm") return ModelKind::kRnnLstm;
  if (name == "cnn") return ModelKind::kCnn;
  if (name == "nbc") return ModelKind::kNbc;
  throw DataError("unknown model kind '" + name + "'");
}

std::string model_kind_to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDnn: return "dnn";
    case ModelKind::kRnnGru: return "rnn-gru";
    case ModelKind::kRnnLstm: return "rnn-lstm";
    case ModelKind::kCnn: return "cnn";
    case ModelKind::kNbc: return "nbc";
  }
  return "?";
}

namespace {

bool uses_sequences(ModelKind kind) {
  return kind == ModelKind::kRnnGru || kind == ModelKind::kRnnLstm ||
         kind == ModelKind::kCnn;
}

int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

Feature SubModel::encode(const std::vector<std::string>& tokens) const {
  if (uses_sequences(kind)) {
    return Feature::from(encode_sequence(tokens, *embeddings, max_len));
  }
  SparseVector counts = count_ngrams(tokens, vocab);
  if (kind == ModelKind::kNbc) return Feature::from(std::move(counts));
  return Feature::from(tfidf_vector(counts, idf));
}

std::vector<double> SubModel::predict_probs(
    const std::vector<std::string>& tokens) const {
  if (kind == ModelKind::kNbc) {
    return nb_posterior(nb, count_ngrams(tokens, vocab)).probabilities;
  }
  Tensor probs = net.predict(encode(tokens));
  return std::vector<double>(probs.data(), probs.data() + probs.size());
}

namespace {

using TokenList = std::vector<std::string>;

// Fixed vocabulary/idf handed to every child under global scope.
struct SharedPipeline {
  Vocabulary vocab;
  std::vector<double> idf;
};

// Trains one classifier over `doc_indices` of the tokenized corpus.
SubModel fit_submodel(ModelKind kind, const HdltexConfig& cfg,
                      const std::vector<TokenList>& tokens,
                      const std::vector<std::size_t>& doc_indices,
                      const std::vector<int>& targets,
                      const std::vector<std::string>& class_labels,
                      std::shared_ptr<const EmbeddingTable> embeddings,
                      const SharedPipeline* shared, std::uint64_t seed,
                      std::ostream* log) {
  SubModel sub;
  sub.kind = kind;
  sub.class_labels = class_labels;
  const std::size_t num_classes = class_labels.size();

  std::vector<TokenList> local_tokens;
  local_tokens.reserve(doc_indices.size());
  for (std::size_t i : doc_indices) local_tokens.push_back(tokens[i]);

  if (kind == ModelKind::kNbc) {
    sub.vocab = shared != nullptr
                    ? shared->vocab
                    : build_vocab(local_tokens, cfg.features.nbc_max_n,
                                  cfg.features.min_count,
                                  cfg.features.max_features);
    std::vector<SparseVector> counts;
    counts.reserve(local_tokens.size());
    for (const auto& t : local_tokens) {
      counts.push_back(count_ngrams(t, sub.vocab));
    }
    sub.nb = nb_fit(counts, targets, num_classes,
                    static_cast<std::uint32_t>(sub.vocab.size()));
    return sub;
  }

  TrainOptions opts;
  opts.opt = cfg.opt;
  opts.epochs = cfg.epochs;
  opts.batch_size = cfg.batch_size;
  opts.seed = seed;
  opts.log = log;

  if (kind == ModelKind::kDnn) {
    std::vector<SparseVector> counts;
    counts.reserve(local_tokens.size());
    if (shared != nullptr) {
      sub.vocab = shared->vocab;
      sub.idf = shared->idf;
      for (const auto& t : local_tokens) {
        counts.push_back(count_ngrams(t, sub.vocab));
      }
    } else {
      sub.vocab = build_vocab(local_tokens, cfg.features.max_n,
                              cfg.features.min_count,
                              cfg.features.max_features);
      for (const auto& t : local_tokens) {
        counts.push_back(count_ngrams(t, sub.vocab));
      }
      sub.idf = fit_idf(counts, sub.vocab);
    }
    std::vector<Feature> features;
    features.reserve(counts.size());
    for (const auto& c : counts) {
      features.push_back(Feature::from(tfidf_vector(c, sub.idf)));
    }

    DnnSpec spec{cfg.dnn_width, cfg.dnn_depth, cfg.dnn_dropout,
                 Activation::kRelu};
    sub.net = build_hdltex_dnn(sub.vocab.size(), num_classes, spec);
    Rng init_rng(Rng::derive(seed, 0xA11));
    sub.net.init_params(init_rng);
    train_network(sub.net, TrainSet::from_features(std::move(features), targets),
                  opts);
    return sub;
  }

  // Sequence models share the embedding table and stream their encodings.
  sub.embeddings = std::move(embeddings);
  sub.max_len = cfg.features.max_len;
  auto shared_tokens = std::make_shared<std::vector<TokenList>>(
      std::move(local_tokens));
  auto table = sub.embeddings;
  const std::size_t max_len = sub.max_len;
  TrainSet set;
  set.targets = targets;
  set.feature_at = [shared_tokens, table, max_len](std::size_t i) {
    return Feature::from(encode_sequence((*shared_tokens)[i], *table, max_len));
  };

  if (kind == ModelKind::kCnn) {
    CnnSpec spec;
    spec.input_dim = cfg.features.embed_dim;
    spec.max_len = cfg.features.max_len;
    spec.branch_filters = cfg.cnn_branch_filters;
    spec.stage_filters = cfg.cnn_stage_filters;
    spec.dense_width = cfg.cnn_dense_width;
    spec.dropout = cfg.cnn_dropout;
    sub.net = build_hdltex_cnn(num_classes, spec);
  } else {
    RnnSpec spec;
    spec.input_dim = cfg.features.embed_dim;
    spec.hidden = cfg.rnn_hidden;
    spec.layers = cfg.rnn_layers;
    spec.dropout = cfg.rnn_dropout;
    sub.net = build_hdltex_rnn(
        num_classes,
        kind == ModelKind::kRnnLstm ? CellKind::kLSTM : CellKind::kGRU, spec);
    opts.clip_norm = cfg.rnn_clip_norm;
  }
  Rng init_rng(Rng::derive(seed, 0xA11));
  sub.net.init_params(init_rng);
  train_network(sub.net, set, opts);
  return sub;
}

}  // namespace

HierarchicalModel train_hierarchy(const HdltexConfig& cfg, const Dataset& train,
                                  std::ostream* log) {
  if (cfg.epochs < 1) throw DataError("epochs must be >= 1");
  if (train.documents.empty()) throw DataError("empty training set");

  const auto& labels = train.labels;
  const std::size_t num_parents = labels.parents().size();

  // Degenerate-domain and empty-class checks up front.
  std::vector<std::vector<std::size_t>> domain_docs(num_parents);
  for (std::size_t i = 0; i < train.documents.size(); ++i) {
    const int p = labels.parent_index(train.documents[i].parent_label);
    if (p < 0) throw DataError("document parent not in label space");
    domain_docs[static_cast<std::size_t>(p)].push_back(i);
  }
  for (std::size_t p = 0; p < num_parents; ++p) {
    const auto& parent = labels.parents()[p];
    const auto& kids = labels.children_of(parent);
    if (kids.size() < 2) {
      throw DataError("domain '" + parent + "' has only " +
                      std::to_string(kids.size()) +
                      " child label; hierarchy needs >= 2");
    }
    std::vector<std::size_t> per_child(kids.size(), 0);
    for (std::size_t i : domain_docs[p]) {
      per_child[static_cast<std::size_t>(
          labels.child_index(parent, train.documents[i].child_label))]++;
    }
    for (std::size_t k = 0; k < kids.size(); ++k) {
      if (per_child[k] == 0) {
        throw DataError("child label '" + kids[k] +
                        "' has no training documents");
      }
    }
  }

  // Tokenize once; all pipelines share it.
  std::vector<TokenList> tokens;
  tokens.reserve(train.documents.size());
  for (const auto& doc : train.documents) tokens.push_back(tokenize(doc.text));

  // One embedding table for every sequence submodel.
  std::shared_ptr<const EmbeddingTable> embeddings;
  if (uses_sequences(cfg.parent_kind) || uses_sequences(cfg.child_kind)) {
    EmbeddingTable table;
    if (!cfg.features.embedding_path.empty()) {
      table = load_embeddings(cfg.features.embedding_path,
                              cfg.features.embed_dim);
    } else {
      std::vector<std::string> all_tokens;
      for (const auto& t : tokens) {
        all_tokens.insert(all_tokens.end(), t.begin(), t.end());
      }
      table = random_embeddings(all_tokens, cfg.features.embed_dim,
                                Rng::derive(cfg.seed, 0xE3B));
    }
    table.oov_policy = cfg.features.oov_policy;
    embeddings = std::make_shared<const EmbeddingTable>(std::move(table));
  }

  HierarchicalModel model;
  model.config = cfg;
  model.labels = labels;

  // Global vocabulary scope: fit one pipeline over all documents with the
  // child feature settings and hand it to every child model.
  SharedPipeline global_pipeline;
  const bool global_scope = cfg.child_vocab_scope == VocabScope::kGlobal &&
                            !uses_sequences(cfg.child_kind);
  if (global_scope) {
    const std::uint32_t n = cfg.child_kind == ModelKind::kNbc
                                ? cfg.features.nbc_max_n
                                : cfg.features.max_n;
    global_pipeline.vocab = build_vocab(tokens, n, cfg.features.min_count,
                                        cfg.features.max_features);
    if (cfg.child_kind == ModelKind::kDnn) {
      std::vector<SparseVector> counts;
      counts.reserve(tokens.size());
      for (const auto& t : tokens) {
        counts.push_back(count_ngrams(t, global_pipeline.vocab));
      }
      global_pipeline.idf = fit_idf(counts, global_pipeline.vocab);
    }
  }

  // Parent level: all documents, parent labels as targets.
  {
    std::vector<std::size_t> all_idx(train.documents.size());
    std::vector<int> targets(train.documents.size());
    for (std::size_t i = 0; i < train.documents.size(); ++i) {
      all_idx[i] = i;
      targets[i] = labels.parent_index(train.documents[i].parent_label);
    }
    if (log != nullptr) *log << "# training parent model\n";
    model.parent = fit_submodel(cfg.parent_kind, cfg, tokens, all_idx, targets,
                                labels.parents(), embeddings, nullptr,
                                Rng::derive(cfg.seed, 0), log);
  }

  // Child level: one model per domain. Global vocab scope reuses the parent
  // pipeline's vocabulary where it exists.
  model.children.resize(num_parents);
  std::vector<std::exception_ptr> errors(num_parents);
  auto train_child = [&](std::size_t p) {
    try {
      const auto& parent = labels.parents()[p];
      const auto& kids = labels.children_of(parent);
      std::vector<int> targets;
      targets.reserve(domain_docs[p].size());
      for (std::size_t i : domain_docs[p]) {
        targets.push_back(
            labels.child_index(parent, train.documents[i].child_label));
      }
      model.children[p] = fit_submodel(
          cfg.child_kind, cfg, tokens, domain_docs[p], targets, kids,
          embeddings, global_scope ? &global_pipeline : nullptr,
          Rng::derive(cfg.seed, p + 1), nullptr);
    } catch (...) {
      errors[p] = std::current_exception();
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
  if (jobs == 1) {
    for (std::size_t p = 0; p < num_parents; ++p) {
      if (log != nullptr) {
        *log << "# training child model for '" << labels.parents()[p] << "'\n";
      }
      train_child(p);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < std::min(jobs, num_parents); ++w) {
      pool.emplace_back([&] {
        for (std::size_t p = next.fetch_add(1); p < num_parents;
             p = next.fetch_add(1)) {
          train_child(p);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return model;
}

Prediction predict_document(const HierarchicalModel& model,
                            const std::string& text) {
  const auto tokens = tokenize(clean_text(text, model.config.features.lowercase));

  Prediction pred;
  pred.parent_probs = model.parent.predict_probs(tokens);
  const int p = argmax_lowest(pred.parent_probs);
  pred.parent_label = model.labels.parents()[static_cast<std::size_t>(p)];

  const auto& child_model = model.children[static_cast<std::size_t>(p)];
  pred.child_probs = child_model.predict_probs(tokens);
  const int c = argmax_lowest(pred.child_probs);
  pred.child_label = child_model.class_labels[static_cast<std::size_t>(c)];
  return pred;
}

LevelMetrics evaluate_hierarchy(const HierarchicalModel& model,
                                const Dataset& test) {
  if (test.documents.empty()) throw DataError("empty test set");
  const auto& labels = model.labels;
  const std::size_t num_parents = labels.parents().size();

  std::size_t parent_correct = 0;
  std::size_t end_to_end_correct = 0;
  std::vector<std::size_t> domain_total(num_parents, 0);
  std::vector<std::size_t> domain_correct(num_parents, 0);

  for (const auto& doc : test.documents) {
    const int true_p = labels.parent_index(doc.parent_label);
    if (true_p < 0) {
      throw DataError("test document parent '" + doc.parent_label +
                      "' not in model label space");
    }
    const int true_c = labels.child_index(doc.parent_label, doc.child_label);
    if (true_c < 0) {
      throw DataError("test document child '" + doc.child_label +
                      "' not in model label space");
    }

    const auto tokens = tokenize(doc.text);

    // Routed prediction.
    const auto parent_probs = model.parent.predict_probs(tokens);
    const int pred_p = argmax_lowest(parent_probs);
    const bool parent_ok = pred_p == true_p;
    if (parent_ok) ++parent_correct;

    const auto& routed_child = model.children[static_cast<std::size_t>(pred_p)];
    const int routed_c = argmax_lowest(routed_child.predict_probs(tokens));
    const std::string& routed_label =
        routed_child.class_labels[static_cast<std::size_t>(routed_c)];
    if (parent_ok && routed_label == doc.child_label) ++end_to_end_correct;

    // Oracle routing for the per-level child columns.
    domain_total[static_cast<std::size_t>(true_p)]++;
    const auto& oracle_child = model.children[static_cast<std::size_t>(true_p)];
    const int oracle_c = argmax_lowest(oracle_child.predict_probs(tokens));
    if (oracle_child.class_labels[static_cast<std::size_t>(oracle_c)] ==
        doc.child_label) {
      domain_correct[static_cast<std::size_t>(true_p)]++;
    }
  }

  LevelMetrics metrics;
  const double n_docs = static_cast<double>(test.documents.size());
  metrics.parent_accuracy = static_cast<double>(parent_correct) / n_docs;
  metrics.end_to_end_accuracy =
      static_cast<double>(end_to_end_correct) / n_docs;

  std::vector<std::pair<double, std::size_t>> child_pairs;
  for (std::size_t p = 0; p < num_parents; ++p) {
    if (domain_total[p] == 0) continue;
    DomainAccuracy da;
    da.parent = labels.parents()[p];
    da.test_count = domain_total[p];
    da.accuracy = static_cast<double>(domain_correct[p]) /
                  static_cast<double>(domain_total[p]);
    metrics.per_domain_child_accuracy.push_back(da);
    child_pairs.emplace_back(da.accuracy, da.test_count);
  }
  metrics.combined_accuracy =
      combined_accuracy(metrics.parent_accuracy, child_pairs);
  double total = 0.0, weighted = 0.0;
  for (const auto& [acc, n] : child_pairs) {
    weighted += acc * static_cast<double>(n);
    total += static_cast<double>(n);
  }
  metrics.weighted_child_accuracy = weighted / total;
  return metrics;
}

double combined_accuracy(
    double parent_acc,
    const std::vector<std::pair<double, std::size_t>>& child) {
  double total = 0.0, weighted = 0.0;
  for (const auto& [acc, n] : child) {
    weighted += acc * static_cast<double>(n);
    total += static_cast<double>(n);
  }
  if (total == 0.0) throw DataError("combined_accuracy: no test documents");
  return parent_acc * (weighted / total);
}

}  // namespace hdltex
