#include "hdltex/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "hdltex/common.hpp"
#include "hdltex/config.hpp"
#include "hdltex/corpus.hpp"
#include "hdltex/gradcheck_suite.hpp"
#include "hdltex/hierarchy.hpp"
#include "hdltex/serialize.hpp"
#include "hdltex/text.hpp"

namespace hdltex {

namespace {

struct PrepareArgs {
  std::string tsv, wos_x, wos_yl1, wos_yl2, wos_names;
  std::string out, train_out, test_out;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool no_lowercase = false;
};

int cmd_prepare(const PrepareArgs& a) {
  Dataset ds;
  const bool lowercase = !a.no_lowercase;
  if (!a.tsv.empty()) {
    ds = parse_tsv(a.tsv, lowercase);
  } else if (!a.wos_x.empty()) {
    ds = load_wos_layout(a.wos_x, a.wos_yl1, a.wos_yl2, a.wos_names, lowercase);
  } else {
    throw DataError("prepare needs --tsv or --wos-x/--wos-yl1/--wos-yl2");
  }
  std::cout << "documents=" << ds.size()
            << " parents=" << ds.labels.parents().size()
            << " children=" << ds.labels.total_children() << "\n";

  if (!a.out.empty()) {
    write_tsv(ds, a.out);
    std::cout << "wrote " << a.out << "\n";
    return 0;
  }
  if (a.train_out.empty() || a.test_out.empty()) {
    throw DataError("prepare needs --out, or both --train-out and --test-out");
  }
  auto [train, test] = stratified_split(ds, a.train_fraction, a.seed);
  write_tsv(train, a.train_out);
  write_tsv(test, a.test_out);
  std::cout << "wrote " << a.train_out << " (" << train.size() << ") and "
            << a.test_out << " (" << test.size() << ")\n";
  return 0;
}

struct TrainArgs {
  std::string train_path, config_path, out_path, dump_config;
  std::string parent_kind, child_kind;
  long long epochs = -1;
  long long seed = -1;
  long long batch = -1;
  long long jobs = -1;
  bool quiet = false;
};

HdltexConfig effective_config(const TrainArgs& a) {
  HdltexConfig cfg = a.config_path.empty()
                         ? HdltexConfig{}
                         : config_from_kv(KvConfig::parse_file(a.config_path));
  if (!a.parent_kind.empty()) cfg.parent_kind = model_kind_from_string(a.parent_kind);
  if (!a.child_kind.empty()) cfg.child_kind = model_kind_from_string(a.child_kind);
  if (a.epochs >= 0) cfg.epochs = static_cast<std::size_t>(a.epochs);
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  if (a.batch >= 0) cfg.batch_size = static_cast<std::size_t>(a.batch);
  if (a.jobs >= 0) cfg.jobs = static_cast<std::size_t>(a.jobs);
  return cfg;
}

int cmd_train(const TrainArgs& a) {
  HdltexConfig cfg = effective_config(a);
  if (!a.dump_config.empty()) {
    std::ofstream out(a.dump_config);
    if (!out) throw DataError("cannot write '" + a.dump_config + "'");
    out << kv_from_config(cfg).to_string();
    std::cout << "wrote " << a.dump_config << "\n";
    if (a.train_path.empty()) return 0;
  }
  if (a.train_path.empty()) throw DataError("train needs --train <tsv>");
  if (a.out_path.empty()) throw DataError("train needs --out <model>");

  Dataset train = parse_tsv(a.train_path, cfg.features.lowercase);
  HierarchicalModel model =
      train_hierarchy(cfg, train, a.quiet ? nullptr : &std::cout);
  save_model(model, a.out_path);
  std::cout << "wrote " << a.out_path << "\n";
  return 0;
}

void print_metrics(const LevelMetrics& m, const std::string& report) {
  std::cout << std::setprecision(6);
  if (report == "kv") {
    std::cout << "parent_accuracy=" << m.parent_accuracy << "\n";
    for (const auto& d : m.per_domain_child_accuracy) {
      std::cout << "child_accuracy." << d.parent << "=" << d.accuracy << "\n";
      std::cout << "n." << d.parent << "=" << d.test_count << "\n";
    }
    std::cout << "weighted_child_accuracy=" << m.weighted_child_accuracy
              << "\n";
    std::cout << "combined_accuracy=" << m.combined_accuracy << "\n";
    std::cout << "end_to_end_accuracy=" << m.end_to_end_accuracy << "\n";
    return;
  }
  std::cout << "parent accuracy:         " << m.parent_accuracy << "\n";
  for (const auto& d : m.per_domain_child_accuracy) {
    std::cout << "  " << d.parent << ": " << d.accuracy << " (n=" << d.test_count
              << ")\n";
  }
  std::cout << "weighted child accuracy: " << m.weighted_child_accuracy << "\n";
  std::cout << "combined accuracy:       " << m.combined_accuracy << "\n";
  std::cout << "end-to-end accuracy:     " << m.end_to_end_accuracy << "\n";
}

int cmd_evaluate(const std::string& model_path, const std::string& test_path,
                 const std::string& report) {
  HierarchicalModel model = load_model(model_path);
  Dataset test = parse_tsv(test_path, model.config.features.lowercase);
  print_metrics(evaluate_hierarchy(model, test), report);
  return 0;
}

void print_prediction(const HierarchicalModel& model, const Prediction& p,
                      bool full) {
  std::cout << std::setprecision(6) << "parent=" << p.parent_label
            << " p=" << *std::max_element(p.parent_probs.begin(),
                                          p.parent_probs.end())
            << " child=" << p.child_label
            << " p=" << *std::max_element(p.child_probs.begin(),
                                          p.child_probs.end())
            << "\n";
  if (full) {
    const auto& parents = model.labels.parents();
    for (std::size_t i = 0; i < parents.size(); ++i) {
      std::cout << "  P(" << parents[i] << ")=" << p.parent_probs[i] << "\n";
    }
    const auto& kids = model.labels.children_of(p.parent_label);
    for (std::size_t i = 0; i < kids.size(); ++i) {
      std::cout << "  P(" << kids[i] << ")=" << p.child_probs[i] << "\n";
    }
  }
}

int cmd_predict(const std::string& model_path, const std::string& text,
                const std::string& file, bool full) {
  HierarchicalModel model = load_model(model_path);
  if (!text.empty()) {
    print_prediction(model, predict_document(model, text), full);
    return 0;
  }
  if (file.empty()) throw DataError("predict needs --text or --file");
  std::ifstream in(file);
  if (!in) throw DataError("cannot open '" + file + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    print_prediction(model, predict_document(model, line), full);
  }
  return 0;
}

int cmd_gradcheck(std::size_t seeds) {
  const auto report = run_gradcheck_suite(seeds);
  bool ok = true;
  std::cout << std::setprecision(3) << std::scientific;
  for (const auto& e : report.entries) {
    const bool pass = e.max_rel_error < 1e-4;
    ok = ok && pass;
    std::cout << e.family << ": max_rel_error=" << e.max_rel_error << " "
              << (pass ? "ok" : "FAIL") << "\n";
  }
  return ok ? 0 : 3;
}

int cmd_baseline(const std::string& train_path, const std::string& test_path,
                 double alpha, const std::string& target,
                 std::uint32_t max_n, std::uint32_t min_count,
                 std::size_t max_features, const std::string& report) {
  Dataset train = parse_tsv(train_path);
  Dataset test = parse_tsv(test_path);

  // Flat classification over the chosen level's label set.
  std::vector<std::string> classes;
  auto label_of = [&](const Document& d) -> const std::string& {
    return target == "parent" ? d.parent_label : d.child_label;
  };
  for (const auto& parent : train.labels.parents()) {
    if (target == "parent") {
      classes.push_back(parent);
    } else {
      for (const auto& child : train.labels.children_of(parent)) {
        classes.push_back(child);
      }
    }
  }
  auto class_index = [&](const std::string& label) {
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i] == label) return static_cast<int>(i);
    }
    return -1;
  };

  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(train.size());
  for (const auto& doc : train.documents) tokens.push_back(tokenize(doc.text));
  Vocabulary vocab = build_vocab(tokens, max_n, min_count, max_features);

  std::vector<SparseVector> counts;
  std::vector<int> labels;
  counts.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    counts.push_back(count_ngrams(tokens[i], vocab));
    labels.push_back(class_index(label_of(train.documents[i])));
  }
  NaiveBayesModel model = nb_fit(counts, labels, classes.size(),
                                 static_cast<std::uint32_t>(vocab.size()),
                                 alpha);

  std::size_t correct = 0;
  for (const auto& doc : test.documents) {
    const int truth = class_index(label_of(doc));
    if (truth < 0) throw DataError("test label '" + label_of(doc) +
                                   "' unseen in training");
    const int pred = nb_classify(model, count_ngrams(tokenize(doc.text), vocab));
    if (pred == truth) ++correct;
  }
  const double acc =
      static_cast<double>(correct) / static_cast<double>(test.size());
  std::cout << std::setprecision(6);
  if (report == "kv") {
    std::cout << "nbc_accuracy=" << acc << "\nn=" << test.size() << "\n";
  } else {
    std::cout << "NBC " << target << "-level accuracy: " << acc << " ("
              << correct << "/" << test.size() << ")\n";
  }
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"HDLTex: hierarchical document classification"};
  app.require_subcommand(1);

  PrepareArgs prep;
  auto* prepare = app.add_subcommand("prepare", "Convert and split a corpus");
  prepare->add_option("--tsv", prep.tsv, "3-column TSV input");
  prepare->add_option("--wos-x", prep.wos_x, "WOS layout X.txt");
  prepare->add_option("--wos-yl1", prep.wos_yl1, "WOS layout YL1.txt");
  prepare->add_option("--wos-yl2", prep.wos_yl2, "WOS layout YL2.txt");
  prepare->add_option("--wos-names", prep.wos_names, "label name map file");
  prepare->add_option("--out", prep.out, "write one converted TSV, no split");
  prepare->add_option("--train-out", prep.train_out, "training split TSV");
  prepare->add_option("--test-out", prep.test_out, "test split TSV");
  prepare->add_option("--train-fraction", prep.train_fraction,
                      "fraction of each child label used for training");
  prepare->add_option("--seed", prep.seed, "split shuffle seed");
  prepare->add_flag("--no-lowercase", prep.no_lowercase,
                    "keep the original letter case");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a hierarchical model");
  train_cmd->add_option("--train", train.train_path, "training TSV");
  train_cmd->add_option("--config", train.config_path, "key=value config file");
  train_cmd->add_option("--parent-kind", train.parent_kind,
                        "dnn|rnn-gru|rnn-lstm|cnn|nbc");
  train_cmd->add_option("--child-kind", train.child_kind,
                        "dnn|rnn-gru|rnn-lstm|cnn|nbc");
  train_cmd->add_option("--epochs", train.epochs, "training epochs");
  train_cmd->add_option("--seed", train.seed, "RNG seed");
  train_cmd->add_option("--batch", train.batch, "batch size");
  train_cmd->add_option("--jobs", train.jobs, "parallel child training jobs");
  train_cmd->add_option("--out", train.out_path, "output model container");
  train_cmd->add_option("--dump-config", train.dump_config,
                        "write the effective config and continue");
  train_cmd->add_flag("--quiet", train.quiet, "suppress epoch logs");

  std::string eval_model, eval_test, eval_report = "text";
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a trained model");
  eval_cmd->add_option("--model", eval_model, "model container")->required();
  eval_cmd->add_option("--test", eval_test, "test TSV")->required();
  eval_cmd->add_option("--report", eval_report, "text|kv");

  std::string pred_model, pred_text, pred_file;
  bool pred_full = false;
  auto* pred_cmd = app.add_subcommand("predict", "Classify documents");
  pred_cmd->add_option("--model", pred_model, "model container")->required();
  pred_cmd->add_option("--text", pred_text, "one document as a string");
  pred_cmd->add_option("--file", pred_file, "file with one document per line");
  pred_cmd->add_flag("--full", pred_full, "print full probability tables");

  std::size_t gc_seeds = 5;
  auto* gc_cmd = app.add_subcommand("gradcheck",
                                    "Finite-difference gradient verification");
  gc_cmd->add_option("--seeds", gc_seeds, "random seeds per layer family");

  std::string bl_train, bl_test, bl_target = "child", bl_report = "text";
  double bl_alpha = 1.0;
  long long bl_max_n = 1, bl_min_count = 2, bl_max_features = 75000;
  auto* bl_cmd = app.add_subcommand("baseline", "Flat naive Bayes baseline");
  bl_cmd->add_option("--train", bl_train, "training TSV")->required();
  bl_cmd->add_option("--test", bl_test, "test TSV")->required();
  bl_cmd->add_option("--alpha", bl_alpha, "Laplace smoothing");
  bl_cmd->add_option("--target", bl_target, "child|parent");
  bl_cmd->add_option("--max-n", bl_max_n, "n-gram order");
  bl_cmd->add_option("--min-count", bl_min_count, "minimum document frequency");
  bl_cmd->add_option("--max-features", bl_max_features, "vocabulary cap");
  bl_cmd->add_option("--report", bl_report, "text|kv");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 1;
  }

  try {
    if (prepare->parsed()) return cmd_prepare(prep);
    if (train_cmd->parsed()) return cmd_train(train);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_model, eval_test, eval_report);
    if (pred_cmd->parsed()) {
      return cmd_predict(pred_model, pred_text, pred_file, pred_full);
    }
    if (gc_cmd->parsed()) return cmd_gradcheck(gc_seeds);
    if (bl_cmd->parsed()) {
      if (bl_target != "child" && bl_target != "parent") {
        throw DataError("--target must be child or parent");
      }
      return cmd_baseline(bl_train, bl_test, bl_alpha, bl_target,
                          static_cast<std::uint32_t>(bl_max_n),
                          static_cast<std::uint32_t>(bl_min_count),
                          static_cast<std::size_t>(bl_max_features), bl_report);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace hdltex
