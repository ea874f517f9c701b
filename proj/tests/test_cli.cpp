#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hdltex/cli.hpp"
#include "hdltex/common.hpp"
#include "hdltex/config.hpp"
#include "hdltex/serialize.hpp"
#include "synthetic.hpp"

using namespace hdltex;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

HdltexConfig tiny_config() {
  HdltexConfig cfg;
  cfg.features.max_n = 1;
  cfg.features.min_count = 1;
  cfg.features.max_features = 500;
  cfg.epochs = 8;
  cfg.batch_size = 16;
  cfg.seed = 3;
  cfg.dnn_width = 16;
  cfg.dnn_depth = 1;
  cfg.dnn_dropout = 0.0;
  cfg.opt.alpha = 0.01;
  return cfg;
}

Dataset small_synthetic() {
  synthetic::Spec spec;
  spec.parents = 2;
  spec.children_per_parent = 2;
  spec.docs_per_child = 12;
  spec.vocab_words = 200;
  spec.support_per_child = 10;
  spec.doc_len = 12;
  spec.seed = 404;
  return synthetic::corpus(spec);
}

}  // namespace

TEST_CASE("KvConfig parses sections, comments and values") {
  KvConfig kv = KvConfig::parse_string(
      "# comment\n"
      "top = 1\n"
      "[features]\n"
      "max_n = 2   ; trailing comment\n"
      "embedding_path = \n"
      "[optimizer]\n"
      "alpha = 0.001\n");
  CHECK(kv.get_int("top", 0) == 1);
  CHECK(kv.get_int("features.max_n", 0) == 2);
  CHECK(kv.get("features.embedding_path", "x") == "");
  CHECK(kv.get_double("optimizer.alpha", 0.0) == doctest::Approx(0.001));

  CHECK_THROWS_AS(KvConfig::parse_string("novalue\n"), DataError);
  CHECK_THROWS_AS(KvConfig::parse_string("[unterminated\n"), DataError);
  CHECK_THROWS_AS(
      KvConfig::parse_string("a = b\n").get_int("a", 0), DataError);
}

TEST_CASE("default config carries the training defaults") {
  KvConfig kv = KvConfig::parse_string(default_config_text());
  CHECK(kv.get_double("optimizer.alpha", 0) == doctest::Approx(0.001));
  CHECK(kv.get_double("optimizer.beta1", 0) == doctest::Approx(0.9));
  CHECK(kv.get_double("optimizer.beta2", 0) == doctest::Approx(0.999));
  CHECK(kv.get_double("optimizer.eps", 0) == doctest::Approx(1e-8));
  CHECK(kv.get_double("optimizer.decay", 1) == doctest::Approx(0.0));
  CHECK(kv.get_int("training.batch_size", 0) == 128);
  CHECK(kv.get_int("dnn.width", 0) == 1024);
  CHECK(kv.get_int("dnn.depth", 0) == 8);
  CHECK(kv.get_double("dnn.dropout", 0) == doctest::Approx(0.5));
  CHECK(kv.get_double("rnn.dropout", 0) == doctest::Approx(0.25));
  CHECK(kv.get_double("cnn.dropout", 0) == doctest::Approx(0.25));
  CHECK(kv.get_int("rnn.hidden", 0) == 100);
  CHECK(kv.get_int("features.max_len", 0) == 500);
}

TEST_CASE("config round-trips through kv text") {
  HdltexConfig cfg = tiny_config();
  cfg.parent_kind = ModelKind::kRnnLstm;
  cfg.child_vocab_scope = VocabScope::kGlobal;
  cfg.opt.kind = OptKind::kRmsProp;
  HdltexConfig back = config_from_kv(
      KvConfig::parse_string(kv_from_config(cfg).to_string()));
  CHECK(back.parent_kind == cfg.parent_kind);
  CHECK(back.child_vocab_scope == cfg.child_vocab_scope);
  CHECK(back.opt.kind == cfg.opt.kind);
  CHECK(back.dnn_width == cfg.dnn_width);
  CHECK(back.epochs == cfg.epochs);
  CHECK(back.features.min_count == cfg.features.min_count);
}

TEST_CASE("model container round-trips bit-exactly") {
  Dataset train = small_synthetic();
  HierarchicalModel model = train_hierarchy(tiny_config(), train);
  save_model(model, "tmp_cli_model.bin");
  HierarchicalModel loaded = load_model("tmp_cli_model.bin");

  auto a = const_cast<Network&>(model.parent.net).param_refs();
  auto b = loaded.parent.net.param_refs();
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(*a[k].value == *b[k].value);  // bit-exact doubles
  }

  // Same metrics as the in-memory model.
  LevelMetrics m1 = evaluate_hierarchy(model, train);
  LevelMetrics m2 = evaluate_hierarchy(loaded, train);
  CHECK(m1.parent_accuracy == m2.parent_accuracy);
  CHECK(m1.combined_accuracy == m2.combined_accuracy);
  CHECK(m1.end_to_end_accuracy == m2.end_to_end_accuracy);

  // Saving the loaded model reproduces the file byte for byte.
  save_model(loaded, "tmp_cli_model2.bin");
  CHECK(slurp("tmp_cli_model.bin") == slurp("tmp_cli_model2.bin"));
}

TEST_CASE("container corruption is detected with specific errors") {
  Dataset train = small_synthetic();
  HierarchicalModel model = train_hierarchy(tiny_config(), train);
  save_model(model, "tmp_cli_base.bin");
  const std::string good = slurp("tmp_cli_base.bin");

  spit("tmp_cli_trunc.bin", good.substr(0, good.size() / 2));
  CHECK_THROWS_AS(load_model("tmp_cli_trunc.bin"), ContainerError);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  spit("tmp_cli_magic.bin", bad_magic);
  CHECK_THROWS_WITH_AS(load_model("tmp_cli_magic.bin"),
                       "bad magic; not a model container", ContainerError);

  std::string future = good;
  future[8] = 9;  // version field follows the 8-byte magic
  spit("tmp_cli_future.bin", future);
  CHECK_THROWS_WITH_AS(load_model("tmp_cli_future.bin"),
                       "unsupported container version 9", ContainerError);

  std::string flipped = good;
  flipped[good.size() / 2] ^= 0x40;
  spit("tmp_cli_corrupt.bin", flipped);
  CHECK_THROWS_AS(load_model("tmp_cli_corrupt.bin"), std::runtime_error);
}

TEST_CASE("save_model leaves no partial file on an unwritable path") {
  Dataset train = small_synthetic();
  HierarchicalModel model = train_hierarchy(tiny_config(), train);
  const std::string target = "no_such_dir/model.bin";
  CHECK_THROWS_AS(save_model(model, target), DataError);
  CHECK(!std::ifstream(target).good());
  CHECK(!std::ifstream(target + ".tmp").good());
}

TEST_CASE("cli full flow: prepare, train, evaluate, predict, baseline") {
  Dataset ds = small_synthetic();
  write_tsv(ds, "tmp_cli_all.tsv");

  CHECK(run_command({"prepare", "--tsv", "tmp_cli_all.tsv", "--train-out",
                     "tmp_cli_train.tsv", "--test-out", "tmp_cli_test.tsv",
                     "--train-fraction", "0.75", "--seed", "5"}) == 0);

  {
    std::ofstream cfg("tmp_cli_cfg.txt");
    cfg << kv_from_config(tiny_config()).to_string();
  }
  CHECK(run_command({"train", "--train", "tmp_cli_train.tsv", "--config",
                     "tmp_cli_cfg.txt", "--seed", "11", "--out",
                     "tmp_cli_trained.bin", "--quiet"}) == 0);

  CHECK(run_command({"evaluate", "--model", "tmp_cli_trained.bin", "--test",
                     "tmp_cli_test.tsv", "--report", "kv"}) == 0);

  CHECK(run_command({"predict", "--model", "tmp_cli_trained.bin", "--text",
                     "w0 w1 w2 w3"}) == 0);

  CHECK(run_command({"baseline", "--train", "tmp_cli_train.tsv", "--test",
                     "tmp_cli_test.tsv", "--min-count", "1", "--report",
                     "kv"}) == 0);
}

TEST_CASE("cli exit codes: usage and data errors") {
  CHECK(run_command({"train", "--no-such-flag"}) == 1);
  CHECK(run_command({"definitely-not-a-subcommand"}) == 1);
  CHECK(run_command({"evaluate", "--model", "missing.bin", "--test",
                     "missing.tsv"}) == 2);
  CHECK(run_command({"prepare", "--tsv", "does_not_exist.tsv", "--out",
                     "tmp_cli_x.tsv"}) == 2);
}

TEST_CASE("cli training is byte-deterministic for a fixed seed") {
  Dataset ds = small_synthetic();
  write_tsv(ds, "tmp_cli_det.tsv");
  {
    std::ofstream cfg("tmp_cli_det_cfg.txt");
    cfg << kv_from_config(tiny_config()).to_string();
  }
  CHECK(run_command({"train", "--train", "tmp_cli_det.tsv", "--config",
                     "tmp_cli_det_cfg.txt", "--seed", "7", "--out",
                     "tmp_cli_det_a.bin", "--quiet"}) == 0);
  CHECK(run_command({"train", "--train", "tmp_cli_det.tsv", "--config",
                     "tmp_cli_det_cfg.txt", "--seed", "7", "--out",
                     "tmp_cli_det_b.bin", "--quiet"}) == 0);
  CHECK(slurp("tmp_cli_det_a.bin") == slurp("tmp_cli_det_b.bin"));
}
