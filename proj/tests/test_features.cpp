#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "hdltex/common.hpp"
#include "hdltex/features.hpp"
#include "hdltex/rng.hpp"
#include "hdltex/text.hpp"

using namespace hdltex;

namespace {

const std::vector<std::string> kSentence =
    tokenize("in this paper we introduced this technique");

double value_at(const SparseVector& v, std::uint32_t idx) {
  for (const auto& [i, x] : v.items) {
    if (i == idx) return x;
  }
  return 0.0;
}

double count_of(const SparseVector& v, const Vocabulary& vocab,
                const std::string& gram) {
  auto it = vocab.entries.find(gram);
  REQUIRE(it != vocab.entries.end());
  return value_at(v, it->second);
}

}  // namespace

TEST_CASE("build_vocab keeps unigrams and bigrams of the sample sentence") {
  Vocabulary vocab = build_vocab({kSentence}, 2, 1, 1000);
  CHECK(vocab.entries.count("this") == 1);
  CHECK(vocab.entries.count("in this") == 1);
  CHECK(vocab.max_n == 2);
  CHECK(vocab.num_docs_fit == 1);
  // 6 distinct unigrams + 6 distinct bigrams
  CHECK(vocab.size() == 12);
}

TEST_CASE("build_vocab document frequency and retention rules") {
  Vocabulary vocab = build_vocab({kSentence, kSentence}, 1, 1, 1000);
  for (std::uint32_t i = 0; i < vocab.size(); ++i) {
    CHECK(vocab.doc_freq[i] == 2);
  }

  CHECK_THROWS_WITH_AS(build_vocab({kSentence}, 1, 5, 1000),
                       "no features retained", DataError);
  CHECK_THROWS_AS(build_vocab({kSentence}, 1, 1, 0), DataError);
  CHECK_THROWS_AS(build_vocab({}, 1, 1, 10), DataError);
}

TEST_CASE("build_vocab caps features by df then lexicographic order") {
  std::vector<std::vector<std::string>> docs = {
      {"alpha", "beta"}, {"alpha", "gamma"}, {"alpha", "beta"}};
  Vocabulary vocab = build_vocab(docs, 1, 1, 2);
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.gram_of[0] == "alpha");  // df 3
  CHECK(vocab.gram_of[1] == "beta");   // df 2 beats gamma's df 1
}

TEST_CASE("count_ngrams reproduces the sample sentence feature counts") {
  Vocabulary vocab = build_vocab({kSentence}, 2, 1, 1000);
  SparseVector counts = count_ngrams(kSentence, vocab);
  CHECK(count_of(counts, vocab, "this") == doctest::Approx(2.0));
  CHECK(count_of(counts, vocab, "paper") == doctest::Approx(1.0));
  CHECK(count_of(counts, vocab, "in this") == doctest::Approx(1.0));

  CHECK(count_ngrams({}, vocab).items.empty());
}

TEST_CASE("count_ngrams ignores out-of-vocabulary grams") {
  Vocabulary vocab = build_vocab({{"known", "words"}}, 1, 1, 10);
  SparseVector counts = count_ngrams({"unknown", "known"}, vocab);
  REQUIRE(counts.items.size() == 1);
  CHECK(count_of(counts, vocab, "known") == doctest::Approx(1.0));
}

TEST_CASE("unigram counts sum to the token count") {
  Rng rng(11);
  std::vector<std::string> alphabet = {"a", "b", "c", "d", "e", "f"};
  std::vector<std::vector<std::string>> docs;
  for (int d = 0; d < 50; ++d) {
    std::vector<std::string> doc;
    const std::size_t len = 1 + rng.index(30);
    for (std::size_t i = 0; i < len; ++i) {
      doc.push_back(alphabet[rng.index(alphabet.size())]);
    }
    docs.push_back(doc);
  }
  Vocabulary vocab = build_vocab(docs, 1, 1, 100);
  for (const auto& doc : docs) {
    double total = 0.0;
    for (const auto& [idx, v] : count_ngrams(doc, vocab).items) total += v;
    CHECK(total == doctest::Approx(static_cast<double>(doc.size())));
  }
}

TEST_CASE("bigram counts are order-sensitive, unigram counts are not") {
  std::vector<std::string> fwd = {"x", "y", "z"};
  std::vector<std::string> rev = {"z", "y", "x"};
  Vocabulary uni = build_vocab({fwd}, 1, 1, 10);
  CHECK(count_ngrams(fwd, uni).items == count_ngrams(rev, uni).items);

  Vocabulary bi = build_vocab({fwd}, 2, 1, 10);
  CHECK(count_ngrams(fwd, bi).items != count_ngrams(rev, bi).items);
}

TEST_CASE("fit_idf follows the smoothed formula") {
  Vocabulary vocab = build_vocab(
      {{"common", "rare"}, {"common"}, {"common"}}, 1, 1, 10);
  const std::uint32_t common = vocab.entries.at("common");
  const std::uint32_t rare = vocab.entries.at("rare");

  std::vector<SparseVector> counts;
  counts.push_back(count_ngrams({"common", "rare"}, vocab));
  counts.push_back(count_ngrams({"common"}, vocab));
  counts.push_back(count_ngrams({"common"}, vocab));
  auto idf = fit_idf(counts, vocab);

  // term in every one of n docs: ln(1) + 1
  CHECK(idf[common] == doctest::Approx(1.0));
  // term in 1 of 3 docs: ln(4/2) + 1
  CHECK(idf[rare] == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-12));
}

TEST_CASE("fit_idf of an unseen index is ln(1+n)+1") {
  std::vector<std::vector<std::string>> docs = {{"a", "b"}, {"a"}};
  Vocabulary vocab = build_vocab(docs, 1, 1, 10);
  // Only feed documents that never contain "b".
  std::vector<SparseVector> counts = {count_ngrams({"a"}, vocab),
                                      count_ngrams({"a"}, vocab),
                                      count_ngrams({"a"}, vocab)};
  auto idf = fit_idf(counts, vocab);
  CHECK(idf[vocab.entries.at("b")] ==
        doctest::Approx(std::log(4.0) + 1.0).epsilon(1e-12));
}

TEST_CASE("tfidf_vector normalizes as derived by hand") {
  SparseVector counts;
  counts.dimension = 2;
  counts.items = {{0, 2.0}, {1, 1.0}};
  std::vector<double> idf = {1.0, 1.0};
  SparseVector v = tfidf_vector(counts, idf);
  const double root5 = std::sqrt(5.0);
  CHECK(value_at(v, 0) == doctest::Approx(2.0 / root5).epsilon(1e-12));
  CHECK(value_at(v, 1) == doctest::Approx(1.0 / root5).epsilon(1e-12));
}

TEST_CASE("tfidf_vector edge cases") {
  std::vector<double> idf = {1.5, 2.0};

  SparseVector zero;
  zero.dimension = 2;
  CHECK(tfidf_vector(zero, idf).items.empty());

  SparseVector single;
  single.dimension = 2;
  single.items = {{1, 3.0}};
  SparseVector v = tfidf_vector(single, idf);
  CHECK(value_at(v, 1) == doctest::Approx(1.0));
}

TEST_CASE("tfidf_vector output is unit-norm for nonzero input") {
  Rng rng(5);
  std::vector<double> idf(20);
  for (auto& x : idf) x = rng.uniform(0.5, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    SparseVector counts;
    counts.dimension = 20;
    for (std::uint32_t i = 0; i < 20; ++i) {
      if (rng.uniform() < 0.3) {
        counts.items.emplace_back(i, 1.0 + rng.index(5));
      }
    }
    if (counts.items.empty()) continue;
    CHECK(tfidf_vector(counts, idf).l2_norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

namespace {

std::string write_embedding_file(const std::string& name,
                                 const std::string& content) {
  const std::string path = "tmp_features_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_embeddings parses tokens and validates components") {
  const auto path = write_embedding_file(
      "ok.txt", "the 0.1 0.2 0.3\ncat 1.0 -1.0 0.5\n");
  EmbeddingTable table = load_embeddings(path, 3);
  REQUIRE(table.vectors.count("the") == 1);
  CHECK(table.vectors.at("cat")[2] == doctest::Approx(0.5));

  const auto short_line = write_embedding_file("short.txt", "the 0.1 0.2\n");
  CHECK_THROWS_AS(load_embeddings(short_line, 3), DataError);

  const auto long_line =
      write_embedding_file("long.txt", "the 0.1 0.2 0.3 0.4\n");
  CHECK_THROWS_AS(load_embeddings(long_line, 3), DataError);

  const auto bad = write_embedding_file("nan.txt", "the 0.1 nan 0.3\n");
  CHECK_THROWS_AS(load_embeddings(bad, 3), DataError);
}

TEST_CASE("load_embeddings keeps the last duplicate") {
  const auto path = write_embedding_file(
      "dup.txt", "tok 1 1 1\ntok 2 2 2\n");
  EmbeddingTable table = load_embeddings(path, 3);
  CHECK(table.vectors.at("tok")[0] == doctest::Approx(2.0));
}

TEST_CASE("encode_sequence pads, truncates and copies rows exactly") {
  EmbeddingTable table;
  table.dim = 2;
  table.vectors["a"] = {0.25, -0.5};
  table.vectors["b"] = {1.0 / 3.0, 0.125};

  EncodedSequence seq = encode_sequence({"a", "b", "a"}, table, 5);
  CHECK(seq.length == 3);
  CHECK(seq.max_len == 5);
  // bit-identical copies of the table rows
  CHECK(seq.matrix.at(0, 0) == 0.25);
  CHECK(seq.matrix.at(1, 0) == 1.0 / 3.0);
  CHECK(seq.matrix.at(2, 1) == -0.5);
  for (std::size_t t = 3; t < 5; ++t) {
    CHECK(seq.matrix.at(t, 0) == 0.0);
    CHECK(seq.matrix.at(t, 1) == 0.0);
  }

  EncodedSequence truncated =
      encode_sequence({"a", "b", "a", "b", "a", "b", "a", "b", "a", "b"},
                      table, 5);
  CHECK(truncated.length == 5);
  CHECK(truncated.matrix.dim(0) == 5);
}

TEST_CASE("encode_sequence applies the OOV policy") {
  EmbeddingTable table;
  table.dim = 2;
  table.vectors["known"] = {1.0, 2.0};

  EncodedSequence zero = encode_sequence({"known", "missing", "known"}, table, 4);
  CHECK(zero.length == 3);
  CHECK(zero.matrix.at(1, 0) == 0.0);
  CHECK(zero.matrix.at(1, 1) == 0.0);
  CHECK(zero.matrix.at(2, 0) == 1.0);

  table.oov_policy = OovPolicy::kSkipToken;
  EncodedSequence skipped =
      encode_sequence({"known", "missing", "known"}, table, 4);
  CHECK(skipped.length == 2);
  CHECK(skipped.matrix.at(1, 0) == 1.0);
}

TEST_CASE("random_embeddings is deterministic and order-independent") {
  EmbeddingTable a = random_embeddings({"x", "y", "z"}, 4, 33);
  EmbeddingTable b = random_embeddings({"z", "x", "y"}, 4, 33);
  REQUIRE(a.vectors.size() == 3);
  for (const auto& [token, vec] : a.vectors) {
    CHECK(b.vectors.at(token) == vec);
  }
  EmbeddingTable c = random_embeddings({"x"}, 4, 34);
  CHECK(c.vectors.at("x") != a.vectors.at("x"));
}
