#include "hdltex/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hdltex/common.hpp"
#include "hdltex/config.hpp"

static_assert(std::endian::native == std::endian::little,
              "container format is little-endian");

namespace hdltex {

namespace {

constexpr char kMagic[8] = {'H', 'D', 'L', 'T', 'E', 'X', 'M', 'C'};
constexpr std::uint32_t kVersion = 1;

enum SectionTag : std::uint32_t {
  kSecConfig = 1,
  kSecLabels = 2,
  kSecParent = 3,
  kSecChild = 4,
  kSecChecksum = 5,
  kSecEmbeddings = 6,
};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    buf_.append(s);
  }
  void tensor(const Tensor& t) {
    u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) u32(static_cast<std::uint32_t>(d));
    raw(t.data(), t.size() * sizeof(double));
  }
  void append(const std::string& payload) { buf_.append(payload); }
  const std::string& bytes() const { return buf_; }

 private:
  void raw(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::string& buf, std::size_t pos = 0)
      : buf_(buf), pos_(pos) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Tensor tensor() {
    const std::uint32_t rank = u32();
    if (rank > 8) throw ContainerError("implausible tensor rank");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = u32();
    Tensor t(shape);
    raw(t.data(), t.size() * sizeof(double));
    return t;
  }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t pos) {
    if (pos > buf_.size()) throw ContainerError("unexpected end of container");
    pos_ = pos;
  }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > buf_.size()) {
      throw ContainerError("unexpected end of container");
    }
  }
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  const std::string& buf_;
  std::size_t pos_;
};

void write_section(ByteWriter& out, std::uint32_t tag,
                   const std::string& payload) {
  out.u32(tag);
  out.u64(payload.size());
  out.append(payload);
}

void write_labels(ByteWriter& w, const LabelSpace& labels) {
  w.u64(labels.parents().size());
  for (const auto& parent : labels.parents()) {
    w.str(parent);
    const auto& kids = labels.children_of(parent);
    w.u64(kids.size());
    for (const auto& child : kids) w.str(child);
  }
}

LabelSpace read_labels(ByteReader& r) {
  LabelSpace labels;
  const std::uint64_t np = r.u64();
  for (std::uint64_t p = 0; p < np; ++p) {
    const std::string parent = r.str();
    const std::uint64_t nc = r.u64();
    for (std::uint64_t c = 0; c < nc; ++c) labels.add_pair(parent, r.str());
  }
  return labels;
}

void write_vocab(ByteWriter& w, const Vocabulary& vocab) {
  w.u32(vocab.max_n);
  w.u64(vocab.num_docs_fit);
  w.u64(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    w.str(vocab.gram_of[i]);
    w.u32(vocab.doc_freq[i]);
  }
}

Vocabulary read_vocab(ByteReader& r) {
  Vocabulary vocab;
  vocab.max_n = r.u32();
  vocab.num_docs_fit = r.u64();
  const std::uint64_t n = r.u64();
  vocab.gram_of.reserve(n);
  vocab.doc_freq.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string gram = r.str();
    vocab.entries.emplace(gram, static_cast<std::uint32_t>(i));
    vocab.gram_of.push_back(std::move(gram));
    vocab.doc_freq.push_back(r.u32());
  }
  return vocab;
}

void write_embeddings(ByteWriter& w, const EmbeddingTable& table) {
  w.u32(table.dim);
  w.u8(static_cast<std::uint8_t>(table.oov_policy));
  w.u64(table.vectors.size());
  // Sorted token order keeps the bytes reproducible.
  std::vector<const std::string*> tokens;
  tokens.reserve(table.vectors.size());
  for (const auto& [token, vec] : table.vectors) tokens.push_back(&token);
  std::sort(tokens.begin(), tokens.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const auto* token : tokens) {
    w.str(*token);
    for (double v : table.vectors.at(*token)) w.f64(v);
  }
}

EmbeddingTable read_embeddings(ByteReader& r) {
  EmbeddingTable table;
  table.dim = r.u32();
  table.oov_policy = static_cast<OovPolicy>(r.u8());
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string token = r.str();
    std::vector<double> vec(table.dim);
    for (auto& v : vec) v = r.f64();
    table.vectors.emplace(std::move(token), std::move(vec));
  }
  return table;
}

bool kind_uses_sequences(ModelKind kind) {
  return kind == ModelKind::kRnnGru || kind == ModelKind::kRnnLstm ||
         kind == ModelKind::kCnn;
}

std::string encode_submodel(const SubModel& sub) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(sub.kind));
  w.u64(sub.class_labels.size());
  for (const auto& label : sub.class_labels) w.str(label);

  if (sub.kind == ModelKind::kNbc) {
    write_vocab(w, sub.vocab);
    w.f64(sub.nb.alpha);
    w.u32(sub.nb.vocab_size);
    Tensor priors({sub.nb.num_classes()});
    for (std::size_t c = 0; c < sub.nb.num_classes(); ++c) {
      priors[c] = sub.nb.class_log_prior[c];
    }
    Tensor likelihood({sub.nb.num_classes(), sub.nb.vocab_size});
    for (std::size_t c = 0; c < sub.nb.num_classes(); ++c) {
      for (std::uint32_t t = 0; t < sub.nb.vocab_size; ++t) {
        likelihood.at(c, t) = sub.nb.word_log_likelihood[c][t];
      }
    }
    w.tensor(priors);
    w.tensor(likelihood);
    return w.bytes();
  }

  if (sub.kind == ModelKind::kDnn) {
    write_vocab(w, sub.vocab);
    Tensor idf({sub.idf.size()});
    for (std::size_t i = 0; i < sub.idf.size(); ++i) idf[i] = sub.idf[i];
    w.tensor(idf);
  } else {
    w.u64(sub.max_len);  // the embedding table lives in its shared section
  }

  auto refs = const_cast<Network&>(sub.net).param_refs();  // read-only use
  w.u64(refs.size());
  for (const auto& ref : refs) w.tensor(*ref.value);
  return w.bytes();
}

SubModel decode_submodel(const std::string& payload, const HdltexConfig& cfg,
                         bool is_parent,
                         std::shared_ptr<const EmbeddingTable> embeddings) {
  ByteReader r(payload);
  SubModel sub;
  sub.kind = static_cast<ModelKind>(r.u8());
  const std::uint64_t n_labels = r.u64();
  for (std::uint64_t i = 0; i < n_labels; ++i) {
    sub.class_labels.push_back(r.str());
  }
  const std::size_t num_classes = sub.class_labels.size();

  if (sub.kind == ModelKind::kNbc) {
    sub.vocab = read_vocab(r);
    sub.nb.alpha = r.f64();
    sub.nb.vocab_size = r.u32();
    Tensor priors = r.tensor();
    Tensor likelihood = r.tensor();
    if (priors.size() != num_classes || likelihood.rank() != 2 ||
        likelihood.dim(0) != num_classes ||
        likelihood.dim(1) != sub.nb.vocab_size) {
      throw ContainerError("naive Bayes tensor shape mismatch");
    }
    sub.nb.class_log_prior.assign(priors.data(), priors.data() + priors.size());
    sub.nb.word_log_likelihood.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
      sub.nb.word_log_likelihood[c].assign(
          likelihood.data() + c * sub.nb.vocab_size,
          likelihood.data() + (c + 1) * sub.nb.vocab_size);
    }
    if (!r.at_end()) throw ContainerError("trailing bytes in submodel");
    return sub;
  }

  if (sub.kind == ModelKind::kDnn) {
    sub.vocab = read_vocab(r);
    Tensor idf = r.tensor();
    sub.idf.assign(idf.data(), idf.data() + idf.size());
    DnnSpec spec{cfg.dnn_width, cfg.dnn_depth, cfg.dnn_dropout,
                 Activation::kRelu};
    sub.net = build_hdltex_dnn(sub.vocab.size(), num_classes, spec);
  } else {
    sub.max_len = r.u64();
    sub.embeddings = std::move(embeddings);
    if (sub.embeddings == nullptr) {
      throw ContainerError("sequence submodel without an embedding section");
    }
    if (sub.kind == ModelKind::kCnn) {
      CnnSpec spec;
      spec.input_dim = cfg.features.embed_dim;
      spec.max_len = sub.max_len;
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
          sub.kind == ModelKind::kRnnLstm ? CellKind::kLSTM : CellKind::kGRU,
          spec);
    }
  }

  const std::uint64_t n_tensors = r.u64();
  auto refs = sub.net.param_refs();
  if (n_tensors != refs.size()) {
    throw ContainerError("parameter tensor count mismatch");
  }
  for (auto& ref : refs) {
    Tensor t = r.tensor();
    if (!t.same_shape(*ref.value)) {
      throw ContainerError("parameter tensor shape mismatch at " + ref.name);
    }
    *ref.value = std::move(t);
  }
  if (!r.at_end()) throw ContainerError("trailing bytes in submodel");
  (void)is_parent;
  return sub;
}

}  // namespace

void save_model(const HierarchicalModel& model, const std::string& path) {
  ByteWriter out;
  for (char c : kMagic) out.u8(static_cast<std::uint8_t>(c));
  out.u32(kVersion);

  write_section(out, kSecConfig, kv_from_config(model.config).to_string());

  {
    ByteWriter w;
    write_labels(w, model.labels);
    write_section(out, kSecLabels, w.bytes());
  }

  // The embedding table is shared by every sequence submodel; store it once.
  const EmbeddingTable* table = nullptr;
  if (model.parent.embeddings != nullptr) table = model.parent.embeddings.get();
  for (const auto& child : model.children) {
    if (table == nullptr && child.embeddings != nullptr) {
      table = child.embeddings.get();
    }
  }
  if (table != nullptr) {
    ByteWriter w;
    write_embeddings(w, *table);
    write_section(out, kSecEmbeddings, w.bytes());
  }

  write_section(out, kSecParent, encode_submodel(model.parent));
  for (const auto& child : model.children) {
    write_section(out, kSecChild, encode_submodel(child));
  }

  {
    ByteWriter w;
    w.u64(fnv1a(out.bytes()));
    write_section(out, kSecChecksum, w.bytes());
  }

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write '" + path + "'");
    f.write(out.bytes().data(),
            static_cast<std::streamsize>(out.bytes().size()));
    if (!f) {
      f.close();
      std::remove(tmp.c_str());
      throw DataError("write failed for '" + path + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DataError("cannot move temporary file onto '" + path + "'");
  }
}

HierarchicalModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string bytes = ss.str();

  ByteReader header(bytes);
  char magic[8];
  for (char& c : magic) c = static_cast<char>(header.u8());
  if (std::memcmp(magic, kMagic, 8) != 0) {
    throw ContainerError("bad magic; not a model container");
  }
  const std::uint32_t version = header.u32();
  if (version != kVersion) {
    throw ContainerError("unsupported container version " +
                         std::to_string(version));
  }

  HierarchicalModel model;
  std::shared_ptr<const EmbeddingTable> embeddings;
  bool have_config = false, have_labels = false, have_parent = false;
  bool checksum_ok = false;

  ByteReader r(bytes, header.pos());
  std::vector<std::pair<std::uint32_t, std::string>> submodel_payloads;
  while (!r.at_end()) {
    const std::uint32_t tag = r.u32();
    const std::uint64_t len = r.u64();
    const std::size_t body_start = r.pos();
    if (body_start + len > bytes.size()) {
      throw ContainerError("unexpected end of container");
    }
    std::string payload = bytes.substr(body_start, len);
    r.seek(body_start + len);

    switch (tag) {
      case kSecConfig:
        model.config = config_from_kv(KvConfig::parse_string(payload));
        have_config = true;
        break;
      case kSecLabels: {
        ByteReader lr(payload);
        model.labels = read_labels(lr);
        have_labels = true;
        break;
      }
      case kSecEmbeddings: {
        ByteReader er(payload);
        embeddings = std::make_shared<const EmbeddingTable>(read_embeddings(er));
        break;
      }
      case kSecParent:
      case kSecChild:
        submodel_payloads.emplace_back(tag, std::move(payload));
        break;
      case kSecChecksum: {
        ByteReader cr(payload);
        const std::uint64_t stored = cr.u64();
        const std::uint64_t computed =
            fnv1a(bytes.substr(0, body_start - sizeof(std::uint32_t) -
                                      sizeof(std::uint64_t)));
        if (stored != computed) {
          throw ContainerError("checksum mismatch; container corrupted");
        }
        checksum_ok = true;
        if (!r.at_end()) {
          throw ContainerError("sections after checksum");
        }
        break;
      }
      default:
        throw ContainerError("unexpected section tag " + std::to_string(tag));
    }
  }

  if (!have_config || !have_labels) {
    throw ContainerError("container missing config or label sections");
  }
  if (!checksum_ok) throw ContainerError("container missing checksum");

  for (auto& [tag, payload] : submodel_payloads) {
    if (tag == kSecParent) {
      model.parent = decode_submodel(payload, model.config, true, embeddings);
      have_parent = true;
    } else {
      model.children.push_back(
          decode_submodel(payload, model.config, false, embeddings));
    }
  }
  if (!have_parent) throw ContainerError("container missing parent model");
  if (model.children.size() != model.labels.parents().size()) {
    throw ContainerError("child model count does not match label space");
  }
  return model;
}

}  // namespace hdltex
