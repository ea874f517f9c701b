#include "hdltex/gradcheck_suite.hpp"

#include <algorithm>

#include "hdltex/builders.hpp"

namespace hdltex {

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.max_rel_error);
  return w;
}

bool GradCheckReport::all_below(double bound) const {
  for (const auto& e : entries) {
    if (!(e.max_rel_error < bound)) return false;
  }
  return true;
}

std::vector<Feature> random_sparse_batch(std::size_t count, std::size_t dim,
                                         Rng& rng) {
  std::vector<Feature> batch;
  for (std::size_t i = 0; i < count; ++i) {
    SparseVector v;
    v.dimension = static_cast<std::uint32_t>(dim);
    for (std::uint32_t idx = 0; idx < dim; ++idx) {
      if (rng.uniform() < 0.6) {
        v.items.emplace_back(idx, rng.uniform(-1.0, 1.0));
      }
    }
    if (v.items.empty()) v.items.emplace_back(0, 1.0);
    batch.push_back(Feature::from(std::move(v)));
  }
  return batch;
}

std::vector<Feature> random_sequence_batch(std::size_t count,
                                           std::size_t max_len,
                                           std::size_t dim, Rng& rng) {
  std::vector<Feature> batch;
  for (std::size_t i = 0; i < count; ++i) {
    EncodedSequence seq;
    seq.max_len = max_len;
    seq.length = 1 + rng.index(max_len);
    seq.matrix = Tensor({max_len, dim});
    for (std::size_t t = 0; t < seq.length; ++t) {
      for (std::size_t j = 0; j < dim; ++j) {
        seq.matrix.at(t, j) = rng.normal() * 0.5;
      }
    }
    batch.push_back(Feature::from(std::move(seq)));
  }
  return batch;
}

std::vector<int> random_targets(std::size_t count, std::size_t num_classes,
                                Rng& rng) {
  std::vector<int> targets(count);
  for (auto& t : targets) t = static_cast<int>(rng.index(num_classes));
  return targets;
}

GradCheckReport run_gradcheck_suite(std::size_t num_seeds,
                                    std::uint64_t base_seed) {
  GradCheckReport report;
  constexpr double kEps = 1e-6;

  {
    GradCheckReport::Entry entry{"dense", 0.0};
    for (std::size_t s = 0; s < num_seeds; ++s) {
      const std::uint64_t seed = Rng::derive(base_seed, s);
      for (std::size_t depth = 1; depth <= 3; ++depth) {
        Rng rng(Rng::derive(seed, depth));
        DnnSpec spec{8, depth, 0.0, Activation::kRelu};
        Network net = build_hdltex_dnn(6, 3, spec);
        net.init_params(rng);
        auto batch = random_sparse_batch(4, 6, rng);
        auto targets = random_targets(4, 3, rng);
        entry.max_rel_error =
            std::max(entry.max_rel_error,
                     grad_check(net, batch, targets, kEps, 5, seed));
      }
    }
    report.entries.push_back(entry);
  }

  for (CellKind cell : {CellKind::kLSTM, CellKind::kGRU}) {
    GradCheckReport::Entry entry{cell == CellKind::kLSTM ? "lstm" : "gru", 0.0};
    for (std::size_t s = 0; s < num_seeds; ++s) {
      const std::uint64_t seed = Rng::derive(base_seed, 100 + s);
      Rng rng(seed);
      RnnSpec spec;
      spec.input_dim = 5;
      spec.hidden = 7;
      spec.layers = 2;
      spec.dropout = 0.0;
      Network net = build_hdltex_rnn(3, cell, spec);
      net.init_params(rng);
      auto batch = random_sequence_batch(3, 8, 5, rng);
      auto targets = random_targets(3, 3, rng);
      entry.max_rel_error = std::max(
          entry.max_rel_error, grad_check(net, batch, targets, kEps, 5, seed));
    }
    report.entries.push_back(entry);
  }

  {
    GradCheckReport::Entry entry{"cnn", 0.0};
    for (std::size_t s = 0; s < num_seeds; ++s) {
      const std::uint64_t seed = Rng::derive(base_seed, 200 + s);
      Rng rng(seed);
      CnnSpec spec;
      spec.input_dim = 6;
      spec.max_len = 40;
      spec.branch_filters = 8;
      spec.stage_filters = 8;
      spec.dense_width = 16;
      spec.dropout = 0.0;
      Network net = build_hdltex_cnn(3, spec);
      net.init_params(rng);
      auto batch = random_sequence_batch(2, 40, 6, rng);
      // The CNN consumes the padded matrix, so feed full-length sequences.
      for (auto& f : batch) f.sequence.length = 40;
      auto targets = random_targets(2, 3, rng);
      entry.max_rel_error = std::max(
          entry.max_rel_error, grad_check(net, batch, targets, kEps, 8, seed));
    }
    report.entries.push_back(entry);
  }

  return report;
}

}  // namespace hdltex
