#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "hdltex/network.hpp"
#include "hdltex/optim.hpp"

namespace hdltex {

// Training examples by index; `feature_at` must be deterministic so large
// sequence encodings can be produced on the fly instead of held in memory.
struct TrainSet {
  std::function<Feature(std::size_t)> feature_at;
  std::vector<int> targets;

  std::size_t size() const { return targets.size(); }

  static TrainSet from_features(std::vector<Feature> features,
                                std::vector<int> targets);
};

struct TrainOptions {
  OptConfig opt;
  std::size_t epochs = 1;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  double clip_norm = 0.0;  // global-norm gradient clip; 0 disables
  std::ostream* log = nullptr;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  double wall_seconds = 0.0;
};

// Mini-batch training: shuffled each epoch with the seeded RNG, optimizer
// state threaded across steps, bit-reproducible for a fixed seed. Accuracy
// is measured on the training-mode forward passes. Throws DivergenceError
// naming the step when the loss goes non-finite.
std::vector<EpochStats> train_network(Network& net, const TrainSet& data,
                                      const TrainOptions& opts);

}  // namespace hdltex
