#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "hdltex/layers.hpp"

namespace hdltex {

enum class InputKind : std::uint8_t { kSparseVector = 0, kEncodedSequence = 1 };

// Model input: a sparse feature vector (bag-of-ngrams path) or an embedded
// token sequence (recurrent/convolutional path).
struct Feature {
  InputKind kind = InputKind::kSparseVector;
  SparseVector sparse;
  EncodedSequence sequence;

  static Feature from(SparseVector v) {
    Feature f;
    f.kind = InputKind::kSparseVector;
    f.sparse = std::move(v);
    return f;
  }
  static Feature from(EncodedSequence s) {
    Feature f;
    f.kind = InputKind::kEncodedSequence;
    f.sequence = std::move(s);
    return f;
  }
};

// Ordered layer stack ending in a softmax dense layer. The stack owns its
// parameters and congruent gradient buffers; a frozen network is immutable
// and safe for concurrent inference.
class Network {
 public:
  Network() = default;
  Network(InputKind input_kind, std::size_t num_classes)
      : input_kind_(input_kind), num_classes_(num_classes) {}

  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  InputKind input_kind() const { return input_kind_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t layer_count() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  // Softmax only on the final layer; final width must equal num_classes.
  void validate() const;

  void init_params(Rng& rng);
  std::vector<ParamRef> param_refs();
  void zero_grads();

  // Inference: class probabilities (sum to 1 for any finite input).
  Tensor predict(const Feature& x) const;

  struct ExampleResult {
    double loss = 0.0;
    int predicted = -1;
  };

  // Forward + backward for one example. Gradients are accumulated into the
  // layer buffers scaled by `scale` (1/batch_size gives the batch mean).
  ExampleResult accumulate_gradients(const Feature& x, int target,
                                     double scale, bool training, Rng* rng);

  // Mean cross-entropy over a batch, evaluation mode (no dropout).
  double mean_loss(const std::vector<Feature>& inputs,
                   const std::vector<int>& targets) const;

 private:
  Signal forward_all(const Feature& x, std::vector<CtxPtr>* ctxs,
                     bool training, Rng* rng) const;

  std::vector<std::unique_ptr<Layer>> layers_;
  InputKind input_kind_ = InputKind::kSparseVector;
  std::size_t num_classes_ = 0;
};

// Zeroes the buffers, accumulates mean-batch gradients, returns mean loss.
double compute_gradients(Network& net, const std::vector<Feature>& inputs,
                         const std::vector<int>& targets);

// Central-difference verification of the analytic gradients. Samples
// `samples_per_tensor` coordinates per parameter tensor (all when the tensor
// is smaller) and returns the worst relative error
// |a - n| / max(|a|, |n|, 1e-8). Runs in evaluation mode.
double grad_check(Network& net, const std::vector<Feature>& inputs,
                  const std::vector<int>& targets, double epsilon,
                  std::size_t samples_per_tensor, std::uint64_t seed);

}  // namespace hdltex
