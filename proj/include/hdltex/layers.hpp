#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hdltex/features.hpp"
#include "hdltex/rng.hpp"
#include "hdltex/tensor.hpp"

namespace hdltex {

enum class Activation : std::uint8_t {
  kIdentity = 0,
  kSigmoid = 1,
  kRelu = 2,
  kTanh = 3,
  kSoftmax = 4
};

// Elementwise sigmoid/relu/tanh; softmax uses max-subtraction so any finite
// logits give a valid distribution.
Tensor activate(Activation kind, const Tensor& z);

// -ln(probs[target]) with probs clamped at 1e-12.
double loss_cross_entropy(const Tensor& probs, int target);

// Inverted dropout: zero with probability `rate`, survivors scaled by
// 1/(1-rate). Training-mode only; inference is identity.
Tensor apply_dropout(const Tensor& v, double rate, Rng& rng);

// Value flowing between layers: a rank-1 vector or a {T, C} sequence.
// `seq_len` is the number of valid (non-padding) rows of a sequence.
struct Signal {
  Tensor value;
  std::size_t seq_len = 0;
};

struct LayerCtx {
  virtual ~LayerCtx() = default;
};
using CtxPtr = std::unique_ptr<LayerCtx>;

struct ParamRef {
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
  std::string name;
};

// One stage of a network. forward() is const and safe to call concurrently
// on a frozen model; backward() accumulates into layer-owned gradient
// buffers and requires exclusive ownership.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual const char* kind() const = 0;

  virtual Signal forward(const Signal& in, CtxPtr& ctx, bool training,
                         Rng* rng) const = 0;
  // dout is the gradient wrt this layer's output; returns gradient wrt its
  // input (empty when need_dx is false).
  virtual Signal backward(const Signal& dout, const LayerCtx& ctx,
                          bool need_dx) = 0;

  virtual void init_params(Rng& /*rng*/) {}
  virtual void collect_params(std::vector<ParamRef>& /*out*/,
                              const std::string& /*prefix*/) {}
  virtual void zero_grads() {}
};

class DenseLayer : public Layer {
 public:
  DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act);

  const char* kind() const override { return "dense"; }
  Signal forward(const Signal& in, CtxPtr& ctx, bool training,
                 Rng* rng) const override;
  // Sparse fast path for the input layer of the bag-of-ngrams models.
  Signal forward_sparse(const SparseVector& x, CtxPtr& ctx) const;

  Signal backward(const Signal& dout, const LayerCtx& ctx,
                  bool need_dx) override;
  // Entry point for the fused softmax + cross-entropy gradient: dlogits is
  // already the gradient wrt the pre-activation.
  Signal backward_from_logits(const Signal& dlogits, const LayerCtx& ctx,
                              bool need_dx);

  void init_params(Rng& rng) override;  // Glorot-uniform, zero bias
  void collect_params(std::vector<ParamRef>& out,
                      const std::string& prefix) override;
  void zero_grads() override;

  std::size_t in_dim() const { return weights_.dim(1); }
  std::size_t out_dim() const { return weights_.dim(0); }
  Activation activation() const { return act_; }

  Tensor& weights() { return weights_; }
  Tensor& bias() { return bias_; }

 private:
  Signal backward_impl(const Tensor& dz, const LayerCtx& ctx, bool need_dx);

  Tensor weights_;  // {out, in}
  Tensor bias_;     // {out}
  Tensor gw_, gb_;
  Activation act_;
};

class DropoutLayer : public Layer {
 public:
  explicit DropoutLayer(double rate);

  const char* kind() const override { return "dropout"; }
  Signal forward(const Signal& in, CtxPtr& ctx, bool training,
                 Rng* rng) const override;
  Signal backward(const Signal& dout, const LayerCtx& ctx,
                  bool need_dx) override;

  double rate() const { return rate_; }

 private:
  double rate_;
};

// {T, C} -> {T*C} row-major.
class FlattenLayer : public Layer {
 public:
  const char* kind() const override { return "flatten"; }
  Signal forward(const Signal& in, CtxPtr& ctx, bool training,
                 Rng* rng) const override;
  Signal backward(const Signal& dout, const LayerCtx& ctx,
                  bool need_dx) override;
};

enum class SequencePooling : std::uint8_t { kLastState = 0, kMeanOverTime = 1 };

// Collapses a hidden sequence {T, H} to one vector using only the valid
// seq_len rows. An empty sequence pools to the zero vector.
class SequencePoolLayer : public Layer {
 public:
  explicit SequencePoolLayer(SequencePooling pooling) : pooling_(pooling) {}

  const char* kind() const override { return "seqpool"; }
  Signal forward(const Signal& in, CtxPtr& ctx, bool training,
                 Rng* rng) const override;
  Signal backward(const Signal& dout, const LayerCtx& ctx,
                  bool need_dx) override;

  SequencePooling pooling() const { return pooling_; }

 private:
  SequencePooling pooling_;
};

}  // namespace hdltex
