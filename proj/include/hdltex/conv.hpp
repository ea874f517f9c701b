#pragma once

#include "hdltex/layers.hpp"

namespace hdltex {

// Valid (no padding) 1-D convolution over a {T, C} sequence, stride 1.
// Output is {T - width + 1, filter_count}.
class Conv1DLayer : public Layer {
 public:
  Conv1DLayer(std::size_t width, std::size_t in_channels,
              std::size_t filter_count, Activation act = Activation::kRelu);

  const char* kind() const override { return "conv1d"; }
  Signal forward(const Signal& in, CtxPtr& ctx, bool training,
                 Rng* rng) const override;
  Signal backward(const Signal& dout, const LayerCtx& ctx,
                  bool need_dx) override;

  void init_params(Rng& rng) override;  // Glorot-uniform
  void collect_params(std::vector<ParamRef>& out,
                      const std::string& prefix) override;
  void zero_grads() override;

  std::size_t width() const { return filters_.dim(1); }
  std::size_t in_channels() const { return filters_.dim(2); }
  std::size_t filter_count() const { return filters_.dim(0); }
  Tensor& filters() { return filters_; }
  Tensor& bias() { return bias_; }

 private:
  Tensor filters_;  // {F, width, C}
  Tensor bias_;     // {F}
  Tensor gf_, gb_;
  Activation act_;
};

// Non-overlapping max pooling along time; the last window may be partial.
// Gradient routes to the first argmax of each window.
class MaxPool1DLayer : public Layer {
 public:
  explicit MaxPool1DLayer(std::size_t window);

  const char* kind() const override { return "maxpool1d"; }
  Signal forward(const Signal& in, CtxPtr& ctx, bool training,
                 Rng* rng) const override;
  Signal backward(const Signal& dout, const LayerCtx& ctx,
                  bool need_dx) override;

  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
};

// Parallel conv+pool branches over the same input, outputs concatenated
// along the time axis. All branches must produce the same channel count.
class ConvBranchLayer : public Layer {
 public:
  ConvBranchLayer(const std::vector<std::size_t>& widths,
                  std::size_t in_channels, std::size_t filter_count,
                  std::size_t pool_window);

  const char* kind() const override { return "convbranch"; }
  Signal forward(const Signal& in, CtxPtr& ctx, bool training,
                 Rng* rng) const override;
  Signal backward(const Signal& dout, const LayerCtx& ctx,
                  bool need_dx) override;

  void init_params(Rng& rng) override;
  void collect_params(std::vector<ParamRef>& out,
                      const std::string& prefix) override;
  void zero_grads() override;

  std::size_t branch_count() const { return convs_.size(); }
  std::size_t total_filters() const;

 private:
  std::vector<std::unique_ptr<Conv1DLayer>> convs_;
  std::vector<std::unique_ptr<MaxPool1DLayer>> pools_;
};

// Functional form of MaxPool1DLayer::forward for callers that do not need
// gradients.
Tensor maxpool1d(const Tensor& map, std::size_t window);

}  // namespace hdltex
