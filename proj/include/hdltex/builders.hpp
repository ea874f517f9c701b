#pragma once

#include "hdltex/network.hpp"
#include "hdltex/recurrent.hpp"

namespace hdltex {

struct DnnSpec {
  std::size_t width = 1024;
  std::size_t depth = 8;  // hidden layers
  double dropout = 0.5;
  Activation hidden_act = Activation::kRelu;
};

// Feed-forward classifier over bag-of-ngrams vectors: `depth` hidden layers
// of `width` units with dropout between them, softmax output.
Network build_hdltex_dnn(std::size_t input_dim, std::size_t num_classes,
                         const DnnSpec& spec = {});

struct RnnSpec {
  std::size_t input_dim = 100;  // embedding dimension
  std::size_t hidden = 100;
  std::size_t layers = 2;
  double dropout = 0.25;
  SequencePooling pooling = SequencePooling::kLastState;
};

// Stacked recurrent classifier: `layers` cells with dropout between them,
// pooled hidden state into a softmax readout.
Network build_hdltex_rnn(std::size_t num_classes, CellKind cell_kind,
                         const RnnSpec& spec = {});

struct CnnSpec {
  std::size_t input_dim = 100;  // embedding dimension
  std::size_t max_len = 500;    // padded sequence length fed to the net
  std::vector<std::size_t> branch_widths = {3, 4, 5, 6, 7};
  std::size_t branch_filters = 128;
  std::size_t branch_pool = 5;
  std::size_t stage_filters = 128;
  std::size_t stage_width = 5;
  std::vector<std::size_t> stage_pools = {5, 35};
  double dropout = 0.25;
  std::size_t dense_width = 128;
};

// Text CNN: parallel filter-width branches pooled and concatenated along
// time, two further conv+pool stages, flatten, dense, softmax. The flatten
// width is fixed by max_len, so inputs must be padded to exactly that
// length. Throws when max_len is too short for the filter chain.
Network build_hdltex_cnn(std::size_t num_classes, const CnnSpec& spec = {});

// Closed-form parameter count of build_hdltex_dnn's output.
std::size_t dnn_parameter_count(std::size_t input_dim, std::size_t num_classes,
                                const DnnSpec& spec = {});

}  // namespace hdltex
