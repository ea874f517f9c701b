#include "hdltex/builders.hpp"

#include <stdexcept>

#include "hdltex/conv.hpp"

namespace hdltex {

Network build_hdltex_dnn(std::size_t input_dim, std::size_t num_classes,
                         const DnnSpec& spec) {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (num_classes < 2) {
    throw std::invalid_argument("softmax output needs >= 2 classes");
  }
  if (spec.depth < 1) throw std::invalid_argument("depth must be >= 1");

  Network net(InputKind::kSparseVector, num_classes);
  net.add(std::make_unique<DenseLayer>(input_dim, spec.width, spec.hidden_act));
  for (std::size_t i = 1; i < spec.depth; ++i) {
    if (spec.dropout > 0.0) {
      net.add(std::make_unique<DropoutLayer>(spec.dropout));
    }
    net.add(std::make_unique<DenseLayer>(spec.width, spec.width,
                                         spec.hidden_act));
  }
  net.add(std::make_unique<DenseLayer>(spec.width, num_classes,
                                       Activation::kSoftmax));
  net.validate();
  return net;
}

std::size_t dnn_parameter_count(std::size_t input_dim, std::size_t num_classes,
                                const DnnSpec& spec) {
  std::size_t count = spec.width * input_dim + spec.width;
  for (std::size_t i = 1; i < spec.depth; ++i) {
    count += spec.width * spec.width + spec.width;
  }
  count += num_classes * spec.width + num_classes;
  return count;
}

Network build_hdltex_rnn(std::size_t num_classes, CellKind cell_kind,
                         const RnnSpec& spec) {
  if (num_classes < 2) {
    throw std::invalid_argument("softmax output needs >= 2 classes");
  }
  if (spec.layers < 1) throw std::invalid_argument("stack depth must be >= 1");

  Network net(InputKind::kEncodedSequence, num_classes);
  net.add(std::make_unique<RecurrentLayer>(cell_kind, spec.input_dim,
                                           spec.hidden));
  for (std::size_t i = 1; i < spec.layers; ++i) {
    if (spec.dropout > 0.0) {
      net.add(std::make_unique<DropoutLayer>(spec.dropout));
    }
    net.add(std::make_unique<RecurrentLayer>(cell_kind, spec.hidden,
                                             spec.hidden));
  }
  net.add(std::make_unique<SequencePoolLayer>(spec.pooling));
  net.add(std::make_unique<DenseLayer>(spec.hidden, num_classes,
                                       Activation::kSoftmax));
  net.validate();
  return net;
}

Network build_hdltex_cnn(std::size_t num_classes, const CnnSpec& spec) {
  if (num_classes < 2) {
    throw std::invalid_argument("softmax output needs >= 2 classes");
  }
  if (spec.stage_pools.size() != 2) {
    throw std::invalid_argument("expected two stage pool windows");
  }

  auto ceil_div = [](std::size_t a, std::size_t b) { return (a + b - 1) / b; };

  // Time extent after the branch stage, then the two conv+pool stages.
  std::size_t concat_rows = 0;
  for (std::size_t w : spec.branch_widths) {
    if (spec.max_len < w) {
      throw std::invalid_argument("max_len shorter than filter width " +
                                  std::to_string(w));
    }
    concat_rows += ceil_div(spec.max_len - w + 1, spec.branch_pool);
  }
  std::size_t rows = concat_rows;
  for (std::size_t s = 0; s < 2; ++s) {
    if (rows < spec.stage_width) {
      throw std::invalid_argument("sequence too short for conv stage " +
                                  std::to_string(s + 1));
    }
    rows = ceil_div(rows - spec.stage_width + 1, spec.stage_pools[s]);
  }
  const std::size_t flat_width = rows * spec.stage_filters;

  Network net(InputKind::kEncodedSequence, num_classes);
  net.add(std::make_unique<ConvBranchLayer>(spec.branch_widths, spec.input_dim,
                                            spec.branch_filters,
                                            spec.branch_pool));
  net.add(std::make_unique<Conv1DLayer>(spec.stage_width, spec.branch_filters,
                                        spec.stage_filters));
  net.add(std::make_unique<MaxPool1DLayer>(spec.stage_pools[0]));
  net.add(std::make_unique<Conv1DLayer>(spec.stage_width, spec.stage_filters,
                                        spec.stage_filters));
  net.add(std::make_unique<MaxPool1DLayer>(spec.stage_pools[1]));
  net.add(std::make_unique<FlattenLayer>());
  if (spec.dropout > 0.0) {
    net.add(std::make_unique<DropoutLayer>(spec.dropout));
  }
  net.add(std::make_unique<DenseLayer>(flat_width, spec.dense_width,
                                       Activation::kRelu));
  net.add(std::make_unique<DenseLayer>(spec.dense_width, num_classes,
                                       Activation::kSoftmax));
  net.validate();
  return net;
}

}  // namespace hdltex
