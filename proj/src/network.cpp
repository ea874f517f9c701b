#include "hdltex/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hdltex/common.hpp"

namespace hdltex {

void Network::validate() const {
  if (layers_.empty()) throw std::logic_error("network has no layers");
  if (num_classes_ < 2) throw std::logic_error("network needs >= 2 classes");
  const auto* last = dynamic_cast<const DenseLayer*>(layers_.back().get());
  if (last == nullptr || last->activation() != Activation::kSoftmax) {
    throw std::logic_error("final layer must be dense softmax");
  }
  if (last->out_dim() != num_classes_) {
    throw std::logic_error("final layer width must equal num_classes");
  }
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    const auto* dense = dynamic_cast<const DenseLayer*>(layers_[i].get());
    if (dense != nullptr && dense->activation() == Activation::kSoftmax) {
      throw std::logic_error("softmax is only permitted on the final layer");
    }
  }
}

void Network::init_params(Rng& rng) {
  for (auto& layer : layers_) layer->init_params(rng);
}

std::vector<ParamRef> Network::param_refs() {
  std::vector<ParamRef> refs;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_params(refs, "layer" + std::to_string(i) + "." +
                                         layers_[i]->kind());
  }
  return refs;
}

void Network::zero_grads() {
  for (auto& layer : layers_) layer->zero_grads();
}

Signal Network::forward_all(const Feature& x, std::vector<CtxPtr>* ctxs,
                            bool training, Rng* rng) const {
  if (layers_.empty()) throw std::logic_error("network has no layers");
  std::vector<CtxPtr> local;
  std::vector<CtxPtr>& cache = ctxs != nullptr ? *ctxs : local;
  cache.clear();
  cache.resize(layers_.size());

  Signal s;
  std::size_t start = 0;
  if (x.kind == InputKind::kSparseVector) {
    if (input_kind_ != InputKind::kSparseVector) {
      throw std::runtime_error("network expects an encoded sequence input");
    }
    auto* first = dynamic_cast<DenseLayer*>(layers_[0].get());
    if (first == nullptr) {
      throw std::logic_error("sparse input requires a dense first layer");
    }
    s = first->forward_sparse(x.sparse, cache[0]);
    start = 1;
  } else {
    if (input_kind_ != InputKind::kEncodedSequence) {
      throw std::runtime_error("network expects a sparse vector input");
    }
    s.value = x.sequence.matrix;
    s.seq_len = x.sequence.length;
  }
  for (std::size_t i = start; i < layers_.size(); ++i) {
    s = layers_[i]->forward(s, cache[i], training, rng);
  }
  return s;
}

Tensor Network::predict(const Feature& x) const {
  return forward_all(x, nullptr, false, nullptr).value;
}

Network::ExampleResult Network::accumulate_gradients(const Feature& x,
                                                     int target, double scale,
                                                     bool training, Rng* rng) {
  if (target < 0 || static_cast<std::size_t>(target) >= num_classes_) {
    throw std::logic_error("target out of range");
  }
  std::vector<CtxPtr> ctxs;
  Signal probs = forward_all(x, &ctxs, training, rng);

  ExampleResult res;
  res.loss = loss_cross_entropy(probs.value, target);
  res.predicted = static_cast<int>(
      std::max_element(probs.value.data(),
                       probs.value.data() + probs.value.size()) -
      probs.value.data());

  // Fused softmax + cross-entropy: gradient wrt logits is probs - onehot.
  Signal dlogits;
  dlogits.value = probs.value;
  dlogits.value[static_cast<std::size_t>(target)] -= 1.0;
  for (std::size_t i = 0; i < dlogits.value.size(); ++i) {
    dlogits.value[i] *= scale;
  }

  auto* last = dynamic_cast<DenseLayer*>(layers_.back().get());
  Signal grad = last->backward_from_logits(dlogits, *ctxs.back(),
                                           layers_.size() > 1);
  for (std::size_t i = layers_.size() - 1; i-- > 0;) {
    grad = layers_[i]->backward(grad, *ctxs[i], i > 0);
  }
  return res;
}

double Network::mean_loss(const std::vector<Feature>& inputs,
                          const std::vector<int>& targets) const {
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    total += loss_cross_entropy(predict(inputs[i]), targets[i]);
  }
  return total / static_cast<double>(inputs.size());
}

double compute_gradients(Network& net, const std::vector<Feature>& inputs,
                         const std::vector<int>& targets) {
  if (inputs.empty() || inputs.size() != targets.size()) {
    throw std::logic_error("batch inputs/targets mismatch");
  }
  net.zero_grads();
  const double scale = 1.0 / static_cast<double>(inputs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    total += net.accumulate_gradients(inputs[i], targets[i], scale, false,
                                      nullptr)
                 .loss;
  }
  return total * scale;
}

double grad_check(Network& net, const std::vector<Feature>& inputs,
                  const std::vector<int>& targets, double epsilon,
                  std::size_t samples_per_tensor, std::uint64_t seed) {
  compute_gradients(net, inputs, targets);
  auto refs = net.param_refs();

  Rng rng(seed);
  double max_rel = 0.0;
  for (auto& ref : refs) {
    const std::size_t n = ref.value->size();
    std::vector<std::size_t> picks;
    if (n <= samples_per_tensor) {
      for (std::size_t i = 0; i < n; ++i) picks.push_back(i);
    } else {
      for (std::size_t k = 0; k < samples_per_tensor; ++k) {
        picks.push_back(rng.index(n));
      }
    }
    for (std::size_t i : picks) {
      const double saved = (*ref.value)[i];
      (*ref.value)[i] = saved + epsilon;
      const double loss_plus = net.mean_loss(inputs, targets);
      (*ref.value)[i] = saved - epsilon;
      const double loss_minus = net.mean_loss(inputs, targets);
      (*ref.value)[i] = saved;

      const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
      const double analytic = (*ref.grad)[i];
      const double rel = std::fabs(analytic - numeric) /
                         std::max({std::fabs(analytic), std::fabs(numeric),
                                   1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace hdltex
