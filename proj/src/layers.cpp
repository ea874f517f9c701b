#include "hdltex/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "hdltex/common.hpp"

namespace hdltex {

Tensor activate(Activation kind, const Tensor& z) {
  Tensor out = Tensor::zeros_like(z);
  const std::size_t n = z.size();
  switch (kind) {
    case Activation::kIdentity:
      for (std::size_t i = 0; i < n; ++i) out[i] = z[i];
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-z[i]));
      break;
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i) out[i] = z[i] > 0.0 ? z[i] : 0.0;
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(z[i]);
      break;
    case Activation::kSoftmax: {
      double zmax = z[0];
      for (std::size_t i = 1; i < n; ++i) zmax = std::max(zmax, z[i]);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(z[i] - zmax);
        sum += out[i];
      }
      for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
      break;
    }
  }
  return out;
}

double loss_cross_entropy(const Tensor& probs, int target) {
  double p = probs[static_cast<std::size_t>(target)];
  return -std::log(p < 1e-12 ? 1e-12 : p);
}

Tensor apply_dropout(const Tensor& v, double rate, Rng& rng) {
  Tensor out = Tensor::zeros_like(v);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = rng.uniform() < rate ? 0.0 : v[i] * keep_scale;
  }
  return out;
}

// ---------------------------------------------------------------------------
// DenseLayer

namespace {

struct DenseCtx : LayerCtx {
  bool sparse_input = false;
  Tensor input;              // dense path
  SparseVector sparse;       // sparse path
  Tensor z;                  // pre-activation
  Tensor a;                  // activation output
};

}  // namespace

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act)
    : weights_({out_dim, in_dim}),
      bias_({out_dim}),
      gw_({out_dim, in_dim}),
      gb_({out_dim}),
      act_(act) {
  if (in_dim < 1 || out_dim < 1) {
    throw std::invalid_argument("dense layer dims must be >= 1");
  }
}

void DenseLayer::init_params(Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(in_dim() + out_dim()));
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    weights_[i] = rng.uniform(-limit, limit);
  }
  bias_.fill(0.0);
}

void DenseLayer::collect_params(std::vector<ParamRef>& out,
                                const std::string& prefix) {
  out.push_back({&weights_, &gw_, prefix + ".w"});
  out.push_back({&bias_, &gb_, prefix + ".b"});
}

void DenseLayer::zero_grads() {
  gw_.fill(0.0);
  gb_.fill(0.0);
}

Signal DenseLayer::forward(const Signal& in, CtxPtr& ctx, bool /*training*/,
                           Rng* /*rng*/) const {
  if (in.value.rank() != 1 || in.value.size() != in_dim()) {
    throw std::runtime_error("dense layer: input shape mismatch");
  }
  auto c = std::make_unique<DenseCtx>();
  c->input = in.value;

  Tensor z({out_dim()});
  const double* w = weights_.data();
  const double* x = in.value.data();
  for (std::size_t o = 0; o < out_dim(); ++o) {
    double acc = bias_[o];
    const double* row = w + o * in_dim();
    for (std::size_t i = 0; i < in_dim(); ++i) acc += row[i] * x[i];
    z[o] = acc;
  }
  c->z = z;
  c->a = activate(act_, z);
  Signal out{c->a, 0};
  ctx = std::move(c);
  return out;
}

Signal DenseLayer::forward_sparse(const SparseVector& x, CtxPtr& ctx) const {
  if (x.dimension != in_dim()) {
    throw std::runtime_error("dense layer: sparse input dimension mismatch");
  }
  auto c = std::make_unique<DenseCtx>();
  c->sparse_input = true;
  c->sparse = x;

  Tensor z({out_dim()});
  const double* w = weights_.data();
  for (std::size_t o = 0; o < out_dim(); ++o) {
    double acc = bias_[o];
    const double* row = w + o * in_dim();
    for (const auto& [idx, v] : x.items) acc += row[idx] * v;
    z[o] = acc;
  }
  c->z = z;
  c->a = activate(act_, z);
  Signal out{c->a, 0};
  ctx = std::move(c);
  return out;
}

Signal DenseLayer::backward(const Signal& dout, const LayerCtx& ctx,
                            bool need_dx) {
  const auto& c = static_cast<const DenseCtx&>(ctx);
  Tensor dz({out_dim()});
  switch (act_) {
    case Activation::kIdentity:
      dz = dout.value;
      break;
    case Activation::kRelu:
      for (std::size_t o = 0; o < out_dim(); ++o) {
        dz[o] = c.z[o] > 0.0 ? dout.value[o] : 0.0;
      }
      break;
    case Activation::kSigmoid:
      for (std::size_t o = 0; o < out_dim(); ++o) {
        dz[o] = dout.value[o] * c.a[o] * (1.0 - c.a[o]);
      }
      break;
    case Activation::kTanh:
      for (std::size_t o = 0; o < out_dim(); ++o) {
        dz[o] = dout.value[o] * (1.0 - c.a[o] * c.a[o]);
      }
      break;
    case Activation::kSoftmax:
      throw std::logic_error(
          "softmax layers take gradients through backward_from_logits");
  }
  return backward_impl(dz, ctx, need_dx);
}

Signal DenseLayer::backward_from_logits(const Signal& dlogits,
                                        const LayerCtx& ctx, bool need_dx) {
  return backward_impl(dlogits.value, ctx, need_dx);
}

Signal DenseLayer::backward_impl(const Tensor& dz, const LayerCtx& ctx,
                                 bool need_dx) {
  const auto& c = static_cast<const DenseCtx&>(ctx);
  double* gw = gw_.data();
  if (c.sparse_input) {
    for (std::size_t o = 0; o < out_dim(); ++o) {
      double* grow = gw + o * in_dim();
      const double d = dz[o];
      for (const auto& [idx, v] : c.sparse.items) grow[idx] += d * v;
      gb_[o] += d;
    }
  } else {
    const double* x = c.input.data();
    for (std::size_t o = 0; o < out_dim(); ++o) {
      double* grow = gw + o * in_dim();
      const double d = dz[o];
      for (std::size_t i = 0; i < in_dim(); ++i) grow[i] += d * x[i];
      gb_[o] += d;
    }
  }

  Signal dx;
  if (need_dx) {
    dx.value = Tensor({in_dim()});
    const double* w = weights_.data();
    for (std::size_t o = 0; o < out_dim(); ++o) {
      const double* row = w + o * in_dim();
      const double d = dz[o];
      for (std::size_t i = 0; i < in_dim(); ++i) dx.value[i] += row[i] * d;
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// DropoutLayer

namespace {

struct DropoutCtx : LayerCtx {
  Tensor scale;  // empty when the layer ran as identity (inference)
};

}  // namespace

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout rate must be in [0,1)");
  }
}

Signal DropoutLayer::forward(const Signal& in, CtxPtr& ctx, bool training,
                             Rng* rng) const {
  auto c = std::make_unique<DropoutCtx>();
  Signal out;
  out.seq_len = in.seq_len;
  if (!training || rate_ == 0.0) {
    out.value = in.value;
    ctx = std::move(c);
    return out;
  }
  if (rng == nullptr) {
    throw std::logic_error("dropout in training mode needs an RNG");
  }
  c->scale = Tensor::zeros_like(in.value);
  out.value = Tensor::zeros_like(in.value);
  const double keep_scale = 1.0 / (1.0 - rate_);
  for (std::size_t i = 0; i < in.value.size(); ++i) {
    const double s = rng->uniform() < rate_ ? 0.0 : keep_scale;
    c->scale[i] = s;
    out.value[i] = in.value[i] * s;
  }
  ctx = std::move(c);
  return out;
}

Signal DropoutLayer::backward(const Signal& dout, const LayerCtx& ctx,
                              bool need_dx) {
  if (!need_dx) return {};
  const auto& c = static_cast<const DropoutCtx&>(ctx);
  Signal dx;
  dx.seq_len = dout.seq_len;
  if (c.scale.size() == 0) {
    dx.value = dout.value;
    return dx;
  }
  dx.value = Tensor::zeros_like(dout.value);
  for (std::size_t i = 0; i < dout.value.size(); ++i) {
    dx.value[i] = dout.value[i] * c.scale[i];
  }
  return dx;
}

// ---------------------------------------------------------------------------
// FlattenLayer

namespace {

struct FlattenCtx : LayerCtx {
  std::vector<std::size_t> in_shape;
  std::size_t in_seq_len = 0;
};

}  // namespace

Signal FlattenLayer::forward(const Signal& in, CtxPtr& ctx, bool /*training*/,
                             Rng* /*rng*/) const {
  auto c = std::make_unique<FlattenCtx>();
  c->in_shape = in.value.shape();
  c->in_seq_len = in.seq_len;
  Signal out;
  out.value = Tensor({in.value.size()});
  for (std::size_t i = 0; i < in.value.size(); ++i) out.value[i] = in.value[i];
  ctx = std::move(c);
  return out;
}

Signal FlattenLayer::backward(const Signal& dout, const LayerCtx& ctx,
                              bool need_dx) {
  if (!need_dx) return {};
  const auto& c = static_cast<const FlattenCtx&>(ctx);
  Signal dx;
  dx.value = Tensor(c.in_shape);
  dx.seq_len = c.in_seq_len;
  for (std::size_t i = 0; i < dout.value.size(); ++i) dx.value[i] = dout.value[i];
  return dx;
}

// ---------------------------------------------------------------------------
// SequencePoolLayer

namespace {

struct SeqPoolCtx : LayerCtx {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t seq_len = 0;
};

}  // namespace

Signal SequencePoolLayer::forward(const Signal& in, CtxPtr& ctx,
                                  bool /*training*/, Rng* /*rng*/) const {
  if (in.value.rank() != 2) {
    throw std::runtime_error("sequence pool: expected a {T,H} sequence");
  }
  auto c = std::make_unique<SeqPoolCtx>();
  c->rows = in.value.dim(0);
  c->cols = in.value.dim(1);
  c->seq_len = in.seq_len;

  Signal out;
  out.value = Tensor({c->cols});
  const std::size_t len = in.seq_len;
  if (len > 0) {
    if (pooling_ == SequencePooling::kLastState) {
      for (std::size_t j = 0; j < c->cols; ++j) {
        out.value[j] = in.value.at(len - 1, j);
      }
    } else {
      for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t j = 0; j < c->cols; ++j) {
          out.value[j] += in.value.at(t, j);
        }
      }
      for (std::size_t j = 0; j < c->cols; ++j) {
        out.value[j] /= static_cast<double>(len);
      }
    }
  }
  ctx = std::move(c);
  return out;
}

Signal SequencePoolLayer::backward(const Signal& dout, const LayerCtx& ctx,
                                   bool need_dx) {
  if (!need_dx) return {};
  const auto& c = static_cast<const SeqPoolCtx&>(ctx);
  Signal dx;
  dx.value = Tensor({c.rows, c.cols});
  dx.seq_len = c.seq_len;
  if (c.seq_len == 0) return dx;
  if (pooling_ == SequencePooling::kLastState) {
    for (std::size_t j = 0; j < c.cols; ++j) {
      dx.value.at(c.seq_len - 1, j) = dout.value[j];
    }
  } else {
    const double inv = 1.0 / static_cast<double>(c.seq_len);
    for (std::size_t t = 0; t < c.seq_len; ++t) {
      for (std::size_t j = 0; j < c.cols; ++j) {
        dx.value.at(t, j) = dout.value[j] * inv;
      }
    }
  }
  return dx;
}

}  // namespace hdltex
