#include "hdltex/conv.hpp"

#include <cmath>
#include <stdexcept>

namespace hdltex {

// ---------------------------------------------------------------------------
// Conv1DLayer

namespace {

struct ConvCtx : LayerCtx {
  Tensor input;  // {T, C}
  Tensor z;      // {T-w+1, F} pre-activation
};

}  // namespace

Conv1DLayer::Conv1DLayer(std::size_t width, std::size_t in_channels,
                         std::size_t filter_count, Activation act)
    : filters_({filter_count, width, in_channels}),
      bias_({filter_count}),
      gf_({filter_count, width, in_channels}),
      gb_({filter_count}),
      act_(act) {
  if (width < 1 || in_channels < 1 || filter_count < 1) {
    throw std::invalid_argument("conv1d dims must be >= 1");
  }
  if (act != Activation::kRelu && act != Activation::kIdentity) {
    throw std::invalid_argument("conv1d supports relu or identity");
  }
}

void Conv1DLayer::init_params(Rng& rng) {
  const double fan_in = static_cast<double>(width() * in_channels());
  const double fan_out = static_cast<double>(width() * filter_count());
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < filters_.size(); ++i) {
    filters_[i] = rng.uniform(-limit, limit);
  }
  bias_.fill(0.0);
}

void Conv1DLayer::collect_params(std::vector<ParamRef>& out,
                                 const std::string& prefix) {
  out.push_back({&filters_, &gf_, prefix + ".filters"});
  out.push_back({&bias_, &gb_, prefix + ".b"});
}

void Conv1DLayer::zero_grads() {
  gf_.fill(0.0);
  gb_.fill(0.0);
}

Signal Conv1DLayer::forward(const Signal& in, CtxPtr& ctx, bool /*training*/,
                            Rng* /*rng*/) const {
  if (in.value.rank() != 2 || in.value.dim(1) != in_channels()) {
    throw std::runtime_error("conv1d: input channel mismatch");
  }
  const std::size_t T = in.value.dim(0);
  const std::size_t w = width();
  if (T < w) throw std::runtime_error("conv1d: sequence shorter than filter");
  const std::size_t C = in_channels();
  const std::size_t F = filter_count();
  const std::size_t out_t = T - w + 1;

  auto c = std::make_unique<ConvCtx>();
  c->input = in.value;
  c->z = Tensor({out_t, F});

  const double* x = in.value.data();
  for (std::size_t t = 0; t < out_t; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      const double* filt = filters_.data() + f * w * C;
      const double* win = x + t * C;
      double acc = bias_[f];
      for (std::size_t k = 0; k < w * C; ++k) acc += filt[k] * win[k];
      c->z.at(t, f) = acc;
    }
  }

  Signal out;
  out.value = act_ == Activation::kRelu ? activate(Activation::kRelu, c->z)
                                        : c->z;
  ctx = std::move(c);
  return out;
}

Signal Conv1DLayer::backward(const Signal& dout, const LayerCtx& ctx,
                             bool need_dx) {
  const auto& c = static_cast<const ConvCtx&>(ctx);
  const std::size_t out_t = c.z.dim(0);
  const std::size_t w = width();
  const std::size_t C = in_channels();
  const std::size_t F = filter_count();

  Signal dx;
  if (need_dx) dx.value = Tensor({c.input.dim(0), C});

  const double* x = c.input.data();
  for (std::size_t t = 0; t < out_t; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      double d = dout.value.at(t, f);
      if (act_ == Activation::kRelu && c.z.at(t, f) <= 0.0) d = 0.0;
      if (d == 0.0) continue;
      double* gfilt = gf_.data() + f * w * C;
      const double* win = x + t * C;
      for (std::size_t k = 0; k < w * C; ++k) gfilt[k] += d * win[k];
      gb_[f] += d;
      if (need_dx) {
        const double* filt = filters_.data() + f * w * C;
        double* dwin = dx.value.data() + t * C;
        for (std::size_t k = 0; k < w * C; ++k) dwin[k] += d * filt[k];
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// MaxPool1DLayer

namespace {

struct PoolCtx : LayerCtx {
  std::size_t in_rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> argmax;  // per (window, col), input row index
};

}  // namespace

MaxPool1DLayer::MaxPool1DLayer(std::size_t window) : window_(window) {
  if (window < 1) throw std::invalid_argument("pool window must be >= 1");
}

Signal MaxPool1DLayer::forward(const Signal& in, CtxPtr& ctx, bool /*training*/,
                               Rng* /*rng*/) const {
  if (in.value.rank() != 2) {
    throw std::runtime_error("maxpool1d: expected a {T,F} map");
  }
  const std::size_t T = in.value.dim(0);
  const std::size_t F = in.value.dim(1);
  if (T < 1) throw std::runtime_error("maxpool1d: empty map");
  const std::size_t out_t = (T + window_ - 1) / window_;

  auto c = std::make_unique<PoolCtx>();
  c->in_rows = T;
  c->cols = F;
  c->argmax.resize(out_t * F);

  Signal out;
  out.value = Tensor({out_t, F});
  for (std::size_t p = 0; p < out_t; ++p) {
    const std::size_t start = p * window_;
    const std::size_t end = std::min(start + window_, T);
    for (std::size_t f = 0; f < F; ++f) {
      double best = in.value.at(start, f);
      std::size_t best_row = start;
      for (std::size_t t = start + 1; t < end; ++t) {
        if (in.value.at(t, f) > best) {  // strict: first occurrence wins ties
          best = in.value.at(t, f);
          best_row = t;
        }
      }
      out.value.at(p, f) = best;
      c->argmax[p * F + f] = best_row;
    }
  }
  ctx = std::move(c);
  return out;
}

Signal MaxPool1DLayer::backward(const Signal& dout, const LayerCtx& ctx,
                                bool need_dx) {
  if (!need_dx) return {};
  const auto& c = static_cast<const PoolCtx&>(ctx);
  Signal dx;
  dx.value = Tensor({c.in_rows, c.cols});
  const std::size_t out_t = dout.value.dim(0);
  for (std::size_t p = 0; p < out_t; ++p) {
    for (std::size_t f = 0; f < c.cols; ++f) {
      dx.value.at(c.argmax[p * c.cols + f], f) += dout.value.at(p, f);
    }
  }
  return dx;
}

Tensor maxpool1d(const Tensor& map, std::size_t window) {
  MaxPool1DLayer layer(window);
  CtxPtr ctx;
  return layer.forward({map, 0}, ctx, false, nullptr).value;
}

// ---------------------------------------------------------------------------
// ConvBranchLayer

namespace {

struct BranchCtx : LayerCtx {
  std::vector<CtxPtr> conv_ctx;
  std::vector<CtxPtr> pool_ctx;
  std::vector<std::size_t> rows;  // pooled rows per branch
  std::size_t in_rows = 0;
  std::size_t in_cols = 0;
};

}  // namespace

ConvBranchLayer::ConvBranchLayer(const std::vector<std::size_t>& widths,
                                 std::size_t in_channels,
                                 std::size_t filter_count,
                                 std::size_t pool_window) {
  if (widths.empty()) throw std::invalid_argument("no branch widths");
  for (std::size_t w : widths) {
    convs_.push_back(
        std::make_unique<Conv1DLayer>(w, in_channels, filter_count));
    pools_.push_back(std::make_unique<MaxPool1DLayer>(pool_window));
  }
}

std::size_t ConvBranchLayer::total_filters() const {
  std::size_t n = 0;
  for (const auto& conv : convs_) n += conv->filter_count();
  return n;
}

void ConvBranchLayer::init_params(Rng& rng) {
  for (auto& conv : convs_) conv->init_params(rng);
}

void ConvBranchLayer::collect_params(std::vector<ParamRef>& out,
                                     const std::string& prefix) {
  for (std::size_t b = 0; b < convs_.size(); ++b) {
    convs_[b]->collect_params(out, prefix + ".branch" + std::to_string(b));
  }
}

void ConvBranchLayer::zero_grads() {
  for (auto& conv : convs_) conv->zero_grads();
}

Signal ConvBranchLayer::forward(const Signal& in, CtxPtr& ctx, bool training,
                                Rng* rng) const {
  auto c = std::make_unique<BranchCtx>();
  c->in_rows = in.value.dim(0);
  c->in_cols = in.value.dim(1);
  c->conv_ctx.resize(convs_.size());
  c->pool_ctx.resize(convs_.size());

  std::vector<Tensor> pooled;
  std::size_t total_rows = 0;
  const std::size_t F = convs_[0]->filter_count();
  for (std::size_t b = 0; b < convs_.size(); ++b) {
    Signal conv_out = convs_[b]->forward(in, c->conv_ctx[b], training, rng);
    Signal pool_out =
        pools_[b]->forward(conv_out, c->pool_ctx[b], training, rng);
    c->rows.push_back(pool_out.value.dim(0));
    total_rows += pool_out.value.dim(0);
    pooled.push_back(std::move(pool_out.value));
  }

  Signal out;
  out.value = Tensor({total_rows, F});
  std::size_t row = 0;
  for (const auto& p : pooled) {
    for (std::size_t t = 0; t < p.dim(0); ++t, ++row) {
      for (std::size_t f = 0; f < F; ++f) out.value.at(row, f) = p.at(t, f);
    }
  }
  ctx = std::move(c);
  return out;
}

Signal ConvBranchLayer::backward(const Signal& dout, const LayerCtx& ctx,
                                 bool need_dx) {
  const auto& c = static_cast<const BranchCtx&>(ctx);
  const std::size_t F = convs_[0]->filter_count();

  Signal dx;
  if (need_dx) dx.value = Tensor({c.in_rows, c.in_cols});

  std::size_t row = 0;
  for (std::size_t b = 0; b < convs_.size(); ++b) {
    Signal dpool;
    dpool.value = Tensor({c.rows[b], F});
    for (std::size_t t = 0; t < c.rows[b]; ++t, ++row) {
      for (std::size_t f = 0; f < F; ++f) {
        dpool.value.at(t, f) = dout.value.at(row, f);
      }
    }
    Signal dconv = pools_[b]->backward(dpool, *c.pool_ctx[b], true);
    Signal dxin = convs_[b]->backward(dconv, *c.conv_ctx[b], need_dx);
    if (need_dx) {
      for (std::size_t i = 0; i < dx.value.size(); ++i) {
        dx.value[i] += dxin.value[i];
      }
    }
  }
  return dx;
}

}  // namespace hdltex
