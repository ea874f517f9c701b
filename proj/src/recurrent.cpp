#include "hdltex/recurrent.hpp"

#include <cmath>
#include <stdexcept>

namespace hdltex {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---------------------------------------------------------------------------
// LSTMCell

LSTMCell::LSTMCell(std::size_t input_size, std::size_t hidden_size)
    : w_i({hidden_size, input_size + hidden_size}),
      w_c({hidden_size, input_size + hidden_size}),
      w_f({hidden_size, input_size + hidden_size}),
      w_o({hidden_size, input_size + hidden_size}),
      b_i({hidden_size}),
      b_c({hidden_size}),
      b_f({hidden_size}),
      b_o({hidden_size}) {}

void LSTMCell::init(Rng& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(w_i.dim(1)));
  for (Tensor* w : {&w_i, &w_c, &w_f, &w_o}) {
    for (std::size_t k = 0; k < w->size(); ++k) {
      (*w)[k] = rng.uniform(-limit, limit);
    }
  }
  b_i.fill(0.0);
  b_c.fill(0.0);
  b_f.fill(1.0);  // keeps early gradients flowing through the cell state
  b_o.fill(0.0);
}

void LSTMCell::step(const double* x, const double* h_prev, const double* c_prev,
                    double* h_out, double* c_out, StepCache* cache) const {
  const std::size_t h = hidden_size();
  const std::size_t d = input_size();

  Tensor i({h}), f({h}), o({h}), cbar({h}), c({h}), tanh_c({h});
  auto gate_pre = [&](const Tensor& w, const Tensor& b, std::size_t row) {
    const double* wr = w.data() + row * w.dim(1);
    double acc = b[row];
    for (std::size_t j = 0; j < d; ++j) acc += wr[j] * x[j];
    for (std::size_t j = 0; j < h; ++j) acc += wr[d + j] * h_prev[j];
    return acc;
  };

  for (std::size_t r = 0; r < h; ++r) {
    i[r] = sigmoid(gate_pre(w_i, b_i, r));
    cbar[r] = std::tanh(gate_pre(w_c, b_c, r));
    f[r] = sigmoid(gate_pre(w_f, b_f, r));
    o[r] = sigmoid(gate_pre(w_o, b_o, r));
    c[r] = i[r] * cbar[r] + f[r] * c_prev[r];
    tanh_c[r] = std::tanh(c[r]);
    h_out[r] = o[r] * tanh_c[r];
    c_out[r] = c[r];
  }

  if (cache != nullptr) {
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->o = std::move(o);
    cache->cbar = std::move(cbar);
    cache->c = std::move(c);
    cache->tanh_c = std::move(tanh_c);
  }
}

// ---------------------------------------------------------------------------
// GRUCell

GRUCell::GRUCell(std::size_t input_size, std::size_t hidden_size)
    : w_z({hidden_size, input_size}),
      w_r({hidden_size, input_size}),
      w_h({hidden_size, input_size}),
      u_z({hidden_size, hidden_size}),
      u_r({hidden_size, hidden_size}),
      u_h({hidden_size, hidden_size}),
      b_z({hidden_size}),
      b_r({hidden_size}),
      b_h({hidden_size}) {}

void GRUCell::init(Rng& rng) {
  auto fill = [&rng](Tensor& w) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(w.dim(1)));
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = rng.uniform(-limit, limit);
  };
  fill(w_z);
  fill(w_r);
  fill(w_h);
  fill(u_z);
  fill(u_r);
  fill(u_h);
  b_z.fill(0.0);
  b_r.fill(0.0);
  b_h.fill(0.0);
}

void GRUCell::step(const double* x, const double* h_prev, double* h_out,
                   StepCache* cache) const {
  const std::size_t h = hidden_size();
  const std::size_t d = input_size();

  Tensor z({h}), r({h}), hbar({h});
  auto pre = [&](const Tensor& w, const Tensor& u, const Tensor& b,
                 std::size_t row, const double* hvec) {
    const double* wr = w.data() + row * d;
    const double* ur = u.data() + row * h;
    double acc = b[row];
    for (std::size_t j = 0; j < d; ++j) acc += wr[j] * x[j];
    for (std::size_t j = 0; j < h; ++j) acc += ur[j] * hvec[j];
    return acc;
  };

  for (std::size_t row = 0; row < h; ++row) {
    z[row] = sigmoid(pre(w_z, u_z, b_z, row, h_prev));
    r[row] = sigmoid(pre(w_r, u_r, b_r, row, h_prev));
  }
  Tensor rh({h});
  for (std::size_t j = 0; j < h; ++j) rh[j] = r[j] * h_prev[j];
  for (std::size_t row = 0; row < h; ++row) {
    hbar[row] = std::tanh(pre(w_h, u_h, b_h, row, rh.data()));
    h_out[row] = (1.0 - z[row]) * h_prev[row] + z[row] * hbar[row];
  }

  if (cache != nullptr) {
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->hbar = std::move(hbar);
  }
}

// ---------------------------------------------------------------------------
// RecurrentLayer

namespace {

struct RecurrentCtx : LayerCtx {
  Tensor input;  // {T, d}
  Tensor h;      // {T, h}; rows >= seq_len stay zero
  std::size_t seq_len = 0;
  std::vector<LSTMCell::StepCache> lstm_steps;
  std::vector<GRUCell::StepCache> gru_steps;
  Tensor c;  // {T, h} LSTM cell states
};

}  // namespace

RecurrentLayer::RecurrentLayer(CellKind cell_kind, std::size_t input_size,
                               std::size_t hidden_size)
    : cell_kind_(cell_kind) {
  if (cell_kind == CellKind::kLSTM) {
    lstm_ = LSTMCell(input_size, hidden_size);
    for (const Tensor* t : {&lstm_.w_i, &lstm_.w_c, &lstm_.w_f, &lstm_.w_o,
                            &lstm_.b_i, &lstm_.b_c, &lstm_.b_f, &lstm_.b_o}) {
      grads_.push_back(Tensor::zeros_like(*t));
    }
  } else {
    gru_ = GRUCell(input_size, hidden_size);
    for (const Tensor* t : {&gru_.w_z, &gru_.w_r, &gru_.w_h, &gru_.u_z,
                            &gru_.u_r, &gru_.u_h, &gru_.b_z, &gru_.b_r,
                            &gru_.b_h}) {
      grads_.push_back(Tensor::zeros_like(*t));
    }
  }
}

std::size_t RecurrentLayer::input_size() const {
  return cell_kind_ == CellKind::kLSTM ? lstm_.input_size() : gru_.input_size();
}

std::size_t RecurrentLayer::hidden_size() const {
  return cell_kind_ == CellKind::kLSTM ? lstm_.hidden_size()
                                       : gru_.hidden_size();
}

void RecurrentLayer::init_params(Rng& rng) {
  if (cell_kind_ == CellKind::kLSTM) {
    lstm_.init(rng);
  } else {
    gru_.init(rng);
  }
}

void RecurrentLayer::collect_params(std::vector<ParamRef>& out,
                                    const std::string& prefix) {
  if (cell_kind_ == CellKind::kLSTM) {
    Tensor* values[] = {&lstm_.w_i, &lstm_.w_c, &lstm_.w_f, &lstm_.w_o,
                        &lstm_.b_i, &lstm_.b_c, &lstm_.b_f, &lstm_.b_o};
    const char* names[] = {".w_i", ".w_c", ".w_f", ".w_o",
                           ".b_i", ".b_c", ".b_f", ".b_o"};
    for (std::size_t k = 0; k < 8; ++k) {
      out.push_back({values[k], &grads_[k], prefix + names[k]});
    }
  } else {
    Tensor* values[] = {&gru_.w_z, &gru_.w_r, &gru_.w_h,
                        &gru_.u_z, &gru_.u_r, &gru_.u_h,
                        &gru_.b_z, &gru_.b_r, &gru_.b_h};
    const char* names[] = {".w_z", ".w_r", ".w_h", ".u_z", ".u_r",
                           ".u_h", ".b_z", ".b_r", ".b_h"};
    for (std::size_t k = 0; k < 9; ++k) {
      out.push_back({values[k], &grads_[k], prefix + names[k]});
    }
  }
}

void RecurrentLayer::zero_grads() {
  for (auto& g : grads_) g.fill(0.0);
}

Signal RecurrentLayer::forward(const Signal& in, CtxPtr& ctx, bool /*training*/,
                               Rng* /*rng*/) const {
  if (in.value.rank() != 2 || in.value.dim(1) != input_size()) {
    throw std::runtime_error("recurrent layer: input dimension mismatch");
  }
  const std::size_t rows = in.value.dim(0);
  const std::size_t len = std::min(in.seq_len, rows);
  const std::size_t h = hidden_size();

  auto c = std::make_unique<RecurrentCtx>();
  c->input = in.value;
  c->seq_len = len;
  c->h = Tensor({rows, h});

  if (cell_kind_ == CellKind::kLSTM) {
    c->c = Tensor({rows, h});
    c->lstm_steps.resize(len);
    Tensor h_prev({h}), c_prev({h});
    for (std::size_t t = 0; t < len; ++t) {
      lstm_.step(in.value.data() + t * input_size(), h_prev.data(),
                 c_prev.data(), c->h.data() + t * h, c->c.data() + t * h,
                 &c->lstm_steps[t]);
      for (std::size_t j = 0; j < h; ++j) {
        h_prev[j] = c->h.at(t, j);
        c_prev[j] = c->c.at(t, j);
      }
    }
  } else {
    c->gru_steps.resize(len);
    Tensor h_prev({h});
    for (std::size_t t = 0; t < len; ++t) {
      gru_.step(in.value.data() + t * input_size(), h_prev.data(),
                c->h.data() + t * h, &c->gru_steps[t]);
      for (std::size_t j = 0; j < h; ++j) h_prev[j] = c->h.at(t, j);
    }
  }

  Signal out{c->h, len};
  ctx = std::move(c);
  return out;
}

Signal RecurrentLayer::backward(const Signal& dout, const LayerCtx& ctx,
                                bool need_dx) {
  const auto& c = static_cast<const RecurrentCtx&>(ctx);
  const std::size_t h = hidden_size();
  const std::size_t d = input_size();
  const std::size_t len = c.seq_len;

  Signal dx;
  if (need_dx) {
    dx.value = Tensor({c.input.dim(0), d});
    dx.seq_len = len;
  }
  if (len == 0) return dx;

  if (cell_kind_ == CellKind::kLSTM) {
    Tensor& gw_i = grads_[0];
    Tensor& gw_c = grads_[1];
    Tensor& gw_f = grads_[2];
    Tensor& gw_o = grads_[3];
    Tensor& gb_i = grads_[4];
    Tensor& gb_c = grads_[5];
    Tensor& gb_f = grads_[6];
    Tensor& gb_o = grads_[7];

    Tensor dh_next({h}), dc_next({h});
    Tensor dzi({h}), dzf({h}), dzo({h}), dzc({h});
    for (std::size_t t = len; t-- > 0;) {
      const auto& s = c.lstm_steps[t];
      const double* x_t = c.input.data() + t * d;
      const double* h_prev = t > 0 ? c.h.data() + (t - 1) * h : nullptr;
      const double* c_prev = t > 0 ? c.c.data() + (t - 1) * h : nullptr;

      for (std::size_t j = 0; j < h; ++j) {
        const double dh = dout.value.at(t, j) + dh_next[j];
        const double do_ = dh * s.tanh_c[j];
        const double dc = dh * s.o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]) +
                          dc_next[j];
        const double di = dc * s.cbar[j];
        const double dcbar = dc * s.i[j];
        const double df = dc * (c_prev != nullptr ? c_prev[j] : 0.0);
        dc_next[j] = dc * s.f[j];
        dzi[j] = di * s.i[j] * (1.0 - s.i[j]);
        dzf[j] = df * s.f[j] * (1.0 - s.f[j]);
        dzo[j] = do_ * s.o[j] * (1.0 - s.o[j]);
        dzc[j] = dcbar * (1.0 - s.cbar[j] * s.cbar[j]);
      }

      dh_next.fill(0.0);
      const Tensor* ws[] = {&lstm_.w_i, &lstm_.w_c, &lstm_.w_f, &lstm_.w_o};
      Tensor* gws[] = {&gw_i, &gw_c, &gw_f, &gw_o};
      Tensor* gbs[] = {&gb_i, &gb_c, &gb_f, &gb_o};
      const Tensor* dzs[] = {&dzi, &dzc, &dzf, &dzo};
      for (int g = 0; g < 4; ++g) {
        const Tensor& dz = *dzs[g];
        Tensor& gw = *gws[g];
        Tensor& gb = *gbs[g];
        const Tensor& w = *ws[g];
        for (std::size_t row = 0; row < h; ++row) {
          const double dzr = dz[row];
          double* grow = gw.data() + row * (d + h);
          const double* wrow = w.data() + row * (d + h);
          for (std::size_t j = 0; j < d; ++j) grow[j] += dzr * x_t[j];
          if (h_prev != nullptr) {
            for (std::size_t j = 0; j < h; ++j) {
              grow[d + j] += dzr * h_prev[j];
            }
          }
          gb[row] += dzr;
          if (need_dx) {
            double* dxrow = dx.value.data() + t * d;
            for (std::size_t j = 0; j < d; ++j) dxrow[j] += wrow[j] * dzr;
          }
          for (std::size_t j = 0; j < h; ++j) {
            dh_next[j] += wrow[d + j] * dzr;
          }
        }
      }
    }
  } else {
    Tensor& gw_z = grads_[0];
    Tensor& gw_r = grads_[1];
    Tensor& gw_h = grads_[2];
    Tensor& gu_z = grads_[3];
    Tensor& gu_r = grads_[4];
    Tensor& gu_h = grads_[5];
    Tensor& gb_z = grads_[6];
    Tensor& gb_r = grads_[7];
    Tensor& gb_h = grads_[8];

    Tensor dh_next({h});
    Tensor dzz({h}), dzr({h}), dzh({h}), drh({h}), dh_prev({h}), rh({h});
    for (std::size_t t = len; t-- > 0;) {
      const auto& s = c.gru_steps[t];
      const double* x_t = c.input.data() + t * d;
      const double* h_prev = t > 0 ? c.h.data() + (t - 1) * h : nullptr;

      dh_prev.fill(0.0);
      for (std::size_t j = 0; j < h; ++j) {
        const double hp = h_prev != nullptr ? h_prev[j] : 0.0;
        const double dh = dout.value.at(t, j) + dh_next[j];
        const double dz = dh * (s.hbar[j] - hp);
        const double dhbar = dh * s.z[j];
        dh_prev[j] += dh * (1.0 - s.z[j]);
        dzh[j] = dhbar * (1.0 - s.hbar[j] * s.hbar[j]);
        dzz[j] = dz * s.z[j] * (1.0 - s.z[j]);
        rh[j] = s.r[j] * hp;
      }

      // candidate path: W_h x + U_h (r.h_prev) + b_h
      drh.fill(0.0);
      for (std::size_t row = 0; row < h; ++row) {
        const double dzhr = dzh[row];
        double* gwrow = gw_h.data() + row * d;
        double* gurow = gu_h.data() + row * h;
        const double* urow = gru_.u_h.data() + row * h;
        for (std::size_t j = 0; j < d; ++j) gwrow[j] += dzhr * x_t[j];
        for (std::size_t j = 0; j < h; ++j) {
          gurow[j] += dzhr * rh[j];
          drh[j] += urow[j] * dzhr;
        }
        gb_h[row] += dzhr;
      }
      for (std::size_t j = 0; j < h; ++j) {
        const double hp = h_prev != nullptr ? h_prev[j] : 0.0;
        const double dr = drh[j] * hp;
        dh_prev[j] += drh[j] * s.r[j];
        dzr[j] = dr * s.r[j] * (1.0 - s.r[j]);
      }

      // gate paths
      for (std::size_t row = 0; row < h; ++row) {
        const double dzzr = dzz[row];
        const double dzrr = dzr[row];
        double* gwz = gw_z.data() + row * d;
        double* gwr = gw_r.data() + row * d;
        double* guz = gu_z.data() + row * h;
        double* gur = gu_r.data() + row * h;
        const double* uz = gru_.u_z.data() + row * h;
        const double* ur = gru_.u_r.data() + row * h;
        for (std::size_t j = 0; j < d; ++j) {
          gwz[j] += dzzr * x_t[j];
          gwr[j] += dzrr * x_t[j];
        }
        for (std::size_t j = 0; j < h; ++j) {
          const double hp = h_prev != nullptr ? h_prev[j] : 0.0;
          guz[j] += dzzr * hp;
          gur[j] += dzrr * hp;
          dh_prev[j] += uz[j] * dzzr + ur[j] * dzrr;
        }
        gb_z[row] += dzzr;
        gb_r[row] += dzrr;
      }

      if (need_dx) {
        double* dxrow = dx.value.data() + t * d;
        for (std::size_t row = 0; row < h; ++row) {
          const double* wz = gru_.w_z.data() + row * d;
          const double* wr = gru_.w_r.data() + row * d;
          const double* wh = gru_.w_h.data() + row * d;
          for (std::size_t j = 0; j < d; ++j) {
            dxrow[j] += wz[j] * dzz[row] + wr[j] * dzr[row] + wh[j] * dzh[row];
          }
        }
      }
      dh_next = dh_prev;
    }
  }
  return dx;
}

}  // namespace hdltex
