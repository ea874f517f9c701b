#pragma once

#include "hdltex/layers.hpp"

namespace hdltex {

// Gated memory cell over the concatenated [x_t, h_{t-1}] input:
//   i_t = sigmoid(W_i [x,h] + b_i)        input gate
//   c~  = tanh   (W_c [x,h] + b_c)        candidate
//   f_t = sigmoid(W_f [x,h] + b_f)        forget gate
//   c_t = i_t * c~ + f_t * c_{t-1}
//   o_t = sigmoid(W_o [x,h] + b_o)        output gate
//   h_t = o_t * tanh(c_t)
struct LSTMCell {
  Tensor w_i, w_c, w_f, w_o;  // {h, d+h}
  Tensor b_i, b_c, b_f, b_o;  // {h}

  LSTMCell() = default;
  LSTMCell(std::size_t input_size, std::size_t hidden_size);

  std::size_t input_size() const { return w_i.dim(1) - w_i.dim(0); }
  std::size_t hidden_size() const { return w_i.dim(0); }

  // Uniform +-1/sqrt(fan_in); forget-gate bias starts at +1.
  void init(Rng& rng);

  struct StepCache {
    Tensor i, f, o, cbar, c, tanh_c;  // all {h}
  };

  // One step. h_out/c_out are {h}; cache may be null outside training.
  void step(const double* x, const double* h_prev, const double* c_prev,
            double* h_out, double* c_out, StepCache* cache) const;
};

// Two-gate unit without a separate memory cell:
//   z = sigmoid(W_z x + U_z h_prev + b_z)   update gate
//   r = sigmoid(W_r x + U_r h_prev + b_r)   reset gate
//   h~ = tanh(W_h x + U_h (r * h_prev) + b_h)
//   h_t = (1 - z) * h_prev + z * h~
struct GRUCell {
  Tensor w_z, w_r, w_h;  // {h, d}
  Tensor u_z, u_r, u_h;  // {h, h}
  Tensor b_z, b_r, b_h;  // {h}

  GRUCell() = default;
  GRUCell(std::size_t input_size, std::size_t hidden_size);

  std::size_t input_size() const { return w_z.dim(1); }
  std::size_t hidden_size() const { return w_z.dim(0); }

  void init(Rng& rng);

  struct StepCache {
    Tensor z, r, hbar;  // all {h}
  };

  void step(const double* x, const double* h_prev, double* h_out,
            StepCache* cache) const;
};

enum class CellKind : std::uint8_t { kLSTM = 0, kGRU = 1 };

// Unrolls one recurrent cell over the valid rows of an encoded sequence.
// Padded timesteps are never processed; their output rows stay zero.
class RecurrentLayer : public Layer {
 public:
  RecurrentLayer(CellKind cell_kind, std::size_t input_size,
                 std::size_t hidden_size);

  const char* kind() const override { return "recurrent"; }
  Signal forward(const Signal& in, CtxPtr& ctx, bool training,
                 Rng* rng) const override;
  Signal backward(const Signal& dout, const LayerCtx& ctx,
                  bool need_dx) override;

  void init_params(Rng& rng) override;
  void collect_params(std::vector<ParamRef>& out,
                      const std::string& prefix) override;
  void zero_grads() override;

  CellKind cell_kind() const { return cell_kind_; }
  std::size_t input_size() const;
  std::size_t hidden_size() const;
  LSTMCell& lstm() { return lstm_; }
  GRUCell& gru() { return gru_; }

 private:
  CellKind cell_kind_;
  LSTMCell lstm_;
  GRUCell gru_;
  // Gradient buffers parallel to the active cell's tensors.
  std::vector<Tensor> grads_;
};

}  // namespace hdltex
