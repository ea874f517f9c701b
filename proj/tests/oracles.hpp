// Independent reference implementations used as test oracles. These are
// deliberately written against the defining equations with plain nested
// loops and std::vector, sharing no code with the library implementations
// they are checking.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;  // [row][col]

struct LstmParams {
  Mat w_i, w_c, w_f, w_o;  // h x (d + h)
  Vec b_i, b_c, b_f, b_o;
};

struct LstmState {
  Vec h, c;
};

// i = s(W_i [x,h] + b_i); c~ = tanh(W_c [x,h] + b_c); f = s(W_f [x,h] + b_f)
// c_t = i*c~ + f*c_prev; o = s(W_o [x,h] + b_o); h_t = o * tanh(c_t)
inline LstmState lstm_step(const LstmParams& p, const Vec& x, const Vec& h_prev,
                           const Vec& c_prev) {
  const std::size_t h = p.b_i.size();
  const std::size_t d = x.size();
  Vec concat(d + h);
  for (std::size_t j = 0; j < d; ++j) concat[j] = x[j];
  for (std::size_t j = 0; j < h; ++j) concat[d + j] = h_prev[j];

  auto affine = [&](const Mat& w, const Vec& b, std::size_t row) {
    double acc = b[row];
    for (std::size_t j = 0; j < concat.size(); ++j) acc += w[row][j] * concat[j];
    return acc;
  };

  LstmState out;
  out.h.resize(h);
  out.c.resize(h);
  for (std::size_t r = 0; r < h; ++r) {
    const double i_g = sigmoid(affine(p.w_i, p.b_i, r));
    const double cbar = std::tanh(affine(p.w_c, p.b_c, r));
    const double f_g = sigmoid(affine(p.w_f, p.b_f, r));
    const double o_g = sigmoid(affine(p.w_o, p.b_o, r));
    out.c[r] = i_g * cbar + f_g * c_prev[r];
    out.h[r] = o_g * std::tanh(out.c[r]);
  }
  return out;
}

struct GruParams {
  Mat w_z, w_r, w_h;  // h x d
  Mat u_z, u_r, u_h;  // h x h
  Vec b_z, b_r, b_h;
};

// z = s(W_z x + U_z h + b_z); r = s(W_r x + U_r h + b_r)
// h~ = tanh(W_h x + U_h (r*h) + b_h); h_t = (1-z)*h + z*h~
inline Vec gru_step(const GruParams& p, const Vec& x, const Vec& h_prev) {
  const std::size_t h = p.b_z.size();
  const std::size_t d = x.size();

  auto affine = [&](const Mat& w, const Mat& u, const Vec& b, std::size_t row,
                    const Vec& hvec) {
    double acc = b[row];
    for (std::size_t j = 0; j < d; ++j) acc += w[row][j] * x[j];
    for (std::size_t j = 0; j < h; ++j) acc += u[row][j] * hvec[j];
    return acc;
  };

  Vec z(h), r(h), gated(h), out(h);
  for (std::size_t row = 0; row < h; ++row) {
    z[row] = sigmoid(affine(p.w_z, p.u_z, p.b_z, row, h_prev));
    r[row] = sigmoid(affine(p.w_r, p.u_r, p.b_r, row, h_prev));
  }
  for (std::size_t j = 0; j < h; ++j) gated[j] = r[j] * h_prev[j];
  for (std::size_t row = 0; row < h; ++row) {
    const double hbar = std::tanh(affine(p.w_h, p.u_h, p.b_h, row, gated));
    out[row] = (1.0 - z[row]) * h_prev[row] + z[row] * hbar;
  }
  return out;
}

// Valid 1-D convolution, triple loop, no activation.
// input: T x C, filters: F x width x C, bias: F. Output (T-width+1) x F.
inline Mat conv1d(const Mat& input, const std::vector<Mat>& filters,
                  const Vec& bias) {
  const std::size_t T = input.size();
  const std::size_t width = filters[0].size();
  const std::size_t C = input[0].size();
  const std::size_t F = filters.size();
  Mat out(T - width + 1, Vec(F, 0.0));
  for (std::size_t t = 0; t + width <= T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      double acc = bias[f];
      for (std::size_t k = 0; k < width; ++k) {
        for (std::size_t c = 0; c < C; ++c) {
          acc += filters[f][k][c] * input[t + k][c];
        }
      }
      out[t][f] = acc;
    }
  }
  return out;
}

// Per-window maximum, last window may be partial.
inline Mat maxpool(const Mat& map, std::size_t window) {
  const std::size_t T = map.size();
  const std::size_t F = map[0].size();
  const std::size_t out_t = (T + window - 1) / window;
  Mat out(out_t, Vec(F, 0.0));
  for (std::size_t p = 0; p < out_t; ++p) {
    for (std::size_t f = 0; f < F; ++f) {
      double best = map[p * window][f];
      for (std::size_t t = p * window; t < std::min((p + 1) * window, T); ++t) {
        best = std::max(best, map[t][f]);
      }
      out[p][f] = best;
    }
  }
  return out;
}

// Plain softmax from the definition (no max subtraction; oracle inputs are
// small enough not to overflow).
inline Vec softmax(const Vec& z) {
  Vec out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i]);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

// Exhaustive Bayes rule with explicit probability products (no logs):
// P(c|d) proportional to P(c) * prod_w P(w|c)^count(w). Feasible for the
// small vocabularies the tests use.
struct NbOracleModel {
  Vec prior;          // P(c)
  Mat likelihood;     // P(w|c), [class][word]
};

inline NbOracleModel nb_fit(const std::vector<Vec>& doc_counts,
                            const std::vector<int>& labels,
                            std::size_t num_classes, double alpha) {
  const std::size_t vocab = doc_counts[0].size();
  NbOracleModel model;
  model.prior.assign(num_classes, 0.0);
  model.likelihood.assign(num_classes, Vec(vocab, 0.0));
  Vec total(num_classes, 0.0);
  for (std::size_t i = 0; i < doc_counts.size(); ++i) {
    model.prior[labels[i]] += 1.0;
    for (std::size_t w = 0; w < vocab; ++w) {
      model.likelihood[labels[i]][w] += doc_counts[i][w];
      total[labels[i]] += doc_counts[i][w];
    }
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    model.prior[c] /= static_cast<double>(doc_counts.size());
    for (std::size_t w = 0; w < vocab; ++w) {
      model.likelihood[c][w] = (model.likelihood[c][w] + alpha) /
                               (total[c] + alpha * static_cast<double>(vocab));
    }
  }
  return model;
}

inline Vec nb_posterior(const NbOracleModel& model, const Vec& counts) {
  const std::size_t k = model.prior.size();
  Vec post(k);
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double p = model.prior[c];
    for (std::size_t w = 0; w < counts.size(); ++w) {
      p *= std::pow(model.likelihood[c][w], counts[w]);
    }
    post[c] = p;
    sum += p;
  }
  for (auto& p : post) p /= sum;
  return post;
}

inline int nb_classify(const NbOracleModel& model, const Vec& counts) {
  const Vec post = nb_posterior(model, counts);
  int best = 0;
  for (std::size_t c = 1; c < post.size(); ++c) {
    if (post[c] > post[best]) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace oracle
