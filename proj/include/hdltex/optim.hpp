#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdltex/layers.hpp"

namespace hdltex {

enum class OptKind : std::uint8_t {
  kSgdMomentum = 0,
  kRmsProp = 1,
  kAdam = 2
};

// Hyperparameters. Defaults follow the standard setup: alpha=0.001,
// beta1=0.9, beta2=0.999, eps=1e-8, decay=0. `gamma` is the momentum term
// (0 recovers plain SGD); `rho` the RMSProp squared-average decay.
struct OptConfig {
  OptKind kind = OptKind::kAdam;
  double alpha = 0.001;
  double gamma = 0.9;
  double rho = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay = 0.0;  // inverse-time: alpha_t = alpha / (1 + decay * t)
};

OptKind opt_kind_from_string(const std::string& name);
std::string opt_kind_to_string(OptKind kind);

// Owns the per-tensor moment buffers. One optimizer per training loop; the
// buffer list is lazily shaped from the first step's parameter list.
class Optimizer {
 public:
  explicit Optimizer(const OptConfig& cfg) : cfg_(cfg) {}

  const OptConfig& config() const { return cfg_; }
  std::uint64_t steps_taken() const { return t_; }

  // Applies one update in place. Throws DivergenceError on non-finite
  // gradients. Updates are elementwise.
  void step(const std::vector<ParamRef>& refs);

 private:
  OptConfig cfg_;
  std::vector<Tensor> m_;  // momentum / first moment / squared average
  std::vector<Tensor> v_;  // Adam second moment
  std::uint64_t t_ = 0;
};

// Single-tensor conveniences used by the unit tests and small fits.
void sgd_momentum_step(Tensor& velocity, Tensor& params, const Tensor& grads,
                       double alpha, double gamma);
void rmsprop_step(Tensor& sq_avg, Tensor& params, const Tensor& grads,
                  double alpha, double rho, double eps);
void adam_step(Tensor& m, Tensor& v, std::uint64_t t, Tensor& params,
               const Tensor& grads, double alpha, double beta1, double beta2,
               double eps);

}  // namespace hdltex
