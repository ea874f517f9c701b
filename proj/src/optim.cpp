#include "hdltex/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "hdltex/common.hpp"

namespace hdltex {

OptKind opt_kind_from_string(const std::string& name) {
  if (name == "sgd" || name == "sgd-momentum") return OptKind::kSgdMomentum;
  if (name == "rmsprop") return OptKind::kRmsProp;
  if (name == "adam") return OptKind::kAdam;
  throw DataError("unknown optimizer '" + name + "'");
}

std::string opt_kind_to_string(OptKind kind) {
  switch (kind) {
    case OptKind::kSgdMomentum: return "sgd-momentum";
    case OptKind::kRmsProp: return "rmsprop";
    case OptKind::kAdam: return "adam";
  }
  return "?";
}

namespace {

void check_finite(const Tensor& grads) {
  if (!grads.all_finite()) {
    throw DivergenceError("non-finite gradient");
  }
}

}  // namespace

void sgd_momentum_step(Tensor& velocity, Tensor& params, const Tensor& grads,
                       double alpha, double gamma) {
  check_finite(grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = gamma * velocity[i] + alpha * grads[i];
    params[i] -= velocity[i];
  }
}

void rmsprop_step(Tensor& sq_avg, Tensor& params, const Tensor& grads,
                  double alpha, double rho, double eps) {
  check_finite(grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    sq_avg[i] = rho * sq_avg[i] + (1.0 - rho) * grads[i] * grads[i];
    params[i] -= alpha * grads[i] / (std::sqrt(sq_avg[i]) + eps);
  }
}

void adam_step(Tensor& m, Tensor& v, std::uint64_t t, Tensor& params,
               const Tensor& grads, double alpha, double beta1, double beta2,
               double eps) {
  check_finite(grads);
  const double m_corr = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double v_corr = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double m_hat = m[i] / m_corr;
    const double v_hat = v[i] / v_corr;
    params[i] -= alpha * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void Optimizer::step(const std::vector<ParamRef>& refs) {
  if (m_.empty()) {
    for (const auto& ref : refs) m_.push_back(Tensor::zeros_like(*ref.value));
    if (cfg_.kind == OptKind::kAdam) {
      for (const auto& ref : refs) v_.push_back(Tensor::zeros_like(*ref.value));
    }
  }
  if (m_.size() != refs.size()) {
    throw std::logic_error("optimizer state does not match parameter list");
  }

  ++t_;
  const double alpha =
      cfg_.alpha / (1.0 + cfg_.decay * static_cast<double>(t_ - 1));
  for (std::size_t k = 0; k < refs.size(); ++k) {
    if (!m_[k].same_shape(*refs[k].value)) {
      throw std::logic_error("optimizer buffer shape mismatch at " +
                             refs[k].name);
    }
    switch (cfg_.kind) {
      case OptKind::kSgdMomentum:
        sgd_momentum_step(m_[k], *refs[k].value, *refs[k].grad, alpha,
                          cfg_.gamma);
        break;
      case OptKind::kRmsProp:
        rmsprop_step(m_[k], *refs[k].value, *refs[k].grad, alpha, cfg_.rho,
                     cfg_.eps);
        break;
      case OptKind::kAdam:
        adam_step(m_[k], v_[k], t_, *refs[k].value, *refs[k].grad, alpha,
                  cfg_.beta1, cfg_.beta2, cfg_.eps);
        break;
    }
  }
}

}  // namespace hdltex
