#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hdltex/common.hpp"
#include "hdltex/optim.hpp"
#include "hdltex/rng.hpp"

using namespace hdltex;

namespace {

Tensor scalar(double v) {
  Tensor t({1});
  t[0] = v;
  return t;
}

}  // namespace

TEST_CASE("plain SGD: one step with gamma = 0") {
  Tensor theta = scalar(1.0);
  Tensor velocity = scalar(0.0);
  sgd_momentum_step(velocity, theta, scalar(2.0), 0.1, 0.0);
  CHECK(theta[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("momentum: second-step displacement is 0.19 exactly") {
  // v1 = 0.9*0 + 0.1*1 = 0.1; v2 = 0.9*0.1 + 0.1*1 = 0.19
  Tensor theta = scalar(1.0);
  Tensor velocity = scalar(0.0);
  sgd_momentum_step(velocity, theta, scalar(1.0), 0.1, 0.9);
  const double after_first = theta[0];
  CHECK(after_first == doctest::Approx(0.9).epsilon(1e-15));
  sgd_momentum_step(velocity, theta, scalar(1.0), 0.1, 0.9);
  CHECK(after_first - theta[0] == doctest::Approx(0.19).epsilon(1e-15));
}

TEST_CASE("zero gradient leaves parameters unchanged in all optimizers") {
  Tensor zero = scalar(0.0);

  Tensor theta = scalar(0.5), velocity = scalar(0.0);
  sgd_momentum_step(velocity, theta, zero, 0.1, 0.9);
  CHECK(theta[0] == 0.5);

  Tensor sq = scalar(0.0);
  theta = scalar(0.5);
  for (int i = 0; i < 10; ++i) rmsprop_step(sq, theta, zero, 0.1, 0.9, 1e-8);
  CHECK(theta[0] == 0.5);

  Tensor m = scalar(0.0), v = scalar(0.0);
  theta = scalar(0.5);
  for (std::uint64_t t = 1; t <= 10; ++t) {
    adam_step(m, v, t, theta, zero, 0.1, 0.9, 0.999, 1e-8);
  }
  CHECK(theta[0] == 0.5);
}

TEST_CASE("rmsprop first step has the closed-form magnitude") {
  // s1 = 0.1 g^2, step = a*g / (sqrt(0.1)*|g| + eps) ~ a/sqrt(0.1)
  const double alpha = 0.01, eps = 1e-8;
  for (double g : {0.5, -2.0, 10.0}) {
    Tensor theta = scalar(0.0), sq = scalar(0.0);
    rmsprop_step(sq, theta, scalar(g), alpha, 0.9, eps);
    const double expected = alpha * g / (std::sqrt(0.1) * std::fabs(g) + eps);
    CHECK(theta[0] == doctest::Approx(-expected).epsilon(1e-12));
  }
}

TEST_CASE("rmsprop is scale invariant after a long constant-gradient run") {
  // At the fixed point s = g^2, so the step approaches a*sign(g).
  auto final_step = [](double g) {
    Tensor theta = scalar(0.0), sq = scalar(0.0);
    double prev = 0.0;
    for (int i = 0; i < 400; ++i) {
      prev = theta[0];
      rmsprop_step(sq, theta, scalar(g), 0.01, 0.9, 1e-8);
    }
    return theta[0] - prev;
  };
  const double small = final_step(0.02);
  const double large = final_step(2.0);
  CHECK(small == doctest::Approx(large).epsilon(1e-4));
}

TEST_CASE("adam first step moves by roughly -alpha * sign(g)") {
  for (double g : {3.0, -0.7}) {
    Tensor theta = scalar(0.0), m = scalar(0.0), v = scalar(0.0);
    adam_step(m, v, 1, theta, scalar(g), 0.001, 0.9, 0.999, 1e-8);
    // m^ = g, v^ = g^2 exactly after bias correction
    CHECK(m[0] / (1.0 - 0.9) == doctest::Approx(g).epsilon(1e-12));
    CHECK(v[0] / (1.0 - 0.999) == doctest::Approx(g * g).epsilon(1e-12));
    CHECK(theta[0] ==
          doctest::Approx(-0.001 * (g > 0 ? 1.0 : -1.0)).epsilon(1e-4));
  }
}

TEST_CASE("adam bias-correction identity: m-hat stays equal to g") {
  const double g = 0.37;
  Tensor theta = scalar(1.0), m = scalar(0.0), v = scalar(0.0);
  for (std::uint64_t t = 1; t <= 100; ++t) {
    adam_step(m, v, t, theta, scalar(g), 0.001, 0.9, 0.999, 1e-8);
    const double m_hat = m[0] / (1.0 - std::pow(0.9, double(t)));
    CHECK(std::fabs(m_hat - g) < 1e-12);
    const double v_hat = v[0] / (1.0 - std::pow(0.999, double(t)));
    CHECK(std::fabs(v_hat - g * g) < 1e-12);
  }
}

TEST_CASE("adam drives the 1-D quadratic to the optimum") {
  // J = theta^2, gradient 2*theta; cross-checked against plain gradient
  // descent, which contracts by (1 - 2*alpha) per step.
  const double alpha = 0.05;

  double gd_theta = 1.0;
  for (int t = 0; t < 500; ++t) gd_theta -= alpha * 2.0 * gd_theta;
  CHECK(std::fabs(gd_theta) < 1e-3);  // oracle route converges

  Tensor theta = scalar(1.0), m = scalar(0.0), v = scalar(0.0);
  for (std::uint64_t t = 1; t <= 500; ++t) {
    adam_step(m, v, t, theta, scalar(2.0 * theta[0]), alpha, 0.9, 0.999, 1e-8);
  }
  CHECK(std::fabs(theta[0]) < 1e-3);
}

TEST_CASE("optimizers reject non-finite gradients") {
  Tensor theta = scalar(1.0), buf = scalar(0.0);
  CHECK_THROWS_AS(
      sgd_momentum_step(buf, theta, scalar(std::nan("")), 0.1, 0.9),
      DivergenceError);
  CHECK_THROWS_AS(
      rmsprop_step(buf, theta, scalar(INFINITY), 0.1, 0.9, 1e-8),
      DivergenceError);
  Tensor m = scalar(0.0), v = scalar(0.0);
  CHECK_THROWS_AS(
      adam_step(m, v, 1, theta, scalar(-INFINITY), 0.1, 0.9, 0.999, 1e-8),
      DivergenceError);
}

TEST_CASE("updates are elementwise: permuting coordinates permutes updates") {
  Rng rng(3);
  Tensor theta({6}), grads({6});
  for (std::size_t i = 0; i < 6; ++i) {
    theta[i] = rng.uniform(-1, 1);
    grads[i] = rng.uniform(-1, 1);
  }
  const std::size_t perm[6] = {4, 2, 0, 5, 1, 3};
  Tensor theta_p({6}), grads_p({6});
  for (std::size_t i = 0; i < 6; ++i) {
    theta_p[i] = theta[perm[i]];
    grads_p[i] = grads[perm[i]];
  }

  Tensor m1({6}), v1({6}), m2({6}), v2({6});
  for (std::uint64_t t = 1; t <= 3; ++t) {
    adam_step(m1, v1, t, theta, grads, 0.01, 0.9, 0.999, 1e-8);
    adam_step(m2, v2, t, theta_p, grads_p, 0.01, 0.9, 0.999, 1e-8);
  }
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(theta_p[i] == doctest::Approx(theta[perm[i]]).epsilon(1e-15));
  }
}

TEST_CASE("default hyperparameters match the standard setup") {
  OptConfig cfg;
  CHECK(cfg.alpha == 0.001);
  CHECK(cfg.beta1 == 0.9);
  CHECK(cfg.beta2 == 0.999);
  CHECK(cfg.eps == 1e-8);
  CHECK(cfg.decay == 0.0);
}

TEST_CASE("Optimizer wrapper threads state across steps") {
  OptConfig cfg;
  cfg.kind = OptKind::kSgdMomentum;
  cfg.alpha = 0.1;
  cfg.gamma = 0.9;
  Optimizer opt(cfg);

  Tensor theta = scalar(1.0);
  Tensor grad = scalar(1.0);
  std::vector<ParamRef> refs = {{&theta, &grad, "theta"}};
  opt.step(refs);
  const double after_first = theta[0];
  opt.step(refs);
  CHECK(after_first - theta[0] == doctest::Approx(0.19).epsilon(1e-15));
  CHECK(opt.steps_taken() == 2);
}

TEST_CASE("inverse-time decay shrinks the learning rate") {
  OptConfig cfg;
  cfg.kind = OptKind::kSgdMomentum;
  cfg.alpha = 0.1;
  cfg.gamma = 0.0;
  cfg.decay = 1.0;
  Optimizer opt(cfg);

  Tensor theta = scalar(0.0);
  Tensor grad = scalar(1.0);
  std::vector<ParamRef> refs = {{&theta, &grad, "theta"}};
  opt.step(refs);  // alpha_1 = 0.1 / (1 + 0) = 0.1
  CHECK(theta[0] == doctest::Approx(-0.1).epsilon(1e-15));
  opt.step(refs);  // alpha_2 = 0.1 / 2
  CHECK(theta[0] == doctest::Approx(-0.15).epsilon(1e-15));
}
