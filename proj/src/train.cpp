#include "hdltex/train.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "hdltex/common.hpp"

namespace hdltex {

TrainSet TrainSet::from_features(std::vector<Feature> features,
                                 std::vector<int> targets) {
  if (features.size() != targets.size()) {
    throw std::logic_error("features/targets size mismatch");
  }
  auto shared = std::make_shared<std::vector<Feature>>(std::move(features));
  TrainSet set;
  set.feature_at = [shared](std::size_t i) { return (*shared)[i]; };
  set.targets = std::move(targets);
  return set;
}

namespace {

void clip_gradients(const std::vector<ParamRef>& refs, double clip_norm) {
  double sq = 0.0;
  for (const auto& ref : refs) {
    for (std::size_t i = 0; i < ref.grad->size(); ++i) {
      sq += (*ref.grad)[i] * (*ref.grad)[i];
    }
  }
  const double norm = std::sqrt(sq);
  if (norm <= clip_norm || norm == 0.0) return;
  const double scale = clip_norm / norm;
  for (const auto& ref : refs) {
    for (std::size_t i = 0; i < ref.grad->size(); ++i) {
      (*ref.grad)[i] *= scale;
    }
  }
}

}  // namespace

std::vector<EpochStats> train_network(Network& net, const TrainSet& data,
                                      const TrainOptions& opts) {
  if (opts.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (opts.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (data.size() == 0) throw DataError("empty training set");
  net.validate();

  Rng rng(opts.seed);
  Optimizer optimizer(opts.opt);
  auto refs = net.param_refs();

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<EpochStats> log;
  std::uint64_t step = 0;
  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size();
         start += opts.batch_size) {
      const std::size_t end = std::min(start + opts.batch_size, order.size());
      const double scale = 1.0 / static_cast<double>(end - start);
      ++step;

      net.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        auto res = net.accumulate_gradients(data.feature_at(i),
                                            data.targets[i], scale, true,
                                            &rng);
        batch_loss += res.loss;
        if (res.predicted == data.targets[i]) ++correct;
      }
      batch_loss *= scale;
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("training diverged at step " +
                              std::to_string(step) + " (non-finite loss)");
      }
      loss_sum += batch_loss * static_cast<double>(end - start);

      if (opts.clip_norm > 0.0) clip_gradients(refs, opts.clip_norm);
      optimizer.step(refs);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(order.size());
    stats.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(order.size());
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (opts.log != nullptr) {
      (*opts.log) << "epoch=" << stats.epoch << " loss=" << stats.mean_loss
                  << " acc=" << stats.train_accuracy
                  << " secs=" << stats.wall_seconds << "\n";
    }
    log.push_back(stats);
  }
  return log;
}

}  // namespace hdltex
