#pragma once

#include <string>
#include <vector>

#include "hdltex/network.hpp"

namespace hdltex {

// Finite-difference verification across the layer families. Each family is
// checked on small randomized fixtures over `num_seeds` seeds; the reported
// value is the worst relative error seen.
struct GradCheckReport {
  struct Entry {
    std::string family;
    double max_rel_error = 0.0;
  };
  std::vector<Entry> entries;

  double worst() const;
  bool all_below(double bound) const;
};

GradCheckReport run_gradcheck_suite(std::size_t num_seeds = 5,
                                    std::uint64_t base_seed = 20170924);

// Fixture helpers, also used by the test suites.
std::vector<Feature> random_sparse_batch(std::size_t count, std::size_t dim,
                                         Rng& rng);
std::vector<Feature> random_sequence_batch(std::size_t count,
                                           std::size_t max_len,
                                           std::size_t dim, Rng& rng);
std::vector<int> random_targets(std::size_t count, std::size_t num_classes,
                                Rng& rng);

}  // namespace hdltex
