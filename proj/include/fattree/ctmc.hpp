#pragma once

#include <cstdint>
#include <vector>

#include "fattree/fluid.hpp"

namespace fattree {

// Supermarket model: N unit-rate exponential servers, Poisson arrivals of
// total rate N * lambda.  Each arrival picks a default queue A uniformly and
// a second queue B uniformly among the others, and joins B iff
// len(B) < len(A) - T.
struct CtmcConfig {
  std::int64_t queues = 10'000;
  double lambda = 0.9;
  int threshold = 0;
  std::int64_t burn_in_events = 2'000'000;
  std::int64_t events = 5'000'000;  // measured events after burn-in
  std::uint64_t seed = 1;
  int batches = 20;  // batch means for the standard error
};

struct CtmcResult {
  TailDistribution tail;  // time-averaged s_i
  double mean_queue_length = 0.0;
  double mean_queue_std_error = 0.0;  // batch-means estimate
  double measured_time = 0.0;
  std::int64_t measured_events = 0;
  bool short_horizon = false;  // fewer than 10 * N measured events
};

CtmcResult ctmc_supermarket_sim(const CtmcConfig& config);

}  // namespace fattree
