#include "fattree/ctmc.hpp"

#include <algorithm>
#include <cmath>

namespace fattree {

namespace {

class SupermarketState {
 public:
  explicit SupermarketState(std::int64_t n)
      : len_(static_cast<std::size_t>(n), 0), pos_(static_cast<std::size_t>(n), -1) {}

  std::int64_t busy() const { return static_cast<std::int64_t>(busy_.size()); }
  int length(std::int64_t q) const { return len_[static_cast<std::size_t>(q)]; }
  std::int64_t busy_at(std::int64_t i) const { return busy_[static_cast<std::size_t>(i)]; }

  // Returns the level i whose count m_i changed (new length on arrival,
  // old length on departure).
  int arrive(std::int64_t q) {
    auto& l = len_[static_cast<std::size_t>(q)];
    if (l == 0) {
      pos_[static_cast<std::size_t>(q)] = static_cast<std::int64_t>(busy_.size());
      busy_.push_back(q);
    }
    return ++l;
  }
  int depart(std::int64_t q) {
    auto& l = len_[static_cast<std::size_t>(q)];
    const int old = l--;
    if (l == 0) {
      const std::int64_t at = pos_[static_cast<std::size_t>(q)];
      const std::int64_t last = busy_.back();
      busy_[static_cast<std::size_t>(at)] = last;
      pos_[static_cast<std::size_t>(last)] = at;
      busy_.pop_back();
      pos_[static_cast<std::size_t>(q)] = -1;
    }
    return old;
  }

 private:
  std::vector<int> len_;
  std::vector<std::int64_t> pos_;
  std::vector<std::int64_t> busy_;
};

// Time integrals of m_i (number of queues with >= i packets), updated lazily
// whenever m_i changes.
class LevelIntegrals {
 public:
  void ensure(int level) {
    if (static_cast<std::size_t>(level) >= count_.size()) {
      count_.resize(static_cast<std::size_t>(level) + 1, 0);
      integral_.resize(count_.size(), 0.0);
      since_.resize(count_.size(), start_);
    }
  }
  void change(int level, int delta, double now) {
    ensure(level);
    const auto k = static_cast<std::size_t>(level);
    integral_[k] += static_cast<double>(count_[k]) * (now - since_[k]);
    since_[k] = now;
    count_[k] += delta;
  }
  void restart(double now) {
    start_ = now;
    for (std::size_t k = 0; k < count_.size(); ++k) {
      integral_[k] = 0.0;
      since_[k] = now;
    }
  }
  void flush(double now) {
    for (std::size_t k = 0; k < count_.size(); ++k) {
      integral_[k] += static_cast<double>(count_[k]) * (now - since_[k]);
      since_[k] = now;
    }
  }
  const std::vector<double>& integrals() const { return integral_; }

 private:
  std::vector<std::int64_t> count_;
  std::vector<double> integral_;
  std::vector<double> since_;
  double start_ = 0.0;
};

}  // namespace

CtmcResult ctmc_supermarket_sim(const CtmcConfig& config) {
  if (config.queues < 2) throw ParameterError("CTMC needs at least 2 queues");
  if (!(config.lambda > 0.0 && config.lambda < 1.0)) {
    throw ParameterError("lambda must lie in (0, 1)");
  }
  if (config.threshold < 0) throw ParameterError("threshold must be >= 0");
  if (config.events < 1 || config.burn_in_events < 0) {
    throw ParameterError("event counts must be positive");
  }
  if (config.batches < 2) throw ParameterError("need at least 2 batches");

  const std::int64_t n = config.queues;
  const double arrival_rate = config.lambda * static_cast<double>(n);
  Rng rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> pick(0, n - 1);
  std::uniform_int_distribution<std::int64_t> pick_other(0, n - 2);

  SupermarketState state(n);
  LevelIntegrals levels;
  double now = 0.0;
  double measure_start = 0.0;
  std::int64_t total_packets = 0;
  double batch_area = 0.0;
  double batch_since = 0.0;
  double batch_start = 0.0;
  std::vector<double> batch_means;

  const std::int64_t total_events = config.burn_in_events + config.events;
  const std::int64_t batch_len = std::max<std::int64_t>(1, config.events / config.batches);

  for (std::int64_t ev = 0; ev < total_events; ++ev) {
    if (ev == config.burn_in_events) {
      levels.restart(now);
      measure_start = now;
      batch_area = 0.0;
      batch_since = batch_start = now;
    }
    const double rate = arrival_rate + static_cast<double>(state.busy());
    now += -std::log1p(-unit(rng)) / rate;
    batch_area += static_cast<double>(total_packets) * (now - batch_since);
    batch_since = now;

    if (unit(rng) * rate < arrival_rate) {
      const std::int64_t a = pick(rng);
      std::int64_t b = pick_other(rng);
      if (b >= a) ++b;
      const std::int64_t target = state.length(b) < state.length(a) - config.threshold ? b : a;
      levels.change(state.arrive(target), +1, now);
      ++total_packets;
    } else {
      const std::int64_t q = state.busy_at(
          std::uniform_int_distribution<std::int64_t>(0, state.busy() - 1)(rng));
      levels.change(state.depart(q), -1, now);
      --total_packets;
    }

    const std::int64_t measured = ev + 1 - config.burn_in_events;
    if (measured > 0 && measured % batch_len == 0 &&
        static_cast<int>(batch_means.size()) < config.batches) {
      const double span = now - batch_start;
      if (span > 0.0) batch_means.push_back(batch_area / (span * static_cast<double>(n)));
      batch_area = 0.0;
      batch_start = now;
    }
  }
  levels.flush(now);

  CtmcResult result;
  result.measured_events = config.events;
  result.measured_time = now - measure_start;
  result.short_horizon = config.events < 10 * n;
  result.tail.lambda = config.lambda;
  result.tail.threshold = config.threshold;
  const auto& area = levels.integrals();
  result.tail.s.assign(std::max<std::size_t>(area.size(), 2), 0.0);
  result.tail.s[0] = 1.0;
  const double norm = result.measured_time * static_cast<double>(n);
  for (std::size_t i = 1; i < area.size(); ++i) {
    result.tail.s[i] = norm > 0.0 ? area[i] / norm : 0.0;
    result.mean_queue_length += result.tail.s[i];
  }
  if (batch_means.size() >= 2) {
    double mean = 0.0;
    for (double m : batch_means) mean += m;
    mean /= static_cast<double>(batch_means.size());
    double ss = 0.0;
    for (double m : batch_means) ss += (m - mean) * (m - mean);
    const double k = static_cast<double>(batch_means.size());
    result.mean_queue_std_error = std::sqrt(ss / (k - 1.0) / k);
  }
  return result;
}

}  // namespace fattree
