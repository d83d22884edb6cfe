#pragma once

#include <cstdint>
#include <vector>

#include "fattree/routing.hpp"

namespace fattree {

// Fraction of queues holding at least i packets, truncated at i_max.
// Indices <= 0 read as 1 and indices > i_max read as 0.
struct TailDistribution {
  double lambda = 0.0;
  int threshold = 0;
  std::vector<double> s;  // s[0] == 1, size i_max + 1

  int i_max() const { return static_cast<int>(s.size()) - 1; }
  double at(int i) const {
    if (i <= 0) return 1.0;
    if (i > i_max()) return 0.0;
    return s[static_cast<std::size_t>(i)];
  }
  double p(int i) const { return at(i) - at(i + 1); }

  static TailDistribution geometric(double lambda, int threshold, int i_max);
};

// Fluid-limit drift.  Component i >= 1 is
//   lambda * p_{i-1} * (s_{i-T-1} + s_{i+T}) - p_i;
// component 0 is 0.
std::vector<double> ode_rhs(const TailDistribution& s);
double ode_residual(const TailDistribution& s);  // max-norm of ode_rhs

// Sum of the drift components; the scalar form used by the Lipschitz bound.
double ode_rhs_sum(const TailDistribution& s);

struct FixedPointOptions {
  double tol = 1e-12;
  double step = 0.1;
  double min_step = 1e-8;
  std::int64_t max_iterations = 50'000'000;
};

struct FixedPointResult {
  TailDistribution tail;
  std::int64_t iterations = 0;
  double residual = 0.0;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Integrates ds/dt = F(s) from s_i = lambda^i with forward Euler, halving the
// step whenever an update would break monotonicity, until |F|_inf < tol.
FixedPointResult solve_fixed_point(double lambda, int threshold, int i_max,
                                   const FixedPointOptions& options = {});

struct DecayCertificate {
  double lambda = 0.0;
  int threshold = 0;
  double alpha = 0.0;  // largest root of a^{T+1} = a^T + 1
  double c = 0.0;      // min_{i in [0, T+1]} (i + 1) / alpha^i
  std::vector<double> g;
  std::vector<double> z;  // z_i = lambda^{g_i - 1}
  bool certified = false;  // g_i >= c * alpha^i for every computed i
};

DecayCertificate decay_certificate(double lambda, int threshold, int n);

struct DecayViolation {
  int i = 0;
  char bound = 'a';  // 'a': claim bound, 'b': z-bound, 'c': lambda^{c alpha^i - 1}
  double value = 0.0;
  double limit = 0.0;
};

struct DecayReport {
  int checked = 0;  // indices with s_i above the floor
  std::vector<DecayViolation> violations;
  double worst_ratio_a = 0.0;  // max s_i / bound over checked i
  double worst_ratio_b = 0.0;
  double worst_ratio_c = 0.0;
  bool ok() const { return violations.empty(); }
};

// Checks, for every i >= 1 with s_i > floor:
//   s_i <= lambda s_{i-1} s_{i-1-T},  s_i <= z_i,  s_i <= lambda^{c alpha^i - 1},
// each up to a relative slack.
DecayReport check_decay_bounds(const TailDistribution& s, const DecayCertificate& cert,
                               double floor = 1e-14, double rel_slack = 1e-9);

// lambda_i = lambda (s_{i-T} + s_{i+T+1}) for i in [0, i_max].
std::vector<double> lambda_rates(const TailDistribution& s);

struct LocalBalanceReport {
  double max_residual = 0.0;      // max_i |p_{i+1} - lambda_i p_i|
  double throughput = 0.0;        // sum_i lambda_i p_i
  double throughput_error = 0.0;  // |throughput - lambda|
};

LocalBalanceReport check_local_balance(const TailDistribution& s);

struct LipschitzReport {
  double max_ratio = 0.0;         // |sum F(x) - sum F(y)| / |x - y|_1
  double max_vector_ratio = 0.0;  // |F(x) - F(y)|_1 / |x - y|_1
  double bound = 0.0;             // 6 lambda + 2
  int trials = 0;
};

// A random non-increasing sequence with s_0 = 1.
TailDistribution random_tail(double lambda, int threshold, int i_max, Rng& rng);

LipschitzReport lipschitz_probe(double lambda, int threshold, int trials, int i_max, Rng& rng);

}  // namespace fattree
