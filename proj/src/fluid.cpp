#include "fattree/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fattree {

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ParameterError("lambda must lie in [0, 1)");
}

// lambda^e for real e >= 0, with lambda = 0 handled.
double lambda_pow(double lambda, double e) {
  if (lambda == 0.0) return e == 0.0 ? 1.0 : 0.0;
  return std::exp(e * std::log(lambda));
}

}  // namespace

TailDistribution TailDistribution::geometric(double lambda, int threshold, int i_max) {
  TailDistribution t;
  t.lambda = lambda;
  t.threshold = threshold;
  t.s.resize(static_cast<std::size_t>(i_max) + 1);
  double v = 1.0;
  for (auto& x : t.s) {
    x = v;
    v *= lambda;
  }
  return t;
}

std::vector<double> ode_rhs(const TailDistribution& s) {
  const int n = s.i_max();
  const int T = s.threshold;
  std::vector<double> f(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    f[static_cast<std::size_t>(i)] =
        s.lambda * s.p(i - 1) * (s.at(i - T - 1) + s.at(i + T)) - s.p(i);
  }
  return f;
}

double ode_residual(const TailDistribution& s) {
  double r = 0.0;
  for (double v : ode_rhs(s)) r = std::max(r, std::abs(v));
  return r;
}

double ode_rhs_sum(const TailDistribution& s) {
  double total = 0.0;
  for (double v : ode_rhs(s)) total += v;
  return total;
}

FixedPointResult solve_fixed_point(double lambda, int threshold, int i_max,
                                   const FixedPointOptions& options) {
  check_lambda(lambda);
  if (threshold < 0) throw ParameterError("threshold must be >= 0");
  if (i_max < threshold + 10) throw ParameterError("i_max must be >= T + 10");

  FixedPointResult result;
  result.tail = TailDistribution::geometric(lambda, threshold, i_max);
  TailDistribution& cur = result.tail;
  TailDistribution next = cur;
  double h = options.step;
  int streak = 0;

  for (std::int64_t it = 0; it < options.max_iterations; ++it) {
    const std::vector<double> f = ode_rhs(cur);
    double res = 0.0;
    for (double v : f) res = std::max(res, std::abs(v));
    if (res < options.tol) {
      result.iterations = it;
      result.residual = res;
      return result;
    }
    for (;;) {
      bool overshoot = false;
      next.s[0] = 1.0;
      for (int i = 1; i <= i_max; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double v = cur.s[k] + h * f[k];
        // Violations larger than the tolerance mean the step overshot;
        // smaller ones are numeric noise and are projected away.
        if (v < -options.tol || v > next.s[k - 1] + options.tol) overshoot = true;
        v = std::clamp(v, 0.0, next.s[k - 1]);
        next.s[k] = v;
      }
      if (!overshoot) break;
      h *= 0.5;
      streak = 0;
      if (h < options.min_step) {
        throw ConvergenceError("fixed-point step size underflow");
      }
    }
    std::swap(cur.s, next.s);
    if (h < options.step && ++streak >= 16) {
      h = std::min(options.step, 2.0 * h);
      streak = 0;
    }
  }
  throw ConvergenceError("fixed point did not converge within " +
                         std::to_string(options.max_iterations) + " iterations");
}

DecayCertificate decay_certificate(double lambda, int threshold, int n) {
  check_lambda(lambda);
  if (threshold < 0) throw ParameterError("threshold must be >= 0");
  if (n < threshold + 2) throw ParameterError("certificate needs n >= T + 2");
  DecayCertificate cert;
  cert.lambda = lambda;
  cert.threshold = threshold;

  const double T = threshold;
  auto f = [T](double a) { return std::pow(a, T + 1.0) - std::pow(a, T) - 1.0; };
  // f(1) = -1 and f is increasing on (1, inf), so the root > 1 is unique.
  double lo = 1.0, hi = 3.0;
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  cert.alpha = 0.5 * (lo + hi);

  cert.c = 1.0;
  for (int i = 0; i <= threshold + 1; ++i) {
    cert.c = std::min(cert.c, (i + 1) / std::pow(cert.alpha, i));
  }

  cert.g.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    cert.g[k] = i <= threshold + 1 ? i + 1.0 : cert.g[k - 1] + cert.g[k - 1 - threshold];
  }
  cert.z.resize(cert.g.size());
  cert.certified = true;
  for (std::size_t i = 0; i < cert.g.size(); ++i) {
    cert.z[i] = lambda_pow(lambda, cert.g[i] - 1.0);
    const double lower = cert.c * std::pow(cert.alpha, static_cast<double>(i));
    if (cert.g[i] < lower * (1.0 - 1e-12)) cert.certified = false;
  }
  return cert;
}

DecayReport check_decay_bounds(const TailDistribution& s, const DecayCertificate& cert,
                               double floor, double rel_slack) {
  DecayReport report;
  const int T = s.threshold;
  for (int i = 1; i <= s.i_max(); ++i) {
    const double v = s.at(i);
    if (!(v > floor)) continue;
    ++report.checked;
    const double a = s.lambda * s.at(i - 1) * s.at(i - 1 - T);
    const double b = static_cast<std::size_t>(i) < cert.z.size()
                         ? cert.z[static_cast<std::size_t>(i)]
                         : 0.0;
    const double c = lambda_pow(s.lambda, cert.c * std::pow(cert.alpha, i) - 1.0);
    const struct {
      char name;
      double limit;
      double* worst;
    } checks[] = {{'a', a, &report.worst_ratio_a},
                  {'b', b, &report.worst_ratio_b},
                  {'c', c, &report.worst_ratio_c}};
    for (const auto& chk : checks) {
      const double ratio = chk.limit > 0.0 ? v / chk.limit : INFINITY;
      *chk.worst = std::max(*chk.worst, ratio);
      if (v > chk.limit * (1.0 + rel_slack)) {
        report.violations.push_back({i, chk.name, v, chk.limit});
      }
    }
  }
  return report;
}

std::vector<double> lambda_rates(const TailDistribution& s) {
  const int T = s.threshold;
  std::vector<double> rates(static_cast<std::size_t>(s.i_max()) + 1);
  for (int i = 0; i <= s.i_max(); ++i) {
    rates[static_cast<std::size_t>(i)] = s.lambda * (s.at(i - T) + s.at(i + T + 1));
  }
  return rates;
}

LocalBalanceReport check_local_balance(const TailDistribution& s) {
  const std::vector<double> rates = lambda_rates(s);
  LocalBalanceReport report;
  for (int i = 0; i <= s.i_max(); ++i) {
    const double li = rates[static_cast<std::size_t>(i)];
    report.max_residual = std::max(report.max_residual, std::abs(s.p(i + 1) - li * s.p(i)));
    report.throughput += li * s.p(i);
  }
  report.throughput_error = std::abs(report.throughput - s.lambda);
  return report;
}

TailDistribution random_tail(double lambda, int threshold, int i_max, Rng& rng) {
  TailDistribution t;
  t.lambda = lambda;
  t.threshold = threshold;
  t.s.assign(static_cast<std::size_t>(i_max) + 1, 0.0);
  t.s[0] = 1.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int style = std::uniform_int_distribution<int>(0, 2)(rng);
  if (style == 0) {
    // Sorted uniforms.
    for (int i = 1; i <= i_max; ++i) t.s[static_cast<std::size_t>(i)] = u(rng);
    std::sort(t.s.begin() + 1, t.s.end(), std::greater<>());
  } else if (style == 1) {
    // Random multiplicative decay.
    for (int i = 1; i <= i_max; ++i) {
      t.s[static_cast<std::size_t>(i)] = t.s[static_cast<std::size_t>(i) - 1] * u(rng);
    }
  } else {
    // Plateau of ones followed by a cut.
    const int cut = std::uniform_int_distribution<int>(1, i_max)(rng);
    const double level = u(rng);
    for (int i = 1; i <= i_max; ++i) t.s[static_cast<std::size_t>(i)] = i < cut ? 1.0 : (i == cut ? level : 0.0);
  }
  return t;
}

namespace {

// Perturbs a few components of `x` while keeping it a valid tail.
TailDistribution perturb(const TailDistribution& x, Rng& rng) {
  TailDistribution y = x;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = x.i_max();
  const int touches = std::uniform_int_distribution<int>(1, std::max(1, n / 4))(rng);
  const double scale = std::pow(10.0, -6.0 * u(rng));
  for (int t = 0; t < touches; ++t) {
    const int i = std::uniform_int_distribution<int>(1, n)(rng);
    auto& v = y.s[static_cast<std::size_t>(i)];
    v += scale * (2.0 * u(rng) - 1.0);
  }
  for (int i = 1; i <= n; ++i) {
    auto& v = y.s[static_cast<std::size_t>(i)];
    v = std::clamp(v, 0.0, y.s[static_cast<std::size_t>(i) - 1]);
  }
  return y;
}

}  // namespace

LipschitzReport lipschitz_probe(double lambda, int threshold, int trials, int i_max, Rng& rng) {
  check_lambda(lambda);
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (i_max < 1) throw ParameterError("i_max must be >= 1");
  LipschitzReport report;
  report.bound = 6.0 * lambda + 2.0;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const TailDistribution x = random_tail(lambda, threshold, i_max, rng);
    const TailDistribution y =
        (t % 2 == 0) ? random_tail(lambda, threshold, i_max, rng) : perturb(x, rng);
    double dist = 0.0;
    for (int i = 0; i <= i_max; ++i) dist += std::abs(x.at(i) - y.at(i));
    if (dist == 0.0) continue;
    const auto fx = ode_rhs(x);
    const auto fy = ode_rhs(y);
    double sum_diff = 0.0, vec_diff = 0.0;
    for (std::size_t i = 0; i < fx.size(); ++i) {
      sum_diff += fx[i] - fy[i];
      vec_diff += std::abs(fx[i] - fy[i]);
    }
    report.max_ratio = std::max(report.max_ratio, std::abs(sum_diff) / dist);
    report.max_vector_ratio = std::max(report.max_vector_ratio, vec_diff / dist);
  }
  return report;
}

}  // namespace fattree
