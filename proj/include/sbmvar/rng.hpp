#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace sbmvar {

/// Seedable random stream used by all samplers. One instance per chain;
/// substreams for parallel work are derived with substream().
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return unif_(engine_); }

  double normal() { return norm_(engine_); }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // shape/rate parameterization
  double gamma(double shape, double rate) {
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    return g(engine_);
  }

  double inv_gamma(double shape, double rate) {
    double g = gamma(shape, rate);
    // gamma(shape, rate) can underflow to 0 for tiny shapes; clamp
    if (g <= 0.0) g = 1e-300;
    return 1.0 / g;
  }

  double beta(double a, double b) {
    double x = gamma(a, 1.0);
    double y = gamma(b, 1.0);
    if (x + y <= 0.0) return 0.5;
    return x / (x + y);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index draw from unnormalized log-weights (log-sum-exp normalized).
  int categorical_log(std::span<const double> log_w);

  /// Truncated normal on [lo, hi] via inverse-CDF; a deterministic single
  /// uniform per draw keeps seed streams aligned across sweeps.
  double truncated_normal(double mean, double sd, double lo, double hi);

  /// Derived stream for parallel tasks; deterministic in (seed, index).
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                   std::uint64_t b = 0);

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace sbmvar
