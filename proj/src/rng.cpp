#include "sbmvar/rng.hpp"

#include <algorithm>
#include <cmath>

#include "sbmvar/stats.hpp"

namespace sbmvar {

int Rng::categorical_log(std::span<const double> log_w) {
  if (log_w.empty()) throw std::invalid_argument("categorical_log: empty weights");
  double lse = log_sum_exp(log_w);
  double u = uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    cum += std::exp(log_w[i] - lse);
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(log_w.size()) - 1;
}

double Rng::truncated_normal(double mean, double sd, double lo, double hi) {
  double a = norm_cdf((lo - mean) / sd);
  double b = norm_cdf((hi - mean) / sd);
  double u = uniform();
  double p = a + u * (b - a);
  p = std::clamp(p, 1e-15, 1.0 - 1e-15);
  double x = mean + sd * norm_quantile(p);
  return std::clamp(x, lo, hi);
}

std::uint64_t Rng::derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  // splitmix64 over the mixed words
  std::uint64_t x = master ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xBF58476D1CE4E5B9ULL);
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(x));
}

}  // namespace sbmvar
