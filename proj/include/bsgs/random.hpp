#ifndef BSGS_RANDOM_HPP_
#define BSGS_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace bsgs {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

// splitmix64 finalizer, used to derive independent sub-stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: p outside (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// log Phi(x), accurate far into the lower tail.
inline double log_norm_cdf(double x) {
  if (x > -20.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

/// x^2/2 + log Phi(x). The sum stays finite where each term alone over/underflows.
inline double half_square_plus_log_norm_cdf(double x) {
  if (x > -20.0) return 0.5 * x * x + std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -std::log(-x) - kLogSqrt2Pi + std::log(series);
}

inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// Random source for the samplers. Wraps mt19937_64 so that every draw goes
/// through one engine and chains are reproducible from a single seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    // (0,1): never returns exactly 0, so logs and quantiles are safe.
    for (;;) {
      double u = std::generate_canonical<double, 53>(engine_);
      if (u > 0.0) return u;
    }
  }

  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }

  /// Gamma with shape and rate.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw std::domain_error("gamma: non-positive parameter");
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_) / rate;
  }

  /// Inverse-Gamma with shape and scale: 1 / Gamma(shape, rate = scale).
  double inv_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  double exponential_mean(double mean) { return -mean * std::log(uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

  /// N(mean, sd^2) truncated to [0, inf).
  double positive_normal(double mean, double sd) {
    const double a = -mean / sd;  // standardized lower bound
    double z;
    if (a > 6.0) {
      z = tail_exponential(a);
    } else if (a < -6.0) {
      do { z = normal(); } while (z < a);
    } else if (a >= 0.0) {
      // Upper tail P(Z > a) stays well represented for moderate a.
      const double upper = norm_cdf(-a);
      z = -norm_quantile(uniform() * upper);
    } else {
      const double lower = norm_cdf(a);
      z = norm_quantile(lower + uniform() * (1.0 - lower));
    }
    const double x = mean + sd * z;
    return x > 0.0 ? x : 0.0;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  // Robert (1995) exponential proposal for Z | Z > a, a > 0.
  double tail_exponential(double a) {
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      const double z = a - std::log(uniform()) / alpha;
      const double d = z - alpha;
      if (std::log(uniform()) <= -0.5 * d * d) return z;
    }
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace bsgs

#endif  // BSGS_RANDOM_HPP_
