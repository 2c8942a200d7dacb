#include "mpp/rng.hpp"

#include <numbers>

namespace mpp {

double Rng::normal() {
  if (has_spare) {
    has_spare = false;
    return spare;
  }
  double u1 = u01p();
  double u2 = u01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double th = 2.0 * std::numbers::pi * u2;
  spare = r * std::sin(th);
  has_spare = true;
  return r * std::cos(th);
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw invalid_parameter("Rng::poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;

  if (mean < 30.0) {
    // chop-down inversion
    double p = std::exp(-mean);
    double f = p;
    double u = u01();
    std::uint64_t k = 0;
    while (u > f) {
      ++k;
      p *= mean / static_cast<double>(k);
      f += p;
      if (k > 10000000ull) throw model_error("Rng::poisson: inversion failed to terminate");
    }
    return k;
  }

  // Hormann's PTRS transformed rejection, valid for mean >= 10
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    double u = u01() - 0.5;
    double v = u01p();
    double us = 0.5 - std::fabs(u);
    double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kd * log_mean - mean - std::lgamma(kd + 1.0))
      return static_cast<std::uint64_t>(kd);
  }
}

}  // namespace mpp
