#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpsfit/estimation.hpp"

namespace mpsfit {
namespace {

constexpr double kLog2 = std::numbers::ln2;
const double kLog3 = std::log(3.0);
constexpr int kMaxNewton = 50;
constexpr double kNewtonTol = 1e-9;

// f(g) = (1 - 3^-g) / (1 - 2^-g) and its derivative. f decreases from +inf
// (g -> -inf) to 1 (g -> +inf), passing log 3 / log 2 at g = 0.
struct Ratio {
  double value;
  double slope;
};

Ratio shape_ratio(double g) {
  if (std::abs(g) < 1e-6) {
    const double r0 = kLog3 / kLog2;
    const double s0 = -r0 * (kLog3 - kLog2) / 2.0;
    return {r0 + s0 * g, s0};
  }
  const double num = -std::expm1(-g * kLog3);
  const double den = -std::expm1(-g * kLog2);
  const double dnum = kLog3 * std::exp(-g * kLog3);
  const double dden = kLog2 * std::exp(-g * kLog2);
  return {num / den, (dnum * den - num * dden) / (den * den)};
}

// g / (1 - 2^-g), continuous at 0.
double scale_factor(double g) {
  if (g == 0.0) return 1.0 / kLog2;
  return g / -std::expm1(-g * kLog2);
}

// log Gamma(1 + g). Forming 1 + g drops the low bits of a tiny g, so small
// arguments use the series -egamma g + sum_k (-1)^k zeta(k) g^k / k.
double lgamma1p(double g) {
  if (std::abs(g) >= 1e-3) return std::lgamma(1.0 + g);
  static constexpr double zeta[] = {1.6449340668482264, 1.2020569031595943, 1.0823232337111382,
                                    1.0369277551433699, 1.0173430619844491};
  double term = -g, sum = -std::numbers::egamma * g;
  for (int k = 2; k <= 6; ++k) {
    term *= -g;
    sum += zeta[k - 2] * term / k;
  }
  return sum;
}

// (Gamma(1 + g) - 1) / g, continuous at 0. Requires g > -1.
double location_factor(double g) {
  if (g == 0.0) return -std::numbers::egamma;
  return std::expm1(lgamma1p(g)) / g;
}

}  // namespace

SamplePwm sample_pwm(const OrderedSample& sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw EstimationError("pwm needs at least 3 observations");
  const double nm1 = static_cast<double>(n - 1);
  const double nm2 = static_cast<double>(n - 2);
  SamplePwm b;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = sample[j];
    const double jd = static_cast<double>(j);  // j - 1 in 1-based terms
    b.b0 += x;
    b.b1 += jd / nm1 * x;
    b.b2 += jd * (jd - 1.0) / (nm1 * nm2) * x;
  }
  const double nd = static_cast<double>(n);
  b.b0 /= nd;
  b.b1 /= nd;
  b.b2 /= nd;
  return b;
}

PwmSolution gev_from_pwm(const SamplePwm& b) {
  const double d1 = 2.0 * b.b1 - b.b0;
  const double d2 = 3.0 * b.b2 - b.b0;
  if (d1 == 0.0 || d2 == 0.0 || !std::isfinite(d1) || !std::isfinite(d2))
    throw EstimationError("pwm: degenerate moments (2 b1 - b0 or 3 b2 - b0 is zero)");
  const double target = d2 / d1;
  if (!(target > 1.0)) throw EstimationError("pwm: moment ratio has no gev solution");

  const double c = d1 / d2 - kLog2 / kLog3;
  double g = 7.8590 * c + 2.9554 * c * c;

  PwmSolution sol;
  bool done = false;
  for (int it = 1; it <= kMaxNewton; ++it) {
    const Ratio r = shape_ratio(g);
    double step = (r.value - target) / r.slope;
    if (!std::isfinite(step)) break;
    step = std::clamp(step, -1.0, 1.0);
    g -= step;
    sol.iterations = it;
    if (std::abs(step) < kNewtonTol) {
      done = true;
      break;
    }
  }
  if (!done) throw EstimationError("pwm: Newton-Raphson did not converge in 50 iterations");
  if (!(g > -1.0)) throw EstimationError("pwm: shape estimate <= -1 (infinite mean)");

  const double sigma = d1 * scale_factor(g) / std::tgamma(1.0 + g);
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw EstimationError("pwm: non-positive scale estimate");
  sol.params = GevParams{g, b.b0 + sigma * location_factor(g), sigma};
  return sol;
}

FitResult fit_pwm_gev(const OrderedSample& sample) {
  if (sample.size() < 3) throw EstimationError("pwm needs at least 3 observations");
  if (sample.front() == sample.back())
    throw EstimationError("degenerate sample: all observations are equal");
  const PwmSolution sol = gev_from_pwm(sample_pwm(sample));
  FitResult r;
  r.method = Method::Pwm;
  r.model = Model::Gev;
  r.params = sol.params;
  r.converged = true;
  r.iterations = sol.iterations;
  r.failure = detect_failure(r.params);
  return r;
}

}  // namespace mpsfit
