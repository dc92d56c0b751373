#include "mpsfit/gof.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mpsfit {
namespace {

constexpr int kMaxTerms = 100000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

// Series for P(a, x), good for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int i = 1; i < kMaxTerms; ++i) {
    term *= x / (a + i);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), good for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    std::ostringstream os;
    os << "incomplete gamma: need a > 0 and x >= 0 (a = " << a << ", x = " << x << ")";
    throw DomainError(os.str());
  }
}

void check_df(double df) {
  if (!(df >= 1.0)) throw DomainError("chi-square: degrees of freedom must be >= 1");
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chisq_cdf(double x, double df) {
  check_df(df);
  if (!(x >= 0.0)) throw DomainError("chi-square cdf: x must be >= 0");
  return gamma_p(0.5 * df, 0.5 * x);
}

double chisq_sf(double x, double df) {
  check_df(df);
  if (!(x >= 0.0)) throw DomainError("chi-square sf: x must be >= 0");
  return gamma_q(0.5 * df, 0.5 * x);
}

double moran_mean(std::size_t n) {
  const double m = static_cast<double>(n) + 1.0;
  return m * (std::log(m) + std::numbers::egamma) - 0.5 - 1.0 / (12.0 * m);
}

double moran_var(std::size_t n) {
  const double m = static_cast<double>(n) + 1.0;
  return m * (std::numbers::pi * std::numbers::pi / 6.0 - 1.0) - 0.5 - 1.0 / (6.0 * m);
}

int parameter_count(Model model) { return model == Model::Gev ? 3 : 2; }

MoranTestResult moran_test(double moran_value, std::size_t n, int k) {
  if (n < 2) throw DomainError("moran test: need n >= 2");
  if (k != 2 && k != 3) throw DomainError("moran test: k must be 2 (gpd) or 3 (gev)");
  const double nd = static_cast<double>(n);
  const double sd = std::sqrt(moran_var(n));
  MoranTestResult r;
  r.moran = moran_value;
  r.n = n;
  r.k = k;
  r.df = n;
  r.c1 = moran_mean(n) - std::sqrt(0.5 * nd) * sd;
  r.c2 = sd / std::sqrt(2.0 * nd);
  assert(r.c2 > 0.0);
  r.t_statistic = (moran_value + 0.5 * k - r.c1) / r.c2;
  if (std::isnan(r.t_statistic)) throw DomainError("moran test: statistic is NaN");
  r.p_value = r.t_statistic <= 0.0 ? 1.0 : chisq_sf(r.t_statistic, nd);
  return r;
}

MoranTestResult moran_test(const OrderedSample& sample, const FitResult& mps_fit) {
  if (mps_fit.method != Method::Mps)
    throw EstimationError("moran test needs a maximum product of spacings fit");
  return moran_test(mps_objective(sample, mps_fit.params), sample.size(),
                    parameter_count(mps_fit.model));
}

}  // namespace mpsfit
