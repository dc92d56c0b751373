#pragma once

#include <cstddef>

#include "mpsfit/estimation.hpp"

namespace mpsfit {

/// Moran's statistic as a goodness-of-fit test (Cheng-Stephens chi-square
/// approximation). Under the null, T ~ chi-square with n degrees of freedom.
struct MoranTestResult {
  double moran = 0.0;  ///< M at the MPS estimate
  std::size_t n = 0;
  int k = 0;  ///< number of estimated parameters
  double c1 = 0.0;
  double c2 = 0.0;
  double t_statistic = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
};

/// (n+1)(log(n+1) + euler_gamma) - 1/2 - 1/(12(n+1))
double moran_mean(std::size_t n);
/// (n+1)(pi^2/6 - 1) - 1/2 - 1/(6(n+1))
double moran_var(std::size_t n);

/// T = (M + k/2 - C1) / C2 with C1 = mean - sqrt(n/2) sd, C2 = sd / sqrt(2n).
/// A negative T is clamped for the p-value: P(chi2 <= T) = 0, p = 1.
MoranTestResult moran_test(double moran_value, std::size_t n, int k);

/// Number of estimated parameters: 3 for the GEV, 2 for the GPD.
int parameter_count(Model model);

/// Tests an MPS fit against its own sample.
MoranTestResult moran_test(const OrderedSample& sample, const FitResult& mps_fit);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// P(chi2_df <= x). Throws DomainError for x < 0 or df < 1.
double chisq_cdf(double x, double df);
/// P(chi2_df > x), computed directly for accuracy in the tail.
double chisq_sf(double x, double df);

}  // namespace mpsfit
