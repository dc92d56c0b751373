#pragma once

// GEV, GPD and exponential primitives.
//
// Shape convention: gamma > 0 gives a support bounded ABOVE (the negative of
// the common xi convention). For the GEV,
//
//   H(x) = exp(-(1 - gamma (x - mu) / sigma)^(1/gamma)),  1 - gamma z > 0
//
// and for the GPD,
//
//   G(x) = 1 - (1 - gamma x / sigma)^(1/gamma),  x > 0, 1 - gamma x / sigma > 0.
//
// |gamma| < kGammaEps evaluates the gamma -> 0 limits (Gumbel / exponential).

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mpsfit/rng.hpp"

namespace mpsfit {

inline constexpr double kGammaEps = 1e-8;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct GevParams {
  double gamma = 0.0;
  double mu = 0.0;
  double sigma = 1.0;
};

struct GpdParams {
  double gamma = 0.0;
  double sigma = 1.0;
};

struct ExpParams {
  double lambda = 1.0;
};

using AnyParams = std::variant<GevParams, GpdParams, ExpParams>;

/// Throws DomainError unless sigma > 0 (lambda > 0 for the exponential).
void validate(const GevParams& p);
void validate(const GpdParams& p);
void validate(const ExpParams& p);

// Support endpoints; +/-infinity when unbounded.
double gev_lower_bound(const GevParams& p);
double gev_upper_bound(const GevParams& p);
double gpd_upper_bound(const GpdParams& p);

/// True iff x lies in the open support (1 - gamma z > 0, plus x > 0 for GPD).
bool gev_in_support(double x, const GevParams& p);
bool gpd_in_support(double x, const GpdParams& p);

// CDFs accept the closed support and return 0 / 1 at finite endpoints.
double gev_cdf(double x, const GevParams& p);
double gev_sf(double x, const GevParams& p);
double gev_pdf(double x, const GevParams& p);
double gev_logpdf(double x, const GevParams& p);
double gev_quantile(double q, const GevParams& p);

double gpd_cdf(double x, const GpdParams& p);
double gpd_sf(double x, const GpdParams& p);
double gpd_pdf(double x, const GpdParams& p);
double gpd_logpdf(double x, const GpdParams& p);
double gpd_quantile(double q, const GpdParams& p);

double exp_cdf(double x, const ExpParams& p);
double exp_quantile(double q, const ExpParams& p);

/// Inverse-CDF sampling: element i is quantile(U_i) for the i-th uniform
/// drawn from `stream`.
std::vector<double> sample(const AnyParams& dist, std::size_t n, Stream& stream);

}  // namespace mpsfit
