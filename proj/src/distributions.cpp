#include "mpsfit/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mpsfit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void throw_support(const char* dist, double x, const char* side, double bound) {
  std::ostringstream os;
  os.precision(17);
  os << dist << ": x = " << x << " is " << side << " bound " << bound;
  throw DomainError(os.str());
}

void check_probability(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    std::ostringstream os;
    os << "quantile: probability " << q << " outside (0, 1)";
    throw DomainError(os.str());
  }
}

// Position of x relative to the GEV support. Returns u = -gamma z, with the
// invariant u > -1 for interior points and u == -1 at the finite endpoint.
double gev_u(double x, const GevParams& p) {
  validate(p);
  const double z = (x - p.mu) / p.sigma;
  if (std::abs(p.gamma) < kGammaEps) return -z;  // unused by callers on this branch
  const double u = -p.gamma * z;
  if (u < -1.0) {
    if (p.gamma > 0.0)
      throw_support("gev", x, "above upper", gev_upper_bound(p));
    throw_support("gev", x, "below lower", gev_lower_bound(p));
  }
  return u;
}

// log of (1 - gamma z)^(1/gamma), i.e. the exponent carried by every GEV/GPD
// formula. The gamma -> 0 limit is -z.
double log_tail_term(double u, double z, double gamma) {
  if (std::abs(gamma) < kGammaEps) return -z;
  return std::log1p(u) / gamma;
}

// Density limit at a finite endpoint where 1 - gamma z = 0. `upper` is true
// for an upper endpoint (gamma > 0).
double endpoint_logpdf(const char* dist, double x, double gamma, double sigma, bool upper,
                       double bound) {
  if (!upper) return -kInf;
  if (gamma < 1.0) return -kInf;
  if (gamma == 1.0) return -std::log(sigma);
  std::ostringstream os;
  os.precision(17);
  os << dist << ": density unbounded at endpoint x = " << x << " (bound " << bound
     << ", gamma = " << gamma << " > 1)";
  throw DomainError(os.str());
}

}  // namespace

void validate(const GevParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.gamma) ||
      !std::isfinite(p.mu))
    throw DomainError("gev: need finite parameters with sigma > 0");
}

void validate(const GpdParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.gamma))
    throw DomainError("gpd: need finite parameters with sigma > 0");
}

void validate(const ExpParams& p) {
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
    throw DomainError("exponential: need finite lambda > 0");
}

double gev_lower_bound(const GevParams& p) {
  if (p.gamma < -kGammaEps) return p.mu + p.sigma / p.gamma;
  return -kInf;
}

double gev_upper_bound(const GevParams& p) {
  if (p.gamma > kGammaEps) return p.mu + p.sigma / p.gamma;
  return kInf;
}

double gpd_upper_bound(const GpdParams& p) {
  if (p.gamma > kGammaEps) return p.sigma / p.gamma;
  return kInf;
}

bool gev_in_support(double x, const GevParams& p) {
  if (!std::isfinite(x)) return false;
  if (std::abs(p.gamma) < kGammaEps) return true;
  return -p.gamma * (x - p.mu) / p.sigma > -1.0;
}

bool gpd_in_support(double x, const GpdParams& p) {
  if (!(x > 0.0) || !std::isfinite(x)) return false;
  if (std::abs(p.gamma) < kGammaEps) return true;
  return -p.gamma * x / p.sigma > -1.0;
}

// ---------------------------------------------------------------------------
// GEV

double gev_cdf(double x, const GevParams& p) {
  const double u = gev_u(x, p);
  if (std::abs(p.gamma) >= kGammaEps && u == -1.0) return p.gamma > 0.0 ? 1.0 : 0.0;
  const double z = (x - p.mu) / p.sigma;
  return std::exp(-std::exp(log_tail_term(u, z, p.gamma)));
}

double gev_sf(double x, const GevParams& p) {
  const double u = gev_u(x, p);
  if (std::abs(p.gamma) >= kGammaEps && u == -1.0) return p.gamma > 0.0 ? 0.0 : 1.0;
  const double z = (x - p.mu) / p.sigma;
  return -std::expm1(-std::exp(log_tail_term(u, z, p.gamma)));
}

double gev_logpdf(double x, const GevParams& p) {
  const double u = gev_u(x, p);
  const double z = (x - p.mu) / p.sigma;
  if (std::abs(p.gamma) < kGammaEps) return -std::log(p.sigma) - z - std::exp(-z);
  if (u == -1.0) {
    const bool upper = p.gamma > 0.0;
    return endpoint_logpdf("gev", x, p.gamma, p.sigma, upper,
                           upper ? gev_upper_bound(p) : gev_lower_bound(p));
  }
  const double y = log_tail_term(u, z, p.gamma);
  return -std::log(p.sigma) + y - std::log1p(u) - std::exp(y);
}

double gev_pdf(double x, const GevParams& p) { return std::exp(gev_logpdf(x, p)); }

double gev_quantile(double q, const GevParams& p) {
  validate(p);
  check_probability(q);
  const double l = std::log(-std::log(q));
  if (std::abs(p.gamma) < kGammaEps) return p.mu - p.sigma * l;
  return p.mu - p.sigma / p.gamma * std::expm1(p.gamma * l);
}

// ---------------------------------------------------------------------------
// GPD

namespace {

// u = -gamma x / sigma; same conventions as gev_u, plus x >= 0.
double gpd_u(double x, const GpdParams& p) {
  validate(p);
  if (x < 0.0 || std::isnan(x)) throw_support("gpd", x, "below lower", 0.0);
  if (std::abs(p.gamma) < kGammaEps) return 0.0;
  const double u = -p.gamma * x / p.sigma;
  if (u < -1.0) throw_support("gpd", x, "above upper", gpd_upper_bound(p));
  return u;
}

}  // namespace

double gpd_cdf(double x, const GpdParams& p) {
  const double u = gpd_u(x, p);
  if (std::abs(p.gamma) >= kGammaEps && u == -1.0) return 1.0;
  return -std::expm1(log_tail_term(u, x / p.sigma, p.gamma));
}

double gpd_sf(double x, const GpdParams& p) {
  const double u = gpd_u(x, p);
  if (std::abs(p.gamma) >= kGammaEps && u == -1.0) return 0.0;
  return std::exp(log_tail_term(u, x / p.sigma, p.gamma));
}

double gpd_logpdf(double x, const GpdParams& p) {
  const double u = gpd_u(x, p);
  const double z = x / p.sigma;
  if (std::abs(p.gamma) < kGammaEps) return -std::log(p.sigma) - z;
  if (u == -1.0) return endpoint_logpdf("gpd", x, p.gamma, p.sigma, true, gpd_upper_bound(p));
  return -std::log(p.sigma) + log_tail_term(u, z, p.gamma) - std::log1p(u);
}

double gpd_pdf(double x, const GpdParams& p) { return std::exp(gpd_logpdf(x, p)); }

double gpd_quantile(double q, const GpdParams& p) {
  validate(p);
  check_probability(q);
  const double l = std::log1p(-q);
  if (std::abs(p.gamma) < kGammaEps) return -p.sigma * l;
  return -p.sigma / p.gamma * std::expm1(p.gamma * l);
}

// ---------------------------------------------------------------------------
// Exponential

double exp_cdf(double x, const ExpParams& p) {
  validate(p);
  if (x < 0.0) throw_support("exponential", x, "below lower", 0.0);
  return -std::expm1(-p.lambda * x);
}

double exp_quantile(double q, const ExpParams& p) {
  validate(p);
  check_probability(q);
  return -std::log1p(-q) / p.lambda;
}

std::vector<double> sample(const AnyParams& dist, std::size_t n, Stream& stream) {
  std::vector<double> out(n);
  std::visit(
      [&](const auto& p) {
        validate(p);
        using P = std::decay_t<decltype(p)>;
        for (auto& v : out) {
          const double u = stream.next_uniform();
          if constexpr (std::is_same_v<P, GevParams>)
            v = gev_quantile(u, p);
          else if constexpr (std::is_same_v<P, GpdParams>)
            v = gpd_quantile(u, p);
          else
            v = exp_quantile(u, p);
        }
      },
      dist);
  return out;
}

}  // namespace mpsfit
