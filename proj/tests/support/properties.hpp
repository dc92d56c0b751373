#pragma once

// Property checks shared by the unit tests and the acceptance suite. Each
// returns a Check carrying the worst observed deviation.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mpsfit/estimation.hpp"
#include "mpsfit/gof.hpp"
#include "support/oracles.hpp"

namespace mpsfit::testing {

struct Check {
  bool ok = true;
  double worst = 0.0;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

/// Small deterministic helper over mpsfit::Stream.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : s_(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * s_.next_uniform(); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(s_.next_u64() % (hi - lo + 1));
  }
  Stream& stream() { return s_; }

 private:
  Stream s_;
};

inline ModelParams random_params(Draw& d, Model m) {
  if (m == Model::Gev) return GevParams{d.uniform(-1.0, 1.5), d.uniform(-5, 5), d.uniform(0.2, 5)};
  return GpdParams{d.uniform(-1.0, 1.5), d.uniform(0.2, 5)};
}

inline AnyParams as_any(const ModelParams& p) {
  return std::visit([](const auto& q) -> AnyParams { return q; }, p);
}

inline ModelParams perturb(Draw& d, const ModelParams& p) {
  if (const auto* g = std::get_if<GevParams>(&p))
    return GevParams{g->gamma + d.uniform(-0.2, 0.2), g->mu + d.uniform(-0.3, 0.3),
                     g->sigma * d.uniform(0.7, 1.4)};
  const auto& q = std::get<GpdParams>(p);
  return GpdParams{q.gamma + d.uniform(-0.2, 0.2), q.sigma * d.uniform(0.7, 1.4)};
}

/// Spacings sum to 1 within 1e-12 and are nonnegative for random models and
/// samples drawn from them.
inline Check spacings_property(std::size_t cases, std::uint64_t seed) {
  Check c;
  Draw d(seed);
  for (std::size_t k = 0; k < cases; ++k) {
    const Model m = k % 2 ? Model::Gev : Model::Gpd;
    const ModelParams p = random_params(d, m);
    const OrderedSample s(sample(as_any(p), d.index(1, 60), d.stream()));
    const auto sp = spacings(s, p);
    double sum = 0.0;
    for (double v : sp) {
      if (v < 0.0) c.fail("negative spacing");
      sum += v;
    }
    c.worst = std::max(c.worst, std::abs(sum - 1.0));
    if (std::abs(sum - 1.0) > 1e-12) c.fail("spacings sum deviates from 1 by " + std::to_string(sum - 1.0));
  }
  return c;
}

/// M(theta) >= (n+1) log(n+1) on samples of distinct points (AM-GM).
inline Check moran_lower_bound_property(std::size_t cases, std::uint64_t seed) {
  Check c;
  c.worst = std::numeric_limits<double>::infinity();  // smallest M - bound seen
  Draw d(seed);
  std::size_t finite = 0;
  for (std::size_t k = 0; k < cases; ++k) {
    const Model m = k % 2 ? Model::Gev : Model::Gpd;
    const ModelParams truth = random_params(d, m);
    const OrderedSample s(sample(as_any(truth), d.index(2, 60), d.stream()));
    if (s.has_ties()) continue;
    const ModelParams at = k % 3 ? perturb(d, truth) : truth;
    const double mval = mps_objective(s, at);
    const double n1 = static_cast<double>(s.size() + 1);
    const double bound = n1 * std::log(n1);
    if (std::isfinite(mval)) ++finite;
    c.worst = std::min(c.worst, mval - bound);
    if (mval < bound - 1e-9) c.fail("M below (n+1) log(n+1)");
  }
  if (finite < cases / 4) c.fail("too few feasible cases to be meaningful");
  return c;
}

inline std::vector<ModelParams> reference_models() {
  return {GevParams{-0.2, 1, 1}, GevParams{0.2, 1, 1},    GevParams{1.0, 1, 1},
          GevParams{1.2, 1, 1},  GevParams{-0.8, -3, 2.5}, GevParams{0.0, 2, 0.5},
          GpdParams{-0.2, 1},    GpdParams{0.2, 1},        GpdParams{1.0, 1},
          GpdParams{1.2, 1},     GpdParams{-0.7, 3},       GpdParams{0.0, 2}};
}

inline double cdf_of(const ModelParams& p, double x) {
  if (const auto* g = std::get_if<GevParams>(&p)) return gev_cdf(x, *g);
  return gpd_cdf(x, std::get<GpdParams>(p));
}
inline double pdf_of(const ModelParams& p, double x) {
  if (const auto* g = std::get_if<GevParams>(&p)) return gev_pdf(x, *g);
  return gpd_pdf(x, std::get<GpdParams>(p));
}
inline double quantile_of(const ModelParams& p, double q) {
  if (const auto* g = std::get_if<GevParams>(&p)) return gev_quantile(q, *g);
  return gpd_quantile(q, std::get<GpdParams>(p));
}

inline std::vector<double> probability_grid() {
  std::vector<double> q = {0.001};
  for (int i = 1; i <= 99; ++i) q.push_back(i / 100.0);
  q.push_back(0.999);
  return q;
}

/// cdf(quantile(q)) == q within 1e-9, and cdf nondecreasing on a 1000-point
/// grid spanning the 0.001..0.999 quantile range.
inline Check roundtrip_property() {
  Check c;
  for (const auto& p : reference_models()) {
    for (double q : probability_grid()) {
      const double err = std::abs(cdf_of(p, quantile_of(p, q)) - q);
      c.worst = std::max(c.worst, err);
      if (err > 1e-9) c.fail("cdf(quantile(q)) round trip error");
    }
    const double lo = quantile_of(p, 0.001), hi = quantile_of(p, 0.999);
    double prev = -1.0;
    for (int i = 0; i < 1000; ++i) {
      const double f = cdf_of(p, lo + (hi - lo) * i / 999.0);
      if (f < prev) c.fail("cdf decreases on the support grid");
      prev = f;
    }
  }
  return c;
}

/// pdf matches a five-point difference of the cdf within 1e-6 relative.
inline Check pdf_derivative_property() {
  Check c;
  for (const auto& p : reference_models()) {
    const auto v = to_vector(p);
    const double sigma = v.back();
    for (double q : probability_grid()) {
      if (q < 0.01 || q > 0.99) continue;
      const double x = quantile_of(p, q);
      // Keep the stencil well inside the support near finite endpoints.
      double room = sigma;
      if (const auto* g = std::get_if<GevParams>(&p)) {
        room = std::min({room, x - gev_lower_bound(*g), gev_upper_bound(*g) - x});
      } else {
        const auto& gp = std::get<GpdParams>(p);
        room = std::min({room, x, gpd_upper_bound(gp) - x});
      }
      const double h = 1e-3 * room;
      const double fd = derivative([&](double t) { return cdf_of(p, t); }, x, h);
      const double pdf = pdf_of(p, x);
      const double rel = std::abs(fd - pdf) / pdf;
      c.worst = std::max(c.worst, rel);
      if (rel > 1e-6) {
        std::ostringstream os;
        os << "pdf vs finite difference at q=" << q << ": rel " << rel;
        c.fail(os.str());
      }
    }
  }
  return c;
}

/// gamma = +/-1e-12 agrees with the Gumbel / exponential forms within 1e-8.
inline Check seam_property() {
  Check c;
  for (double g : {1e-12, -1e-12}) {
    for (double z = -3.0; z <= 6.0; z += 0.05) {
      const double gumbel = std::exp(-std::exp(-z));
      const double e1 = std::abs(gev_cdf(1.0 + 2.0 * z, GevParams{g, 1.0, 2.0}) - gumbel);
      c.worst = std::max(c.worst, e1);
      if (e1 > 1e-8) c.fail("gev seam");
      if (z > 0) {
        const double expo = -std::expm1(-z);
        const double e2 = std::abs(gpd_cdf(2.0 * z, GpdParams{g, 2.0}) - expo);
        c.worst = std::max(c.worst, e2);
        if (e2 > 1e-8) c.fail("gpd seam");
      }
    }
  }
  return c;
}

/// M on {a x + b} at (gamma, a mu + b, a sigma) equals M on {x} at theta.
/// With a a power of two and x, mu, b on a dyadic grid the transform is exact
/// in floating point, so the two objectives must agree bit for bit. General
/// real (a, b) are checked to 1e-9 relative, the slack being the rounding of
/// a x + b itself.
inline Check objective_equivariance_property(std::size_t cases, std::uint64_t seed) {
  Check c;
  Draw d(seed);
  const auto grid = [](double v) { return std::ldexp(std::round(std::ldexp(v, 30)), -30); };
  for (std::size_t k = 0; k < cases; ++k) {
    const GevParams p{d.uniform(-0.6, 0.6), grid(d.uniform(-2, 2)), d.uniform(0.5, 2)};
    std::vector<double> x = sample(p, d.index(3, 50), d.stream());
    for (double& v : x) v = grid(v);
    const OrderedSample base(x);
    const double m1 = mps_objective(base, p);

    const double a = std::ldexp(1.0, static_cast<int>(d.index(0, 8)) - 4);
    const double b = std::ldexp(std::round(d.uniform(-100, 100) * 1024), -10);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    const double m2 = mps_objective(OrderedSample(y), GevParams{p.gamma, a * p.mu + b, a * p.sigma});
    if (!(m1 == m2)) c.fail("objective not exactly equivariant under a dyadic transform");

    const double ar = std::exp(d.uniform(-3, 3)), br = d.uniform(-100, 100);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = ar * x[i] + br;
    const double m3 =
        mps_objective(OrderedSample(y), GevParams{p.gamma, ar * p.mu + br, ar * p.sigma});
    const double rel = std::abs(m1 - m3) / std::abs(m1);
    c.worst = std::max(c.worst, rel);
    if (!(rel <= 1e-9)) c.fail("objective not equivariant under a real transform");
  }
  return c;
}

/// fit_mps on {a x + b} returns (gamma, a mu + b, a sigma) within 1e-4.
inline Check estimator_equivariance_property(std::size_t cases, std::uint64_t seed) {
  Check c;
  Draw d(seed);
  for (std::size_t k = 0; k < cases; ++k) {
    const GevParams p{d.uniform(-0.4, 0.8), 1.0, 1.0};
    std::vector<double> x = sample(p, 30, d.stream());
    const double a = std::exp(d.uniform(-2, 2)), b = d.uniform(-50, 50);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    const auto f1 = std::get<GevParams>(fit_mps(OrderedSample(x), Model::Gev).params);
    const auto f2 = std::get<GevParams>(fit_mps(OrderedSample(y), Model::Gev).params);
    const double e = std::max({std::abs(f2.gamma - f1.gamma), std::abs((f2.mu - b) / a - f1.mu),
                               std::abs(f2.sigma / a - f1.sigma)});
    c.worst = std::max(c.worst, e);
    if (!(e <= 1e-4)) c.fail("fit_mps not location-scale equivariant");
  }
  return c;
}

/// Optimizer result is no worse than the brute-force grid (plus 1e-6) on
/// small GPD samples: first half MPS, second half MLE.
inline Check grid_oracle_property(std::size_t instances, std::uint64_t seed) {
  Check c;
  c.worst = -std::numeric_limits<double>::infinity();  // largest optimizer - grid gap
  Draw d(seed);
  for (std::size_t k = 0; k < instances; ++k) {
    const bool mle = k >= instances / 2;
    const GpdParams truth{mle ? d.uniform(-0.4, 0.3) : d.uniform(-0.5, 1.2), d.uniform(0.5, 2.0)};
    const OrderedSample s(sample(truth, d.index(10, 20), d.stream()));
    FitResult f;
    GridBest g;
    if (mle) {
      f = fit_mle(s, Model::Gpd);
      g = grid_search([&](double gm, double sg) { return oracle_gpd_nll(s.values(), gm, sg); },
                      -1.0, 0.999, 0.1, 5.0);
    } else {
      f = fit_mps(s, Model::Gpd);
      g = grid_search([&](double gm, double sg) { return oracle_gpd_mps(s.values(), gm, sg); },
                      -1.0, 2.0, 0.1, 5.0);
    }
    const double gap = *f.objective - g.value;
    c.worst = std::max(c.worst, gap);
    if (!(gap <= 1e-6)) {
      std::ostringstream os;
      os << (mle ? "mle" : "mps") << " instance " << k << ": optimizer " << *f.objective
         << " vs grid " << g.value;
      c.fail(os.str());
    }
  }
  return c;
}

/// chisq_cdf(x, 2) == 1 - exp(-x/2) within 1e-12.
inline Check chisq_closed_form_property() {
  Check c;
  for (double x = 0.0; x <= 60.0; x += 0.01) {
    const double e = std::abs(chisq_cdf(x, 2) - (-std::expm1(-x / 2)));
    c.worst = std::max(c.worst, e);
    if (e > 1e-12) c.fail("chisq_cdf(x, 2) differs from 1 - exp(-x/2)");
  }
  return c;
}

}  // namespace mpsfit::testing
