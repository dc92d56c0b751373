#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mpsfit/estimation.hpp"

namespace mpsfit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-point evaluation shared by spacings, M(theta) and the likelihood.
// With t = 1 - gamma z: log_t = log t, y = log t / gamma = log of the tail
// term t^(1/gamma). In the gamma -> 0 limit log_t = 0 and y = -z.
struct Point {
  bool in_closed_support = false;
  double log_t = 0.0;
  double y = 0.0;
};

// log(1 - exp(-a)) for a >= 0.
double log1mexp(double a) noexcept {
  return a <= std::numbers::ln2 ? std::log(-std::expm1(-a)) : std::log1p(-std::exp(-a));
}

// log(exp(hi) - exp(lo)); -inf when the difference is not positive.
double log_diff(double hi, double lo) noexcept {
  if (lo == -kInf) return hi;
  if (!(hi > lo)) return -kInf;
  return hi + log1mexp(hi - lo);
}

struct GevKernel {
  GevParams p;
  double log_sigma;

  explicit GevKernel(const GevParams& q) : p(q), log_sigma(std::log(q.sigma)) {}

  Point eval(double x) const noexcept {
    const double z = (x - p.mu) / p.sigma;
    if (std::abs(p.gamma) < kGammaEps) return {std::isfinite(z), 0.0, -z};
    const double u = -p.gamma * z;
    if (!(u >= -1.0)) return {};
    const double lt = std::log1p(u);
    return {true, lt, lt / p.gamma};
  }
  static double cdf(const Point& q) noexcept { return std::exp(-std::exp(q.y)); }
  static double sf(const Point& q) noexcept { return -std::expm1(-std::exp(q.y)); }
  static double logcdf(const Point& q) noexcept { return -std::exp(q.y); }
  // 1 - exp(-u) ~ u once u is tiny; keeps the far upper tail finite.
  static double logsf(const Point& q) noexcept {
    const double u = std::exp(q.y);
    return u < 1e-8 ? q.y - 0.5 * u : log1mexp(u);
  }
  double logpdf(const Point& q) const noexcept {
    if (q.log_t == -kInf) return std::numeric_limits<double>::quiet_NaN();
    return -log_sigma + q.y - q.log_t - std::exp(q.y);
  }
};

struct GpdKernel {
  GpdParams p;
  double log_sigma;

  explicit GpdKernel(const GpdParams& q) : p(q), log_sigma(std::log(q.sigma)) {}

  Point eval(double x) const noexcept {
    if (!(x >= 0.0) || !std::isfinite(x)) return {};
    const double z = x / p.sigma;
    if (std::abs(p.gamma) < kGammaEps) return {true, 0.0, -z};
    const double u = -p.gamma * z;
    if (!(u >= -1.0)) return {};
    const double lt = std::log1p(u);
    return {true, lt, lt / p.gamma};
  }
  static double cdf(const Point& q) noexcept { return -std::expm1(q.y); }
  static double sf(const Point& q) noexcept { return std::exp(q.y); }
  static double logcdf(const Point& q) noexcept { return log1mexp(-q.y); }
  static double logsf(const Point& q) noexcept { return q.y; }
  double logpdf(const Point& q) const noexcept {
    if (q.log_t == -kInf) return std::numeric_limits<double>::quiet_NaN();
    return -log_sigma + q.y - q.log_t;
  }
};

bool valid_sigma(double sigma) { return sigma > 0.0 && std::isfinite(sigma); }

bool valid(const GevParams& p) {
  return valid_sigma(p.sigma) && std::isfinite(p.gamma) && std::isfinite(p.mu);
}
bool valid(const GpdParams& p) { return valid_sigma(p.sigma) && std::isfinite(p.gamma); }

// Walks the spacings, calling sink(i, log D_i, point_i) for i = 0..n (point_i
// is the upper end of spacing i; for i == n it is unused). Returns the index of
// the first observation outside the closed support, or n + 1 if none.
// Spacings are formed in log space so that tail spacings whose CDF values
// underflow stay finite; the upper half uses survival differences.
template <class Kernel, class Sink>
std::size_t walk_spacings(const Kernel& k, std::span<const double> x, Sink&& sink) {
  const std::size_t n = x.size();
  double prev_lf = -kInf;
  double prev_ls = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point q = k.eval(x[i]);
    if (!q.in_closed_support) return i;
    const double lf = Kernel::logcdf(q);
    const double ls = Kernel::logsf(q);
    const double ld = lf <= -std::numbers::ln2 ? log_diff(lf, prev_lf) : log_diff(prev_ls, ls);
    if (!sink(i, ld, q)) return n + 1;
    prev_lf = lf;
    prev_ls = ls;
  }
  sink(n, prev_ls, Point{});
  return n + 1;
}

template <class Kernel>
double mps_impl(const Kernel& k, std::span<const double> x) {
  double total = 0.0;
  bool infeasible = false;
  const std::size_t bad = walk_spacings(k, x, [&](std::size_t i, double ld, const Point& q) {
    if (ld > -kInf) {
      total -= ld;
      return true;
    }
    if (i > 0 && i < x.size() && x[i] == x[i - 1]) {
      const double lp = k.logpdf(q);
      if (std::isnan(lp) || lp == kInf) {
        infeasible = true;
        return false;
      }
      total -= lp;
      return true;
    }
    infeasible = true;
    return false;
  });
  if (bad <= x.size() || infeasible || std::isnan(total)) return kInf;
  return total;
}

template <class Kernel>
double nll_impl(const Kernel& k, std::span<const double> x) {
  double total = 0.0;
  for (double v : x) {
    const Point q = k.eval(v);
    if (!q.in_closed_support || q.log_t == -kInf) return kInf;
    total -= k.logpdf(q);
  }
  return std::isnan(total) ? kInf : total;
}

template <class Kernel>
std::vector<double> spacings_impl(const Kernel& k, std::span<const double> x, const char* name) {
  std::vector<double> d(x.size() + 1);
  const std::size_t bad = walk_spacings(k, x, [&](std::size_t i, double ld, const Point&) {
    d[i] = std::exp(ld);
    return true;
  });
  if (bad < x.size()) {
    std::ostringstream os;
    os.precision(17);
    os << name << " spacings: observation " << bad + 1 << " (x = " << x[bad]
       << ") lies outside the support";
    throw SupportViolation(bad, x[bad], os.str());
  }
  return d;
}

}  // namespace

std::string_view to_string(Model m) { return m == Model::Gev ? "gev" : "gpd"; }

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Mps: return "mps";
    case Method::Mle: return "mle";
    case Method::Pwm: return "pwm";
  }
  return "?";
}

namespace {
std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}
}  // namespace

Model parse_model(std::string_view s) {
  const auto l = lower(s);
  if (l == "gev") return Model::Gev;
  if (l == "gpd") return Model::Gpd;
  throw std::invalid_argument("unknown model '" + std::string(s) + "' (expected gev or gpd)");
}

Method parse_method(std::string_view s) {
  const auto l = lower(s);
  if (l == "mps") return Method::Mps;
  if (l == "mle") return Method::Mle;
  if (l == "pwm") return Method::Pwm;
  throw std::invalid_argument("unknown method '" + std::string(s) +
                              "' (expected mps, mle or pwm)");
}

std::vector<double> to_vector(const ModelParams& p) {
  if (const auto* g = std::get_if<GevParams>(&p)) return {g->gamma, g->mu, g->sigma};
  const auto& q = std::get<GpdParams>(p);
  return {q.gamma, q.sigma};
}

std::vector<std::string> parameter_names(Model m) {
  if (m == Model::Gev) return {"gamma", "mu", "sigma"};
  return {"gamma", "sigma"};
}

Model model_of(const ModelParams& p) {
  return std::holds_alternative<GevParams>(p) ? Model::Gev : Model::Gpd;
}

OrderedSample::OrderedSample(std::vector<double> values) : values_(std::move(values)) {
  std::sort(values_.begin(), values_.end());
  for (std::size_t i = 1; i < values_.size(); ++i)
    if (values_[i] == values_[i - 1]) ties_.push_back(i);
}

std::vector<double> spacings(const OrderedSample& sample, const ModelParams& params) {
  return std::visit(
      [&](const auto& p) -> std::vector<double> {
        validate(p);
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GevParams>)
          return spacings_impl(GevKernel(p), sample.values(), "gev");
        else
          return spacings_impl(GpdKernel(p), sample.values(), "gpd");
      },
      params);
}

double mps_objective(const OrderedSample& sample, const ModelParams& params) {
  return std::visit(
      [&](const auto& p) -> double {
        if (!valid(p)) return kInf;
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GevParams>)
          return mps_impl(GevKernel(p), sample.values());
        else
          return mps_impl(GpdKernel(p), sample.values());
      },
      params);
}

double neg_loglik(const OrderedSample& sample, const ModelParams& params) {
  return std::visit(
      [&](const auto& p) -> double {
        if (!valid(p)) return kInf;
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GevParams>)
          return nll_impl(GevKernel(p), sample.values());
        else
          return nll_impl(GpdKernel(p), sample.values());
      },
      params);
}

bool detect_failure(std::span<const double> params) {
  return std::any_of(params.begin(), params.end(),
                     [](double v) { return !(std::abs(v) <= 100.0); });
}

bool detect_failure(const ModelParams& params) { return detect_failure(to_vector(params)); }

}  // namespace mpsfit
