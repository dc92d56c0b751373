#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mpsfit/estimation.hpp"

namespace mpsfit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quantile7(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// Affine map between data units and the standardized units the optimizer
// works in: x = loc + scale * z.
struct Standardization {
  double loc = 0.0;
  double scale = 1.0;

  OrderedSample apply(const OrderedSample& s) const {
    std::vector<double> z(s.size());
    std::transform(s.values().begin(), s.values().end(), z.begin(),
                   [&](double x) { return (x - loc) / scale; });
    return OrderedSample(std::move(z));
  }
  ModelParams to_standard(const ModelParams& p) const {
    if (const auto* g = std::get_if<GevParams>(&p))
      return GevParams{g->gamma, (g->mu - loc) / scale, g->sigma / scale};
    const auto& q = std::get<GpdParams>(p);
    return GpdParams{q.gamma, q.sigma / scale};
  }
  ModelParams to_data(const ModelParams& p) const {
    if (const auto* g = std::get_if<GevParams>(&p))
      return GevParams{g->gamma, loc + scale * g->mu, scale * g->sigma};
    const auto& q = std::get<GpdParams>(p);
    return GpdParams{q.gamma, scale * q.sigma};
  }
};

double gev_robust_scale(std::span<const double> sorted) {
  const double iqr = quantile7(sorted, 0.75) - quantile7(sorted, 0.25);
  return iqr > 0.0 ? iqr / 1.35 : stddev(sorted);
}

void check_sample(const OrderedSample& sample, Model model) {
  if (sample.size() < 2)
    throw EstimationError(std::string(to_string(model)) + " fit needs at least 2 observations, got " +
                          std::to_string(sample.size()));
  if (!std::all_of(sample.values().begin(), sample.values().end(),
                   [](double v) { return std::isfinite(v); }))
    throw EstimationError("sample contains non-finite values");
  if (sample.front() == sample.back())
    throw EstimationError("degenerate sample: all observations are equal");
  if (model == Model::Gpd && !(sample.front() > 0.0))
    throw EstimationError("gpd fit needs strictly positive observations (threshold excesses)");
}

Standardization standardization_for(const OrderedSample& sample, Model model) {
  if (model == Model::Gev) return {quantile7(sample.values(), 0.5), gev_robust_scale(sample.values())};
  return {0.0, mean(sample.values())};
}

std::vector<double> to_search(const ModelParams& p) {
  if (const auto* g = std::get_if<GevParams>(&p)) return {g->gamma, g->mu, std::log(g->sigma)};
  const auto& q = std::get<GpdParams>(p);
  return {q.gamma, std::log(q.sigma)};
}

ModelParams from_search(std::span<const double> v, Model model) {
  if (model == Model::Gev) return GevParams{v[0], v[1], std::exp(v[2])};
  return GpdParams{v[0], std::exp(v[1])};
}

// Candidate starting points in standardized units, in preference order.
std::vector<ModelParams> default_inits(const OrderedSample& z, Model model) {
  std::vector<ModelParams> out;
  if (model == Model::Gev) {
    try {
      out.push_back(fit_pwm_gev(z).params);
    } catch (const EstimationError&) {
    }
    const double med = quantile7(z.values(), 0.5);
    const double scale = gev_robust_scale(z.values());
    out.push_back(GevParams{0.1, med, scale});
    out.push_back(GevParams{0.0, med, scale});
  } else {
    const double m = mean(z.values());
    out.push_back(GpdParams{0.1, m});
    out.push_back(GpdParams{0.0, m});
  }
  return out;
}

using SampleObjective = double (*)(const OrderedSample&, const ModelParams&);

FitResult fit_by_minimizing(Method method, SampleObjective objective, const OrderedSample& sample,
                            Model model, std::optional<ModelParams> init,
                            const OptimizerConfig& config) {
  check_sample(sample, model);
  if (init && model_of(*init) != model)
    throw EstimationError("initial parameters do not match the requested model");

  const Standardization st = standardization_for(sample, model);
  const OrderedSample z = st.apply(sample);

  std::vector<ModelParams> candidates;
  if (init) candidates.push_back(st.to_standard(*init));
  for (auto& c : default_inits(z, model)) candidates.push_back(c);

  ModelParams start = candidates.back();
  for (const auto& c : candidates) {
    if (std::isfinite(objective(z, c))) {
      start = c;
      break;
    }
  }

  const Objective f = [&](std::span<const double> v) {
    return objective(z, from_search(v, model));
  };
  const MinimizeResult m = minimize(f, to_search(start), config);

  FitResult r;
  r.method = method;
  r.model = model;
  r.params = st.to_data(from_search(m.argmin, model));
  r.objective = std::isfinite(m.value) ? objective(sample, r.params) : kInf;
  r.converged = m.converged;
  r.iterations = m.iterations;
  r.failure = detect_failure(r.params);
  return r;
}

}  // namespace

FitResult fit_mps(const OrderedSample& sample, Model model, std::optional<ModelParams> init,
                  const OptimizerConfig& config) {
  return fit_by_minimizing(Method::Mps, &mps_objective, sample, model, std::move(init), config);
}

FitResult fit_mle(const OrderedSample& sample, Model model, std::optional<ModelParams> init,
                  const OptimizerConfig& config) {
  return fit_by_minimizing(Method::Mle, &neg_loglik, sample, model, std::move(init), config);
}

FitResult fit(Method method, const OrderedSample& sample, Model model,
              const OptimizerConfig& config) {
  switch (method) {
    case Method::Mps: return fit_mps(sample, model, std::nullopt, config);
    case Method::Mle: return fit_mle(sample, model, std::nullopt, config);
    case Method::Pwm:
      if (model != Model::Gev) throw EstimationError("pwm is implemented for the gev only");
      return fit_pwm_gev(sample);
  }
  throw EstimationError("unknown method");
}

}  // namespace mpsfit
