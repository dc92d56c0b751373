#include "mpsfit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mpsfit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool has_method(const ExperimentConfig& c, Method m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

std::size_t fitted_parameter_count(const ExperimentConfig& c) {
  return c.study == Study::Cluster ? 3 : (c.model == Model::Gev ? 3 : 2);
}

Model fitted_model(const ExperimentConfig& c) {
  return c.study == Study::Cluster ? Model::Gev : c.model;
}

}  // namespace

std::string_view to_string(Study s) {
  switch (s) {
    case Study::Comparison: return "comparison";
    case Study::Failure: return "failure";
    case Study::Size: return "size";
    case Study::Cluster: return "cluster";
  }
  return "?";
}

Study parse_study(std::string_view s) {
  std::string l(s);
  for (auto& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (l == "comparison") return Study::Comparison;
  if (l == "failure") return Study::Failure;
  if (l == "size") return Study::Size;
  if (l == "cluster") return Study::Cluster;
  throw std::invalid_argument("unknown study '" + std::string(s) +
                              "' (expected comparison, failure, size or cluster)");
}

void ExperimentConfig::validate() const {
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (methods.empty()) throw std::invalid_argument("methods must not be empty");
  if (cluster_size.has_value() != exp_lambda.has_value())
    throw std::invalid_argument("cluster_size and exp_lambda must be given together");
  if (study == Study::Cluster) {
    if (!cluster_size) throw std::invalid_argument("cluster study needs cluster_size and exp_lambda");
    if (*cluster_size < 1) throw std::invalid_argument("cluster_size must be >= 1");
    if (!(*exp_lambda > 0.0) || !std::isfinite(*exp_lambda))
      throw std::invalid_argument("exp_lambda must be a positive number");
    if (model != Model::Gev) throw std::invalid_argument("cluster study fits the gev model");
  } else {
    if (model_of(true_params) != model)
      throw std::invalid_argument("true parameters do not match the model");
    try {
      std::visit([](const auto& p) { mpsfit::validate(p); }, true_params);
    } catch (const DomainError& e) {
      throw std::invalid_argument(std::string("true parameters: ") + e.what());
    }
  }
  const std::size_t min_n = fitted_model(*this) == Model::Gev ? 3 : 2;
  if (n < min_n)
    throw std::invalid_argument("n must be >= " + std::to_string(min_n) + " for this model");
  if (has_method(*this, Method::Pwm) && fitted_model(*this) != Model::Gev)
    throw std::invalid_argument("pwm is only available for the gev model");
  if (study == Study::Size && !has_method(*this, Method::Mps))
    throw std::invalid_argument("size study needs mps among the methods");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alphas must lie in (0, 1)");
}

const MethodSummary& SimulationSummary::method(Method m) const {
  for (const auto& s : methods)
    if (s.method == m) return s;
  throw std::out_of_range("summary has no entry for method " + std::string(to_string(m)));
}

// ---------------------------------------------------------------------------

std::vector<double> mean_absolute_error(std::span<const double> estimates, std::size_t p,
                                        std::span<const double> truth) {
  if (p == 0 || truth.size() != p || estimates.size() % p != 0)
    throw std::invalid_argument("mean_absolute_error: shape mismatch");
  std::vector<double> sum(p, 0.0);
  std::size_t rows = 0;
  for (std::size_t r = 0; r * p < estimates.size(); ++r) {
    const auto row = estimates.subspan(r * p, p);
    if (std::any_of(row.begin(), row.end(), [](double v) { return std::isnan(v); })) continue;
    for (std::size_t j = 0; j < p; ++j) sum[j] += std::abs(row[j] - truth[j]);
    ++rows;
  }
  for (auto& s : sum) s = rows ? s / static_cast<double>(rows) : kNaN;
  return sum;
}

double sample_quantile(std::vector<double> values, double prob) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return sample_quantile(std::move(values), 0.5); }

std::vector<EmpiricalSize> empirical_sizes(std::span<const double> p_values,
                                           std::span<const double> alphas) {
  std::vector<EmpiricalSize> out;
  for (double a : alphas) {
    EmpiricalSize e;
    e.alpha = a;
    e.rejections = static_cast<std::size_t>(
        std::count_if(p_values.begin(), p_values.end(), [a](double p) { return p < a; }));
    e.size = p_values.empty() ? kNaN
                              : static_cast<double>(e.rejections) /
                                    static_cast<double>(p_values.size());
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------

OrderedSample draw_replication_sample(const ExperimentConfig& config, std::size_t replication) {
  Stream stream = Stream::for_replication(config.master_seed, replication);
  if (config.study == Study::Cluster) {
    const std::size_t m = *config.cluster_size;
    const std::vector<double> raw =
        sample(ExpParams{*config.exp_lambda}, config.n * m, stream);
    std::vector<double> maxima(config.n);
    for (std::size_t i = 0; i < config.n; ++i)
      maxima[i] = *std::max_element(raw.begin() + static_cast<std::ptrdiff_t>(i * m),
                                    raw.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
    return OrderedSample(std::move(maxima));
  }
  const AnyParams dist = std::visit([](const auto& p) -> AnyParams { return p; },
                                    config.true_params);
  return OrderedSample(sample(dist, config.n, stream));
}

ReplicationTable run_replications(const ExperimentConfig& config, Execution exec,
                                  const RejectionTest* test) {
  config.validate();
  const std::size_t reps = config.replications;
  const std::size_t p = fitted_parameter_count(config);
  const Model model = fitted_model(config);
  const bool want_p = config.study == Study::Size;

  ReplicationTable table;
  table.methods = config.methods;
  table.parameter_count = p;
  table.estimates.assign(config.methods.size(), std::vector<double>(reps * p, kNaN));
  table.failed.assign(config.methods.size(), std::vector<unsigned char>(reps, 0));
  if (want_p) table.p_values.assign(reps, kNaN);

  auto replicate = [&](std::size_t r) {
    const OrderedSample s = draw_replication_sample(config, r);
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const Method method = config.methods[m];
      try {
        const FitResult f = fit(method, s, model, config.optimizer);
        const auto v = to_vector(f.params);
        std::copy(v.begin(), v.end(), table.estimates[m].begin() + static_cast<std::ptrdiff_t>(r * p));
        table.failed[m][r] = f.failure ? 1 : 0;
        if (want_p && method == Method::Mps)
          table.p_values[r] = test ? (*test)(s, f) : moran_test(s, f).p_value;
      } catch (const std::exception&) {
        table.failed[m][r] = 2;
      }
    }
  };

  const auto count = static_cast<std::ptrdiff_t>(reps);
  if (exec == Execution::Serial) {
    for (std::ptrdiff_t r = 0; r < count; ++r) replicate(static_cast<std::size_t>(r));
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t r = 0; r < count; ++r) replicate(static_cast<std::size_t>(r));
  }
  return table;
}

SimulationSummary summarize(const ExperimentConfig& config, const ReplicationTable& table) {
  SimulationSummary out;
  out.config = config;
  const std::size_t reps = config.replications;
  const std::size_t p = table.parameter_count;
  const auto names = parameter_names(fitted_model(config));
  std::vector<double> truth(p, kNaN);
  if (config.study != Study::Cluster) truth = to_vector(config.true_params);

  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    MethodSummary ms;
    ms.method = table.methods[m];
    const auto& est = table.estimates[m];
    const auto& failed = table.failed[m];
    ms.failures = static_cast<std::size_t>(
        std::count_if(failed.begin(), failed.end(), [](unsigned char f) { return f != 0; }));
    ms.errors = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 2));
    ms.failure_rate = 100.0 * static_cast<double>(ms.failures) / static_cast<double>(reps);

    std::vector<double> kept;
    kept.reserve(est.size());
    for (std::size_t r = 0; r < reps; ++r)
      if (failed[r] == 0)
        kept.insert(kept.end(), est.begin() + static_cast<std::ptrdiff_t>(r * p),
                    est.begin() + static_cast<std::ptrdiff_t>((r + 1) * p));
    const auto mae_all = mean_absolute_error(est, p, truth);
    const auto mae_excl = mean_absolute_error(kept, p, truth);

    for (std::size_t j = 0; j < p; ++j) {
      std::vector<double> all_j, kept_j;
      for (std::size_t r = 0; r < reps; ++r) {
        all_j.push_back(est[r * p + j]);
        if (failed[r] == 0) kept_j.push_back(est[r * p + j]);
      }
      ParameterSummary ps;
      ps.name = names[j];
      ps.truth = truth[j];
      ps.median = median(all_j);
      ps.median_excl = median(kept_j);
      ps.mae_all = mae_all[j];
      ps.mae_excl = mae_excl[j];
      ps.q25 = sample_quantile(all_j, 0.25);
      ps.q75 = sample_quantile(all_j, 0.75);
      ms.parameters.push_back(std::move(ps));
    }
    out.methods.push_back(std::move(ms));
  }
  if (!table.p_values.empty()) out.sizes = empirical_sizes(table.p_values, config.alphas);
  return out;
}

SimulationSummary run_estimator_comparison(const ExperimentConfig& config, Execution exec) {
  return summarize(config, run_replications(config, exec));
}

std::vector<FailureRate> run_failure_study(const ExperimentConfig& config, Execution exec) {
  const SimulationSummary s = run_estimator_comparison(config, exec);
  std::vector<FailureRate> out;
  for (const auto& m : s.methods)
    out.push_back({m.method, m.failures, config.replications, m.failure_rate});
  return out;
}

SimulationSummary run_size_study(const ExperimentConfig& config, Execution exec) {
  ExperimentConfig c = config;
  c.study = Study::Size;
  return summarize(c, run_replications(c, exec));
}

SimulationSummary run_size_study(const ExperimentConfig& config, const RejectionTest& test,
                                 Execution exec) {
  ExperimentConfig c = config;
  c.study = Study::Size;
  return summarize(c, run_replications(c, exec, &test));
}

SimulationSummary run_cluster_maxima_study(const ExperimentConfig& config, Execution exec) {
  ExperimentConfig c = config;
  c.study = Study::Cluster;
  c.model = Model::Gev;
  return summarize(c, run_replications(c, exec));
}

SimulationSummary run_experiment(const ExperimentConfig& config, Execution exec) {
  switch (config.study) {
    case Study::Comparison:
    case Study::Failure: return run_estimator_comparison(config, exec);
    case Study::Size: return run_size_study(config, exec);
    case Study::Cluster: return run_cluster_maxima_study(config, exec);
  }
  throw std::invalid_argument("unknown study");
}

}  // namespace mpsfit
