#pragma once

// Monte Carlo harness for the estimator-comparison, failure-rate, Moran
// empirical-size and exponential cluster-maxima experiments.
//
// Replication r draws its sample from Stream::for_replication(seed, r), and
// every method is fitted to that same sample. Results are stored by
// replication index and aggregated serially, so Execution::Serial and
// Execution::Parallel produce bit-identical summaries.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpsfit/estimation.hpp"
#include "mpsfit/gof.hpp"

namespace mpsfit {

inline constexpr std::size_t kDeskReplications = 2000;
inline constexpr std::size_t kFullReplications = 10000;

enum class Execution { Serial, Parallel };

enum class Study { Comparison, Failure, Size, Cluster };
std::string_view to_string(Study s);
Study parse_study(std::string_view s);

struct ExperimentConfig {
  Study study = Study::Comparison;
  Model model = Model::Gev;
  /// Generating parameters. Ignored by the cluster study, which draws
  /// exponential data and fits a GEV.
  ModelParams true_params = GevParams{0.2, 1.0, 1.0};
  std::size_t n = 50;
  std::size_t replications = kDeskReplications;
  std::uint64_t master_seed = 20240601;
  std::vector<Method> methods = {Method::Mps};
  std::vector<double> alphas = {0.10, 0.05, 0.01};
  std::optional<std::size_t> cluster_size;
  std::optional<double> exp_lambda;
  OptimizerConfig optimizer;

  /// Throws std::invalid_argument describing the first violated rule.
  void validate() const;
};

struct ParameterSummary {
  std::string name;
  double truth = 0.0;  ///< NaN when there is no true value (cluster study)
  double median = 0.0;       ///< over every replication with an estimate
  double median_excl = 0.0;  ///< excluding failed (> 100) replications
  double mae_all = 0.0;
  double mae_excl = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct MethodSummary {
  Method method = Method::Mps;
  std::size_t failures = 0;  ///< detect_failure true, or the fit threw
  std::size_t errors = 0;    ///< fit threw (no estimate)
  double failure_rate = 0.0;  ///< per 100 samples
  std::vector<ParameterSummary> parameters;
};

struct EmpiricalSize {
  double alpha = 0.0;
  std::size_t rejections = 0;
  double size = 0.0;
};

struct SimulationSummary {
  ExperimentConfig config;
  std::vector<MethodSummary> methods;
  std::vector<EmpiricalSize> sizes;

  const MethodSummary& method(Method m) const;
};

/// Raw per-replication output, indexed [method][replication].
struct ReplicationTable {
  std::vector<Method> methods;
  std::size_t parameter_count = 0;
  /// estimates[m][r * parameter_count + j]; NaN when the fit threw.
  std::vector<std::vector<double>> estimates;
  std::vector<std::vector<unsigned char>> failed;
  /// Moran p-values of the MPS fit (size study only); NaN on fit error.
  std::vector<double> p_values;
};

/// Decision rule for the size study: returns a p-value for one replication.
using RejectionTest = std::function<double(const OrderedSample&, const FitResult&)>;

// ---------------------------------------------------------------------------
// Statistics helpers

/// Parameterwise mean absolute deviation over the l rows of a row-major
/// l x p matrix. Rows containing NaN are skipped.
std::vector<double> mean_absolute_error(std::span<const double> estimates, std::size_t p,
                                        std::span<const double> truth);
/// Type-7 sample quantile of the finite values; NaN if none.
double sample_quantile(std::vector<double> values, double prob);
double median(std::vector<double> values);

/// Fraction of p-values strictly below each alpha.
std::vector<EmpiricalSize> empirical_sizes(std::span<const double> p_values,
                                           std::span<const double> alphas);

// ---------------------------------------------------------------------------
// Kernels

/// Draws one replication's fitting sample.
OrderedSample draw_replication_sample(const ExperimentConfig& config, std::size_t replication);

ReplicationTable run_replications(const ExperimentConfig& config, Execution exec,
                                  const RejectionTest* test = nullptr);

SimulationSummary summarize(const ExperimentConfig& config, const ReplicationTable& table);

// ---------------------------------------------------------------------------
// Experiments

SimulationSummary run_estimator_comparison(const ExperimentConfig& config,
                                           Execution exec = Execution::Parallel);

struct FailureRate {
  Method method;
  std::size_t failures;
  std::size_t replications;
  double per_hundred;
};
std::vector<FailureRate> run_failure_study(const ExperimentConfig& config,
                                           Execution exec = Execution::Parallel);

/// Moran test on the MPS fit of null-model samples; rejection when p < alpha.
SimulationSummary run_size_study(const ExperimentConfig& config,
                                 Execution exec = Execution::Parallel);
SimulationSummary run_size_study(const ExperimentConfig& config, const RejectionTest& test,
                                 Execution exec = Execution::Parallel);

/// n cluster maxima of cluster_size exponential(exp_lambda) draws, fitted by
/// GEV MPS; quartiles of each estimated parameter.
SimulationSummary run_cluster_maxima_study(const ExperimentConfig& config,
                                           Execution exec = Execution::Parallel);

/// Dispatches on config.study.
SimulationSummary run_experiment(const ExperimentConfig& config,
                                 Execution exec = Execution::Parallel);

// ---------------------------------------------------------------------------
// Serialization

/// Parses one experiment object; unknown keys and bad values throw
/// std::invalid_argument naming the field.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
/// Accepts a single object, an array, or {"experiments": [...]}.
std::vector<ExperimentConfig> experiments_from_json(const nlohmann::json& j);

void write_csv(std::span<const SimulationSummary> summaries, std::ostream& os);
nlohmann::json to_json(std::span<const SimulationSummary> summaries);
/// Human-readable rows in the layout of the published tables.
std::string format_table(const SimulationSummary& summary);

}  // namespace mpsfit
