#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mpsfit/distributions.hpp"

namespace mpsfit {

enum class Model { Gev, Gpd };
enum class Method { Mps, Mle, Pwm };

std::string_view to_string(Model m);
std::string_view to_string(Method m);
/// Case-insensitive; throws std::invalid_argument on unknown names.
Model parse_model(std::string_view s);
Method parse_method(std::string_view s);

using ModelParams = std::variant<GevParams, GpdParams>;

/// (gamma, mu, sigma) for the GEV, (gamma, sigma) for the GPD.
std::vector<double> to_vector(const ModelParams& p);
std::vector<std::string> parameter_names(Model m);
Model model_of(const ModelParams& p);

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by spacings() when an observation falls outside the closed support.
class SupportViolation : public DomainError {
 public:
  SupportViolation(std::size_t index, double value, const std::string& what)
      : DomainError(what), index_(index), value_(value) {}
  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

/// Sorted observations plus the positions of ties (i with x[i] == x[i-1]).
class OrderedSample {
 public:
  OrderedSample() = default;
  explicit OrderedSample(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }

  const std::vector<std::size_t>& ties() const noexcept { return ties_; }
  bool has_ties() const noexcept { return !ties_.empty(); }

 private:
  std::vector<double> values_;
  std::vector<std::size_t> ties_;
};

struct OptimizerConfig {
  int max_iterations = 2000;
  double simplex_tolerance = 1e-10;
  double initial_step = 0.1;
};

struct FitResult {
  Method method = Method::Mps;
  Model model = Model::Gev;
  ModelParams params;
  /// M for MPS, negative log-likelihood for MLE, empty for PWM.
  std::optional<double> objective;
  bool converged = false;
  int iterations = 0;
  /// Any |parameter| > 100.
  bool failure = false;
};

// ---------------------------------------------------------------------------
// Objectives

/// D_i = F(x_i) - F(x_{i-1}), i = 1..n+1, with F(x_0) = 0 and F(x_{n+1}) = 1.
/// Throws SupportViolation naming the first observation outside the support.
std::vector<double> spacings(const OrderedSample& sample, const ModelParams& params);

/// M(theta) = -sum log D_i. +inf on support violation or sigma <= 0. A zero
/// spacing between tied observations contributes -log f(x_i) instead.
double mps_objective(const OrderedSample& sample, const ModelParams& params);

/// -sum log f(x_j). +inf on support violation (open support) or sigma <= 0.
double neg_loglik(const OrderedSample& sample, const ModelParams& params);

// ---------------------------------------------------------------------------
// Minimizer

using Objective = std::function<double(std::span<const double>)>;

struct MinimizeResult {
  std::vector<double> argmin;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Nelder-Mead simplex. The objective may return +inf (or NaN, treated as
/// +inf) to mark infeasible points. Converged when the spread of objective
/// values over the simplex falls below config.simplex_tolerance.
MinimizeResult minimize(const Objective& objective, std::vector<double> init,
                        const OptimizerConfig& config = {});

// ---------------------------------------------------------------------------
// Estimators

FitResult fit_mps(const OrderedSample& sample, Model model,
                  std::optional<ModelParams> init = std::nullopt,
                  const OptimizerConfig& config = {});
FitResult fit_mle(const OrderedSample& sample, Model model,
                  std::optional<ModelParams> init = std::nullopt,
                  const OptimizerConfig& config = {});
FitResult fit(Method method, const OrderedSample& sample, Model model,
              const OptimizerConfig& config = {});

/// Sample probability-weighted moments b_0, b_1, b_2 (unbiased weights).
struct SamplePwm {
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
};
SamplePwm sample_pwm(const OrderedSample& sample);

/// GEV parameters from (b0, b1, b2). The shape solves
///   (1 - 3^-g) / (1 - 2^-g) = (3 b2 - b0) / (2 b1 - b0)
/// by Newton-Raphson started at Hosking's rational approximation.
struct PwmSolution {
  GevParams params;
  int iterations = 0;
};
PwmSolution gev_from_pwm(const SamplePwm& b);

FitResult fit_pwm_gev(const OrderedSample& sample);

bool detect_failure(std::span<const double> params);
bool detect_failure(const ModelParams& params);

}  // namespace mpsfit
