#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mpsfit/estimation.hpp"

namespace mpsfit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;
constexpr int kMaxRestarts = 8;

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

class Runner {
 public:
  Runner(const Objective& objective, const OptimizerConfig& config)
      : objective_(objective), config_(config) {}

  double eval(std::span<const double> v) const {
    const double f = objective_(v);
    return std::isnan(f) ? kInf : f;
  }

  Simplex build(const std::vector<double>& centre, double f_centre) const {
    const std::size_t d = centre.size();
    Simplex s;
    s.x.assign(d + 1, centre);
    s.f.assign(d + 1, f_centre);
    for (std::size_t i = 0; i < d; ++i) {
      s.x[i + 1][i] += config_.initial_step;
      s.f[i + 1] = eval(s.x[i + 1]);
    }
    return s;
  }

  // Runs until the objective spread drops below tolerance or the iteration
  // budget is spent. Returns true on convergence.
  bool run(Simplex& s, int& iterations) const {
    const std::size_t d = s.x.size() - 1;
    std::vector<std::size_t> order(d + 1);
    std::vector<double> centroid(d), trial(d), trial2(d);

    while (true) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second_worst = order[d - 1];

      if (std::isfinite(s.f[worst]) && s.f[worst] - s.f[best] < config_.simplex_tolerance)
        return true;
      if (iterations >= config_.max_iterations) return false;
      ++iterations;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t k = 0; k <= d; ++k) {
        if (k == worst) continue;
        for (std::size_t j = 0; j < d; ++j) centroid[j] += s.x[k][j];
      }
      for (auto& c : centroid) c /= static_cast<double>(d);

      auto along = [&](std::vector<double>& out, double t) {
        for (std::size_t j = 0; j < d; ++j)
          out[j] = centroid[j] + t * (s.x[worst][j] - centroid[j]);
      };

      along(trial, -kReflect);
      const double f_reflect = eval(trial);

      if (f_reflect < s.f[best]) {
        along(trial2, -kReflect * kExpand);
        const double f_expand = eval(trial2);
        if (f_expand < f_reflect) {
          s.x[worst] = trial2;
          s.f[worst] = f_expand;
        } else {
          s.x[worst] = trial;
          s.f[worst] = f_reflect;
        }
        continue;
      }
      if (f_reflect < s.f[second_worst]) {
        s.x[worst] = trial;
        s.f[worst] = f_reflect;
        continue;
      }

      bool accepted = false;
      if (f_reflect < s.f[worst]) {
        along(trial2, -kReflect * kContract);
        const double f_contract = eval(trial2);
        if (f_contract <= f_reflect) {
          s.x[worst] = trial2;
          s.f[worst] = f_contract;
          accepted = true;
        }
      } else {
        along(trial2, kContract);
        const double f_contract = eval(trial2);
        if (f_contract < s.f[worst]) {
          s.x[worst] = trial2;
          s.f[worst] = f_contract;
          accepted = true;
        }
      }
      if (accepted) continue;

      for (std::size_t k = 0; k <= d; ++k) {
        if (k == best) continue;
        for (std::size_t j = 0; j < d; ++j)
          s.x[k][j] = s.x[best][j] + kShrink * (s.x[k][j] - s.x[best][j]);
        s.f[k] = eval(s.x[k]);
      }
    }
  }

 private:
  const Objective& objective_;
  const OptimizerConfig& config_;
};

std::size_t argmin(const std::vector<double>& f) {
  return static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
}

}  // namespace

MinimizeResult minimize(const Objective& objective, std::vector<double> init,
                        const OptimizerConfig& config) {
  if (init.empty()) throw std::invalid_argument("minimize: empty parameter vector");
  if (!(config.max_iterations > 0 && config.simplex_tolerance > 0.0 && config.initial_step > 0.0))
    throw std::invalid_argument("minimize: optimizer settings must be positive");

  Runner runner(objective, config);
  MinimizeResult result;
  const double f0 = runner.eval(init);
  Simplex s = runner.build(init, f0);
  bool converged = runner.run(s, result.iterations);
  std::size_t b = argmin(s.f);

  // A collapsed simplex can stall on a slope; restart around the best vertex
  // until a restart no longer improves the objective.
  for (int restart = 0; converged && restart < kMaxRestarts; ++restart) {
    const double before = s.f[b];
    const std::vector<double> centre = s.x[b];
    s = runner.build(centre, before);
    converged = runner.run(s, result.iterations);
    b = argmin(s.f);
    if (before - s.f[b] < config.simplex_tolerance) break;
  }

  result.argmin = s.x[b];
  result.value = s.f[b];
  result.converged = converged;
  return result;
}

}  // namespace mpsfit
