#include <charconv>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "mpsfit/simulation.hpp"

namespace mpsfit {
namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "study",  "model",        "gamma",      "mu",          "sigma",
    "n",      "replications", "seed",       "methods",     "alphas",
    "cluster_size", "exp_lambda", "max_iterations", "simplex_tolerance", "initial_step"};

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config field '" + field + "': " + why);
}

double get_number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    bad(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<Method> default_methods(Study study, Model model) {
  switch (study) {
    case Study::Size:
    case Study::Cluster: return {Method::Mps};
    default:
      if (model == Model::Gev) return {Method::Mps, Method::Mle, Method::Pwm};
      return {Method::Mps, Method::Mle};
  }
}

// Shortest round-trip representation; NaN becomes an empty cell.
std::string num(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double gamma0_of(const SimulationSummary& s) {
  if (s.config.study == Study::Cluster) return std::nan("");
  return to_vector(s.config.true_params)[0];
}

double lambda_of(const SimulationSummary& s) {
  return s.config.exp_lambda ? *s.config.exp_lambda : std::nan("");
}

struct Row {
  std::string model, method;
  double gamma0, n;
  std::string parameter;
  double median, mae_all, mae_excl, failure_rate;
  std::string study;
  double lambda, reps, median_excl, q25, q75, alpha, size;
};

std::vector<Row> rows_of(const SimulationSummary& s) {
  std::vector<Row> rows;
  const double nan = std::nan("");
  const std::string model(to_string(s.config.study == Study::Cluster ? Model::Gev : s.config.model));
  const std::string study(to_string(s.config.study));
  const auto n = static_cast<double>(s.config.n);
  const auto reps = static_cast<double>(s.config.replications);
  for (const auto& m : s.methods)
    for (const auto& p : m.parameters)
      rows.push_back({model, std::string(to_string(m.method)), gamma0_of(s), n, p.name, p.median,
                      p.mae_all, p.mae_excl, m.failure_rate, study, lambda_of(s), reps,
                      p.median_excl, p.q25, p.q75, nan, nan});
  for (const auto& e : s.sizes)
    rows.push_back({model, "mps", gamma0_of(s), n, "moran", nan, nan, nan, nan, study,
                    lambda_of(s), reps, nan, nan, nan, e.alpha, e.size});
  return rows;
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kKnownKeys.contains(key)) bad(key, "unknown field");

  ExperimentConfig c;
  if (j.contains("study")) {
    if (!j["study"].is_string()) bad("study", "expected a string");
    c.study = parse_study(j["study"].get<std::string>());
  }
  if (j.contains("model")) {
    if (!j["model"].is_string()) bad("model", "expected a string");
    try {
      c.model = parse_model(j["model"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      bad("model", e.what());
    }
  }
  if (!j.contains("n")) bad("n", "required");
  c.n = get_count(j, "n");

  if (c.study == Study::Cluster) {
    if (!j.contains("cluster_size") || !j.contains("exp_lambda"))
      bad("cluster_size/exp_lambda", "required for the cluster study");
    c.model = Model::Gev;
  } else {
    if (!j.contains("gamma")) bad("gamma", "required");
    const double g = get_number(j, "gamma");
    const double sigma = j.contains("sigma") ? get_number(j, "sigma") : 1.0;
    if (c.model == Model::Gev) {
      const double mu = j.contains("mu") ? get_number(j, "mu") : 1.0;
      c.true_params = GevParams{g, mu, sigma};
    } else {
      if (j.contains("mu")) bad("mu", "the gpd has no location parameter");
      c.true_params = GpdParams{g, sigma};
    }
  }
  if (j.contains("cluster_size")) c.cluster_size = get_count(j, "cluster_size");
  if (j.contains("exp_lambda")) c.exp_lambda = get_number(j, "exp_lambda");
  if (j.contains("replications")) c.replications = get_count(j, "replications");
  if (j.contains("seed")) c.master_seed = get_count(j, "seed");

  c.methods = default_methods(c.study, c.model);
  if (j.contains("methods")) {
    if (!j["methods"].is_array()) bad("methods", "expected an array of strings");
    c.methods.clear();
    for (const auto& m : j["methods"]) {
      if (!m.is_string()) bad("methods", "expected an array of strings");
      try {
        c.methods.push_back(parse_method(m.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        bad("methods", e.what());
      }
    }
  }
  if (j.contains("alphas")) {
    if (!j["alphas"].is_array()) bad("alphas", "expected an array of numbers");
    c.alphas.clear();
    for (const auto& a : j["alphas"]) {
      if (!a.is_number()) bad("alphas", "expected an array of numbers");
      c.alphas.push_back(a.get<double>());
    }
  }
  if (j.contains("max_iterations"))
    c.optimizer.max_iterations = static_cast<int>(get_count(j, "max_iterations"));
  if (j.contains("simplex_tolerance"))
    c.optimizer.simplex_tolerance = get_number(j, "simplex_tolerance");
  if (j.contains("initial_step")) c.optimizer.initial_step = get_number(j, "initial_step");

  c.validate();
  return c;
}

std::vector<ExperimentConfig> experiments_from_json(const json& j) {
  const json* list = &j;
  if (j.is_object() && j.contains("experiments")) list = &j["experiments"];
  std::vector<ExperimentConfig> out;
  if (list->is_array()) {
    std::size_t i = 0;
    for (const auto& e : *list) {
      try {
        out.push_back(experiment_from_json(e));
      } catch (const std::invalid_argument& ex) {
        throw std::invalid_argument("experiment " + std::to_string(i) + ": " + ex.what());
      }
      ++i;
    }
  } else {
    out.push_back(experiment_from_json(*list));
  }
  if (out.empty()) throw std::invalid_argument("config contains no experiments");
  return out;
}

void write_csv(std::span<const SimulationSummary> summaries, std::ostream& os) {
  os << "model,method,gamma0,n,parameter,median,mae_all,mae_excl,failure_rate,"
        "study,lambda,reps,median_excl,q25,q75,alpha,empirical_size\n";
  for (const auto& s : summaries)
    for (const auto& r : rows_of(s))
      os << r.model << ',' << r.method << ',' << num(r.gamma0) << ',' << num(r.n) << ','
         << r.parameter << ',' << num(r.median) << ',' << num(r.mae_all) << ','
         << num(r.mae_excl) << ',' << num(r.failure_rate) << ',' << r.study << ','
         << num(r.lambda) << ',' << num(r.reps) << ',' << num(r.median_excl) << ','
         << num(r.q25) << ',' << num(r.q75) << ',' << num(r.alpha) << ',' << num(r.size)
         << '\n';
}

json to_json(std::span<const SimulationSummary> summaries) {
  json rows = json::array();
  for (const auto& s : summaries)
    for (const auto& r : rows_of(s))
      rows.push_back({{"model", r.model},
                      {"method", r.method},
                      {"gamma0", num_json(r.gamma0)},
                      {"n", num_json(r.n)},
                      {"parameter", r.parameter},
                      {"median", num_json(r.median)},
                      {"mae_all", num_json(r.mae_all)},
                      {"mae_excl", num_json(r.mae_excl)},
                      {"failure_rate", num_json(r.failure_rate)},
                      {"study", r.study},
                      {"lambda", num_json(r.lambda)},
                      {"reps", num_json(r.reps)},
                      {"median_excl", num_json(r.median_excl)},
                      {"q25", num_json(r.q25)},
                      {"q75", num_json(r.q75)},
                      {"alpha", num_json(r.alpha)},
                      {"empirical_size", num_json(r.size)}});
  return json{{"rows", rows}};
}

std::string format_table(const SimulationSummary& s) {
  std::ostringstream os;
  os << std::setprecision(6);
  const auto& c = s.config;
  os << to_string(c.study) << ' ' << to_string(c.study == Study::Cluster ? Model::Gev : c.model)
     << "  n=" << c.n << "  reps=" << c.replications << "  seed=" << c.master_seed;
  if (c.study == Study::Cluster) {
    os << "  lambda=" << *c.exp_lambda << "  m=" << *c.cluster_size;
  } else {
    os << "  truth=(";
    const auto t = to_vector(c.true_params);
    for (std::size_t i = 0; i < t.size(); ++i) os << (i ? ", " : "") << t[i];
    os << ')';
  }
  os << '\n';
  for (const auto& m : s.methods) {
    os << "  " << std::left << std::setw(4) << to_string(m.method) << std::right;
    for (const auto& p : m.parameters) {
      os << "  " << p.name << ' ';
      if (c.study == Study::Cluster)
        os << p.q25 << " / " << p.median << " / " << p.q75;
      else
        os << p.median << " (" << p.mae_all << ')';
    }
    os << "  failures/100 " << m.failure_rate << '\n';
  }
  for (const auto& e : s.sizes)
    os << "  size at alpha=" << e.alpha << ": " << e.size << '\n';
  return os.str();
}

}  // namespace mpsfit
