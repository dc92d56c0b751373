#include "mpsfit/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace mpsfit::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\f\v");
  return s.substr(first, last - first + 1);
}

std::string full(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<double> Dataset::fitting_input() const {
  if (!threshold) return observations;
  std::vector<double> out;
  for (double x : observations)
    if (x > *threshold) out.push_back(x - *threshold);
  return out;
}

Dataset parse_dataset(std::istream& in, std::string name) {
  Dataset d;
  d.name = std::move(name);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '+') t.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
      throw DataError(d.name + ":" + std::to_string(lineno) + ": not a number: '" +
                      std::string(trim(line)) + "'");
    d.observations.push_back(v);
  }
  if (in.bad()) throw DataError(d.name + ": read error");
  if (d.observations.empty()) throw DataError(d.name + ": no observations");
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return parse_dataset(in, path.string());
}

std::vector<QuantileRow> gpd_quantile_plot(const OrderedSample& sample, const GpdParams& params) {
  const std::size_t n = sample.size();
  std::vector<QuantileRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = static_cast<double>(i + 1) / static_cast<double>(n + 1);
    rows[i] = {i + 1, sample[i], gpd_quantile(q, params)};
  }
  return rows;
}

void write_quantile_csv(const std::vector<QuantileRow>& rows, std::ostream& os) {
  os << "i,empirical,expected\n";
  for (const auto& r : rows)
    os << r.index << ',' << full(r.empirical) << ',' << full(r.expected) << '\n';
}

OrderedSample prepare_sample(const Dataset& data, const FitRequest& request) {
  if (request.threshold && request.model != Model::Gpd)
    throw DataError("--threshold applies to the gpd model only");
  if (request.method == Method::Pwm && request.model != Model::Gev)
    throw DataError("pwm is available for the gev model only");
  Dataset d = data;
  if (request.threshold) d.threshold = request.threshold;
  std::vector<double> x = d.fitting_input();
  const std::size_t min_n = request.method == Method::Pwm ? 3 : 2;
  if (x.size() < min_n) {
    std::ostringstream os;
    os << data.name << ": " << x.size()
       << (request.threshold ? " observations above the threshold" : " observations")
       << ", need at least " << min_n;
    throw DataError(os.str());
  }
  if (request.model == Model::Gpd)
    for (double v : x)
      if (!(v > 0.0))
        throw DataError(data.name + ": gpd data must be positive (use --threshold for excesses)");
  return OrderedSample(std::move(x));
}

FitReport run_fit(const Dataset& data, const FitRequest& request) {
  FitReport r;
  r.request = request;
  const OrderedSample s = prepare_sample(data, request);
  r.n = s.size();
  r.fit = fit(request.method, s, request.model);
  if (request.method == Method::Mps) r.moran = moran_test(s, r.fit);
  return r;
}

nlohmann::json to_json(const FitReport& report) {
  using nlohmann::json;
  const auto& f = report.fit;
  json params;
  if (const auto* g = std::get_if<GevParams>(&f.params))
    params = {{"gamma", g->gamma}, {"mu", g->mu}, {"sigma", g->sigma}};
  else {
    const auto& p = std::get<GpdParams>(f.params);
    params = {{"gamma", p.gamma}, {"sigma", p.sigma}};
  }
  json j = {{"model", to_string(f.model)},
            {"method", to_string(f.method)},
            {"n", report.n},
            {"params", params},
            {"converged", f.converged},
            {"iterations", f.iterations},
            {"failure", f.failure}};
  if (report.request.threshold) j["threshold"] = *report.request.threshold;
  if (f.objective && std::isfinite(*f.objective)) {
    const bool mle = f.method == Method::Mle;
    j["objective"] = mle ? -*f.objective : *f.objective;
    j["objective_kind"] = mle ? "log_likelihood" : "moran_M";
  } else {
    j["objective"] = nullptr;
  }
  if (report.moran) {
    const auto& m = *report.moran;
    j["moran"] = {{"M", m.moran}, {"T", m.t_statistic}, {"df", m.df}, {"k", m.k},
                  {"p_value", m.p_value}};
  }
  return j;
}

std::string format_moran(const MoranTestResult& m) {
  std::ostringstream os;
  os << std::setprecision(6) << "Moran test: M = " << m.moran << ", T = " << m.t_statistic
     << ", df = " << m.df << ", k = " << m.k << ", p-value = " << m.p_value << '\n';
  return os.str();
}

std::string format_report(const FitReport& report) {
  std::ostringstream os;
  os << std::setprecision(6);
  const auto& f = report.fit;
  os << to_string(f.model) << " fit by " << to_string(f.method) << " (n = " << report.n;
  if (report.request.threshold) os << ", threshold = " << *report.request.threshold;
  os << ")\n";
  const auto names = parameter_names(f.model);
  const auto values = to_vector(f.params);
  for (std::size_t i = 0; i < names.size(); ++i)
    os << "  " << std::left << std::setw(6) << names[i] << std::right << values[i] << '\n';
  if (f.objective) {
    if (f.method == Method::Mle)
      os << "  log-likelihood " << -*f.objective << '\n';
    else
      os << "  M " << *f.objective << '\n';
  }
  if (!f.converged) os << "  warning: optimizer hit the iteration limit\n";
  if (f.failure) os << "  warning: |parameter| > 100, estimate flagged as failed\n";
  if (report.moran) os << "  " << format_moran(*report.moran);
  return os.str();
}

}  // namespace mpsfit::cli
