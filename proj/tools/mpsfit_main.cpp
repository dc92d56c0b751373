// mpsfit: fit GEV / GPD models by maximum product of spacings, maximum
// likelihood or probability-weighted moments, test fits with Moran's
// statistic, and run the Monte Carlo studies.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mpsfit/cli.hpp"
#include "mpsfit/simulation.hpp"

namespace {

using namespace mpsfit;
using namespace mpsfit::cli;

struct DataOptions {
  std::string data;
  std::string model = "gpd";
  std::string method = "mps";
  std::optional<double> threshold;
};

void add_data_options(CLI::App* cmd, DataOptions& o, bool with_method) {
  cmd->add_option("--data", o.data, "Input file: one number per line, '#' comments")
      ->required();
  cmd->add_option("--model", o.model, "gev or gpd")->check(CLI::IsMember({"gev", "gpd"}));
  if (with_method)
    cmd->add_option("--method", o.method, "mps, mle or pwm")
        ->check(CLI::IsMember({"mps", "mle", "pwm"}));
  cmd->add_option("--threshold", o.threshold, "Fit the GPD to excesses over this threshold");
}

FitRequest request_of(const DataOptions& o) {
  return {parse_model(o.model), parse_method(o.method), o.threshold};
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << contents;
  if (!out) throw DataError(path + ": write failed");
}

int cmd_fit(const DataOptions& o, const std::string& out_path) {
  const FitReport r = run_fit(load_dataset(o.data), request_of(o));
  const std::string json = to_json(r).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << json;
  } else {
    write_file(out_path, json);
    std::cout << format_report(r);
  }
  return r.fit.failure ? kExitEstimationFailure : kExitOk;
}

int cmd_qq(const DataOptions& o, const std::string& out_path) {
  FitRequest req = request_of(o);
  if (req.model != Model::Gpd) throw DataError("qq supports the gpd model only");
  const Dataset data = load_dataset(o.data);
  const OrderedSample s = prepare_sample(data, req);
  const FitResult f = fit(req.method, s, req.model);
  std::ostringstream csv;
  write_quantile_csv(gpd_quantile_plot(s, std::get<GpdParams>(f.params)), csv);
  if (out_path.empty())
    std::cout << csv.str();
  else
    write_file(out_path, csv.str());
  return f.failure ? kExitEstimationFailure : kExitOk;
}

int cmd_gof(const DataOptions& o, bool as_json) {
  FitRequest req = request_of(o);
  req.method = Method::Mps;
  const FitReport r = run_fit(load_dataset(o.data), req);
  if (as_json)
    std::cout << to_json(r).dump(2) << '\n';
  else
    std::cout << format_report(r);
  return r.fit.failure ? kExitEstimationFailure : kExitOk;
}

struct SimulateOptions {
  std::string config;
  std::string out;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  bool full_scale = false;
  bool serial = false;
};

int cmd_simulate(const SimulateOptions& o) {
  std::ifstream in(o.config);
  if (!in) throw DataError(o.config + ": cannot open config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(o.config + ": invalid JSON: " + e.what());
  }
  std::vector<ExperimentConfig> configs;
  try {
    configs = experiments_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw DataError(o.config + ": " + e.what());
  }

  std::vector<SimulationSummary> summaries;
  for (auto& c : configs) {
    if (o.full_scale) c.replications = kFullReplications;
    if (o.reps) c.replications = *o.reps;
    if (o.seed) c.master_seed = *o.seed;
    c.validate();
    summaries.push_back(run_experiment(c, o.serial ? Execution::Serial : Execution::Parallel));
    std::cout << format_table(summaries.back());
  }

  if (!o.out.empty()) {
    std::ostringstream body;
    if (o.out.ends_with(".json"))
      body << to_json(summaries).dump(2) << '\n';
    else
      write_csv(summaries, body);
    write_file(o.out, body.str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme value fitting by maximum product of spacings"};
  app.require_subcommand(1);

  DataOptions fit_opts, qq_opts, gof_opts;
  std::string fit_out, qq_out;
  bool gof_json = false;
  SimulateOptions sim_opts;

  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and print a JSON report");
  add_data_options(fit_cmd, fit_opts, true);
  fit_cmd->add_option("--out", fit_out, "Write the JSON report here and print a summary");

  auto* qq_cmd = app.add_subcommand("qq", "Emit GPD quantile-plot data as CSV");
  add_data_options(qq_cmd, qq_opts, true);
  qq_cmd->add_option("--out", qq_out, "CSV output path (stdout when omitted)");

  auto* gof_cmd = app.add_subcommand("gof", "Moran goodness-of-fit test of the MPS fit");
  add_data_options(gof_cmd, gof_opts, false);
  gof_cmd->add_flag("--json", gof_json, "Print the JSON report instead of text");

  auto* sim_cmd = app.add_subcommand("simulate", "Run Monte Carlo studies from a JSON config");
  sim_cmd->add_option("--config", sim_opts.config, "Experiment config (JSON)")->required();
  sim_cmd->add_option("--out", sim_opts.out, "Summary output; .json for JSON, else CSV");
  sim_cmd->add_option("--reps", sim_opts.reps, "Override the replication count");
  sim_cmd->add_option("--seed", sim_opts.seed, "Override the master seed");
  sim_cmd->add_flag("--full-scale", sim_opts.full_scale, "Use 10000 replications");
  sim_cmd->add_flag("--serial", sim_opts.serial, "Run replications on one thread");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitDataError;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit_opts, fit_out);
    if (*qq_cmd) return cmd_qq(qq_opts, qq_out);
    if (*gof_cmd) return cmd_gof(gof_opts, gof_json);
    if (*sim_cmd) return cmd_simulate(sim_opts);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << '\n';
    return kExitEstimationFailure;
  } catch (const DomainError& e) {
    std::cerr << "estimation failed: " << e.what() << '\n';
    return kExitEstimationFailure;
  }
  return kExitOk;
}
