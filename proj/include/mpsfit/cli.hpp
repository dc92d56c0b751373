#pragma once

// Data ingestion and report building behind the mpsfit command-line tool.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpsfit/estimation.hpp"
#include "mpsfit/gof.hpp"

namespace mpsfit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitEstimationFailure = 2;

/// Unreadable input, malformed lines, or too little data to fit.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::string name;
  std::vector<double> observations;
  std::optional<double> threshold;

  /// x - u for every x > u when a threshold is set, otherwise the raw data.
  std::vector<double> fitting_input() const;
};

/// One decimal number per line; blank lines and lines starting with '#'
/// are skipped. Parsing ignores the locale (dot decimal separator only).
Dataset parse_dataset(std::istream& in, std::string name);
Dataset load_dataset(const std::filesystem::path& path);

struct QuantileRow {
  std::size_t index = 0;  ///< 1-based
  double empirical = 0.0;
  double expected = 0.0;
};

/// Expected GPD quantiles at plotting positions i / (n + 1).
std::vector<QuantileRow> gpd_quantile_plot(const OrderedSample& sample, const GpdParams& params);
void write_quantile_csv(const std::vector<QuantileRow>& rows, std::ostream& os);

struct FitRequest {
  Model model = Model::Gpd;
  Method method = Method::Mps;
  std::optional<double> threshold;
};

/// Validates the request against the data and builds the fitting sample.
OrderedSample prepare_sample(const Dataset& data, const FitRequest& request);

struct FitReport {
  FitRequest request;
  std::size_t n = 0;
  FitResult fit;
  std::optional<MoranTestResult> moran;
};

/// Throws DataError for bad requests and EstimationError when fitting fails.
FitReport run_fit(const Dataset& data, const FitRequest& request);

/// {model, method, params: {gamma, mu?, sigma}, objective, moran?: {M, T, df, p_value}, ...}
/// objective is M for MPS and the log-likelihood for MLE.
nlohmann::json to_json(const FitReport& report);
std::string format_report(const FitReport& report);
std::string format_moran(const MoranTestResult& m);

}  // namespace mpsfit::cli
