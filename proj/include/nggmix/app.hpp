#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "nggmix/sampler.hpp"

namespace nggmix {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::string dataset;
  std::string output_dir = "nggmix_out";
  SamplerConfig sampler;
  /// Empty: data-scaled gamma default.
  std::string scale_prior;
  std::vector<double> scale_params;
  std::size_t chains = 1;
  std::size_t grid_points = 200;
  std::vector<double> quantiles{0.05};
  std::string clustering = "vi";  // none, binder, vi
  double level = 0.95;
  std::size_t qq_thin = 10;
  bool sequential_chains = false;
};

struct RunReport {
  std::vector<std::string> files;  // names relative to the output directory
  double sampling_seconds = 0.0;
  double total_seconds = 0.0;
  std::vector<std::string> chain_errors;
};

/// Loads the dataset, runs the chains and writes every analysis product into
/// options.output_dir. Progress lines go to `progress` when non-null.
/// Throws ValidationError for bad input and SamplingError when a chain fails.
RunReport run_command(const RunOptions& options, std::ostream* progress);

struct ElicitOptions {
  std::size_t n = 100;
  double alpha = 1.0;
  double gamma = 0.4;
};

/// CSV with columns k, dirichlet, stable plus a summary JSON object.
struct ElicitResult {
  std::string csv;
  std::string summary_json;
};

ElicitResult elicit_command(const ElicitOptions& options);

/// Entry point shared by the executable: parses arguments and maps errors to
/// exit codes (0 ok, 2 validation, 3 sampling).
int cli_main(int argc, char** argv);

}  // namespace nggmix
