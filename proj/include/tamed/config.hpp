#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace tamed {

// Flat, fully resolved description of one run. Every subcommand reads the
// subset of fields it needs; the rest are carried along so that the emitted
// config reproduces the run exactly.
struct ExperimentConfig {
  std::string subcommand = "rates";
  std::uint64_t seed = 1;
  std::uint64_t M = 10000;
  double T = 1.0;
  double u0 = 1.0;
  std::vector<int> levels{4, 5, 6, 7, 8, 9, 10};
  double eta = 0.5;
  double alpha = 1.0;
  std::vector<double> p{1.0, 2.0, 2.5};
  std::string output_path;
  // strong-error / moments
  std::string scheme = "weak-tamed";
  int reference_offset = 4;
  int bootstrap = 200;
  // blowup
  std::vector<double> h_list{0.1, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125, 0.0009765625};
  int step_limit = 3;
  // enkf
  int J = 2;
  int d = 1;
  int K = 1;
  double h = 0.01;
  int steps = 1000;
  std::string forward = "identity";  // identity | random
  double gamma = 1.0;                // noise covariance gamma * I
  // rates
  std::string alpha_grid = "0.1:1.9:0.1";
  std::string eta_grid = "0.05:0.95:0.05";

  bool operator==(const ExperimentConfig&) const = default;
};

std::vector<std::string> subcommands();

// Defaults with the subcommand-specific overrides applied.
ExperimentConfig defaults_for(const std::string& subcommand);

nlohmann::json to_json(const ExperimentConfig& config);
// Starts from `base` and overrides every field present in `j`. Unknown
// fields and type mismatches throw UsageError naming the field.
ExperimentConfig from_json(const nlohmann::json& j, const ExperimentConfig& base);
ExperimentConfig from_json(const nlohmann::json& j);

// Throws UsageError naming the first offending field.
void validate(const ExperimentConfig& config);

// "a:b:s" -> a, a + s, ..., up to b inclusive (to 1e-9 relative).
std::vector<double> parse_grid(const std::string& spec, const std::string& field);
// "4..10" or "4,6,8" -> list of levels
std::vector<int> parse_levels(const std::string& spec);
// "1,2,2.5" -> list
std::vector<double> parse_list(const std::string& spec, const std::string& field);

// 17 significant digits.
std::string format_double(double x);

}  // namespace tamed
