// tamedlab: batch driver for the weak-tamed scheme experiments.
//
// Exit codes: 0 all checks passed, 1 a property check failed,
// 2 usage / configuration error, 3 I/O or other infrastructure failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <json.hpp>

#include "tamed/config.hpp"
#include "tamed/errors.hpp"
#include "tamed/experiments.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kPropertyFailure = 1, kUsage = 2, kInfrastructure = 3 };

struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<double> samples;
  std::optional<double> T;
  std::optional<double> u0;
  std::optional<std::string> output;
  std::optional<std::string> scheme;
  std::optional<std::string> levels;
  std::optional<double> eta;
  std::optional<double> alpha;
  std::optional<int> reference_offset;
  std::optional<int> bootstrap;
  std::optional<std::string> p;
  std::optional<std::string> h_list;
  std::optional<double> h;
  std::optional<int> step_limit;
  std::optional<int> J;
  std::optional<int> d;
  std::optional<int> K;
  std::optional<int> steps;
  std::optional<std::string> forward;
  std::optional<double> gamma;
  std::optional<std::string> alpha_grid;
  std::optional<std::string> eta_grid;
};

std::uint64_t as_count(double x, const char* field) {
  if (!(x >= 1.0) || std::floor(x) != x || x > 9.0e15) {
    throw tamed::UsageError(std::string(field) + ": must be a positive integer");
  }
  return static_cast<std::uint64_t>(x);
}

template <class T>
void apply(const std::optional<T>& flag, T& field) {
  if (flag) field = *flag;
}

void apply_flags(const Flags& f, tamed::ExperimentConfig& c) {
  apply(f.seed, c.seed);
  if (f.samples) c.M = as_count(*f.samples, "M");
  apply(f.T, c.T);
  apply(f.u0, c.u0);
  apply(f.output, c.output_path);
  apply(f.scheme, c.scheme);
  if (f.levels) c.levels = tamed::parse_levels(*f.levels);
  apply(f.eta, c.eta);
  apply(f.alpha, c.alpha);
  apply(f.reference_offset, c.reference_offset);
  apply(f.bootstrap, c.bootstrap);
  if (f.p) c.p = tamed::parse_list(*f.p, "p");
  if (f.h_list) c.h_list = tamed::parse_list(*f.h_list, "h_list");
  apply(f.h, c.h);
  apply(f.step_limit, c.step_limit);
  apply(f.J, c.J);
  apply(f.d, c.d);
  apply(f.K, c.K);
  apply(f.steps, c.steps);
  apply(f.forward, c.forward);
  apply(f.gamma, c.gamma);
  apply(f.alpha_grid, c.alpha_grid);
  apply(f.eta_grid, c.eta_grid);
}

void add_common(CLI::App* sub, Flags& f) {
  sub->set_help_flag("--help", "print help and exit");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--M,--samples", f.samples, "Monte Carlo sample count (1e4 style accepted)");
  sub->add_option("--T", f.T, "time horizon");
  sub->add_option("--u0", f.u0, "initial condition");
  sub->add_option("-o,--output", f.output, "CSV output path");
}

std::optional<std::uint64_t> env_u64(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(name);
    return x;
  } catch (const std::exception&) {
    throw tamed::UsageError(std::string(name) + ": not an unsigned integer");
  }
}

fs::path sidecar(const fs::path& csv, const std::string& suffix) {
  fs::path p = csv;
  p.replace_extension();
  p += suffix;
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tamedlab: strong-error, moment and EnKF experiments for du = -u^3 dt + u^2 dW"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.set_help_flag("--help", "print help and exit");  // -h is taken by the step size
  std::string config_file;
  std::optional<unsigned> workers;
  app.add_option("--config", config_file, "JSON config; flags override its fields");
  app.add_option("--workers", workers, "worker threads (0 = all cores)");

  Flags f;
  auto* rates = app.add_subcommand("rates", "tabulate convergence exponents");
  add_common(rates, f);
  rates->add_option("--alpha-grid", f.alpha_grid, "start:stop:step, values in (0, 2)");
  rates->add_option("--eta-grid", f.eta_grid, "start:stop:step, values in (0, 1)");

  auto* strong = app.add_subcommand("strong-error", "coupled strong-error harness with rate fits");
  add_common(strong, f);
  strong->add_option("--scheme", f.scheme, "naive-em | weak-tamed | regularized-em:<eps> | drift-tamed | increment-tamed");
  strong->add_option("--levels", f.levels, "grid levels, e.g. 4..10 or 4,6,8");
  strong->add_option("--eta", f.eta, "order of the sup-in-time functional");
  strong->add_option("--alpha", f.alpha, "order of the pointwise functional");
  strong->add_option("--reference-offset", f.reference_offset, "reference level above the finest level");
  strong->add_option("--bootstrap", f.bootstrap, "bootstrap resamples");

  auto* moments = app.add_subcommand("moments", "a-priori moment estimates across step sizes");
  add_common(moments, f);
  moments->add_option("--scheme", f.scheme, "scheme name");
  moments->add_option("--levels", f.levels, "grid levels");
  moments->add_option("--p", f.p, "moment orders, comma separated");

  auto* blowup = app.add_subcommand("blowup", "naive Euler-Maruyama divergence profile");
  add_common(blowup, f);
  blowup->add_option("--h-list", f.h_list, "step sizes for the profile, comma separated");
  blowup->add_option("--h", f.h, "step size of the EM vs weak-tamed comparison");
  blowup->add_option("--step-limit", f.step_limit, "steps within which EM must exceed 1e10");

  auto* enkf = app.add_subcommand("enkf", "ensemble Kalman inversion run");
  enkf->set_help_flag("--help", "print help and exit");
  enkf->add_option("--seed", f.seed, "master seed");
  enkf->add_option("-o,--output", f.output, "CSV output path");
  enkf->add_option("--J", f.J, "ensemble size");
  enkf->add_option("--d", f.d, "parameter dimension");
  enkf->add_option("--K", f.K, "observation dimension");
  enkf->add_option("--h", f.h, "step size");
  enkf->add_option("--steps", f.steps, "iterations");
  enkf->add_option("--forward", f.forward, "identity | random");
  enkf->add_option("--gamma", f.gamma, "noise covariance gamma * I");

  auto* ident = app.add_subcommand("identity-check", "randomized check of the coefficient identities and bounds");
  ident->set_help_flag("--help", "print help and exit");
  ident->add_option("--seed", f.seed, "master seed");
  ident->add_option("--M,--samples", f.samples, "samples (1e6 style accepted)");
  ident->add_option("-o,--output", f.output, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  tamed::RunResult result;
  tamed::ExperimentConfig config;
  try {
    config = tamed::defaults_for(sub);
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw tamed::UsageError("--config: cannot read " + config_file);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::parse_error& e) {
        throw tamed::UsageError(std::string("--config: ") + e.what());
      }
      config = tamed::from_json(j, config);
      if (config.subcommand != sub) {
        throw tamed::UsageError("subcommand: config file is for '" + config.subcommand + "', not '" + sub + "'");
      }
    }
    if (auto s = env_u64("TAMED_SEED")) config.seed = *s;
    if (!workers) {
      if (auto w = env_u64("TAMED_WORKERS")) workers = static_cast<unsigned>(*w);
    }
    apply_flags(f, config);
    if (config.output_path.empty()) config.output_path = sub + ".csv";
    tamed::validate(config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    result = tamed::run_experiment(config, workers.value_or(0));
    const fs::path csv = config.output_path;
    write_text(csv, result.csv);
    write_text(sidecar(csv, ".json"), result.summary.dump(2) + "\n");
    write_text(sidecar(csv, ".config.json"), tamed::to_json(config).dump(2) + "\n");
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfrastructure;
  }

  std::cout << result.summary.dump(2) << '\n';
  for (const auto& n : result.notes) std::cerr << "note: " << n << '\n';
  for (const auto& m : result.failures) std::cerr << "FAILED: " << m << '\n';
  return result.passed() ? kOk : kPropertyFailure;
}
