#include "tamed/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tamed/errors.hpp"
#include "tamed/schemes.hpp"

namespace tamed {

std::vector<std::string> subcommands() {
  return {"rates", "strong-error", "moments", "blowup", "enkf", "identity-check"};
}

ExperimentConfig defaults_for(const std::string& subcommand) {
  ExperimentConfig c;
  c.subcommand = subcommand;
  if (subcommand == "identity-check") {
    c.M = 1000000;
  } else if (subcommand == "blowup") {
    c.u0 = 10.0;
    c.h = 0.1;
  } else if (subcommand == "moments") {
    c.M = 10000;
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return nlohmann::json{
      {"subcommand", c.subcommand},
      {"seed", c.seed},
      {"M", c.M},
      {"T", c.T},
      {"u0", c.u0},
      {"levels", c.levels},
      {"eta", c.eta},
      {"alpha", c.alpha},
      {"p", c.p},
      {"output_path", c.output_path},
      {"scheme", c.scheme},
      {"reference_offset", c.reference_offset},
      {"bootstrap", c.bootstrap},
      {"h_list", c.h_list},
      {"step_limit", c.step_limit},
      {"J", c.J},
      {"d", c.d},
      {"K", c.K},
      {"h", c.h},
      {"steps", c.steps},
      {"forward", c.forward},
      {"gamma", c.gamma},
      {"alpha_grid", c.alpha_grid},
      {"eta_grid", c.eta_grid},
  };
}

namespace {

template <class T>
void read_field(const nlohmann::json& j, const std::string& key, T& out) {
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError("config: field '" + key + "' has the wrong type");
  }
}

// Integers given as JSON floats (1e4) are accepted when exact.
template <class Int>
void read_integer(const nlohmann::json& j, const std::string& key, Int& out) {
  const auto& v = j.at(key);
  if (v.is_number_integer()) {
    if (v.is_number_unsigned()) {
      out = static_cast<Int>(v.get<std::uint64_t>());
    } else {
      const auto x = v.get<std::int64_t>();
      if constexpr (std::is_unsigned_v<Int>) {
        if (x < 0) throw UsageError("config: field '" + key + "' must be nonnegative");
      }
      out = static_cast<Int>(x);
    }
    return;
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::floor(x) == x && std::fabs(x) < 9.0e15) {
      if (std::is_unsigned_v<Int> && x < 0) throw UsageError("config: field '" + key + "' must be nonnegative");
      out = static_cast<Int>(x);
      return;
    }
  }
  throw UsageError("config: field '" + key + "' must be an integer");
}

}  // namespace

ExperimentConfig from_json(const nlohmann::json& j, const ExperimentConfig& base) {
  if (!j.is_object()) throw UsageError("config: top level must be a JSON object");
  ExperimentConfig c = base;
  for (const auto& [key, value] : j.items()) {
    if (key == "subcommand") read_field(j, key, c.subcommand);
    else if (key == "seed") read_integer(j, key, c.seed);
    else if (key == "M") read_integer(j, key, c.M);
    else if (key == "T") read_field(j, key, c.T);
    else if (key == "u0") read_field(j, key, c.u0);
    else if (key == "levels") read_field(j, key, c.levels);
    else if (key == "eta") read_field(j, key, c.eta);
    else if (key == "alpha") read_field(j, key, c.alpha);
    else if (key == "p") {
      if (value.is_number()) c.p = {value.get<double>()};
      else read_field(j, key, c.p);
    }
    else if (key == "output_path") read_field(j, key, c.output_path);
    else if (key == "scheme") read_field(j, key, c.scheme);
    else if (key == "reference_offset") read_integer(j, key, c.reference_offset);
    else if (key == "bootstrap") read_integer(j, key, c.bootstrap);
    else if (key == "h_list") read_field(j, key, c.h_list);
    else if (key == "step_limit") read_integer(j, key, c.step_limit);
    else if (key == "J") read_integer(j, key, c.J);
    else if (key == "d") read_integer(j, key, c.d);
    else if (key == "K") read_integer(j, key, c.K);
    else if (key == "h") read_field(j, key, c.h);
    else if (key == "steps") read_integer(j, key, c.steps);
    else if (key == "forward") read_field(j, key, c.forward);
    else if (key == "gamma") read_field(j, key, c.gamma);
    else if (key == "alpha_grid") read_field(j, key, c.alpha_grid);
    else if (key == "eta_grid") read_field(j, key, c.eta_grid);
    else throw UsageError("config: unknown field '" + key + "'");
  }
  return c;
}

ExperimentConfig from_json(const nlohmann::json& j) {
  std::string sub = "rates";
  if (j.is_object() && j.contains("subcommand") && j.at("subcommand").is_string()) {
    sub = j.at("subcommand").get<std::string>();
  }
  return from_json(j, defaults_for(sub));
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw UsageError(field + ": " + what);
}

}  // namespace

void validate(const ExperimentConfig& c) {
  const auto subs = subcommands();
  require(std::find(subs.begin(), subs.end(), c.subcommand) != subs.end(), "subcommand",
          "unknown subcommand '" + c.subcommand + "'");
  require(c.M >= 1, "M", "must be at least 1");
  require(std::isfinite(c.T) && c.T > 0.0, "T", "must be positive and finite");
  require(std::isfinite(c.u0), "u0", "must be finite");
  const std::string& s = c.subcommand;
  if (s == "strong-error" || s == "moments") {
    require(!c.levels.empty(), "levels", "must not be empty");
    for (int l : c.levels) require(l >= 0 && l <= 24, "levels", "each level must lie in [0, 24]");
    SchemeSpec::parse(c.scheme);
  }
  if (s == "strong-error") {
    require(c.eta > 0.0 && c.eta < 1.0, "eta", "must lie in (0, 1)");
    require(c.alpha > 0.0 && c.alpha < 2.0, "alpha", "must lie in (0, 2)");
    require(c.reference_offset >= 1, "reference_offset", "must be at least 1");
    const int top = *std::max_element(c.levels.begin(), c.levels.end());
    require(top + c.reference_offset <= 24, "reference_offset", "reference level must not exceed 24");
    require(c.bootstrap >= 10, "bootstrap", "needs at least 10 resamples");
  }
  if (s == "moments") {
    require(!c.p.empty(), "p", "must not be empty");
    for (double v : c.p) require(std::isfinite(v) && v > 0.0, "p", "each order must be positive");
  }
  if (s == "blowup") {
    require(!c.h_list.empty(), "h_list", "must not be empty");
    for (double v : c.h_list) require(std::isfinite(v) && v > 0.0 && v <= c.T, "h_list", "each h must lie in (0, T]");
    require(std::isfinite(c.h) && c.h > 0.0 && c.h <= c.T, "h", "must lie in (0, T]");
    require(c.step_limit >= 1, "step_limit", "must be at least 1");
  }
  if (s == "enkf") {
    require(c.J >= 2, "J", "must be at least 2");
    require(c.d >= 1, "d", "must be at least 1");
    require(c.K >= 1, "K", "must be at least 1");
    require(std::isfinite(c.h) && c.h >= 0.0, "h", "must be finite and nonnegative");
    require(c.steps >= 0, "steps", "must be nonnegative");
    require(c.forward == "identity" || c.forward == "random", "forward", "must be 'identity' or 'random'");
    require(c.forward != "identity" || c.d == c.K, "forward", "identity forward map needs d == K");
    require(std::isfinite(c.gamma) && c.gamma > 0.0, "gamma", "must be positive");
  }
  if (s == "rates") {
    for (double a : parse_grid(c.alpha_grid, "alpha_grid")) {
      require(a > 0.0 && a < 2.0, "alpha_grid", "values must lie in (0, 2)");
    }
    for (double e : parse_grid(c.eta_grid, "eta_grid")) {
      require(e > 0.0 && e < 1.0, "eta_grid", "values must lie in (0, 1)");
    }
  }
}

std::vector<double> parse_grid(const std::string& spec, const std::string& field) {
  double a = 0.0;
  double b = 0.0;
  double s = 0.0;
  char tail = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &a, &b, &s, &tail) != 3) {
    throw UsageError(field + ": expected start:stop:step, got '" + spec + "'");
  }
  if (!(s > 0.0) || !(b >= a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw UsageError(field + ": need step > 0 and stop >= start");
  }
  const double span = (b - a) / s;
  if (span > 1e6) throw UsageError(field + ": grid too large");
  const auto n = static_cast<long>(std::floor(span + 1e-9));
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * s);
  return out;
}

std::vector<int> parse_levels(const std::string& spec) {
  std::vector<int> out;
  const auto dots = spec.find("..");
  try {
    if (dots != std::string::npos) {
      std::size_t u1 = 0;
      std::size_t u2 = 0;
      const std::string lo_s = spec.substr(0, dots);
      const std::string hi_s = spec.substr(dots + 2);
      const int lo = std::stoi(lo_s, &u1);
      const int hi = std::stoi(hi_s, &u2);
      if (u1 != lo_s.size() || u2 != hi_s.size() || hi < lo) throw UsageError("");
      for (int l = lo; l <= hi; ++l) out.push_back(l);
    } else {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        out.push_back(std::stoi(item, &used));
        if (used != item.size()) throw UsageError("");
      }
    }
  } catch (const std::exception&) {
    throw UsageError("levels: expected 'lo..hi' or a comma list, got '" + spec + "'");
  }
  if (out.empty()) throw UsageError("levels: empty list");
  return out;
}

std::vector<double> parse_list(const std::string& spec, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError(field + ": cannot parse '" + item + "'");
  }
  if (out.empty()) throw UsageError(field + ": empty list");
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace tamed
