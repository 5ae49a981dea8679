#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "coneflow/geodesic.hpp"

namespace coneflow::cli {

/// Bad configuration. `where` is a dotted field path, or "line L, column C"
/// for JSON syntax errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

enum class BackendChoice { Direct, Lift, Both };

struct InitialState {
  std::optional<PhasePoint> ambient;
  std::optional<ConeChartState> chart;
  bool present() const { return ambient || chart; }
};

struct Thresholds {
  double I = 1e-8;             // max |I(s) - I(0)|
  double I_vec = 1e-6;         // max |I^k(s) - I^k(0)| over k
  double disagreement = 1e-6;  // direct vs lift, per sample
};

struct OutputSpec {
  std::string format = "csv";
  std::string path;  // empty: stdout
};

struct RunConfig {
  ManifoldConfig manifold;
  InitialState initial;
  std::optional<Span> span;
  int samples = 1001;
  BackendChoice backend = BackendChoice::Direct;
  IntegratorSettings integrator;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int count = 1;
  Thresholds thresholds;
  OutputSpec output;
};

std::string_view to_string(BackendChoice b);
BackendChoice parse_backend(const std::string& name, const std::string& where);

RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Initial state in ambient form, checked against the cone. Throws
/// ConfigError when missing or off the cone.
PhasePoint initial_phase(const Manifold& m, const RunConfig& cfg);

}  // namespace coneflow::cli
