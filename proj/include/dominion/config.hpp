#pragma once

#include "dominion/certify.hpp"
#include "dominion/dynamics.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dominion {

inline constexpr int kConfigVersion = 1;

struct HullSpec {
  std::optional<JacobianEntry> entry;
  std::optional<Interval> bounds;
  int grid_n = 1000;
};

struct EpsilonSearchSpec {
  double eps_max = 1.0;
  int steps = 60;
  std::optional<double> coupling_bound;
};

/// A parsed configuration file: one system (linear or nonlinear) plus the
/// optional certificate, hull, initial conditions and search settings.
struct SystemConfig {
  std::string name;
  std::optional<LinearSPSystem> linear;
  std::optional<NonlinearSPSystem> nonlinear;
  std::optional<SPDominanceCertificate> certificate;
  std::optional<HullSpec> hull;
  std::vector<Vector> initial_conditions;
  EpsilonSearchSpec epsilon_search;
  std::optional<double> step;  // integration step override
  int equilibrium_grid = 5;

  bool is_linear() const { return linear.has_value(); }
  int n_r() const;
  int n_f() const;
  double eps() const;
  std::vector<Interval> omega() const;

  /// Copy with a different eps for the system.
  SystemConfig with_eps(double eps) const;
};

/// Throws ConfigError with a message naming the offending key.
SystemConfig parse_config(const nlohmann::json& j);
SystemConfig load_config(const std::filesystem::path& path);

/// JSON for the nonlinear spring example (same content as configs/nonlinear_spring.json).
nlohmann::json nonlinear_spring_config_json();

}  // namespace dominion
