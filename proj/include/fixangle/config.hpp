#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fixangle/experiments.hpp"
#include "fixangle/forward.hpp"
#include "fixangle/recon.hpp"

namespace fixangle {

enum class DatasetLayout { Ewald, Product };
enum class OracleBacking { Synthetic, Dataset };

/// Fully resolved run configuration. Every field has a default; the JSON
/// schema in schema/run_config.schema.json documents keys and units.
struct RunConfig {
  GridSpec grid{};
  Vec theta0{1.0, 0.0, 0.0};
  std::uint64_t seed = 1;

  std::optional<PotentialRecipe> potential;
  std::optional<std::string> potential_path;

  SolverOptions solver{};

  // forward
  double forward_k = 1.0;
  std::optional<Vec> forward_theta;
  int forward_omega_count = 16;

  // dataset
  DatasetLayout dataset_layout = DatasetLayout::Ewald;
  std::vector<double> dataset_k_list;
  int dataset_omega_count = 16;
  std::optional<std::string> dataset_path;
  std::vector<std::string> dataset_paths;

  // oracle
  OracleBacking oracle_backing = OracleBacking::Synthetic;
  OracleMode oracle_mode = OracleMode::TwoDirections;
  InterpolationConfig interpolation{};
  bool born_hermitian = false;

  ReconConfig recon{};
  std::vector<int> recon_ms;

  int uniqueness_runs = 2;

  std::vector<double> pw_kappas{2, 4, 8, 16, 32, 64, 128};
  int pw_zeta_count = 64;
  std::optional<GridSpec> pw_grid;

  /// Parses and validates; throws Error(Config) naming the offending field.
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  std::string to_json() const;

  /// Module-level invariants; returns non-fatal warnings.
  std::vector<std::string> validate() const;

  bool operator==(const RunConfig&) const;
};

bool operator==(const PotentialRecipe& a, const PotentialRecipe& b);

}  // namespace fixangle
