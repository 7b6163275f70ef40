#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fixangle/recon.hpp"

namespace fixangle {

enum class PotentialKind { SmoothBump, MollifiedIndicator, RandomTrigPoly };

struct PotentialRecipe {
  PotentialKind kind = PotentialKind::SmoothBump;
  /// Target W^{beta,2} norm: sobolev_norm(q, beta) == value after scaling.
  double beta = 1.0;
  double value = 0.05;
  double R = 0.5;
  std::uint64_t seed = 1;
  int max_mode = 6;
  /// Regularity used in the coefficient decay <xi>^{-decay - d/2 - 0.05}; unset means beta.
  std::optional<double> decay;
  /// SmoothBump only: multiply by (1 - c |x|^2 / R^2) with c chosen so the
  /// continuous profile has zero mean.
  bool zero_mean = false;
};

/// Real potential supported in |x| <= R, scaled to the recipe's norm.
RealField make_potential(const PotentialRecipe& recipe, const GridSpec& spec);

/// exp(1 - 1 / (1 - t^2)) for t < 1, zero otherwise.
double smooth_bump_profile(double t);

struct UniquenessReport {
  int runs = 0;
  bool deterministic = true;
  double max_run_discrepancy = 0.0;
  bool datasets_equal = false;
  double dataset_gap_rel = 0.0;
  double dataset_gap_max = 0.0;
  double recon_gap_l2 = 0.0;
  double recon_gap_rel = 0.0;
  double recon_gap_alpha = 0.0;
  double recon_gap_max = 0.0;
  bool reconstructions_equal = false;
  bool converged = true;
  std::vector<std::string> notes;

  std::string to_json() const;
};

/// Relative l2 gap ||a - b|| / ||a|| and max |a - b| between two datasets with
/// identical (sign, k, omega) layouts. Throws Config on layout mismatch.
std::pair<double, double> dataset_gap(const FarFieldDataset& a, const FarFieldDataset& b);

/// Runs reconstruct `runs` times per dataset under permuted work orders and
/// thread counts. With a second dataset, also compares the two reconstructions.
UniquenessReport uniqueness_check(const FarFieldDataset& first, const FarFieldDataset* second,
                                  const GridSpec& spec, const ReconConfig& cfg,
                                  const InterpolationConfig& interp, OracleMode mode, int runs);

struct PaleyWienerRow {
  double kappa = 0.0;
  double eta = 0.0;
  double F = 0.0;
  /// log(F_i / F_{i-1}) / log(kappa_i / kappa_{i-1}); NaN for the first row.
  double fit_exponent = 0.0;
  /// 100 eps h^d sum |f| e^{eta |x|}: below this F is rounding noise.
  double noise_floor = 0.0;
};

/// Directions on S^{d-1}: uniform angles (d = 2) or Fibonacci points (d = 3).
std::vector<Vec> sphere_directions(int d, int count);

/// f^((kappa + i eta) zeta) = h^d sum_j e^{-i kappa zeta.x_j} e^{eta zeta.x_j} f(x_j).
cplx complex_frequency_transform(const RealField& f, double kappa, double eta, const Vec& zeta);

/// For each kappa: eta = ln(kappa) / R, F = max over zeta of the modulus above.
std::vector<PaleyWienerRow> paley_wiener_scan(const RealField& f, const std::vector<double>& kappas,
                                              int zeta_count);

std::string paley_wiener_csv(const std::vector<PaleyWienerRow>& rows);

}  // namespace fixangle
