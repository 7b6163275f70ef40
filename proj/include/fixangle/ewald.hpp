#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "fixangle/forward.hpp"
#include "fixangle/grid.hpp"

namespace fixangle {

/// A nonzero frequency xi = k (omega - theta_eff) off the hyperplane xi.theta0 = 0.
struct EwaldPoint {
  Vec xi{};
  /// theta_eff = sign * theta0; +1 when xi.theta0 < 0, -1 when xi.theta0 > 0.
  int sign = 1;
  Vec theta_eff{};
  Vec omega{};
  double k = 0.0;
};

/// omega = -(2 xi.t / |xi|^2) xi + t, k = -|xi|^2 / (2 xi.t) with t = theta_eff.
/// Throws DegenerateFrequency when xi = 0 or xi.theta0 = 0.
EwaldPoint ewald_decompose(const Vec& xi, const Vec& theta0, int d);

struct CutoffConfig {
  double xi_max_fraction = 0.66;
  double delta = 0.05;
  /// Upper bound on k(xi); unset means xi_max / (2 delta), the largest k the
  /// other two cuts admit.
  std::optional<double> k_max;

  double xi_max(const GridSpec& spec) const { return xi_max_fraction * spec.nyquist(); }
  double effective_k_max(const GridSpec& spec) const;
  void validate() const;
};

struct RetainedPoint {
  std::size_t flat = 0;
  EwaldPoint point;
};

/// Lattice frequencies kept by the cut-offs, in flat (FFT) order. Points on
/// the -N/2 edge planes are always dropped since their mirrors are not on the
/// lattice.
std::vector<RetainedPoint> retained_points(const GridSpec& spec, const Vec& theta0,
                                           const CutoffConfig& cut);

enum class OracleMode { TwoDirections, StefanovExtension };

/// Source of fixed-angle far-field values u_inf(omega, sign * theta0, k).
class FarFieldOracle {
 public:
  FarFieldOracle(const Vec& theta0, int d, OracleMode mode) : theta0_(theta0), d_(d), mode_(mode) {}
  virtual ~FarFieldOracle() = default;

  /// Raw table access. Must be safe to call concurrently.
  virtual cplx sample(int sign, double k, const Vec& omega) const = 0;

  /// u_inf(omega(xi), theta0(xi), k(xi)). In StefanovExtension mode only
  /// +theta0 data are read: for xi.theta0 > 0 the value is the conjugate of
  /// u_inf(-omega, theta0, k), the k < 0 continuation.
  cplx at(const EwaldPoint& p) const;

  const Vec& theta0() const { return theta0_; }
  int dimension() const { return d_; }
  OracleMode mode() const { return mode_; }

 private:
  Vec theta0_;
  int d_;
  OracleMode mode_;
};

/// Solves the forward problem for each query.
class SyntheticOracle final : public FarFieldOracle {
 public:
  SyntheticOracle(RealField q, const Vec& theta0, SolverOptions options,
                  OracleMode mode = OracleMode::TwoDirections,
                  std::shared_ptr<PlanCache> plans = nullptr);

  cplx sample(int sign, double k, const Vec& omega) const override;
  const std::shared_ptr<PlanCache>& plans() const { return plans_; }

 private:
  RealField q_;
  SolverOptions options_;
  std::shared_ptr<PlanCache> plans_;
};

enum class Interpolation { Nearest, LinearK };

struct InterpolationConfig {
  Interpolation kind = Interpolation::Nearest;
  /// Largest admissible distance sqrt(((k - k')/k)^2 + |omega - omega'|^2).
  double max_distance = 1e-6;
};

/// Read-only lookup into a tabulated dataset.
class DatasetOracle final : public FarFieldOracle {
 public:
  DatasetOracle(FarFieldDataset dataset, InterpolationConfig interp,
                OracleMode mode = OracleMode::TwoDirections);

  cplx sample(int sign, double k, const Vec& omega) const override;
  const FarFieldDataset& dataset() const { return dataset_; }

 private:
  FarFieldDataset dataset_;
  InterpolationConfig interp_;
};

struct BornResult {
  ComplexField field;
  Spectrum spectrum;
  /// ||q(xi) - conj(q(-xi))|| / ||q|| over the retained set, before any symmetrization.
  double asymmetry = 0.0;
  std::size_t retained = 0;
  double excluded_fraction = 0.0;
};

/// Spectral field with value oracle.at(xi_n) on the retained set and zero
/// elsewhere, transformed back to physical space.
BornResult born_approximation(const FarFieldOracle& oracle, const GridSpec& spec,
                              const CutoffConfig& cut, bool enforce_hermitian = false);

/// Requests covering exactly the retained Ewald points (with the sign each
/// oracle mode will ask for).
std::vector<SampleRequest> ewald_requests(const GridSpec& spec, const Vec& theta0,
                                          const CutoffConfig& cut, OracleMode mode);

}  // namespace fixangle
