#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fixangle/ewald.hpp"
#include "fixangle/resolvent.hpp"

namespace fixangle {

struct ReconConfig {
  int m = 1;
  int ell_max = 50;
  double alpha = 0.5;
  double fp_tol = 1e-10;
  CutoffConfig cut{};
  bool enforce_real = true;
  ResolventOptions resolvent{};
  /// Opt-in wavenumber quantization step for plan reuse; 0 uses each exact k(xi).
  double k_quantum = 0.0;
  /// Nonzero seeds a permutation of the per-frequency work order.
  std::uint64_t work_order_seed = 0;

  /// Throws Config on hard violations; returns warnings (e.g. alpha outside
  /// 0 < alpha <= 1, d/2 - d/(d-1) < alpha < d/2).
  std::vector<std::string> validate(int d) const;
};

/// Q_1(f)(xi), ..., Q_m(f)(xi) at one Ewald point, sharing the partial products
/// v_j = f R_k v_{j-1}, v_0 = f e^{ik theta_eff.x}.
std::vector<cplx> born_series_terms(const ComplexField& f, const EwaldPoint& p, int m,
                                    const ResolventPlan& plan);
cplx born_series_term(const ComplexField& f, const EwaldPoint& p, int j, PlanCache& plans);

struct TStep {
  ComplexField next;
  /// L2 norm of the imaginary part dropped by realification.
  double imag_discarded = 0.0;
};

/// T_m(f) = phi q_theta0 - phi sum_{j<=m} Q_j(f), with the correction
/// evaluated on the retained frequencies only.
TStep apply_T_m(const ComplexField& f, const ComplexField& born_field, const ReconConfig& cfg,
                const Vec& theta0, const RealField& phi, PlanCache& plans);

struct TraceRecord {
  int m = 0;
  int ell = 0;
  double step_norm = 0.0;
  std::optional<double> err_alpha;
  std::optional<double> err_l2;
  double seconds = 0.0;
  double imag_discarded = 0.0;
};

struct ReconTrace {
  std::vector<TraceRecord> records;
  std::vector<std::string> warnings;
  std::vector<std::string> failures;

  /// JSON lines, one {"m","ell","step_norm","err_alpha","err_l2","seconds"} per record.
  std::string to_jsonl() const;
};

struct ReconResult {
  RealField q;
  ReconTrace trace;
  BornResult born;
  /// phi q_theta0 realified: the first iterate q_{m,2}.
  RealField born_iterate;
  bool converged = false;
  int iterations = 0;
};

/// q_{m,1} = 0, q_{m,l+1} = T_m(q_{m,l}) until the W^{alpha,2} step drops below
/// fp_tol ||phi q_theta0||_{W^{alpha,2}} or ell_max steps. converged = false is
/// the NotConverged outcome; the trace is complete either way.
ReconResult reconstruct(const FarFieldOracle& oracle, const GridSpec& spec, const ReconConfig& cfg,
                        const RealField* truth = nullptr);

/// sqrt(sum_S |F a - F b|^2 / sum_S |F b|^2) over the retained frequency set S.
double band_limited_error(const RealField& estimate, const RealField& truth, const Vec& theta0,
                          const CutoffConfig& cut);

struct ConvergenceEntry {
  int m = 0;
  double err_alpha = 0.0;
  double err_l2 = 0.0;
  double err_band = 0.0;
  bool converged = false;
  int iterations = 0;

  bool operator==(const ConvergenceEntry&) const = default;
};

struct ConvergenceReport {
  double alpha = 0.0;
  std::vector<ConvergenceEntry> entries;
  /// Indices i where entries[i].err_alpha > entries[i-1].err_alpha.
  std::vector<int> violations;
  bool monotone = true;

  std::string to_json() const;
  static ConvergenceReport from_json(const std::string& text);
  bool operator==(const ConvergenceReport&) const = default;
};

ConvergenceReport convergence_report(const std::vector<ReconResult>& runs, const std::vector<int>& ms,
                                     const RealField& truth, double alpha, const Vec& theta0,
                                     const CutoffConfig& cut);

}  // namespace fixangle
