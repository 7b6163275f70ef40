#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fixangle/grid.hpp"
#include "fixangle/resolvent.hpp"

namespace fixangle {

enum class SolverMethod { Neumann, Dense };

/// Dense solves are capped at N^d <= 4096 unknowns.
inline constexpr std::size_t kDenseSizeCap = 4096;

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 500;
  SolverMethod method = SolverMethod::Neumann;
  /// Keep only the first Born-series term (u_s dropped from the far field).
  bool born_only = false;
  ResolventOptions resolvent{};
};

struct ScatterSolution {
  ComplexField u_s;
  Vec theta{};
  double k = 0.0;
  int iterations = 0;
  double residual = 0.0;
  /// Relative residual after each Neumann step.
  std::vector<double> residual_history;
};

/// Solves u_s = R_k(q e^{ik theta.x}) + R_k(q u_s).
ScatterSolution solve_scattered(const RealField& q, const Vec& theta, double k,
                                const SolverOptions& options);
/// Same, with a caller-supplied plan for R_k.
ScatterSolution solve_scattered(const RealField& q, const Vec& theta, const ResolventPlan& plan,
                                const SolverOptions& options);

/// u_inf(omega) = h^d sum_j e^{-ik omega.x_j} q(x_j) (e^{ik theta.x_j} + u_s(x_j)).
cplx far_field(const RealField& q, const ScatterSolution& sol, const Vec& omega);

/// h^d sum_j e^{-i xi.x_j} f(x_j) at an arbitrary (off-lattice) frequency.
cplx fourier_sample(const ComplexField& f, const Vec& xi);
cplx fourier_sample(const RealField& f, const Vec& xi);

/// One tabulated value u_inf(omega, sign * theta0, k).
struct FarFieldSample {
  int sign = 1;
  double k = 0.0;
  Vec omega{};
  cplx value{};
};

/// Strict weak ordering used for dataset files: sign descending (+1 first),
/// then k, then omega lexicographically.
bool sample_order(const FarFieldSample& a, const FarFieldSample& b);

struct FarFieldDataset {
  int d = 2;
  Vec theta0{};
  double R = 0.0;
  /// Free-form JSON text describing how the samples were produced.
  std::string generator = "{}";
  std::vector<FarFieldSample> samples;

  std::size_t k_count() const;
  std::size_t omega_count() const;
  void sort();
};

/// Requested (sign, k, omega) triple; generate_dataset accepts either a
/// product layout or an explicit list.
struct SampleRequest {
  int sign = 1;
  double k = 0.0;
  Vec omega{};
};

/// Tabulates u_inf(omega, s theta0, k) for s in {+1, -1} over the product
/// k_list x omega_list.
FarFieldDataset generate_dataset(const RealField& q, const Vec& theta0,
                                 const std::vector<double>& k_list,
                                 const std::vector<Vec>& omega_list,
                                 const SolverOptions& options);

/// Tabulates an explicit request list; one solve per distinct (sign, k).
FarFieldDataset generate_dataset(const RealField& q, const Vec& theta0,
                                 std::vector<SampleRequest> requests,
                                 const SolverOptions& options);

/// Unit vector check |v| = 1 within 1e-12; throws Config otherwise.
void require_unit(const Vec& v, int d, const char* what);

}  // namespace fixangle
