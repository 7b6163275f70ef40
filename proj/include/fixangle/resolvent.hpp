#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>

#include "fixangle/grid.hpp"

namespace fixangle {

enum class ResolventMethod { TruncatedKernel, EpsMultiplier };

struct ResolventOptions {
  ResolventMethod method = ResolventMethod::TruncatedKernel;
  double eps = 0.0;  // EpsMultiplier only
};

/// Fourier multiplier realizing the outgoing resolvent R_k, whose symbol is
/// 1 / (k^2 - |xi|^2 + i0). In physical space R_k is convolution with
/// -G_k, G_k = (i/4) H0(k|x|) in 2D and exp(ik|x|) / (4 pi |x|) in 3D.
class ResolventPlan {
 public:
  ResolventPlan(const GridSpec& spec, double k, ResolventOptions options);

  const GridSpec& spec() const { return spec_; }
  double k() const { return k_; }
  const ResolventOptions& options() const { return options_; }
  const std::vector<cplx>& symbol() const { return symbol_; }
  /// Truncation radius of the kernel (2L).
  double truncation_radius() const { return 2.0 * spec_.L; }

  /// inverse_transform(symbol * forward_transform(f)).
  ComplexField apply(const ComplexField& f) const;

 private:
  GridSpec spec_;
  double k_;
  ResolventOptions options_;
  std::vector<cplx> symbol_;
};

ResolventPlan build_plan(const GridSpec& spec, double k, ResolventOptions options = {});
ComplexField apply_resolvent(const ResolventPlan& plan, const ComplexField& f);

/// Physical-space kernel of R_k at distance r > 0.
cplx resolvent_kernel(int d, double k, double r);

/// Mean of the R_k kernel over the ball |x| <= radius (adaptive quadrature).
cplx resolvent_kernel_ball_average(int d, double k, double radius);

/// Plans keyed by the bit pattern of k; insertion is mutex-guarded and plans
/// are immutable once published, so lookups are safe from any thread.
class PlanCache {
 public:
  PlanCache(const GridSpec& spec, ResolventOptions options) : spec_(spec), options_(options) {}

  std::shared_ptr<const ResolventPlan> get(double k);
  /// Builds all missing plans for the given wavenumbers in parallel.
  void prepare(const std::vector<double>& ks);
  std::size_t size() const;

  const GridSpec& spec() const { return spec_; }
  const ResolventOptions& options() const { return options_; }

 private:
  GridSpec spec_;
  ResolventOptions options_;
  mutable std::mutex mutex_;
  std::map<std::uint64_t, std::shared_ptr<const ResolventPlan>> plans_;
};

}  // namespace fixangle
