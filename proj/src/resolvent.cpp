#include "fixangle/resolvent.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fixangle/error.hpp"
#include "fixangle/parallel.hpp"
#include "fixangle/spectral.hpp"
#include "fixangle/special.hpp"

namespace fixangle {

using std::numbers::pi;

cplx resolvent_kernel(int d, double k, double r) {
  if (d == 2) return -cplx(0.0, 0.25) * hankel1_0(k * r);
  return -std::polar(1.0, k * r) / (4.0 * pi * r);
}

cplx resolvent_kernel_ball_average(int d, double k, double radius) {
  using boost::math::quadrature::gauss_kronrod;
  // Radial integrand of the kernel times the surface measure; for d = 2 the
  // r log r behaviour at the origin is handled by adaptive bisection.
  auto shell = [d, k](double r) -> cplx {
    if (r == 0.0) return 0.0;
    const double area = d == 2 ? 2.0 * pi * r : 4.0 * pi * r * r;
    return area * resolvent_kernel(d, k, r);
  };
  const double re = gauss_kronrod<double, 31>::integrate(
      [&](double r) { return shell(r).real(); }, 0.0, radius, 15, 1e-13);
  const double im = gauss_kronrod<double, 31>::integrate(
      [&](double r) { return shell(r).imag(); }, 0.0, radius, 15, 1e-13);
  const double volume = d == 2 ? pi * radius * radius : 4.0 / 3.0 * pi * std::pow(radius, 3);
  return cplx(re, im) / volume;
}

ResolventPlan::ResolventPlan(const GridSpec& spec, double k, ResolventOptions options)
    : spec_(spec), k_(k), options_(options) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    std::ostringstream msg;
    msg << "resolvent: wavenumber must be positive, got " << k;
    fail(ErrorCode::InvalidWavenumber, msg.str());
  }
  const std::size_t total = spec.size();
  if (options.method == ResolventMethod::EpsMultiplier) {
    if (options.eps < 0.0) fail(ErrorCode::Config, "resolvent: eps must be >= 0");
    symbol_.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
      const Vec xi = spec.frequency(i);
      const double gap = k * k - dot(xi, xi, spec.d);
      if (options.eps == 0.0 && std::abs(gap) <= 1e-12 * k * k) {
        std::ostringstream msg;
        msg << "resolvent: lattice frequency with |xi| = k = " << k << " and eps = 0";
        fail(ErrorCode::ResonantLattice, msg.str());
      }
      symbol_[i] = 1.0 / cplx(gap, options.eps);
    }
    return;
  }

  ComplexField kernel(spec);
  const double T = truncation_radius();
  for (std::size_t i = 0; i < total; ++i) {
    const double r = norm(spec.node(i), spec.d);
    if (r == 0.0) {
      kernel.values[i] = resolvent_kernel_ball_average(spec.d, k, 0.5 * spec.h());
    } else if (r <= T) {
      kernel.values[i] = resolvent_kernel(spec.d, k, r);
    }
  }
  symbol_ = forward_transform(kernel).values;
}

ComplexField ResolventPlan::apply(const ComplexField& f) const {
  if (!(f.spec == spec_)) fail(ErrorCode::GridMismatch, "resolvent: field grid differs from plan grid");
  Spectrum s = forward_transform(f);
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] *= symbol_[i];
  return inverse_transform(s);
}

ResolventPlan build_plan(const GridSpec& spec, double k, ResolventOptions options) {
  return ResolventPlan(spec, k, options);
}

ComplexField apply_resolvent(const ResolventPlan& plan, const ComplexField& f) { return plan.apply(f); }

std::shared_ptr<const ResolventPlan> PlanCache::get(double k) {
  const auto key = std::bit_cast<std::uint64_t>(k);
  {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
  }
  auto plan = std::make_shared<const ResolventPlan>(spec_, k, options_);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = plans_.emplace(key, std::move(plan));
  return it->second;
}

void PlanCache::prepare(const std::vector<double>& ks) {
  std::vector<double> missing;
  {
    std::lock_guard lock(mutex_);
    for (double k : ks)
      if (!plans_.contains(std::bit_cast<std::uint64_t>(k))) missing.push_back(k);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  std::vector<std::shared_ptr<const ResolventPlan>> built(missing.size());
  parallel_for(missing.size(), [&](std::size_t i) {
    built[i] = std::make_shared<const ResolventPlan>(spec_, missing[i], options_);
  });
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < missing.size(); ++i)
    plans_.emplace(std::bit_cast<std::uint64_t>(missing[i]), built[i]);
}

std::size_t PlanCache::size() const {
  std::lock_guard lock(mutex_);
  return plans_.size();
}

}  // namespace fixangle
