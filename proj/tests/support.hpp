#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fixangle/grid.hpp"
#include "fixangle/resolvent.hpp"

namespace fixangle::testing {

inline Vec unit2(double angle) { return {std::cos(angle), std::sin(angle), 0.0}; }

inline Vec unit3(double polar, double azimuth) {
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

inline RealField gaussian(const GridSpec& spec, double width) {
  RealField f(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double r = norm(spec.node(i), spec.d);
    f.values[i] = std::exp(-r * r / (2.0 * width * width));
  }
  return f;
}

inline ComplexField random_complex(const GridSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexField f(spec);
  for (auto& v : f.values) v = {g(rng), g(rng)};
  return f;
}

// Random real field supported in |x| <= radius.
inline RealField random_supported(const GridSpec& spec, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RealField f(spec);
  for (std::size_t i = 0; i < spec.size(); ++i)
    f.values[i] = norm(spec.node(i), spec.d) <= radius ? g(rng) : 0.0;
  return f;
}

inline double rel_l2(const ComplexField& a, const ComplexField& b) { return l2_norm(a - b) / l2_norm(b); }

// Kernel averaged over the disc / ball of radius a, in closed form.
inline cplx kernel_cell_average(int d, double k, double a) {
  const cplx i(0.0, 1.0);
  if (d == 2) {
    const cplx h1(std::cyl_bessel_j(1.0, k * a), std::cyl_neumann(1.0, k * a));
    return -(i / (2.0 * a * a)) * (a * h1 / k + 2.0 * i / (std::numbers::pi * k * k));
  }
  const cplx integral = ((1.0 - i * k * a) * std::exp(i * k * a) - 1.0) / (k * k);
  return -integral / (4.0 / 3.0 * std::numbers::pi * a * a * a);
}

// Kernel value between two nodes, with the cell average on the diagonal.
inline cplx kernel_between(const GridSpec& spec, double k, const Vec& x, const Vec& y) {
  Vec diff{};
  for (int a = 0; a < spec.d; ++a) diff[a] = x[a] - y[a];
  const double r = norm(diff, spec.d);
  return r < 1e-12 ? kernel_cell_average(spec.d, k, 0.5 * spec.h()) : resolvent_kernel(spec.d, k, r);
}

// O(N^{2d}) convolution h^d sum_j G(x - x_j) f(x_j).
inline ComplexField direct_resolvent(const ComplexField& f, double k) {
  const GridSpec& spec = f.spec;
  ComplexField out(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    cplx acc{};
    const Vec x = spec.node(i);
    for (std::size_t j = 0; j < spec.size(); ++j)
      if (f.values[j] != cplx{}) acc += kernel_between(spec, k, x, spec.node(j)) * f.values[j];
    out.values[i] = acc * spec.cell_volume();
  }
  return out;
}

}  // namespace fixangle::testing
