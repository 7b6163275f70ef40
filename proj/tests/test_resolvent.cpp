#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <numbers>

#include "fixangle/error.hpp"
#include "fixangle/experiments.hpp"
#include "fixangle/spectral.hpp"
#include "support.hpp"

using namespace fixangle;
using namespace fixangle::testing;
using boost::math::quadrature::gauss_kronrod;
using std::numbers::pi;

namespace {

ErrorCode code_of(auto&& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

// int_0^rho r e^{ibr} dr
cplx radial_moment(double b, double rho) {
  const cplx i(0.0, 1.0);
  if (std::abs(b * rho) < 1e-3) {
    const cplx ibr = i * b * rho;
    return rho * rho * (0.5 + ibr / 3.0 + ibr * ibr / 8.0 + ibr * ibr * ibr / 30.0);
  }
  return (std::exp(i * b * rho) * (1.0 - i * b * rho) - 1.0) / (b * b);
}

// Continuous transform of the 3D kernel restricted to the cube [-L, L]^3,
// integrated radially in closed form and over directions face by face.
cplx cube_symbol(double k, double L, const Vec& xi) {
  cplx total{};
  for (int axis = 0; axis < 3; ++axis) {
    for (double side : {-1.0, 1.0}) {
      auto at = [&](double y, double z) {
        Vec p{};
        p[axis] = side * L;
        p[(axis + 1) % 3] = y;
        p[(axis + 2) % 3] = z;
        const double rho = norm(p, 3);
        const double a = dot(xi, p, 3) / rho;
        const double solid_angle = L / (rho * rho * rho);
        return -radial_moment(k - a, rho) / (4.0 * pi) * solid_angle;
      };
      for (int part = 0; part < 2; ++part) {
        auto inner = [&](double y) {
          return gauss_kronrod<double, 31>::integrate(
              [&](double z) { return part == 0 ? at(y, z).real() : at(y, z).imag(); }, -L, L, 8, 1e-12);
        };
        const double v = gauss_kronrod<double, 31>::integrate(inner, -L, L, 8, 1e-12);
        total += part == 0 ? cplx(v, 0.0) : cplx(0.0, v);
      }
    }
  }
  return total;
}

// (R_k g)(0) for the Gaussian g of the given width, by radial quadrature.
cplx continuum_at_origin(double k, double width) {
  auto integrand = [&](double r, bool imag) {
    if (r == 0.0) return 0.0;
    const cplx v = 2.0 * pi * r * resolvent_kernel(2, k, r) * std::exp(-r * r / (2.0 * width * width));
    return imag ? v.imag() : v.real();
  };
  const double top = 12.0 * width;
  const double re = gauss_kronrod<double, 31>::integrate([&](double r) { return integrand(r, false); }, 0.0, top, 20, 1e-14);
  const double im = gauss_kronrod<double, 31>::integrate([&](double r) { return integrand(r, true); }, 0.0, top, 20, 1e-14);
  return {re, im};
}

std::size_t origin_index(const GridSpec& s) {
  std::size_t flat = 0;
  for (int a = 0; a < s.d; ++a) flat = flat * static_cast<std::size_t>(s.n) + static_cast<std::size_t>(s.n / 2);
  return flat;
}

}  // namespace

TEST_CASE("invalid wavenumbers and resonant lattices are rejected") {
  const GridSpec s{2, 16, 2.0, 0.5};
  CHECK(code_of([&] { ResolventPlan(s, 0.0, {}); }) == ErrorCode::InvalidWavenumber);
  CHECK(code_of([&] { ResolventPlan(s, -1.0, {}); }) == ErrorCode::InvalidWavenumber);
  CHECK(code_of([&] { ResolventPlan(s, std::nan(""), {}); }) == ErrorCode::InvalidWavenumber);
  const ResolventOptions exact{ResolventMethod::EpsMultiplier, 0.0};
  CHECK(code_of([&] { ResolventPlan(s, pi / s.L, exact); }) == ErrorCode::ResonantLattice);
  CHECK(code_of([&] { ResolventPlan(s, pi / s.L, {ResolventMethod::EpsMultiplier, 0.1}); }) == ErrorCode{});
  CHECK(code_of([&] { ResolventPlan(s, 1.0, {ResolventMethod::EpsMultiplier, -0.1}); }) == ErrorCode::Config);

  const ResolventPlan plan(s, 1.0, {});
  CHECK(code_of([&] { plan.apply(ComplexField(GridSpec{2, 32, 2.0, 0.5})); }) == ErrorCode::GridMismatch);
}

TEST_CASE("exact multiplier at zero frequency is 1/k^2") {
  const GridSpec s{2, 16, 2.0, 0.5};
  const ResolventPlan plan(s, 1.7, {ResolventMethod::EpsMultiplier, 0.0});
  CHECK(plan.symbol()[0] == cplx(1.0 / (1.7 * 1.7), 0.0));
}

TEST_CASE("zero input and linearity") {
  for (int d : {2, 3}) {
    const GridSpec s{d, d == 2 ? 32 : 16, 2.0, 0.5};
    for (auto opts : {ResolventOptions{}, ResolventOptions{ResolventMethod::EpsMultiplier, 0.3}}) {
      const ResolventPlan plan(s, 2.0, opts);
      for (const auto& v : plan.apply(ComplexField(s)).values) CHECK(v == cplx{});
      const ComplexField f = random_complex(s, 1), g = random_complex(s, 2);
      const cplx a(0.3, -1.2), b(-2.0, 0.5);
      ComplexField combo(s), expect(s);
      const ComplexField Rf = plan.apply(f), Rg = plan.apply(g);
      for (std::size_t i = 0; i < s.size(); ++i) {
        combo.values[i] = a * f.values[i] + b * g.values[i];
        expect.values[i] = a * Rf.values[i] + b * Rg.values[i];
      }
      CHECK(rel_l2(plan.apply(combo), expect) <= 1e-12);
    }
  }
}

TEST_CASE("plane waves are eigenfunctions of the exact multiplier") {
  const GridSpec s{2, 32, 2.0, 0.5};
  const double k = 2.3;
  const ResolventPlan plan(s, k, {ResolventMethod::EpsMultiplier, 0.0});
  for (std::size_t target : {std::size_t{0}, std::size_t{5}, std::size_t{3 * 32 + 29}, std::size_t{16 * 32 + 1}}) {
    const Vec xi = s.frequency(target);
    ComplexField wave(s), expect(s);
    const double lambda = 1.0 / (k * k - dot(xi, xi, 2));
    for (std::size_t i = 0; i < s.size(); ++i) {
      wave.values[i] = std::polar(1.0, dot(xi, s.node(i), 2));
      expect.values[i] = lambda * wave.values[i];
    }
    CHECK(rel_l2(plan.apply(wave), expect) <= 1e-12);
  }
}

TEST_CASE("truncated kernel equals the direct sum where no wrap-around occurs") {
  const GridSpec s{2, 16, 2.0, 0.5};
  const double k = 1.5;
  const ComplexField f(random_supported(s, s.R, 9));
  const ComplexField fast = ResolventPlan(s, k, {}).apply(f);
  const ComplexField direct = direct_resolvent(f, k);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec x = s.node(i);
    if (std::max(std::abs(x[0]), std::abs(x[1])) > s.L - 2.0 * s.R) continue;
    worst = std::max(worst, std::abs(fast.values[i] - direct.values[i]));
    scale = std::max(scale, std::abs(direct.values[i]));
  }
  CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("3D discrete symbol matches the cube-restricted continuous transform") {
  // The sampled kernel is a trapezoid rule for the transform over the cube;
  // its error is O(h^2 (1 + |xi|^2)), so low lattice frequencies are checked.
  const double k = 2.0;
  const GridSpec s{3, 128, 1.0, 0.25};
  const ResolventPlan plan(s, k, {});
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(-2, 2);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t flat = 0;
    for (int a = 0; a < 3; ++a) flat = flat * 128 + static_cast<std::size_t>((pick(rng) + 128) % 128);
    const cplx ref = cube_symbol(k, s.L, s.frequency(flat));
    worst = std::max(worst, std::abs(plan.symbol()[flat] - ref) / std::abs(ref));
  }
  MESSAGE("worst relative symbol gap " << worst);
  CHECK(worst <= 1e-3);

  const GridSpec coarse{3, 32, 1.0, 0.25}, fine{3, 64, 1.0, 0.25};
  const std::size_t coarse_flat = (2 * 32 + 1) * 32 + 31, fine_flat = (2 * 64 + 1) * 64 + 63;
  const cplx ref = cube_symbol(k, s.L, fine.frequency(fine_flat));
  const double e32 = std::abs(ResolventPlan(coarse, k, {}).symbol()[coarse_flat] - ref);
  const double e64 = std::abs(ResolventPlan(fine, k, {}).symbol()[fine_flat] - ref);
  CHECK(e32 / e64 >= 3.5);
  CHECK(e32 / e64 <= 4.6);
}

TEST_CASE("truncated kernel converges to the continuum at second order") {
  const double k = 1.0, width = 0.2;
  const cplx ref = continuum_at_origin(k, width);
  std::vector<double> errors;
  for (int n : {64, 128, 256}) {
    const GridSpec s{2, n, 2.0, 0.5};
    const ComplexField g(gaussian(s, width));
    const cplx got = ResolventPlan(s, k, {}).apply(g).values[origin_index(s)];
    errors.push_back(std::abs(got - ref) / std::abs(ref));
  }
  MESSAGE("errors " << errors[0] << " " << errors[1] << " " << errors[2]);
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio = errors[i - 1] / errors[i];
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.6);
  }
}

TEST_CASE("outgoing condition: Im <f, R_k f> <= 0") {
  const GridSpec s{3, 16, 2.0, 0.5};
  for (double k : {0.7, 2.0}) {
    const ResolventPlan plan(s, k, {});
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const ComplexField f(random_supported(s, s.R, seed));
      const ComplexField Rf = plan.apply(f);
      cplx inner{};
      for (std::size_t i = 0; i < s.size(); ++i) inner += std::conj(f.values[i]) * Rf.values[i];
      CHECK(inner.imag() <= 1e-12 * std::abs(inner));
    }
  }
}

TEST_CASE("damped multiplier approaches the truncated kernel as eps shrinks and the box grows") {
  // On a fixed box the undamped periodic images keep the two apart; the gap
  // closes only when eps -> 0 with L -> infinity together.
  const double k = 3.0, h = 0.25;
  std::vector<double> gaps;
  for (int j = 0; j < 3; ++j) {
    const double eps = 1.8 / (1 << j), L = 8.0 * (1 << j);
    const GridSpec s{2, static_cast<int>(std::lround(2.0 * L / h)), L, 0.5};
    PotentialRecipe recipe;
    recipe.beta = 0.0;
    recipe.value = 1.0;
    const ComplexField f(make_potential(recipe, s));
    const ComplexField a = ResolventPlan(s, k, {}).apply(f);
    const ComplexField b = ResolventPlan(s, k, {ResolventMethod::EpsMultiplier, eps}).apply(f);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (norm(s.node(i), 2) > s.R) continue;
      num += std::norm(a.values[i] - b.values[i]);
      den += std::norm(a.values[i]);
    }
    gaps.push_back(std::sqrt(num / den));
  }
  MESSAGE("gaps " << gaps[0] << " " << gaps[1] << " " << gaps[2]);
  CHECK(gaps[0] < 0.2);
  CHECK(gaps[1] < 0.6 * gaps[0]);
  CHECK(gaps[2] < 0.6 * gaps[1]);
}

TEST_CASE("plan cache") {
  const GridSpec s{2, 16, 2.0, 0.5};
  PlanCache cache(s, {});
  const auto a = cache.get(1.5);
  CHECK(cache.get(1.5) == a);
  CHECK(cache.size() == 1);
  cache.prepare({1.5, 2.5, 2.5, 3.5});
  CHECK(cache.size() == 3);
  CHECK(cache.get(2.5)->k() == 2.5);
  CHECK(cache.get(2.5)->symbol() == ResolventPlan(s, 2.5, {}).symbol());
}
