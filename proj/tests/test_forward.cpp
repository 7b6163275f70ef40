#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "fixangle/error.hpp"
#include "fixangle/experiments.hpp"
#include "fixangle/forward.hpp"
#include "fixangle/parallel.hpp"
#include "fixangle/spectral.hpp"
#include "support.hpp"

using namespace fixangle;
using namespace fixangle::testing;

namespace {

RealField weak_potential(const GridSpec& s, double value = 0.05) {
  PotentialRecipe r;
  r.beta = 0.0;
  r.value = value;
  r.R = s.R;
  return make_potential(r, s);
}

RealField scaled(RealField q, double factor) {
  for (double& v : q.values) v *= factor;
  return q;
}

template <class Body>
std::pair<ErrorCode, std::string> error_of(Body&& body) {
  try {
    body();
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  return {ErrorCode{}, ""};
}

}  // namespace

TEST_CASE("zero potential scatters nothing") {
  const GridSpec s{2, 16, 2.0, 0.5};
  const RealField q(s);
  const ScatterSolution sol = solve_scattered(q, unit2(0.3), 2.0, {});
  CHECK(sol.iterations == 1);
  CHECK(sol.residual == 0.0);
  for (const auto& v : sol.u_s.values) CHECK(v == cplx{});
  CHECK(far_field(q, sol, unit2(1.0)) == cplx{});
}

TEST_CASE("Neumann and dense solvers agree") {
  for (int d : {2, 3}) {
    const GridSpec s{d, 16, 2.0, 0.5};
    if (s.size() > kDenseSizeCap) continue;
    const RealField q = weak_potential(s, 0.3);
    for (double k : {1.0, 3.0}) {
      SolverOptions neumann;
      neumann.tol = 1e-13;
      SolverOptions dense;
      dense.method = SolverMethod::Dense;
      const Vec theta = unit2(0.4);
      const auto a = solve_scattered(q, theta, k, neumann);
      const auto b = solve_scattered(q, theta, k, dense);
      CHECK(rel_l2(a.u_s, b.u_s) <= 1e-11);
      CHECK(b.residual <= 1e-12);
      CHECK(b.iterations == 1);
    }
  }
}

TEST_CASE("Neumann residuals decrease strictly to tolerance") {
  const GridSpec s{2, 32, 2.0, 0.5};
  const RealField q = weak_potential(s, 0.5);
  SolverOptions opts;
  opts.tol = 1e-12;
  const auto sol = solve_scattered(q, unit2(0.2), 2.5, opts);
  REQUIRE(sol.residual_history.size() >= 3);
  CHECK(static_cast<int>(sol.residual_history.size()) == sol.iterations);
  for (std::size_t i = 1; i < sol.residual_history.size(); ++i)
    CHECK(sol.residual_history[i] < sol.residual_history[i - 1]);
  CHECK(sol.residual <= 1e-12);
}

TEST_CASE("strong potentials are reported as non-contracting") {
  const GridSpec s{2, 32, 2.0, 0.5};
  const RealField q = scaled(weak_potential(s), 1e3);
  const auto [code, what] = error_of([&] { solve_scattered(q, unit2(0.0), 2.0, {}); });
  CHECK(code == ErrorCode::NoContraction);
  CHECK(what.find("k = 2") != std::string::npos);
}

TEST_CASE("dense solve refuses large grids") {
  const GridSpec s{2, 128, 2.0, 0.5};
  SolverOptions dense;
  dense.method = SolverMethod::Dense;
  CHECK(error_of([&] { solve_scattered(weak_potential(s), unit2(0.0), 1.0, dense); }).first ==
        ErrorCode::DenseTooLarge);
}

TEST_CASE("argument checks") {
  const GridSpec s{2, 16, 2.0, 0.5};
  const RealField q = weak_potential(s);
  CHECK(error_of([&] { solve_scattered(q, Vec{1.0, 1.0, 0.0}, 1.0, {}); }).first == ErrorCode::Config);
  CHECK(error_of([&] { solve_scattered(q, unit2(0.0), -1.0, {}); }).first == ErrorCode::InvalidWavenumber);
  SolverOptions bad;
  bad.tol = 0.0;
  CHECK(error_of([&] { solve_scattered(q, unit2(0.0), 1.0, bad); }).first == ErrorCode::Config);
  const ResolventPlan other(GridSpec{2, 32, 2.0, 0.5}, 1.0, {});
  CHECK(error_of([&] { solve_scattered(q, unit2(0.0), other, {}); }).first == ErrorCode::GridMismatch);
  const auto sol = solve_scattered(q, unit2(0.0), 1.0, {});
  CHECK(error_of([&] { far_field(q, sol, Vec{0.5, 0.0, 0.0}); }).first == ErrorCode::Config);
}

TEST_CASE("Born far field is the lattice Fourier transform of q") {
  // u_inf(-theta, theta, k) = q^(-2k theta); with theta on an axis and
  // 2k a multiple of pi/L this is an entry of forward_transform(q).
  const GridSpec s{2, 32, 2.0, 0.5};
  const RealField q = weak_potential(s);
  const Spectrum Q = forward_transform(ComplexField(q));
  SolverOptions born;
  born.born_only = true;
  for (int m : {1, 3, 6}) {
    const double k = m * std::numbers::pi / (2.0 * s.L);
    const Vec theta{0.0, 1.0, 0.0};
    const auto sol = solve_scattered(q, theta, k, born);
    const cplx got = far_field(q, sol, Vec{0.0, -1.0, 0.0});
    const std::size_t flat = static_cast<std::size_t>(s.n - m);  // index (0, -m)
    CHECK(std::abs(got - Q.values[flat]) <= 1e-13 * std::abs(Q.values[0]));
    CHECK(std::abs(got - fourier_sample(q, Vec{0.0, -2.0 * k, 0.0})) <= 1e-13 * std::abs(Q.values[0]));
  }
}

TEST_CASE("far field obeys reciprocity u(omega, theta) = u(-theta, -omega)") {
  for (int d : {2, 3}) {
    const GridSpec s{d, d == 2 ? 32 : 16, 2.0, 0.5};
    const RealField q = weak_potential(s, 0.5);
    SolverOptions opts;
    opts.tol = 1e-14;
    const Vec theta = d == 2 ? unit2(0.3) : unit3(0.4, 0.3);
    const Vec omega = d == 2 ? unit2(2.1) : unit3(1.9, -0.8);
    const Vec minus_theta{-theta[0], -theta[1], -theta[2]};
    const Vec minus_omega{-omega[0], -omega[1], -omega[2]};
    for (double k : {1.0, 2.5}) {
      const cplx forward = far_field(q, solve_scattered(q, theta, k, opts), omega);
      const cplx backward = far_field(q, solve_scattered(q, minus_omega, k, opts), minus_theta);
      CHECK(std::abs(forward - backward) <= 1e-12 * std::abs(forward));
    }
  }
}

TEST_CASE("far field is linear in q for a fixed total field") {
  const GridSpec s{2, 32, 2.0, 0.5};
  const RealField q1 = weak_potential(s), q2 = random_supported(s, s.R, 4);
  const auto sol = solve_scattered(q1, unit2(0.1), 2.0, {});
  RealField combo(s);
  for (std::size_t i = 0; i < s.size(); ++i) combo.values[i] = 2.0 * q1.values[i] - 0.5 * q2.values[i];
  const Vec omega = unit2(1.3);
  const cplx expect = 2.0 * far_field(q1, sol, omega) - 0.5 * far_field(q2, sol, omega);
  CHECK(std::abs(far_field(combo, sol, omega) - expect) <= 1e-13 * std::abs(expect));
}

TEST_CASE("dataset generation") {
  const GridSpec s{2, 32, 2.0, 0.5};
  const Vec theta0 = unit2(0.3);
  const std::vector<double> ks{1.0, 2.0};
  const std::vector<Vec> omegas = sphere_directions(2, 5);

  SUBCASE("zero potential gives zero data") {
    const auto ds = generate_dataset(RealField(s), theta0, ks, omegas, {});
    CHECK(ds.samples.size() == 20);
    for (const auto& smp : ds.samples) CHECK(smp.value == cplx{});
  }

  SUBCASE("layout, ordering and single entries") {
    const RealField q = weak_potential(s);
    const auto ds = generate_dataset(q, theta0, ks, omegas, {});
    CHECK(ds.d == 2);
    CHECK(ds.R == s.R);
    CHECK(ds.k_count() == 2);
    CHECK(ds.omega_count() == 5);
    CHECK(std::is_sorted(ds.samples.begin(), ds.samples.end(), sample_order));
    CHECK(ds.samples.front().sign == 1);
    CHECK(ds.samples.back().sign == -1);
    const auto& pick = ds.samples[13];
    const Vec theta{pick.sign * theta0[0], pick.sign * theta0[1], 0.0};
    const cplx direct = far_field(q, solve_scattered(q, theta, pick.k, {}), pick.omega);
    CHECK(pick.value == direct);

    const auto one = generate_dataset(q, theta0, {SampleRequest{pick.sign, pick.k, pick.omega}}, {});
    REQUIRE(one.samples.size() == 1);
    CHECK(one.samples[0].value == direct);
  }

  SUBCASE("request order and thread count do not change a single bit") {
    const RealField q = weak_potential(s);
    std::vector<SampleRequest> requests;
    for (int sign : {1, -1})
      for (double k : ks)
        for (const Vec& w : omegas) requests.push_back({sign, k, w});
    std::vector<SampleRequest> shuffled = requests;
    std::mt19937_64 rng(8);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    shuffled.push_back(shuffled.front());

    set_thread_count(1);
    const auto a = generate_dataset(q, theta0, requests, {});
    set_thread_count(4);
    const auto b = generate_dataset(q, theta0, shuffled, {});
    set_thread_count(1);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].sign == b.samples[i].sign);
      CHECK(a.samples[i].k == b.samples[i].k);
      CHECK(a.samples[i].omega == b.samples[i].omega);
      CHECK(a.samples[i].value == b.samples[i].value);
    }
  }

  SUBCASE("failures name the offending sample") {
    const RealField strong = scaled(weak_potential(s), 1e3);
    const auto [code, what] = error_of([&] { generate_dataset(strong, theta0, {2.0}, omegas, {}); });
    CHECK(code == ErrorCode::NoContraction);
    CHECK(what.find("[sign +, k = 2]") != std::string::npos);
    CHECK(error_of([&] { generate_dataset(weak_potential(s), theta0, {-1.0}, omegas, {}); }).first ==
          ErrorCode::InvalidWavenumber);
    CHECK(error_of([&] { generate_dataset(weak_potential(s), Vec{2.0, 0.0, 0.0}, ks, omegas, {}); }).first ==
          ErrorCode::Config);
  }
}
