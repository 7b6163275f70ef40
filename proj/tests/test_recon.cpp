#include <doctest.h>

#include "fixangle/error.hpp"
#include "fixangle/experiments.hpp"
#include "fixangle/parallel.hpp"
#include "fixangle/recon.hpp"
#include "fixangle/spectral.hpp"
#include "support.hpp"

using namespace fixangle;
using namespace fixangle::testing;

namespace {

ErrorCode code_of(auto&& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

RealField bump(const GridSpec& s, double value) {
  PotentialRecipe r;
  r.beta = 0.0;
  r.value = value;
  r.R = s.R;
  return make_potential(r, s);
}

// An iterate-like field: phi times random values.
ComplexField iterate_like(const GridSpec& s, std::uint64_t seed, double scale) {
  const RealField phi = bump_cutoff(s);
  RealField f = random_supported(s, 2.0 * s.R, seed);
  for (std::size_t i = 0; i < s.size(); ++i) f.values[i] *= scale * phi.values[i];
  return ComplexField(f);
}

// Q_j(f)(xi) by explicit lattice sums h^d sum_z G(y - z) (...)(z), no FFT.
std::vector<cplx> nested_terms(const ComplexField& f, const EwaldPoint& p, int m) {
  const GridSpec& s = f.spec;
  ComplexField v(s);
  for (std::size_t i = 0; i < s.size(); ++i)
    v.values[i] = f.values[i] * std::polar(1.0, p.k * dot(p.theta_eff, s.node(i), s.d));
  std::vector<cplx> out;
  for (int j = 0; j < m; ++j) {
    const ComplexField rv = direct_resolvent(v, p.k);
    cplx acc{};
    for (std::size_t i = 0; i < s.size(); ++i) {
      v.values[i] = f.values[i] * rv.values[i];
      acc += std::polar(1.0, -p.k * dot(p.omega, s.node(i), s.d)) * v.values[i];
    }
    out.push_back(acc * s.cell_volume());
  }
  return out;
}

struct Fixture {
  GridSpec spec{2, 32, 2.0, 0.5};
  Vec theta0 = unit2(0.3);
  RealField q;
  FarFieldDataset data;

  explicit Fixture(double value) : q(bump(spec, value)) {
    data = generate_dataset(q, theta0, ewald_requests(spec, theta0, {}, OracleMode::TwoDirections), {});
  }
  DatasetOracle oracle() const { return DatasetOracle(data, {}); }
};

ReconConfig base_config() {
  ReconConfig cfg;
  cfg.m = 2;
  cfg.fp_tol = 1e-10;
  return cfg;
}

// Shared by every subcase; doctest re-enters the test case once per subcase.
const Fixture& fixture() {
  static const Fixture fx(1.0);
  return fx;
}

const ReconResult& base_run() {
  static const ReconResult r = [] {
    const Fixture& fx = fixture();
    return reconstruct(fx.oracle(), fx.spec, base_config(), &fx.q);
  }();
  return r;
}

}  // namespace

TEST_CASE("Born-series terms") {
  const GridSpec s{2, 16, 2.0, 0.5};
  const Vec theta0 = unit2(0.3);
  const auto p = ewald_decompose(s.frequency(3 * 16 + 2), theta0, 2);
  const ResolventPlan plan(s, p.k, {});

  SUBCASE("zero field") {
    for (const cplx& t : born_series_terms(ComplexField(s), p, 4, plan)) CHECK(t == cplx{});
  }
  SUBCASE("homogeneity of degree j + 1") {
    const ComplexField f = iterate_like(s, 1, 0.3);
    const auto base = born_series_terms(f, p, 4, plan);
    for (double eps : {0.5, 1e-3}) {
      ComplexField g = f;
      for (auto& v : g.values) v *= eps;
      const auto scaled = born_series_terms(g, p, 4, plan);
      for (int j = 1; j <= 4; ++j) {
        const cplx expect = std::pow(eps, j + 1) * base[static_cast<std::size_t>(j - 1)];
        CHECK(std::abs(scaled[static_cast<std::size_t>(j - 1)] - expect) <= 1e-10 * std::abs(expect));
      }
    }
  }
  SUBCASE("nested lattice-sum oracle") {
    const ComplexField f = iterate_like(s, 2, 1.0);
    const auto fast = born_series_terms(f, p, 2, plan);
    const auto slow = nested_terms(f, p, 2);
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(fast[j] - slow[j]) <= 1e-11 * std::abs(slow[j]));
  }
  SUBCASE("single-term entry point") {
    const ComplexField f = iterate_like(s, 3, 1.0);
    PlanCache cache(s, {});
    CHECK(born_series_term(f, p, 3, cache) == born_series_terms(f, p, 3, plan)[2]);
    CHECK(code_of([&] { born_series_term(f, p, 0, cache); }) == ErrorCode::Config);
  }
}

TEST_CASE("T_m") {
  const GridSpec s{2, 16, 2.0, 0.5};
  const Vec theta0 = unit2(0.3);
  const RealField phi = bump_cutoff(s);
  ReconConfig cfg;
  cfg.m = 1;
  PlanCache plans(s, {});
  const ComplexField born = iterate_like(s, 10, 1.0);

  SUBCASE("zero input returns the Born field") {
    const TStep step = apply_T_m(ComplexField(s), born, cfg, theta0, phi, plans);
    CHECK(step.next.values == born.values);
    const TStep zero = apply_T_m(ComplexField(s), ComplexField(s), cfg, theta0, phi, plans);
    for (const auto& v : zero.next.values) CHECK(v == cplx{});
  }

  SUBCASE("m = 1 sweep matches the lattice-sum reference") {
    const ComplexField f = iterate_like(s, 11, 2.0);
    Spectrum corr(s);
    for (const auto& rp : retained_points(s, theta0, cfg.cut)) corr.values[rp.flat] = nested_terms(f, rp.point, 1)[0];
    const ComplexField c = inverse_transform(corr);
    ComplexField expect(s);
    for (std::size_t i = 0; i < s.size(); ++i) expect.values[i] = (born.values[i] - phi.values[i] * c.values[i]).real();
    const TStep step = apply_T_m(f, born, cfg, theta0, phi, plans);
    CHECK(rel_l2(step.next, expect) <= 1e-10);
    for (const auto& v : step.next.values) CHECK(v.imag() == 0.0);
    CHECK(step.imag_discarded > 0.0);
  }

  SUBCASE("work order and thread count leave the result bit-identical") {
    const ComplexField f = iterate_like(s, 12, 2.0);
    cfg.m = 2;
    set_thread_count(1);
    const TStep a = apply_T_m(f, born, cfg, theta0, phi, plans);
    cfg.work_order_seed = 99;
    set_thread_count(3);
    const TStep b = apply_T_m(f, born, cfg, theta0, phi, plans);
    set_thread_count(1);
    CHECK(a.next.values == b.next.values);
  }

  SUBCASE("grid mismatch") {
    const GridSpec other{2, 32, 2.0, 0.5};
    CHECK(code_of([&] { apply_T_m(ComplexField(s), ComplexField(other), cfg, theta0, phi, plans); }) ==
          ErrorCode::GridMismatch);
  }

  SUBCASE("wavenumber quantization is opt-in and reuses plans") {
    const ComplexField f = iterate_like(s, 13, 1.0);
    PlanCache exact(s, {}), coarse(s, {});
    const TStep a = apply_T_m(f, born, cfg, theta0, phi, exact);
    cfg.k_quantum = 0.25;
    const TStep b = apply_T_m(f, born, cfg, theta0, phi, coarse);
    CHECK(coarse.size() < exact.size());
    CHECK(exact.size() > 1);
    CHECK(a.next.values != b.next.values);
    CHECK(rel_l2(b.next, a.next) <= 0.05);
  }
}

TEST_CASE("recon config validation and the alpha window") {
  ReconConfig cfg;
  CHECK(cfg.validate(2).empty());
  CHECK(cfg.validate(3).empty());
  cfg.alpha = 1.5;
  CHECK(cfg.validate(2).size() == 1);
  cfg.alpha = -0.5;
  CHECK(cfg.validate(3).size() == 1);
  cfg.alpha = 0.5;
  cfg.m = 0;
  CHECK(code_of([&] { cfg.validate(2); }) == ErrorCode::Config);
  cfg.m = 1;
  cfg.fp_tol = 0.0;
  CHECK(code_of([&] { cfg.validate(2); }) == ErrorCode::Config);
  cfg.fp_tol = 1e-10;
  cfg.k_quantum = -1.0;
  CHECK(code_of([&] { cfg.validate(2); }) == ErrorCode::Config);
}

TEST_CASE("zero data give a zero fixed point") {
  // One application of T_m from q_{m,1} = 0 yields q_{m,2} = phi * 0 = 0.
  const GridSpec s{2, 32, 2.0, 0.5};
  const SyntheticOracle oracle(RealField(s), unit2(0.3), {});
  const ReconResult r = reconstruct(oracle, s, {});
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  for (double v : r.q.values) CHECK(v == 0.0);
  for (const auto& rec : r.trace.records) CHECK(rec.step_norm == 0.0);
}

TEST_CASE("fixed-point iteration") {
  const Fixture& fx = fixture();
  const DatasetOracle oracle = fx.oracle();
  ReconConfig cfg = base_config();
  const ReconResult& r = base_run();
  REQUIRE(r.converged);
  CHECK(r.trace.failures.empty());
  CHECK(r.trace.records.size() == static_cast<std::size_t>(r.iterations));

  SUBCASE("first iterate is phi times the Born field") {
    const ComplexField expect = bump_cutoff(fx.spec) * r.born.field;
    for (std::size_t i = 0; i < fx.spec.size(); ++i) CHECK(r.born_iterate.values[i] == expect.values[i].real());
    cfg.m = 4;
    cfg.ell_max = 1;
    const ReconResult deeper = reconstruct(oracle, fx.spec, cfg);
    CHECK(deeper.born_iterate.values == r.born_iterate.values);
  }

  SUBCASE("step norms decrease and records are complete") {
    for (std::size_t i = 0; i < r.trace.records.size(); ++i) {
      const auto& rec = r.trace.records[i];
      CHECK(rec.m == 2);
      CHECK(rec.ell == static_cast<int>(i) + 1);
      CHECK(rec.err_alpha.has_value());
      CHECK(rec.err_l2.has_value());
      if (i >= 2) CHECK(rec.step_norm < r.trace.records[i - 1].step_norm);
    }
    const std::string jsonl = r.trace.to_jsonl();
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == static_cast<long>(r.trace.records.size()));
    CHECK(jsonl.find("\"step_norm\"") != std::string::npos);
  }

  SUBCASE("converged iterate is a fixed point of T_m") {
    PlanCache plans(fx.spec, {});
    const RealField phi = bump_cutoff(fx.spec);
    const ComplexField born_field = phi * r.born.field;
    const TStep again = apply_T_m(ComplexField(r.q), born_field, cfg, fx.theta0, phi, plans);
    const double reference = sobolev_norm(r.born_iterate, cfg.alpha);
    CHECK(sobolev_norm(again.next - ComplexField(r.q), cfg.alpha) <= cfg.fp_tol * reference);
  }

  SUBCASE("iterates vanish outside |x| < 2R") {
    for (std::size_t i = 0; i < fx.spec.size(); ++i)
      if (norm(fx.spec.node(i), 2) >= 2.0 * fx.spec.R) CHECK(r.q.values[i] == 0.0);
  }

  SUBCASE("bit-identical across threads and work orders") {
    set_thread_count(4);
    cfg.work_order_seed = 12345;
    const ReconResult again = reconstruct(oracle, fx.spec, cfg, &fx.q);
    set_thread_count(1);
    CHECK(again.q.values == r.q.values);
    CHECK(again.iterations == r.iterations);
  }

  SUBCASE("hitting ell_max is reported, with the trace kept") {
    cfg.ell_max = 2;
    const ReconResult cut_short = reconstruct(oracle, fx.spec, cfg);
    CHECK_FALSE(cut_short.converged);
    CHECK(cut_short.trace.records.size() == 2);
    REQUIRE(cut_short.trace.failures.size() == 1);
    CHECK(cut_short.trace.failures[0].find("not converged") != std::string::npos);
  }

  SUBCASE("warnings carry through") {
    cfg.alpha = 2.0;
    cfg.ell_max = 1;
    CHECK(reconstruct(oracle, fx.spec, cfg).trace.warnings.size() == 1);
  }

  SUBCASE("truth on another grid is rejected") {
    const RealField other(GridSpec{2, 16, 2.0, 0.5});
    CHECK(code_of([&] { reconstruct(oracle, fx.spec, cfg, &other); }) == ErrorCode::GridMismatch);
  }
}

TEST_CASE("band-limited error") {
  const GridSpec s{2, 32, 2.0, 0.5};
  const RealField q = bump(s, 1.0);
  const CutoffConfig cut;
  CHECK(band_limited_error(q, q, unit2(0.3), cut) == 0.0);
  RealField half = q;
  for (double& v : half.values) v *= 0.5;
  CHECK(band_limited_error(half, q, unit2(0.3), cut) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(band_limited_error(RealField(s), RealField(s), unit2(0.3), cut) == 0.0);
}

TEST_CASE("convergence report") {
  const GridSpec s{2, 32, 2.0, 0.5};
  const RealField zero(s);
  std::vector<ReconResult> runs(2);
  runs[0].q = zero;
  runs[1].q = zero;
  runs[0].converged = runs[1].converged = true;

  SUBCASE("zero truth and zero runs give zero errors") {
    const auto report = convergence_report(runs, {1, 2}, zero, 0.5, unit2(0.3), {});
    for (const auto& e : report.entries) {
      CHECK(e.err_alpha == 0.0);
      CHECK(e.err_l2 == 0.0);
      CHECK(e.err_band == 0.0);
    }
    CHECK(report.monotone);
  }

  SUBCASE("violations are flagged, not thrown") {
    const RealField q = bump(s, 1.0);
    runs[0].q = q;
    RealField off = q;
    for (double& v : off.values) v *= 0.9;
    runs[1].q = off;
    const auto report = convergence_report(runs, {1, 2}, q, 0.5, unit2(0.3), {});
    CHECK_FALSE(report.monotone);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0] == 1);
    CHECK(report.entries[1].err_l2 == doctest::Approx(0.1 * l2_norm(q)).epsilon(1e-12));

    const auto parsed = ConvergenceReport::from_json(report.to_json());
    CHECK(parsed == report);
  }

  SUBCASE("mismatched lengths") {
    CHECK(code_of([&] { convergence_report(runs, {1}, zero, 0.5, unit2(0.3), {}); }) == ErrorCode::Config);
  }
}
