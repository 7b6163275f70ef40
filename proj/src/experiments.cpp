#include "fixangle/experiments.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "fixangle/error.hpp"
#include "fixangle/parallel.hpp"
#include "fixangle/spectral.hpp"

namespace fixangle {

using nlohmann::json;

double smooth_bump_profile(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

namespace {

// Uniform double in [0, 1) from the raw engine output; the standard
// distributions are implementation-defined and would break seed determinism
// across standard libraries.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

RealField random_trig_poly(const PotentialRecipe& recipe, const GridSpec& spec) {
  std::mt19937_64 rng(recipe.seed);
  const double decay = recipe.decay.value_or(recipe.beta);
  const double exponent = -decay - spec.d / 2.0 - 0.05;
  const int M = recipe.max_mode;
  if (M < 0 || M >= spec.n / 2) fail(ErrorCode::Config, "potential.max_mode must lie in [0, N/2)");
  RealField out(spec);
  const int span = 2 * M + 1;
  const int total = spec.d == 2 ? span * span : span * span * span;
  for (int c = 0; c < total; ++c) {
    int rem = c;
    Vec xi{};
    for (int a = spec.d - 1; a >= 0; --a) {
      xi[a] = std::numbers::pi / spec.L * (rem % span - M);
      rem /= span;
    }
    const double amplitude = std::pow(japanese_bracket(xi, spec.d), exponent);
    const double phase = 2.0 * std::numbers::pi * unit_uniform(rng);
    // Real part of c_n e^{i xi.x}; symmetrizing c_{-n} = conj(c_n) gives the same field up to scale.
    for (std::size_t i = 0; i < out.values.size(); ++i)
      out.values[i] += amplitude * std::cos(dot(xi, spec.node(i), spec.d) + phase);
  }
  GridSpec half = spec;
  half.R = 0.5 * recipe.R;
  const RealField window = bump_cutoff(half);  // 1 on |x| <= R/2, 0 on |x| >= R
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= window.values[i];
  return out;
}

}  // namespace

RealField make_potential(const PotentialRecipe& recipe, const GridSpec& spec) {
  spec.validate();
  if (recipe.R != spec.R) {
    std::ostringstream msg;
    msg << "potential.R = " << recipe.R << " differs from grid.R = " << spec.R;
    fail(ErrorCode::Config, msg.str());
  }
  if (!(recipe.value >= 0.0)) fail(ErrorCode::Config, "potential target norm must be >= 0");
  RealField q(spec);
  switch (recipe.kind) {
    case PotentialKind::SmoothBump:
      for (std::size_t i = 0; i < q.values.size(); ++i)
        q.values[i] = smooth_bump_profile(norm(spec.node(i), spec.d) / recipe.R);
      if (recipe.zero_mean) {
        double s0 = 0.0;
        double s2 = 0.0;
        for (std::size_t i = 0; i < q.values.size(); ++i) {
          const double t = norm(spec.node(i), spec.d) / recipe.R;
          s0 += q.values[i];
          s2 += q.values[i] * t * t;
        }
        const double c = s0 / s2;
        for (std::size_t i = 0; i < q.values.size(); ++i) {
          const double t = norm(spec.node(i), spec.d) / recipe.R;
          q.values[i] *= 1.0 - c * t * t;
        }
      }
      break;
    case PotentialKind::MollifiedIndicator:
      for (std::size_t i = 0; i < q.values.size(); ++i)
        q.values[i] = cutoff_profile(2.0 * norm(spec.node(i), spec.d) / recipe.R);
      break;
    case PotentialKind::RandomTrigPoly:
      q = random_trig_poly(recipe, spec);
      break;
  }
  if (recipe.value == 0.0) return RealField(spec);
  const double current = sobolev_norm(q, recipe.beta);
  if (current == 0.0) fail(ErrorCode::Config, "potential recipe produced an all-zero profile");
  const double scale = recipe.value / current;
  for (auto& v : q.values) v *= scale;
  return q;
}

std::pair<double, double> dataset_gap(const FarFieldDataset& a, const FarFieldDataset& b) {
  if (a.samples.size() != b.samples.size()) fail(ErrorCode::Config, "datasets differ in sample count");
  double num = 0.0;
  double den = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[i];
    if (x.sign != y.sign || x.k != y.k || x.omega != y.omega)
      fail(ErrorCode::Config, "datasets differ in (sign, k, omega) layout");
    const double gap = std::abs(x.value - y.value);
    num += gap * gap;
    den += std::norm(x.value);
    worst = std::max(worst, gap);
  }
  return {den > 0.0 ? std::sqrt(num / den) : std::sqrt(num), worst};
}

namespace {

double max_abs_diff(const RealField& a, const RealField& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  return worst;
}

bool bitwise_equal(const RealField& a, const RealField& b) {
  if (a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a.values[i]) != std::bit_cast<std::uint64_t>(b.values[i])) return false;
  return true;
}

bool bitwise_equal(const FarFieldDataset& a, const FarFieldDataset& b) {
  if (a.samples.size() != b.samples.size()) return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[i];
    if (x.sign != y.sign || x.k != y.k || x.omega != y.omega || x.value != y.value) return false;
  }
  return true;
}

}  // namespace

UniquenessReport uniqueness_check(const FarFieldDataset& first, const FarFieldDataset* second,
                                  const GridSpec& spec, const ReconConfig& cfg,
                                  const InterpolationConfig& interp, OracleMode mode, int runs) {
  if (runs < 1) fail(ErrorCode::Config, "uniqueness.runs must be >= 1");
  UniquenessReport report;
  report.runs = runs;
  const int saved_threads = thread_count();
  const int thread_choices[] = {1, 4, 2, 3};

  auto run = [&](const FarFieldDataset& ds, int r) {
    ReconConfig c = cfg;
    c.work_order_seed = static_cast<std::uint64_t>(r);
    set_thread_count(thread_choices[r % 4]);
    DatasetOracle oracle(ds, interp, mode);
    ReconResult res = reconstruct(oracle, spec, c);
    set_thread_count(saved_threads);
    if (!res.converged) report.converged = false;
    return res;
  };

  try {
    const ReconResult base = run(first, 0);
    for (int r = 1; r < runs; ++r) {
      const ReconResult again = run(first, r);
      report.max_run_discrepancy = std::max(report.max_run_discrepancy, max_abs_diff(base.q, again.q));
      report.deterministic = report.deterministic && bitwise_equal(base.q, again.q);
    }
    if (second) {
      report.datasets_equal = bitwise_equal(first, *second);
      const auto [rel, worst] = dataset_gap(first, *second);
      report.dataset_gap_rel = rel;
      report.dataset_gap_max = worst;
      const ReconResult other = run(*second, 0);
      const ComplexField diff = ComplexField(base.q) - ComplexField(other.q);
      report.recon_gap_l2 = l2_norm(diff);
      const double ref = l2_norm(base.q);
      report.recon_gap_rel = ref > 0.0 ? report.recon_gap_l2 / ref : report.recon_gap_l2;
      report.recon_gap_alpha = sobolev_norm(diff, cfg.alpha);
      report.recon_gap_max = max_abs_diff(base.q, other.q);
      report.reconstructions_equal = bitwise_equal(base.q, other.q);
      if (report.datasets_equal && !report.reconstructions_equal)
        report.notes.push_back("equal datasets produced different reconstructions");
    }
  } catch (...) {
    set_thread_count(saved_threads);
    throw;
  }
  if (!report.converged) report.notes.push_back("at least one reconstruction did not converge");
  return report;
}

std::string UniquenessReport::to_json() const {
  json j = {{"runs", runs},
            {"deterministic", deterministic},
            {"max_run_discrepancy", max_run_discrepancy},
            {"datasets_equal", datasets_equal},
            {"dataset_gap_rel", dataset_gap_rel},
            {"dataset_gap_max", dataset_gap_max},
            {"recon_gap_l2", recon_gap_l2},
            {"recon_gap_rel", recon_gap_rel},
            {"recon_gap_alpha", recon_gap_alpha},
            {"recon_gap_max", recon_gap_max},
            {"reconstructions_equal", reconstructions_equal},
            {"converged", converged},
            {"notes", notes}};
  return j.dump(2);
}

std::vector<Vec> sphere_directions(int d, int count) {
  if (count < 1) fail(ErrorCode::Config, "zeta_count must be >= 1");
  std::vector<Vec> out(static_cast<std::size_t>(count));
  const double pi = std::numbers::pi;
  if (d == 2) {
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * pi * i / count;
      out[static_cast<std::size_t>(i)] = {std::cos(a), std::sin(a), 0.0};
    }
    return out;
  }
  const double golden = pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden * i;
    out[static_cast<std::size_t>(i)] = {r * std::cos(a), r * std::sin(a), z};
  }
  return out;
}

cplx complex_frequency_transform(const RealField& f, double kappa, double eta, const Vec& zeta) {
  const GridSpec& spec = f.spec;
  cplx acc{};
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (f.values[i] == 0.0) continue;
    const double s = dot(zeta, spec.node(i), spec.d);
    acc += std::polar(std::exp(eta * s), -kappa * s) * f.values[i];
  }
  return acc * spec.cell_volume();
}

std::vector<PaleyWienerRow> paley_wiener_scan(const RealField& f, const std::vector<double>& kappas,
                                              int zeta_count) {
  const GridSpec& spec = f.spec;
  const auto zetas = sphere_directions(spec.d, zeta_count);
  std::vector<PaleyWienerRow> rows(kappas.size());
  parallel_for(kappas.size(), [&](std::size_t r) {
    const double kappa = kappas[r];
    if (!(kappa > 0.0)) fail(ErrorCode::Config, "pw: kappa must be positive");
    const double eta = std::log(kappa) / spec.R;
    double best = 0.0;
    for (const auto& z : zetas) best = std::max(best, std::abs(complex_frequency_transform(f, kappa, eta, z)));
    double mass = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      mass += std::abs(f.values[i]) * std::exp(eta * norm(spec.node(i), spec.d));
    rows[r].kappa = kappa;
    rows[r].eta = eta;
    rows[r].F = best;
    rows[r].noise_floor = 100.0 * std::numeric_limits<double>::epsilon() * mass * spec.cell_volume();
  });
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].fit_exponent =
        r == 0 ? std::numeric_limits<double>::quiet_NaN()
               : std::log(rows[r].F / rows[r - 1].F) / std::log(rows[r].kappa / rows[r - 1].kappa);
  }
  return rows;
}

std::string paley_wiener_csv(const std::vector<PaleyWienerRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "kappa,eta,F,fit_exponent\n";
  for (const auto& r : rows) {
    out << r.kappa << ',' << r.eta << ',' << r.F << ',';
    if (std::isnan(r.fit_exponent)) out << "nan"; else out << r.fit_exponent;
    out << '\n';
  }
  return out.str();
}

}  // namespace fixangle
