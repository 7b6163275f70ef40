#include "fixangle/recon.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "fixangle/error.hpp"
#include "fixangle/parallel.hpp"
#include "fixangle/spectral.hpp"

namespace fixangle {

using nlohmann::json;

std::vector<std::string> ReconConfig::validate(int d) const {
  if (m < 1) fail(ErrorCode::Config, "recon.m must be >= 1");
  if (ell_max < 1) fail(ErrorCode::Config, "recon.ell_max must be >= 1");
  if (!std::isfinite(alpha)) fail(ErrorCode::Config, "recon.alpha must be finite");
  if (!(fp_tol > 0.0)) fail(ErrorCode::Config, "recon.fp_tol must be positive");
  if (k_quantum < 0.0) fail(ErrorCode::Config, "recon.k_quantum must be >= 0");
  cut.validate();
  std::vector<std::string> warnings;
  const double lower = d / 2.0 - d / (d - 1.0);
  if (!(alpha > 0.0 && alpha <= 1.0 && alpha > lower && alpha < d / 2.0)) {
    std::ostringstream msg;
    msg << "alpha = " << alpha << " lies outside the convergence window 0 < alpha <= 1, " << lower
        << " < alpha < " << d / 2.0 << "; behaviour is experimental";
    warnings.push_back(msg.str());
  }
  return warnings;
}

namespace {

double plan_wavenumber(const ReconConfig& cfg, double k) {
  if (cfg.k_quantum <= 0.0) return k;
  return std::max(cfg.k_quantum, std::round(k / cfg.k_quantum) * cfg.k_quantum);
}

}  // namespace

std::vector<cplx> born_series_terms(const ComplexField& f, const EwaldPoint& p, int m,
                                    const ResolventPlan& plan) {
  const GridSpec& spec = f.spec;
  std::vector<cplx> incoming(spec.size());
  std::vector<cplx> outgoing(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Vec x = spec.node(i);
    incoming[i] = std::polar(1.0, p.k * dot(p.theta_eff, x, spec.d));
    outgoing[i] = std::polar(1.0, -p.k * dot(p.omega, x, spec.d));
  }
  ComplexField v(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) v.values[i] = f.values[i] * incoming[i];
  std::vector<cplx> terms(static_cast<std::size_t>(m));
  const double cell = spec.cell_volume();
  for (int j = 0; j < m; ++j) {
    ComplexField rv = plan.apply(v);
    cplx acc{};
    for (std::size_t i = 0; i < spec.size(); ++i) {
      v.values[i] = f.values[i] * rv.values[i];
      acc += outgoing[i] * v.values[i];
    }
    terms[static_cast<std::size_t>(j)] = acc * cell;
  }
  return terms;
}

cplx born_series_term(const ComplexField& f, const EwaldPoint& p, int j, PlanCache& plans) {
  if (j < 1) fail(ErrorCode::Config, "born_series_term: depth must be >= 1");
  const auto plan = plans.get(p.k);
  return born_series_terms(f, p, j, *plan).back();
}

TStep apply_T_m(const ComplexField& f, const ComplexField& born_field, const ReconConfig& cfg,
                const Vec& theta0, const RealField& phi, PlanCache& plans) {
  const GridSpec& spec = f.spec;
  if (!(born_field.spec == spec) || !(phi.spec == spec))
    fail(ErrorCode::GridMismatch, "apply_T_m: inputs on different grids");
  const auto points = retained_points(spec, theta0, cfg.cut);

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.work_order_seed != 0) {
    std::mt19937_64 rng(cfg.work_order_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  bool zero = std::all_of(f.values.begin(), f.values.end(), [](cplx v) { return v == cplx{}; });
  Spectrum correction(spec);
  if (!zero) {
    std::vector<double> ks(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) ks[i] = plan_wavenumber(cfg, points[i].point.k);
    plans.prepare(ks);
    std::vector<cplx> values(points.size());
    parallel_for(order.size(), [&](std::size_t slot) {
      const std::size_t i = order[slot];
      const auto& p = points[i].point;
      try {
        const auto plan = plans.get(ks[i]);
        const auto terms = born_series_terms(f, p, cfg.m, *plan);
        cplx sum{};
        for (const cplx& t : terms) sum += t;
        values[i] = sum;
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << e.what() << " [at xi = (" << p.xi[0] << ", " << p.xi[1];
        if (spec.d == 3) msg << ", " << p.xi[2];
        msg << ")]";
        throw Error(e.code(), msg.str());
      }
    });
    for (std::size_t i = 0; i < points.size(); ++i) correction.values[points[i].flat] = values[i];
  }
  const ComplexField corr = inverse_transform(correction);

  TStep step;
  step.next = ComplexField(spec);
  for (std::size_t i = 0; i < spec.size(); ++i)
    step.next.values[i] = born_field.values[i] - phi.values[i] * corr.values[i];
  if (cfg.enforce_real) {
    step.imag_discarded = step.next.imag_norm_l2();
    for (auto& v : step.next.values) v = v.real();
  }
  return step;
}

std::string ReconTrace::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    json line = {{"m", r.m}, {"ell", r.ell}, {"step_norm", r.step_norm}};
    line["err_alpha"] = r.err_alpha ? json(*r.err_alpha) : json(nullptr);
    line["err_l2"] = r.err_l2 ? json(*r.err_l2) : json(nullptr);
    line["seconds"] = r.seconds;
    out += line.dump(-1, ' ', false, json::error_handler_t::strict);
    out += '\n';
  }
  return out;
}

ReconResult reconstruct(const FarFieldOracle& oracle, const GridSpec& spec, const ReconConfig& cfg,
                        const RealField* truth) {
  spec.validate();
  ReconResult result;
  result.trace.warnings = cfg.validate(spec.d);
  if (truth && !(truth->spec == spec)) fail(ErrorCode::GridMismatch, "reconstruct: truth on a different grid");

  const RealField phi = bump_cutoff(spec);
  result.born = born_approximation(oracle, spec, cfg.cut);
  const ComplexField born_field = phi * result.born.field;
  PlanCache plans(spec, cfg.resolvent);

  ComplexField current(spec);  // q_{m,1} = 0
  double reference = -1.0;
  for (int ell = 1; ell <= cfg.ell_max; ++ell) {
    const auto start = std::chrono::steady_clock::now();
    TStep step = apply_T_m(current, born_field, cfg, oracle.theta0(), phi, plans);
    const double step_norm = sobolev_norm(step.next - current, cfg.alpha);
    if (ell == 1) {
      reference = sobolev_norm(step.next, cfg.alpha);
      result.born_iterate = step.next.real_part();
    }
    current = std::move(step.next);

    TraceRecord rec;
    rec.m = cfg.m;
    rec.ell = ell;
    rec.step_norm = step_norm;
    rec.imag_discarded = step.imag_discarded;
    if (truth) {
      const ComplexField err = current - ComplexField(*truth);
      rec.err_alpha = sobolev_norm(err, cfg.alpha);
      rec.err_l2 = l2_norm(err);
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trace.records.push_back(rec);
    result.iterations = ell;
    if (!std::isfinite(step_norm)) break;
    if (step_norm <= cfg.fp_tol * reference) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged) {
    std::ostringstream msg;
    msg << "fixed-point iteration not converged after " << result.iterations
        << " steps (last step norm " << result.trace.records.back().step_norm << ")";
    result.trace.failures.push_back(msg.str());
  }
  result.q = current.real_part();
  return result;
}

double band_limited_error(const RealField& estimate, const RealField& truth, const Vec& theta0,
                          const CutoffConfig& cut) {
  const auto a = forward_transform(ComplexField(estimate));
  const auto b = forward_transform(ComplexField(truth));
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : retained_points(truth.spec, theta0, cut)) {
    num += std::norm(a.values[p.flat] - b.values[p.flat]);
    den += std::norm(b.values[p.flat]);
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : INFINITY;
  return std::sqrt(num / den);
}

ConvergenceReport convergence_report(const std::vector<ReconResult>& runs, const std::vector<int>& ms,
                                     const RealField& truth, double alpha, const Vec& theta0,
                                     const CutoffConfig& cut) {
  if (runs.size() != ms.size()) fail(ErrorCode::Config, "convergence_report: runs and ms differ in length");
  ConvergenceReport report;
  report.alpha = alpha;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const ComplexField err = ComplexField(runs[i].q) - ComplexField(truth);
    ConvergenceEntry e;
    e.m = ms[i];
    e.err_alpha = sobolev_norm(err, alpha);
    e.err_l2 = l2_norm(err);
    e.err_band = band_limited_error(runs[i].q, truth, theta0, cut);
    e.converged = runs[i].converged;
    e.iterations = runs[i].iterations;
    report.entries.push_back(e);
  }
  for (std::size_t i = 1; i < report.entries.size(); ++i)
    if (report.entries[i].err_alpha > report.entries[i - 1].err_alpha)
      report.violations.push_back(static_cast<int>(i));
  report.monotone = report.violations.empty();
  return report;
}

std::string ConvergenceReport::to_json() const {
  json j;
  j["alpha"] = alpha;
  j["monotone"] = monotone;
  j["violations"] = violations;
  j["entries"] = json::array();
  for (const auto& e : entries)
    j["entries"].push_back({{"m", e.m},
                            {"err_alpha", e.err_alpha},
                            {"err_l2", e.err_l2},
                            {"err_band", e.err_band},
                            {"converged", e.converged},
                            {"iterations", e.iterations}});
  return j.dump(2);
}

ConvergenceReport ConvergenceReport::from_json(const std::string& text) {
  const json j = json::parse(text);
  ConvergenceReport r;
  r.alpha = j.at("alpha").get<double>();
  r.monotone = j.at("monotone").get<bool>();
  r.violations = j.at("violations").get<std::vector<int>>();
  for (const auto& e : j.at("entries"))
    r.entries.push_back({e.at("m").get<int>(), e.at("err_alpha").get<double>(),
                         e.at("err_l2").get<double>(), e.at("err_band").get<double>(),
                         e.at("converged").get<bool>(), e.at("iterations").get<int>()});
  return r;
}

}  // namespace fixangle
