#include "fixangle/fixangle.h"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <openssl/opensslv.h>
#include <json.hpp>

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "fixangle/config.hpp"
#include "fixangle/error.hpp"
#include "fixangle/experiments.hpp"
#include "fixangle/io.hpp"
#include "fixangle/parallel.hpp"
#include "fixangle/spectral.hpp"

using namespace fixangle;
using nlohmann::json;

struct fa_config {
  RunConfig cfg;
  std::vector<std::string> warnings;
};

struct fa_field {
  ComplexField values;
  bool is_complex = false;
};

struct fa_dataset {
  FarFieldDataset ds;
};

struct fa_forward_result {
  ScatterSolution sol;
  std::vector<Vec> omegas;
  std::vector<cplx> far;
  int d = 2;
};

struct fa_recon {
  ReconResult result;
  int m = 1;
};

namespace {

thread_local std::string g_last_error;

fa_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return FA_ERR_CONFIG;
    case ErrorCode::InvalidWavenumber: return FA_ERR_INVALID_WAVENUMBER;
    case ErrorCode::ResonantLattice: return FA_ERR_RESONANT_LATTICE;
    case ErrorCode::GridMismatch: return FA_ERR_GRID_MISMATCH;
    case ErrorCode::NoContraction: return FA_ERR_NO_CONTRACTION;
    case ErrorCode::DenseTooLarge: return FA_ERR_DENSE_TOO_LARGE;
    case ErrorCode::DegenerateFrequency: return FA_ERR_DEGENERATE_FREQUENCY;
    case ErrorCode::OracleFailure: return FA_ERR_ORACLE_FAILURE;
    case ErrorCode::NotConverged: return FA_ERR_NOT_CONVERGED;
    case ErrorCode::Io: return FA_ERR_IO;
  }
  return FA_ERR_INTERNAL;
}

template <class F>
fa_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FA_ERR_INTERNAL;
  }
}

fa_status invalid(const char* what) {
  g_last_error = what;
  return FA_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

RealField require_real(const fa_field* f, const char* what) {
  if (f->is_complex) fail(ErrorCode::Config, std::string(what) + " must be a real field");
  return f->values.real_part();
}

GridSpec grid_of(const fa_grid_info& g) { return {g.d, g.n, g.L, g.R}; }

std::unique_ptr<FarFieldOracle> make_oracle(const RunConfig& cfg, const fa_field* q, const fa_dataset* ds) {
  if (cfg.oracle_backing == OracleBacking::Dataset) {
    if (!ds) fail(ErrorCode::Config, "config field 'dataset.path': a dataset is required for oracle.backing = dataset");
    if (ds->ds.d != cfg.grid.d) fail(ErrorCode::Config, "dataset dimension differs from grid.d");
    for (int a = 0; a < cfg.grid.d; ++a)
      if (std::abs(ds->ds.theta0[a] - cfg.theta0[a]) > 1e-12)
        fail(ErrorCode::Config, "dataset theta0 differs from config theta0");
    return std::make_unique<DatasetOracle>(ds->ds, cfg.interpolation, cfg.oracle_mode);
  }
  if (!q) fail(ErrorCode::Config, "config field 'potential': a potential is required for oracle.backing = synthetic");
  RealField field = require_real(q, "potential");
  if (!(field.spec == cfg.grid)) fail(ErrorCode::GridMismatch, "potential grid differs from config grid");
  return std::make_unique<SyntheticOracle>(std::move(field), cfg.theta0, cfg.solver, cfg.oracle_mode);
}

PotentialRecipe pw_recipe(const RunConfig& cfg, const GridSpec& grid) {
  PotentialRecipe r;
  if (cfg.potential) r = *cfg.potential;
  else {
    r.kind = PotentialKind::SmoothBump;
    r.beta = 0.0;
    r.value = 1.0;
  }
  r.R = grid.R;
  return r;
}

}  // namespace

extern "C" {

const char* fa_last_error(void) { return g_last_error.c_str(); }

const char* fa_status_name(fa_status status) {
  switch (status) {
    case FA_OK: return "ok";
    case FA_ERR_CONFIG: return "ConfigError";
    case FA_ERR_INVALID_WAVENUMBER: return "InvalidWavenumber";
    case FA_ERR_RESONANT_LATTICE: return "ResonantLattice";
    case FA_ERR_GRID_MISMATCH: return "GridMismatch";
    case FA_ERR_NO_CONTRACTION: return "NoContraction";
    case FA_ERR_DENSE_TOO_LARGE: return "DenseTooLarge";
    case FA_ERR_DEGENERATE_FREQUENCY: return "DegenerateFrequency";
    case FA_ERR_ORACLE_FAILURE: return "OracleFailure";
    case FA_ERR_NOT_CONVERGED: return "NotConverged";
    case FA_ERR_IO: return "IoError";
    case FA_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case FA_ERR_INTERNAL: return "InternalError";
  }
  return "Unknown";
}

const char* fa_version(void) { return "0.1.0"; }

fa_status fa_versions_json(char** out) {
  if (!out) return invalid("fa_versions_json: null argument");
  return guarded([&] {
    json j = {{"fixangle", fa_version()},
              {"fftw", std::string(fftw_version)},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"boost", BOOST_LIB_VERSION},
              {"openssl", OPENSSL_VERSION_TEXT},
              {"compiler", __VERSION__}};
    *out = dup_string(j.dump());
    return FA_OK;
  });
}

void fa_set_threads(int n) { set_thread_count(n); }

void fa_string_free(char* s) { std::free(s); }

fa_status fa_config_parse(const char* text, fa_config** out) {
  if (!text || !out) return invalid("fa_config_parse: null argument");
  return guarded([&] {
    auto c = std::make_unique<fa_config>();
    c->cfg = RunConfig::from_json(text);
    c->warnings = c->cfg.validate();
    *out = c.release();
    return FA_OK;
  });
}

fa_status fa_config_load(const char* path, fa_config** out) {
  if (!path || !out) return invalid("fa_config_load: null argument");
  return guarded([&] {
    auto c = std::make_unique<fa_config>();
    c->cfg = RunConfig::load(path);
    c->warnings = c->cfg.validate();
    *out = c.release();
    return FA_OK;
  });
}

fa_status fa_config_to_json(const fa_config* cfg, char** out) {
  if (!cfg || !out) return invalid("fa_config_to_json: null argument");
  return guarded([&] {
    *out = dup_string(cfg->cfg.to_json());
    return FA_OK;
  });
}

fa_status fa_config_warnings(const fa_config* cfg, char** out) {
  if (!cfg || !out) return invalid("fa_config_warnings: null argument");
  return guarded([&] {
    std::string text;
    for (const auto& w : cfg->warnings) text += w + "\n";
    *out = dup_string(text);
    return FA_OK;
  });
}

fa_status fa_config_with_m(const fa_config* cfg, int m, fa_config** out) {
  if (!cfg || !out) return invalid("fa_config_with_m: null argument");
  return guarded([&] {
    auto c = std::make_unique<fa_config>(*cfg);
    c->cfg.recon.m = m;
    c->warnings = c->cfg.validate();
    *out = c.release();
    return FA_OK;
  });
}

fa_status fa_config_recon_ms(const fa_config* cfg, int* ms, size_t capacity, size_t* count) {
  if (!cfg || !count) return invalid("fa_config_recon_ms: null argument");
  const auto& list = cfg->cfg.recon_ms;
  for (size_t i = 0; i < list.size() && i < capacity && ms; ++i) ms[i] = list[i];
  *count = list.size();
  return FA_OK;
}

int fa_config_has_potential(const fa_config* cfg) {
  return cfg && (cfg->cfg.potential || cfg->cfg.potential_path) ? 1 : 0;
}

void fa_config_free(fa_config* cfg) { delete cfg; }

fa_status fa_field_potential(const fa_config* cfg, fa_field** out) {
  if (!cfg || !out) return invalid("fa_field_potential: null argument");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    auto f = std::make_unique<fa_field>();
    if (c.potential_path) {
      RealField q = io::read_real_field(*c.potential_path);
      if (!(q.spec == c.grid)) fail(ErrorCode::Config, "config field 'potential_path': grid differs from config grid");
      f->values = ComplexField(q);
    } else if (c.potential) {
      f->values = ComplexField(make_potential(*c.potential, c.grid));
    } else {
      fail(ErrorCode::Config, "config field 'potential': neither a recipe nor potential_path is given");
    }
    *out = f.release();
    return FA_OK;
  });
}

fa_status fa_field_from_values(const fa_grid_info* grid, const double* re, const double* im, fa_field** out) {
  if (!grid || !re || !out) return invalid("fa_field_from_values: null argument");
  return guarded([&] {
    const GridSpec spec = grid_of(*grid);
    spec.validate();
    auto f = std::make_unique<fa_field>();
    f->values = ComplexField(spec);
    f->is_complex = im != nullptr;
    for (std::size_t i = 0; i < spec.size(); ++i) f->values.values[i] = {re[i], im ? im[i] : 0.0};
    *out = f.release();
    return FA_OK;
  });
}

fa_status fa_field_read(const char* stem, fa_field** out) {
  if (!stem || !out) return invalid("fa_field_read: null argument");
  return guarded([&] {
    auto f = std::make_unique<fa_field>();
    f->is_complex = io::field_kind(stem) == "complex";
    f->values = io::read_complex_field(stem);
    *out = f.release();
    return FA_OK;
  });
}

fa_status fa_field_write(const fa_field* f, const char* stem) {
  if (!f || !stem) return invalid("fa_field_write: null argument");
  return guarded([&] {
    if (f->is_complex) io::write_field(f->values, stem);
    else io::write_field(f->values.real_part(), stem);
    return FA_OK;
  });
}

fa_status fa_field_info(const fa_field* f, fa_grid_info* grid, int* is_complex) {
  if (!f) return invalid("fa_field_info: null argument");
  const GridSpec& s = f->values.spec;
  if (grid) *grid = {s.d, s.n, s.L, s.R};
  if (is_complex) *is_complex = f->is_complex ? 1 : 0;
  return FA_OK;
}

fa_status fa_field_values(const fa_field* f, double* re, double* im, size_t count) {
  if (!f || !re) return invalid("fa_field_values: null argument");
  if (count != f->values.values.size()) return invalid("fa_field_values: count must equal N^d");
  for (size_t i = 0; i < count; ++i) {
    re[i] = f->values.values[i].real();
    if (im) im[i] = f->values.values[i].imag();
  }
  return FA_OK;
}

fa_status fa_field_sobolev_norm(const fa_field* f, double alpha, double* out) {
  if (!f || !out) return invalid("fa_field_sobolev_norm: null argument");
  return guarded([&] {
    *out = sobolev_norm(f->values, alpha);
    return FA_OK;
  });
}

void fa_field_free(fa_field* f) { delete f; }

fa_status fa_forward(const fa_config* cfg, const fa_field* q, fa_forward_result** out) {
  if (!cfg || !q || !out) return invalid("fa_forward: null argument");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    const RealField field = require_real(q, "potential");
    auto r = std::make_unique<fa_forward_result>();
    r->d = c.grid.d;
    const Vec theta = c.forward_theta.value_or(c.theta0);
    r->sol = solve_scattered(field, theta, c.forward_k, c.solver);
    r->omegas = sphere_directions(c.grid.d, c.forward_omega_count);
    for (const auto& w : r->omegas) r->far.push_back(far_field(field, r->sol, w));
    *out = r.release();
    return FA_OK;
  });
}

fa_status fa_forward_scattered(const fa_forward_result* r, fa_field** out) {
  if (!r || !out) return invalid("fa_forward_scattered: null argument");
  return guarded([&] {
    auto f = std::make_unique<fa_field>();
    f->values = r->sol.u_s;
    f->is_complex = true;
    *out = f.release();
    return FA_OK;
  });
}

fa_status fa_forward_far_field_csv(const fa_forward_result* r, char** out) {
  if (!r || !out) return invalid("fa_forward_far_field_csv: null argument");
  return guarded([&] {
    std::string text;
    for (int a = 1; a <= r->d; ++a) text += "omega_" + std::to_string(a) + ",";
    text += "re,im\n";
    for (std::size_t i = 0; i < r->omegas.size(); ++i) {
      for (int a = 0; a < r->d; ++a) text += io::format_double(r->omegas[i][a]) + ",";
      text += io::format_double(r->far[i].real()) + "," + io::format_double(r->far[i].imag()) + "\n";
    }
    *out = dup_string(text);
    return FA_OK;
  });
}

fa_status fa_forward_summary_json(const fa_forward_result* r, char** out) {
  if (!r || !out) return invalid("fa_forward_summary_json: null argument");
  return guarded([&] {
    json theta = json::array();
    for (int a = 0; a < r->d; ++a) theta.push_back(r->sol.theta[a]);
    json j = {{"k", r->sol.k},
              {"theta", theta},
              {"iterations", r->sol.iterations},
              {"residual", r->sol.residual},
              {"residual_history", r->sol.residual_history},
              {"u_s_l2", l2_norm(r->sol.u_s)}};
    *out = dup_string(j.dump(2));
    return FA_OK;
  });
}

void fa_forward_free(fa_forward_result* r) { delete r; }

fa_status fa_dataset_generate(const fa_config* cfg, const fa_field* q, double solver_tol, fa_dataset** out) {
  if (!cfg || !q || !out) return invalid("fa_dataset_generate: null argument");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    const RealField field = require_real(q, "potential");
    SolverOptions options = c.solver;
    if (solver_tol > 0.0) options.tol = solver_tol;
    std::vector<SampleRequest> requests;
    if (c.dataset_layout == DatasetLayout::Ewald) {
      requests = ewald_requests(c.grid, c.theta0, c.recon.cut, c.oracle_mode);
    } else {
      if (c.dataset_k_list.empty()) fail(ErrorCode::Config, "config field 'dataset.k_list': required for layout = product");
      const auto omegas = sphere_directions(c.grid.d, c.dataset_omega_count);
      for (int sign : {1, -1})
        for (double k : c.dataset_k_list)
          for (const auto& w : omegas) requests.push_back({sign, k, w});
    }
    auto d = std::make_unique<fa_dataset>();
    d->ds = generate_dataset(field, c.theta0, std::move(requests), options);
    json gen = {{"layout", c.dataset_layout == DatasetLayout::Ewald ? "ewald" : "product"},
                {"solver", options.method == SolverMethod::Neumann ? "neumann" : "dense"},
                {"tol", options.tol},
                {"born_only", options.born_only},
                {"resolvent", options.resolvent.method == ResolventMethod::TruncatedKernel ? "truncated_kernel"
                                                                                         : "eps_multiplier"},
                {"grid", {{"N", c.grid.n}, {"L", c.grid.L}}}};
    d->ds.generator = gen.dump();
    *out = d.release();
    return FA_OK;
  });
}

fa_status fa_dataset_read(const char* stem, fa_dataset** out) {
  if (!stem || !out) return invalid("fa_dataset_read: null argument");
  return guarded([&] {
    auto d = std::make_unique<fa_dataset>();
    d->ds = io::read_dataset(stem);
    *out = d.release();
    return FA_OK;
  });
}

fa_status fa_dataset_write(const fa_dataset* ds, const char* stem) {
  if (!ds || !stem) return invalid("fa_dataset_write: null argument");
  return guarded([&] {
    io::write_dataset(ds->ds, stem);
    return FA_OK;
  });
}

size_t fa_dataset_size(const fa_dataset* ds) { return ds ? ds->ds.samples.size() : 0; }

fa_status fa_dataset_gap(const fa_dataset* a, const fa_dataset* b, double* rel, double* max_abs) {
  if (!a || !b) return invalid("fa_dataset_gap: null argument");
  return guarded([&] {
    const auto [r, m] = dataset_gap(a->ds, b->ds);
    if (rel) *rel = r;
    if (max_abs) *max_abs = m;
    return FA_OK;
  });
}

void fa_dataset_free(fa_dataset* ds) { delete ds; }

fa_status fa_born(const fa_config* cfg, const fa_field* q, const fa_dataset* ds, fa_field** out, char** summary) {
  if (!cfg || !out) return invalid("fa_born: null argument");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    const auto oracle = make_oracle(c, q, ds);
    BornResult born = born_approximation(*oracle, c.grid, c.recon.cut, c.born_hermitian);
    auto f = std::make_unique<fa_field>();
    f->values = std::move(born.field);
    f->is_complex = true;
    if (summary) {
      json j = {{"retained", born.retained},
                {"excluded_fraction", born.excluded_fraction},
                {"hermitian_asymmetry", born.asymmetry},
                {"hermitian_enforced", c.born_hermitian},
                {"imag_l2", f->values.imag_norm_l2()},
                {"l2", l2_norm(f->values)}};
      *summary = dup_string(j.dump(2));
    }
    *out = f.release();
    return FA_OK;
  });
}

fa_status fa_reconstruct(const fa_config* cfg, const fa_field* q, const fa_dataset* ds, const fa_field* truth,
                         fa_recon** out) {
  if (!cfg || !out) return invalid("fa_reconstruct: null argument");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    const auto oracle = make_oracle(c, q, ds);
    std::optional<RealField> t;
    if (truth) t = require_real(truth, "truth");
    auto r = std::make_unique<fa_recon>();
    r->m = c.recon.m;
    r->result = reconstruct(*oracle, c.grid, c.recon, t ? &*t : nullptr);
    const bool ok = r->result.converged;
    if (!ok) g_last_error = r->result.trace.failures.empty() ? "not converged" : r->result.trace.failures.back();
    *out = r.release();
    return ok ? FA_OK : FA_ERR_NOT_CONVERGED;
  });
}

fa_status fa_recon_field(const fa_recon* r, fa_field** out) {
  if (!r || !out) return invalid("fa_recon_field: null argument");
  return guarded([&] {
    auto f = std::make_unique<fa_field>();
    f->values = ComplexField(r->result.q);
    *out = f.release();
    return FA_OK;
  });
}

fa_status fa_recon_born_field(const fa_recon* r, fa_field** out) {
  if (!r || !out) return invalid("fa_recon_born_field: null argument");
  return guarded([&] {
    auto f = std::make_unique<fa_field>();
    f->values = ComplexField(r->result.born_iterate);
    *out = f.release();
    return FA_OK;
  });
}

fa_status fa_recon_trace_jsonl(const fa_recon* r, char** out) {
  if (!r || !out) return invalid("fa_recon_trace_jsonl: null argument");
  return guarded([&] {
    *out = dup_string(r->result.trace.to_jsonl());
    return FA_OK;
  });
}

fa_status fa_recon_summary_json(const fa_recon* r, char** out) {
  if (!r || !out) return invalid("fa_recon_summary_json: null argument");
  return guarded([&] {
    const auto& res = r->result;
    double imag = 0.0;
    for (const auto& rec : res.trace.records) imag = std::max(imag, rec.imag_discarded);
    json j = {{"m", r->m},
              {"converged", res.converged},
              {"iterations", res.iterations},
              {"warnings", res.trace.warnings},
              {"failures", res.trace.failures},
              {"born_retained", res.born.retained},
              {"born_excluded_fraction", res.born.excluded_fraction},
              {"born_hermitian_asymmetry", res.born.asymmetry},
              {"max_imag_discarded", imag},
              {"final_step_norm", res.trace.records.empty() ? 0.0 : res.trace.records.back().step_norm}};
    *out = dup_string(j.dump(2));
    return FA_OK;
  });
}

int fa_recon_converged(const fa_recon* r) { return r && r->result.converged ? 1 : 0; }

void fa_recon_free(fa_recon* r) { delete r; }

fa_status fa_convergence_report(const fa_config* cfg, const fa_recon* const* runs, size_t count,
                                const fa_field* truth, char** out) {
  if (!cfg || !runs || !truth || !out) return invalid("fa_convergence_report: null argument");
  return guarded([&] {
    std::vector<ReconResult> results;
    std::vector<int> ms;
    for (size_t i = 0; i < count; ++i) {
      results.push_back(runs[i]->result);
      ms.push_back(runs[i]->m);
    }
    const RealField t = require_real(truth, "truth");
    const auto report =
        convergence_report(results, ms, t, cfg->cfg.recon.alpha, cfg->cfg.theta0, cfg->cfg.recon.cut);
    *out = dup_string(report.to_json());
    return FA_OK;
  });
}

fa_status fa_uniqueness(const fa_config* cfg, const fa_dataset* a, const fa_dataset* b, char** report_json) {
  if (!cfg || !a || !report_json) return invalid("fa_uniqueness: null argument");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    const auto report = uniqueness_check(a->ds, b ? &b->ds : nullptr, c.grid, c.recon, c.interpolation,
                                         c.oracle_mode, c.uniqueness_runs);
    *report_json = dup_string(report.to_json());
    return report.converged ? FA_OK : FA_ERR_NOT_CONVERGED;
  });
}

fa_status fa_pw_scan(const fa_config* cfg, const fa_field* f, char** csv, char** report_json) {
  if (!cfg || !csv) return invalid("fa_pw_scan: null argument");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    RealField field;
    if (f) {
      field = require_real(f, "pw field");
    } else {
      const GridSpec grid = c.pw_grid.value_or(c.grid);
      field = make_potential(pw_recipe(c, grid), grid);
    }
    const auto rows = paley_wiener_scan(field, c.pw_kappas, c.pw_zeta_count);
    *csv = dup_string(paley_wiener_csv(rows));
    if (report_json) {
      json j;
      j["R"] = field.spec.R;
      j["rows"] = json::array();
      for (const auto& r : rows)
        j["rows"].push_back({{"kappa", r.kappa},
                             {"eta", r.eta},
                             {"F", r.F},
                             {"fit_exponent", std::isnan(r.fit_exponent) ? json(nullptr) : json(r.fit_exponent)},
                             {"noise_floor", r.noise_floor},
                             {"above_noise_floor", r.F > r.noise_floor}});
      *report_json = dup_string(j.dump(2));
    }
    return FA_OK;
  });
}

fa_status fa_sha256_file(const char* path, char out[65]) {
  if (!path || !out) return invalid("fa_sha256_file: null argument");
  return guarded([&] {
    const std::string hex = io::sha256_file(path);
    std::memcpy(out, hex.c_str(), 65);
    return FA_OK;
  });
}

}  // extern "C"
