#include "fixangle/config.hpp"

#include <json.hpp>

#include <cmath>
#include <set>

#include "fixangle/error.hpp"
#include "fixangle/io.hpp"

namespace fixangle {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  fail(ErrorCode::Config, "config field '" + field + "': " + why);
}

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(section, "must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.contains(key)) bad(section.empty() ? key : section + "." + key, "unknown key");
}

template <class T>
T get(const json& j, const char* key, const std::string& path, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    bad(path + "." + key, e.what());
  }
}

Vec parse_unit(const json& j, const std::string& path, int d) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception& e) {
    bad(path, e.what());
  }
  if (static_cast<int>(v.size()) != d) bad(path, "must have exactly d = " + std::to_string(d) + " entries");
  Vec out{};
  for (int a = 0; a < d; ++a) out[a] = v[static_cast<std::size_t>(a)];
  const double n = norm(out, d);
  if (!(n > 0.0) || !std::isfinite(n)) bad(path, "must be a nonzero finite vector");
  if (std::abs(n - 1.0) > 1e-14)
    for (int a = 0; a < d; ++a) out[a] /= n;
  return out;
}

json vec_json(const Vec& v, int d) {
  json a = json::array();
  for (int i = 0; i < d; ++i) a.push_back(v[i]);
  return a;
}

GridSpec parse_grid(const json& j, const std::string& path) {
  check_keys(j, path, {"d", "N", "L", "R"});
  GridSpec g;
  g.d = get(j, "d", path, g.d);
  g.n = get(j, "N", path, g.n);
  g.L = get(j, "L", path, g.L);
  g.R = get(j, "R", path, g.R);
  try {
    g.validate();
  } catch (const Error& e) {
    bad(path, e.what());
  }
  return g;
}

json grid_json(const GridSpec& g) { return {{"d", g.d}, {"N", g.n}, {"L", g.L}, {"R", g.R}}; }

const char* kind_name(PotentialKind k) {
  switch (k) {
    case PotentialKind::SmoothBump: return "smooth_bump";
    case PotentialKind::MollifiedIndicator: return "mollified_indicator";
    case PotentialKind::RandomTrigPoly: return "random_trig_poly";
  }
  return "smooth_bump";
}

}  // namespace

bool operator==(const PotentialRecipe& a, const PotentialRecipe& b) {
  return a.kind == b.kind && a.beta == b.beta && a.value == b.value && a.R == b.R && a.seed == b.seed &&
         a.max_mode == b.max_mode && a.decay == b.decay && a.zero_mean == b.zero_mean;
}

bool RunConfig::operator==(const RunConfig& o) const {
  auto same_resolvent = [](const ResolventOptions& a, const ResolventOptions& b) {
    return a.method == b.method && a.eps == b.eps;
  };
  auto same_cut = [](const CutoffConfig& a, const CutoffConfig& b) {
    return a.xi_max_fraction == b.xi_max_fraction && a.delta == b.delta && a.k_max == b.k_max;
  };
  const bool solver_same = solver.tol == o.solver.tol && solver.max_iter == o.solver.max_iter &&
                           solver.method == o.solver.method && solver.born_only == o.solver.born_only &&
                           same_resolvent(solver.resolvent, o.solver.resolvent);
  const bool recon_same = recon.m == o.recon.m && recon.ell_max == o.recon.ell_max &&
                          recon.alpha == o.recon.alpha && recon.fp_tol == o.recon.fp_tol &&
                          same_cut(recon.cut, o.recon.cut) && recon.enforce_real == o.recon.enforce_real &&
                          same_resolvent(recon.resolvent, o.recon.resolvent) &&
                          recon.k_quantum == o.recon.k_quantum && recon.work_order_seed == o.recon.work_order_seed;
  return grid == o.grid && theta0 == o.theta0 && seed == o.seed && potential == o.potential &&
         potential_path == o.potential_path && solver_same && forward_k == o.forward_k &&
         forward_theta == o.forward_theta && forward_omega_count == o.forward_omega_count &&
         dataset_layout == o.dataset_layout && dataset_k_list == o.dataset_k_list &&
         dataset_omega_count == o.dataset_omega_count && dataset_path == o.dataset_path &&
         dataset_paths == o.dataset_paths && oracle_backing == o.oracle_backing && oracle_mode == o.oracle_mode &&
         interpolation.kind == o.interpolation.kind && interpolation.max_distance == o.interpolation.max_distance &&
         born_hermitian == o.born_hermitian && recon_same && recon_ms == o.recon_ms &&
         uniqueness_runs == o.uniqueness_runs && pw_kappas == o.pw_kappas && pw_zeta_count == o.pw_zeta_count &&
         pw_grid == o.pw_grid;
}

RunConfig RunConfig::from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "", {"grid", "theta0", "seed", "potential", "potential_path", "solver", "resolvent", "forward",
                        "dataset", "oracle", "born", "cutoff", "recon", "uniqueness", "pw"});
  RunConfig c;
  if (!root.contains("grid")) bad("grid", "missing");
  c.grid = parse_grid(root["grid"], "grid");
  const int d = c.grid.d;
  c.theta0 = {};
  if (!root.contains("theta0")) bad("theta0", "missing");
  c.theta0 = parse_unit(root["theta0"], "theta0", d);
  c.seed = get<std::uint64_t>(root, "seed", "", c.seed);

  if (root.contains("potential") && !root["potential"].is_null()) {
    const json& p = root["potential"];
    check_keys(p, "potential", {"kind", "beta", "value", "R", "seed", "max_mode", "decay", "zero_mean"});
    PotentialRecipe r;
    r.R = c.grid.R;
    const auto kind = get<std::string>(p, "kind", "potential", "smooth_bump");
    if (kind == "smooth_bump") r.kind = PotentialKind::SmoothBump;
    else if (kind == "mollified_indicator") r.kind = PotentialKind::MollifiedIndicator;
    else if (kind == "random_trig_poly") r.kind = PotentialKind::RandomTrigPoly;
    else bad("potential.kind", "expected smooth_bump, mollified_indicator or random_trig_poly");
    r.beta = get(p, "beta", "potential", r.beta);
    r.value = get(p, "value", "potential", r.value);
    r.R = get(p, "R", "potential", r.R);
    r.seed = get<std::uint64_t>(p, "seed", "potential", c.seed);
    r.max_mode = get(p, "max_mode", "potential", r.max_mode);
    if (p.contains("decay") && !p["decay"].is_null()) r.decay = get<double>(p, "decay", "potential", 0.0);
    r.zero_mean = get(p, "zero_mean", "potential", r.zero_mean);
    c.potential = r;
  }
  if (root.contains("potential_path") && !root["potential_path"].is_null())
    c.potential_path = get<std::string>(root, "potential_path", "", "");

  if (root.contains("resolvent")) {
    const json& r = root["resolvent"];
    check_keys(r, "resolvent", {"method", "eps"});
    const auto method = get<std::string>(r, "method", "resolvent", "truncated_kernel");
    if (method == "truncated_kernel") c.solver.resolvent.method = ResolventMethod::TruncatedKernel;
    else if (method == "eps_multiplier") c.solver.resolvent.method = ResolventMethod::EpsMultiplier;
    else bad("resolvent.method", "expected truncated_kernel or eps_multiplier");
    c.solver.resolvent.eps = get(r, "eps", "resolvent", 0.0);
  }
  c.recon.resolvent = c.solver.resolvent;

  if (root.contains("solver")) {
    const json& s = root["solver"];
    check_keys(s, "solver", {"tol", "max_iter", "method", "born_only"});
    c.solver.tol = get(s, "tol", "solver", c.solver.tol);
    c.solver.max_iter = get(s, "max_iter", "solver", c.solver.max_iter);
    const auto method = get<std::string>(s, "method", "solver", "neumann");
    if (method == "neumann") c.solver.method = SolverMethod::Neumann;
    else if (method == "dense") c.solver.method = SolverMethod::Dense;
    else bad("solver.method", "expected neumann or dense");
    c.solver.born_only = get(s, "born_only", "solver", false);
  }

  if (root.contains("forward")) {
    const json& f = root["forward"];
    check_keys(f, "forward", {"k", "theta", "omega_count"});
    c.forward_k = get(f, "k", "forward", c.forward_k);
    if (f.contains("theta") && !f["theta"].is_null()) c.forward_theta = parse_unit(f["theta"], "forward.theta", d);
    c.forward_omega_count = get(f, "omega_count", "forward", c.forward_omega_count);
  }

  if (root.contains("dataset")) {
    const json& s = root["dataset"];
    check_keys(s, "dataset", {"layout", "k_list", "omega_count", "path", "paths"});
    const auto layout = get<std::string>(s, "layout", "dataset", "ewald");
    if (layout == "ewald") c.dataset_layout = DatasetLayout::Ewald;
    else if (layout == "product") c.dataset_layout = DatasetLayout::Product;
    else bad("dataset.layout", "expected ewald or product");
    c.dataset_k_list = get(s, "k_list", "dataset", c.dataset_k_list);
    c.dataset_omega_count = get(s, "omega_count", "dataset", c.dataset_omega_count);
    if (s.contains("path") && !s["path"].is_null()) c.dataset_path = get<std::string>(s, "path", "dataset", "");
    c.dataset_paths = get(s, "paths", "dataset", c.dataset_paths);
  }

  if (root.contains("oracle")) {
    const json& o = root["oracle"];
    check_keys(o, "oracle", {"backing", "mode", "interpolation", "max_distance"});
    const auto backing = get<std::string>(o, "backing", "oracle", "synthetic");
    if (backing == "synthetic") c.oracle_backing = OracleBacking::Synthetic;
    else if (backing == "dataset") c.oracle_backing = OracleBacking::Dataset;
    else bad("oracle.backing", "expected synthetic or dataset");
    const auto mode = get<std::string>(o, "mode", "oracle", "two_directions");
    if (mode == "two_directions") c.oracle_mode = OracleMode::TwoDirections;
    else if (mode == "stefanov") c.oracle_mode = OracleMode::StefanovExtension;
    else bad("oracle.mode", "expected two_directions or stefanov");
    const auto interp = get<std::string>(o, "interpolation", "oracle", "nearest");
    if (interp == "nearest") c.interpolation.kind = Interpolation::Nearest;
    else if (interp == "linear_k") c.interpolation.kind = Interpolation::LinearK;
    else bad("oracle.interpolation", "expected nearest or linear_k");
    c.interpolation.max_distance = get(o, "max_distance", "oracle", c.interpolation.max_distance);
  }

  if (root.contains("born")) {
    check_keys(root["born"], "born", {"hermitian"});
    c.born_hermitian = get(root["born"], "hermitian", "born", false);
  }

  if (root.contains("cutoff")) {
    const json& k = root["cutoff"];
    check_keys(k, "cutoff", {"xi_max_fraction", "delta", "k_max"});
    c.recon.cut.xi_max_fraction = get(k, "xi_max_fraction", "cutoff", c.recon.cut.xi_max_fraction);
    c.recon.cut.delta = get(k, "delta", "cutoff", c.recon.cut.delta);
    if (k.contains("k_max") && !k["k_max"].is_null()) c.recon.cut.k_max = get<double>(k, "k_max", "cutoff", 0.0);
  }

  if (root.contains("recon")) {
    const json& r = root["recon"];
    check_keys(r, "recon", {"m", "ms", "ell_max", "alpha", "fp_tol", "enforce_real", "k_quantum"});
    c.recon.m = get(r, "m", "recon", c.recon.m);
    c.recon_ms = get(r, "ms", "recon", c.recon_ms);
    c.recon.ell_max = get(r, "ell_max", "recon", c.recon.ell_max);
    c.recon.alpha = get(r, "alpha", "recon", c.recon.alpha);
    c.recon.fp_tol = get(r, "fp_tol", "recon", c.recon.fp_tol);
    c.recon.enforce_real = get(r, "enforce_real", "recon", c.recon.enforce_real);
    c.recon.k_quantum = get(r, "k_quantum", "recon", c.recon.k_quantum);
  }

  if (root.contains("uniqueness")) {
    check_keys(root["uniqueness"], "uniqueness", {"runs"});
    c.uniqueness_runs = get(root["uniqueness"], "runs", "uniqueness", c.uniqueness_runs);
  }

  if (root.contains("pw")) {
    const json& p = root["pw"];
    check_keys(p, "pw", {"kappas", "zeta_count", "grid"});
    c.pw_kappas = get(p, "kappas", "pw", c.pw_kappas);
    c.pw_zeta_count = get(p, "zeta_count", "pw", c.pw_zeta_count);
    if (p.contains("grid") && !p["grid"].is_null()) c.pw_grid = parse_grid(p["grid"], "pw.grid");
  }

  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    fail(ErrorCode::Io, std::string("cannot read config: ") + e.what());
  }
  return from_json(text);
}

std::vector<std::string> RunConfig::validate() const {
  try {
    grid.validate();
  } catch (const Error& e) {
    bad("grid", e.what());
  }
  const int d = grid.d;
  if (std::abs(norm(theta0, d) - 1.0) > 1e-12) bad("theta0", "must be a unit vector");
  if (potential && potential->R != grid.R) bad("potential.R", "must equal grid.R");
  if (potential && !(potential->value >= 0.0)) bad("potential.value", "must be >= 0");
  if (!(solver.tol > 0.0)) bad("solver.tol", "must be positive");
  if (solver.max_iter < 1) bad("solver.max_iter", "must be >= 1");
  if (solver.resolvent.eps < 0.0) bad("resolvent.eps", "must be >= 0");
  if (!(forward_k > 0.0)) bad("forward.k", "must be positive");
  if (forward_omega_count < 1) bad("forward.omega_count", "must be >= 1");
  if (dataset_omega_count < 1) bad("dataset.omega_count", "must be >= 1");
  for (double k : dataset_k_list)
    if (!(k > 0.0)) bad("dataset.k_list", "every k must be positive");
  if (!(interpolation.max_distance >= 0.0)) bad("oracle.max_distance", "must be >= 0");
  for (int m : recon_ms)
    if (m < 1) bad("recon.ms", "every m must be >= 1");
  if (uniqueness_runs < 1) bad("uniqueness.runs", "must be >= 1");
  if (pw_zeta_count < 1) bad("pw.zeta_count", "must be >= 1");
  for (std::size_t i = 0; i < pw_kappas.size(); ++i) {
    if (!(pw_kappas[i] > 0.0)) bad("pw.kappas", "must be positive");
    if (i > 0 && !(pw_kappas[i] > pw_kappas[i - 1])) bad("pw.kappas", "must be increasing");
  }
  try {
    return recon.validate(d);
  } catch (const Error& e) {
    fail(ErrorCode::Config, std::string("config field 'recon'/'cutoff': ") + e.what());
  }
}

std::string RunConfig::to_json() const {
  const int d = grid.d;
  json j;
  j["grid"] = grid_json(grid);
  j["theta0"] = vec_json(theta0, d);
  j["seed"] = seed;
  if (potential) {
    json p = {{"kind", kind_name(potential->kind)},
              {"beta", potential->beta},
              {"value", potential->value},
              {"R", potential->R},
              {"seed", potential->seed},
              {"max_mode", potential->max_mode},
              {"zero_mean", potential->zero_mean}};
    p["decay"] = potential->decay ? json(*potential->decay) : json(nullptr);
    j["potential"] = p;
  } else {
    j["potential"] = nullptr;
  }
  j["potential_path"] = potential_path ? json(*potential_path) : json(nullptr);
  j["resolvent"] = {{"method", solver.resolvent.method == ResolventMethod::TruncatedKernel ? "truncated_kernel"
                                                                                          : "eps_multiplier"},
                    {"eps", solver.resolvent.eps}};
  j["solver"] = {{"tol", solver.tol},
                 {"max_iter", solver.max_iter},
                 {"method", solver.method == SolverMethod::Neumann ? "neumann" : "dense"},
                 {"born_only", solver.born_only}};
  j["forward"] = {{"k", forward_k},
                  {"theta", forward_theta ? vec_json(*forward_theta, d) : json(nullptr)},
                  {"omega_count", forward_omega_count}};
  j["dataset"] = {{"layout", dataset_layout == DatasetLayout::Ewald ? "ewald" : "product"},
                  {"k_list", dataset_k_list},
                  {"omega_count", dataset_omega_count},
                  {"path", dataset_path ? json(*dataset_path) : json(nullptr)},
                  {"paths", dataset_paths}};
  j["oracle"] = {{"backing", oracle_backing == OracleBacking::Synthetic ? "synthetic" : "dataset"},
                 {"mode", oracle_mode == OracleMode::TwoDirections ? "two_directions" : "stefanov"},
                 {"interpolation", interpolation.kind == Interpolation::Nearest ? "nearest" : "linear_k"},
                 {"max_distance", interpolation.max_distance}};
  j["born"] = {{"hermitian", born_hermitian}};
  j["cutoff"] = {{"xi_max_fraction", recon.cut.xi_max_fraction},
                 {"delta", recon.cut.delta},
                 {"k_max", recon.cut.k_max ? json(*recon.cut.k_max) : json(nullptr)}};
  j["recon"] = {{"m", recon.m},
                {"ms", recon_ms},
                {"ell_max", recon.ell_max},
                {"alpha", recon.alpha},
                {"fp_tol", recon.fp_tol},
                {"enforce_real", recon.enforce_real},
                {"k_quantum", recon.k_quantum}};
  j["uniqueness"] = {{"runs", uniqueness_runs}};
  j["pw"] = {{"kappas", pw_kappas},
             {"zeta_count", pw_zeta_count},
             {"grid", pw_grid ? grid_json(*pw_grid) : json(nullptr)}};
  return j.dump(2);
}

}  // namespace fixangle
