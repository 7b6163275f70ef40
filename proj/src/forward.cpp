#include "fixangle/forward.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "fixangle/error.hpp"
#include "fixangle/parallel.hpp"

namespace fixangle {

void require_unit(const Vec& v, int d, const char* what) {
  if (std::abs(norm(v, d) - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << what << " must be a unit vector (|v| = " << norm(v, d) << ")";
    fail(ErrorCode::Config, msg.str());
  }
}

namespace {

ComplexField plane_wave(const GridSpec& spec, const Vec& direction, double k) {
  ComplexField w(spec);
  for (std::size_t i = 0; i < w.values.size(); ++i)
    w.values[i] = std::polar(1.0, k * dot(direction, spec.node(i), spec.d));
  return w;
}

ScatterSolution solve_neumann(const RealField& q, const ResolventPlan& plan, ScatterSolution sol,
                              const SolverOptions& options) {
  const ComplexField u0 = plan.apply(q * plane_wave(q.spec, sol.theta, sol.k));
  const double scale = l2_norm(u0);
  if (scale == 0.0) {
    sol.u_s = u0;
    sol.iterations = 1;
    sol.residual = 0.0;
    return sol;
  }
  ComplexField u = u0;
  int stalled = 0;
  double previous = INFINITY;
  for (int it = 1; it <= options.max_iter; ++it) {
    ComplexField next = plan.apply(q * u);
    for (std::size_t i = 0; i < next.values.size(); ++i) next.values[i] += u0.values[i];
    const double residual = l2_norm(next - u) / scale;
    sol.residual_history.push_back(residual);
    u = std::move(next);
    if (!std::isfinite(residual)) break;
    if (residual <= options.tol) {
      sol.u_s = std::move(u);
      sol.iterations = it;
      sol.residual = residual;
      return sol;
    }
    stalled = residual >= previous ? stalled + 1 : 0;
    previous = residual;
    if (stalled >= 5) break;
  }
  std::ostringstream msg;
  msg << "Neumann iteration does not contract at k = " << sol.k << " (residual "
      << (sol.residual_history.empty() ? 0.0 : sol.residual_history.back()) << " after "
      << sol.residual_history.size() << " steps); the potential is outside the small-norm regime";
  fail(ErrorCode::NoContraction, msg.str());
}

// Only nodes where q != 0 couple; the remaining rows of (I - R_k M_q) are the
// identity, so the system is solved on the support and u_s recovered from it.
ScatterSolution solve_dense(const RealField& q, const ResolventPlan& plan, ScatterSolution sol) {
  const GridSpec& spec = q.spec;
  if (spec.size() > kDenseSizeCap) {
    std::ostringstream msg;
    msg << "dense solve limited to N^d <= " << kDenseSizeCap << ", got " << spec.size();
    fail(ErrorCode::DenseTooLarge, msg.str());
  }
  const ComplexField incident = plane_wave(spec, sol.theta, sol.k);
  const ComplexField rhs = plan.apply(q * incident);
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < q.values.size(); ++i)
    if (q.values[i] != 0.0) support.push_back(i);
  const auto s = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(s, s);
  Eigen::VectorXcd b(s);
  ComplexField unit(spec);
  for (Eigen::Index c = 0; c < s; ++c) {
    std::fill(unit.values.begin(), unit.values.end(), cplx{});
    unit.values[support[c]] = q.values[support[c]];
    const ComplexField column = plan.apply(unit);
    for (Eigen::Index r = 0; r < s; ++r) A(r, c) -= column.values[support[r]];
    b(c) = rhs.values[support[c]];
  }
  const Eigen::VectorXcd w = A.partialPivLu().solve(b);
  ComplexField on_support(spec);
  for (Eigen::Index r = 0; r < s; ++r) on_support.values[support[r]] = q.values[support[r]] * w(r);
  ComplexField u = plan.apply(on_support);
  for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] += rhs.values[i];

  const double scale = l2_norm(rhs);
  ComplexField check = plan.apply(q * u);
  for (std::size_t i = 0; i < check.values.size(); ++i) check.values[i] += rhs.values[i];
  sol.residual = scale == 0.0 ? 0.0 : l2_norm(check - u) / scale;
  sol.iterations = 1;
  sol.u_s = std::move(u);
  return sol;
}

}  // namespace

ScatterSolution solve_scattered(const RealField& q, const Vec& theta, const ResolventPlan& plan,
                                const SolverOptions& options) {
  q.spec.validate();
  if (!(plan.spec() == q.spec)) fail(ErrorCode::GridMismatch, "solve_scattered: plan grid differs from q");
  require_unit(theta, q.spec.d, "incident direction");
  if (!(options.tol > 0.0)) fail(ErrorCode::Config, "solver tol must be positive");
  ScatterSolution sol;
  sol.theta = theta;
  sol.k = plan.k();
  if (options.born_only) {
    sol.u_s = ComplexField(q.spec);
    return sol;
  }
  if (options.method == SolverMethod::Dense) return solve_dense(q, plan, std::move(sol));
  return solve_neumann(q, plan, std::move(sol), options);
}

ScatterSolution solve_scattered(const RealField& q, const Vec& theta, double k,
                                const SolverOptions& options) {
  const ResolventPlan plan(q.spec, k, options.resolvent);
  return solve_scattered(q, theta, plan, options);
}

cplx far_field(const RealField& q, const ScatterSolution& sol, const Vec& omega) {
  const GridSpec& spec = q.spec;
  require_unit(omega, spec.d, "far-field direction");
  cplx acc{};
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    if (q.values[i] == 0.0) continue;
    const Vec x = spec.node(i);
    const cplx total = std::polar(1.0, sol.k * dot(sol.theta, x, spec.d)) + sol.u_s.values[i];
    acc += std::polar(1.0, -sol.k * dot(omega, x, spec.d)) * q.values[i] * total;
  }
  return acc * spec.cell_volume();
}

cplx fourier_sample(const ComplexField& f, const Vec& xi) {
  const GridSpec& spec = f.spec;
  cplx acc{};
  for (std::size_t i = 0; i < f.values.size(); ++i)
    acc += std::polar(1.0, -dot(xi, spec.node(i), spec.d)) * f.values[i];
  return acc * spec.cell_volume();
}

cplx fourier_sample(const RealField& f, const Vec& xi) { return fourier_sample(ComplexField(f), xi); }

bool sample_order(const FarFieldSample& a, const FarFieldSample& b) {
  if (a.sign != b.sign) return a.sign > b.sign;
  if (a.k != b.k) return a.k < b.k;
  return a.omega < b.omega;
}

std::size_t FarFieldDataset::k_count() const {
  std::set<double> ks;
  for (const auto& s : samples) ks.insert(s.k);
  return ks.size();
}

std::size_t FarFieldDataset::omega_count() const {
  std::set<Vec> omegas;
  for (const auto& s : samples) omegas.insert(s.omega);
  return omegas.size();
}

void FarFieldDataset::sort() { std::sort(samples.begin(), samples.end(), sample_order); }

FarFieldDataset generate_dataset(const RealField& q, const Vec& theta0,
                                 std::vector<SampleRequest> requests,
                                 const SolverOptions& options) {
  const GridSpec& spec = q.spec;
  spec.validate();
  require_unit(theta0, spec.d, "theta0");
  for (const auto& r : requests) {
    if (!(r.k > 0.0)) fail(ErrorCode::InvalidWavenumber, "dataset: every k must be positive");
    if (r.sign != 1 && r.sign != -1) fail(ErrorCode::Config, "dataset: sign must be +1 or -1");
    require_unit(r.omega, spec.d, "dataset omega");
  }
  FarFieldDataset ds;
  ds.d = spec.d;
  ds.theta0 = theta0;
  ds.R = spec.R;
  ds.samples.resize(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i)
    ds.samples[i] = {requests[i].sign, requests[i].k, requests[i].omega, {}};
  ds.sort();
  ds.samples.erase(std::unique(ds.samples.begin(), ds.samples.end(),
                               [](const FarFieldSample& a, const FarFieldSample& b) {
                                 return a.sign == b.sign && a.k == b.k && a.omega == b.omega;
                               }),
                   ds.samples.end());

  // One solve per distinct (sign, k); samples are contiguous in that order.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < ds.samples.size();) {
    std::size_t j = i;
    while (j < ds.samples.size() && ds.samples[j].sign == ds.samples[i].sign &&
           ds.samples[j].k == ds.samples[i].k)
      ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  parallel_for(groups.size(), [&](std::size_t g) {
    const auto [begin, end] = groups[g];
    const int sign = ds.samples[begin].sign;
    const double k = ds.samples[begin].k;
    Vec theta{};
    for (int a = 0; a < spec.d; ++a) theta[a] = sign * theta0[a];
    ScatterSolution sol;
    try {
      sol = solve_scattered(q, theta, k, options);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " [sign " << (sign > 0 ? "+" : "-") << ", k = " << k << "]";
      throw Error(e.code(), msg.str());
    }
    for (std::size_t i = begin; i < end; ++i) ds.samples[i].value = far_field(q, sol, ds.samples[i].omega);
  });
  return ds;
}

FarFieldDataset generate_dataset(const RealField& q, const Vec& theta0,
                                 const std::vector<double>& k_list,
                                 const std::vector<Vec>& omega_list,
                                 const SolverOptions& options) {
  std::vector<SampleRequest> requests;
  requests.reserve(2 * k_list.size() * omega_list.size());
  for (int sign : {1, -1})
    for (double k : k_list)
      for (const Vec& w : omega_list) requests.push_back({sign, k, w});
  return generate_dataset(q, theta0, std::move(requests), options);
}

}  // namespace fixangle
