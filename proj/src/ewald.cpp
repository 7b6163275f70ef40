#include "fixangle/ewald.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fixangle/error.hpp"
#include "fixangle/parallel.hpp"
#include "fixangle/spectral.hpp"

namespace fixangle {

EwaldPoint ewald_decompose(const Vec& xi, const Vec& theta0, int d) {
  const double xi2 = dot(xi, xi, d);
  const double proj = dot(xi, theta0, d);
  if (xi2 == 0.0 || proj == 0.0) {
    std::ostringstream msg;
    msg << "ewald_decompose: frequency on the degenerate set (|xi|^2 = " << xi2
        << ", xi.theta0 = " << proj << ")";
    fail(ErrorCode::DegenerateFrequency, msg.str());
  }
  EwaldPoint p;
  p.xi = xi;
  p.sign = proj < 0.0 ? 1 : -1;
  for (int a = 0; a < d; ++a) p.theta_eff[a] = p.sign * theta0[a];
  const double t = p.sign * proj;  // xi . theta_eff < 0
  const double c = -2.0 * t / xi2;
  for (int a = 0; a < d; ++a) p.omega[a] = c * xi[a] + p.theta_eff[a];
  p.k = -xi2 / (2.0 * t);
  return p;
}

double CutoffConfig::effective_k_max(const GridSpec& spec) const {
  return k_max ? *k_max : xi_max(spec) / (2.0 * delta);
}

void CutoffConfig::validate() const {
  if (!(xi_max_fraction > 0.0 && xi_max_fraction <= 1.0))
    fail(ErrorCode::Config, "cutoff.xi_max_fraction must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::Config, "cutoff.delta must lie in (0, 1)");
  if (k_max && !(*k_max > 0.0)) fail(ErrorCode::Config, "cutoff.k_max must be positive");
}

std::vector<RetainedPoint> retained_points(const GridSpec& spec, const Vec& theta0,
                                           const CutoffConfig& cut) {
  cut.validate();
  const double xi_max = cut.xi_max(spec);
  const double k_max = cut.effective_k_max(spec);
  std::vector<RetainedPoint> out;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto idx = spec.frequency_index(i);
    bool edge = false;
    for (int a = 0; a < spec.d; ++a) edge = edge || idx[a] == -spec.n / 2;
    if (edge) continue;
    const Vec xi = spec.frequency(i);
    const double mag = norm(xi, spec.d);
    if (mag == 0.0 || mag > xi_max) continue;
    if (std::abs(dot(xi, theta0, spec.d)) < cut.delta * mag) continue;
    EwaldPoint p = ewald_decompose(xi, theta0, spec.d);
    if (p.k > k_max) continue;
    out.push_back({i, p});
  }
  return out;
}

cplx FarFieldOracle::at(const EwaldPoint& p) const {
  if (mode_ == OracleMode::TwoDirections || p.sign == 1) return sample(p.sign, p.k, p.omega);
  Vec mirrored{};
  for (int a = 0; a < d_; ++a) mirrored[a] = -p.omega[a];
  return std::conj(sample(1, p.k, mirrored));
}

SyntheticOracle::SyntheticOracle(RealField q, const Vec& theta0, SolverOptions options,
                                 OracleMode mode, std::shared_ptr<PlanCache> plans)
    : FarFieldOracle(theta0, q.spec.d, mode),
      q_(std::move(q)),
      options_(options),
      plans_(plans ? std::move(plans) : std::make_shared<PlanCache>(q_.spec, options.resolvent)) {}

cplx SyntheticOracle::sample(int sign, double k, const Vec& omega) const {
  if (mode() == OracleMode::StefanovExtension && sign != 1)
    fail(ErrorCode::OracleFailure, "Stefanov-mode oracle only serves +theta0 data");
  Vec theta{};
  for (int a = 0; a < dimension(); ++a) theta[a] = sign * theta0()[a];
  try {
    const auto plan = plans_->get(k);
    return far_field(q_, solve_scattered(q_, theta, *plan, options_), omega);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoContraction) throw;
    throw Error(ErrorCode::OracleFailure, e.what());
  }
}

DatasetOracle::DatasetOracle(FarFieldDataset dataset, InterpolationConfig interp, OracleMode mode)
    : FarFieldOracle(dataset.theta0, dataset.d, mode), dataset_(std::move(dataset)), interp_(interp) {
  dataset_.sort();
}

cplx DatasetOracle::sample(int sign, double k, const Vec& omega) const {
  const int d = dimension();
  const auto& samples = dataset_.samples;
  auto distance = [&](const FarFieldSample& s) {
    double w2 = 0.0;
    for (int a = 0; a < d; ++a) w2 += (s.omega[a] - omega[a]) * (s.omega[a] - omega[a]);
    const double dk = (s.k - k) / k;
    return std::sqrt(dk * dk + w2);
  };
  auto omega_gap = [&](const FarFieldSample& s) {
    double w2 = 0.0;
    for (int a = 0; a < d; ++a) w2 += (s.omega[a] - omega[a]) * (s.omega[a] - omega[a]);
    return std::sqrt(w2);
  };
  const double tol = interp_.max_distance;

  if (interp_.kind == Interpolation::LinearK) {
    const FarFieldSample* below = nullptr;
    const FarFieldSample* above = nullptr;
    for (const auto& s : samples) {
      if (s.sign != sign || omega_gap(s) > tol) continue;
      if (s.k <= k && (!below || s.k > below->k)) below = &s;
      if (s.k >= k && (!above || s.k < above->k)) above = &s;
    }
    if (below && above) {
      if (above->k == below->k) return below->value;
      const double t = (k - below->k) / (above->k - below->k);
      return (1.0 - t) * below->value + t * above->value;
    }
  }

  // Samples are sorted by (sign desc, k), so only a k-window needs scanning.
  const double k_lo = k * (1.0 - tol);
  const double k_hi = k * (1.0 + tol);
  auto first = std::lower_bound(samples.begin(), samples.end(), k_lo, [&](const FarFieldSample& s, double key) {
    return s.sign != sign ? s.sign > sign : s.k < key;
  });
  const FarFieldSample* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (auto it = first; it != samples.end() && it->sign == sign && it->k <= k_hi; ++it) {
    const double dist = distance(*it);
    if (dist < best_distance) {
      best_distance = dist;
      best = &*it;
    }
  }
  if (!best || best_distance > tol) {
    std::ostringstream msg;
    msg << "dataset has no sample within distance " << tol << " of (sign " << sign << ", k = " << k
        << ")";
    fail(ErrorCode::OracleFailure, msg.str());
  }
  return best->value;
}

BornResult born_approximation(const FarFieldOracle& oracle, const GridSpec& spec,
                              const CutoffConfig& cut, bool enforce_hermitian) {
  spec.validate();
  if (oracle.dimension() != spec.d) fail(ErrorCode::GridMismatch, "oracle dimension differs from grid");
  const auto points = retained_points(spec, oracle.theta0(), cut);
  BornResult result;
  result.spectrum = Spectrum(spec);
  std::vector<cplx> values(points.size());
  parallel_for(points.size(), [&](std::size_t i) { values[i] = oracle.at(points[i].point); });
  for (std::size_t i = 0; i < points.size(); ++i) result.spectrum.values[points[i].flat] = values[i];

  double asym = 0.0;
  double total = 0.0;
  for (const auto& p : points) {
    const cplx v = result.spectrum.values[p.flat];
    const cplx mirror = result.spectrum.values[spec.mirror_frequency(p.flat)];
    asym += std::norm(v - std::conj(mirror));
    total += std::norm(v);
  }
  result.asymmetry = total > 0.0 ? std::sqrt(asym / total) : 0.0;
  if (enforce_hermitian) {
    Spectrum sym(spec);
    for (const auto& p : points) {
      const cplx mirror = result.spectrum.values[spec.mirror_frequency(p.flat)];
      sym.values[p.flat] = 0.5 * (result.spectrum.values[p.flat] + std::conj(mirror));
    }
    result.spectrum = std::move(sym);
  }
  result.retained = points.size();
  result.excluded_fraction = 1.0 - static_cast<double>(points.size()) / static_cast<double>(spec.size());
  result.field = inverse_transform(result.spectrum);
  return result;
}

std::vector<SampleRequest> ewald_requests(const GridSpec& spec, const Vec& theta0,
                                          const CutoffConfig& cut, OracleMode mode) {
  std::vector<SampleRequest> out;
  for (const auto& rp : retained_points(spec, theta0, cut)) {
    const auto& p = rp.point;
    if (mode == OracleMode::TwoDirections || p.sign == 1) {
      out.push_back({p.sign, p.k, p.omega});
    } else {
      Vec mirrored{};
      for (int a = 0; a < spec.d; ++a) mirrored[a] = -p.omega[a];
      out.push_back({1, p.k, mirrored});
    }
  }
  return out;
}

}  // namespace fixangle
