#include "fixangle/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "fixangle/error.hpp"

namespace fixangle {
namespace {

// FFTW's planner is not thread-safe; execution of a finished plan is. Plans
// are made with FFTW_ESTIMATE | FFTW_UNALIGNED so the chosen codelets do not
// depend on timing or on the alignment of the arrays passed at execution.
class PlanRegistry {
 public:
  static PlanRegistry& instance() {
    static PlanRegistry registry;
    return registry;
  }

  fftw_plan get(int d, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(d, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int dims[3] = {n, n, n};
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(d, dims, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanRegistry() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// (-1)^(sum of frequency indices); the grid origin sits at node N/2 per axis.
double parity(const GridSpec& spec, std::size_t flat) {
  int total = 0;
  for (int axis = 0; axis < spec.d; ++axis) {
    total += static_cast<int>(flat % spec.n);
    flat /= spec.n;
  }
  return total % 2 == 0 ? 1.0 : -1.0;
}

void execute(const GridSpec& spec, int sign, const std::vector<cplx>& in, std::vector<cplx>& out) {
  fftw_plan plan = PlanRegistry::instance().get(spec.d, spec.n, sign);
  // fftw_execute_dft does not write to its input for out-of-place complex plans.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

Spectrum forward_transform(const ComplexField& f) {
  Spectrum s(f.spec);
  execute(f.spec, FFTW_FORWARD, f.values, s.values);
  const double scale = f.spec.cell_volume();
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] *= scale * parity(f.spec, i);
  return s;
}

ComplexField inverse_transform(const Spectrum& s) {
  std::vector<cplx> tmp(s.values.size());
  for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = s.values[i] * parity(s.spec, i);
  ComplexField f(s.spec);
  execute(s.spec, FFTW_BACKWARD, tmp, f.values);
  const double scale = 1.0 / s.spec.box_volume();
  for (auto& v : f.values) v *= scale;
  return f;
}

double japanese_bracket(const Vec& xi, int d) { return std::sqrt(1.0 + dot(xi, xi, d)); }

double sobolev_norm(const Spectrum& s, double alpha) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double weight = std::pow(japanese_bracket(s.spec.frequency(i), s.spec.d), 2.0 * alpha);
    acc += weight * std::norm(s.values[i]);
  }
  return std::sqrt(acc / s.spec.box_volume());
}

double sobolev_norm(const ComplexField& f, double alpha) {
  return sobolev_norm(forward_transform(f), alpha);
}

double sobolev_norm(const RealField& f, double alpha) {
  return sobolev_norm(ComplexField(f), alpha);
}

double cutoff_profile(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  auto g = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double a = g(2.0 - t);
  const double b = g(t - 1.0);
  return a / (a + b);
}

RealField bump_cutoff(const GridSpec& spec) {
  if (!(2.0 * spec.R < spec.L))
    fail(ErrorCode::Config, "bump_cutoff: need 2R < L");
  RealField phi(spec);
  for (std::size_t i = 0; i < phi.values.size(); ++i)
    phi.values[i] = cutoff_profile(norm(spec.node(i), spec.d) / spec.R);
  return phi;
}

}  // namespace fixangle
