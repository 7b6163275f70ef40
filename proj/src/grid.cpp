#include "fixangle/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fixangle/error.hpp"

namespace fixangle {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::InvalidWavenumber: return "InvalidWavenumber";
    case ErrorCode::ResonantLattice: return "ResonantLattice";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NoContraction: return "NoContraction";
    case ErrorCode::DenseTooLarge: return "DenseTooLarge";
    case ErrorCode::DegenerateFrequency: return "DegenerateFrequency";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

double dot(const Vec& a, const Vec& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a, int d) { return std::sqrt(dot(a, a, d)); }

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

double GridSpec::cell_volume() const { return std::pow(h(), d); }
double GridSpec::box_volume() const { return std::pow(2.0 * L, d); }
double GridSpec::nyquist() const { return std::numbers::pi * n / (2.0 * L); }

void GridSpec::validate() const {
  if (d == 4)
    fail(ErrorCode::Config,
         "grid.d = 4 is rejected: the uniqueness theory covers it (beta > 2/3) "
         "but N^4 grids are impractical at desk scale");
  if (d != 2 && d != 3) fail(ErrorCode::Config, "grid.d must be 2 or 3");
  if (n < 8 || n % 2 != 0) fail(ErrorCode::Config, "grid.N must be even and >= 8");
  if (!(L > 0.0) || !std::isfinite(L)) fail(ErrorCode::Config, "grid.L must be positive");
  if (!(R > 0.0)) fail(ErrorCode::Config, "grid.R must be positive");
  if (!(2.0 * R < L))
    fail(ErrorCode::Config, "grid.R: need 2R < L so the cut-off support fits in the box");
}

Vec GridSpec::node(std::size_t flat) const {
  Vec x{0.0, 0.0, 0.0};
  const double step = h();
  for (int axis = d - 1; axis >= 0; --axis) {
    const auto j = static_cast<int>(flat % n);
    flat /= n;
    x[axis] = -L + step * j;
  }
  return x;
}

std::array<int, 3> GridSpec::frequency_index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int axis = d - 1; axis >= 0; --axis) {
    const auto m = static_cast<int>(flat % n);
    flat /= n;
    idx[axis] = m < n / 2 ? m : m - n;
  }
  return idx;
}

Vec GridSpec::frequency(std::size_t flat) const {
  const auto idx = frequency_index(flat);
  Vec xi{0.0, 0.0, 0.0};
  for (int axis = 0; axis < d; ++axis) xi[axis] = std::numbers::pi / L * idx[axis];
  return xi;
}

std::size_t GridSpec::mirror_frequency(std::size_t flat) const {
  const auto idx = frequency_index(flat);
  std::size_t out = 0;
  for (int axis = 0; axis < d; ++axis) {
    const int m = ((-idx[axis]) % n + n) % n;
    out = out * n + static_cast<std::size_t>(m);
  }
  return out;
}

RealField::RealField(const GridSpec& s, std::vector<double> v) : spec(s), values(std::move(v)) {
  if (values.size() != spec.size())
    fail(ErrorCode::GridMismatch, "RealField: value count does not match grid");
}

ComplexField::ComplexField(const GridSpec& s, std::vector<cplx> v) : spec(s), values(std::move(v)) {
  if (values.size() != spec.size())
    fail(ErrorCode::GridMismatch, "ComplexField: value count does not match grid");
}

ComplexField::ComplexField(const RealField& f) : spec(f.spec), values(f.values.size()) {
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f.values[i];
}

RealField ComplexField::real_part() const {
  RealField out(spec);
  for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = values[i].real();
  return out;
}

double ComplexField::imag_norm_l2() const {
  double s = 0.0;
  for (const auto& v : values) s += v.imag() * v.imag();
  return std::sqrt(s * spec.cell_volume());
}

double l2_norm(const ComplexField& f) {
  double s = 0.0;
  for (const auto& v : f.values) s += std::norm(v);
  return std::sqrt(s * f.spec.cell_volume());
}

double l2_norm(const RealField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s * f.spec.cell_volume());
}

ComplexField operator-(const ComplexField& a, const ComplexField& b) {
  if (!(a.spec == b.spec)) fail(ErrorCode::GridMismatch, "field difference on different grids");
  ComplexField out(a.spec);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] - b.values[i];
  return out;
}

ComplexField operator*(const RealField& a, const ComplexField& b) {
  if (!(a.spec == b.spec)) fail(ErrorCode::GridMismatch, "field product on different grids");
  ComplexField out(a.spec);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
  return out;
}

}  // namespace fixangle
