#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace fixangle {

using cplx = std::complex<double>;

/// Fixed-size spatial or frequency vector; only the first `d` entries are used.
using Vec = std::array<double, 3>;

double dot(const Vec& a, const Vec& b, int d);
double norm(const Vec& a, int d);

/// Uniform periodic grid on [-L, L)^d with N nodes per axis.
///
/// Nodes are x_j = -L + h j, flattened row-major (axis 0 slowest). The dual
/// lattice is xi_n = (pi / L) n with n in [-N/2, N/2)^d; spectral arrays use
/// FFT ordering per axis (index m maps to n = m for m < N/2, else m - N).
struct GridSpec {
  int d = 2;
  int n = 32;
  double L = 2.0;
  double R = 0.5;

  double h() const { return 2.0 * L / n; }
  std::size_t size() const;
  double cell_volume() const;
  double box_volume() const;
  double nyquist() const;

  /// Throws Error(Config) unless d in {2,3}, N even and >= 8, L > 0, 0 < 2R < L.
  void validate() const;

  Vec node(std::size_t flat) const;
  Vec frequency(std::size_t flat) const;
  /// Flat index of the frequency -xi_n (aliased back into [-N/2, N/2)).
  std::size_t mirror_frequency(std::size_t flat) const;
  std::array<int, 3> frequency_index(std::size_t flat) const;

  bool operator==(const GridSpec&) const = default;
};

struct RealField {
  GridSpec spec;
  std::vector<double> values;

  RealField() = default;
  explicit RealField(const GridSpec& s) : spec(s), values(s.size(), 0.0) {}
  RealField(const GridSpec& s, std::vector<double> v);
};

struct ComplexField {
  GridSpec spec;
  std::vector<cplx> values;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& s) : spec(s), values(s.size()) {}
  ComplexField(const GridSpec& s, std::vector<cplx> v);
  explicit ComplexField(const RealField& f);

  RealField real_part() const;
  double imag_norm_l2() const;
};

/// Samples of the continuous Fourier transform on the dual lattice.
struct Spectrum {
  GridSpec spec;
  std::vector<cplx> values;

  Spectrum() = default;
  explicit Spectrum(const GridSpec& s) : spec(s), values(s.size()) {}
};

/// Discrete L2 norm (h^d sum |f|^2)^(1/2).
double l2_norm(const ComplexField& f);
double l2_norm(const RealField& f);
ComplexField operator-(const ComplexField& a, const ComplexField& b);
ComplexField operator*(const RealField& a, const ComplexField& b);

}  // namespace fixangle
