#include "fixangle/special.hpp"

#include <cmath>
#include <numbers>

namespace fixangle {
namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Ascending series. Term magnitudes peak near k = x/2, so cancellation costs
// about log10(e^x / (pi x)) digits; at x = 13 that is four.
void series(double x, double& j0, double& y0) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double harmonic = 0.0;
  double sum_j = 1.0;
  double sum_y = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    sum_j += term;
    sum_y -= harmonic * term;
    if (std::abs(term) * (1.0 + harmonic) < 1e-18 * (1.0 + std::abs(sum_j))) break;
  }
  j0 = sum_j;
  y0 = 2.0 / std::numbers::pi * ((std::log(0.5 * x) + kEulerGamma) * sum_j + sum_y);
}

// H0(x) ~ sqrt(2/(pi x)) e^{i(x - pi/4)} sum_k i^k a_k / x^k, truncated at the
// smallest term (about e^{-2x} relative).
std::complex<double> asymptotic(double x) {
  std::complex<double> sum = 1.0;
  std::complex<double> term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double c = -static_cast<double>((2 * k - 1) * (2 * k - 1)) / (8.0 * k * x);
    const auto next = term * std::complex<double>(0.0, c);
    const double mag = std::abs(next);
    if (mag >= last) break;
    term = next;
    last = mag;
    sum += term;
    if (mag < 1e-17) break;
  }
  const double phase = x - 0.25 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * std::polar(1.0, phase) * sum;
}

}  // namespace

double bessel_j0(double x) {
  x = std::abs(x);
  if (x <= kHankelSeriesLimit) {
    double j, y;
    if (x == 0.0) return 1.0;
    series(x, j, y);
    return j;
  }
  return asymptotic(x).real();
}

double bessel_y0(double x) {
  if (x <= kHankelSeriesLimit) {
    double j, y;
    series(x, j, y);
    return y;
  }
  return asymptotic(x).imag();
}

std::complex<double> hankel1_0(double x) {
  if (x <= kHankelSeriesLimit) {
    double j, y;
    series(x, j, y);
    return {j, y};
  }
  return asymptotic(x);
}

}  // namespace fixangle
