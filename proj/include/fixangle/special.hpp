#pragma once

#include <complex>

namespace fixangle {

/// Bessel J0 and Neumann Y0 for x > 0 (J0 also at 0). Ascending series for
/// x <= kHankelSeriesLimit, Hankel asymptotic expansion above.
double bessel_j0(double x);
double bessel_y0(double x);

/// H0^(1)(x) = J0(x) + i Y0(x), x > 0. Relative accuracy better than 1e-10.
std::complex<double> hankel1_0(double x);

inline constexpr double kHankelSeriesLimit = 13.0;

}  // namespace fixangle
