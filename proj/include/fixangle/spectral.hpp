#pragma once

#include "fixangle/grid.hpp"

namespace fixangle {

/// F(xi_n) = h^d sum_j exp(-i xi_n . x_j) f(x_j), the lattice approximation of
/// the continuous Fourier transform.
Spectrum forward_transform(const ComplexField& f);

/// f(x_j) = (2L)^-d sum_n exp(i xi_n . x_j) F(xi_n); exact inverse of forward_transform.
ComplexField inverse_transform(const Spectrum& s);

/// <xi> = (1 + |xi|^2)^(1/2).
double japanese_bracket(const Vec& xi, int d);

/// Discrete W^{alpha,2} norm ((2L)^-d sum_n <xi_n>^{2 alpha} |F(xi_n)|^2)^(1/2).
double sobolev_norm(const Spectrum& s, double alpha);
double sobolev_norm(const ComplexField& f, double alpha);
double sobolev_norm(const RealField& f, double alpha);

/// Radial transition profile: 1 for t <= 1, 0 for t >= 2, C-infinity in between.
double cutoff_profile(double t);

/// phi(x) = cutoff_profile(|x| / R): 1 on |x| <= R, 0 on |x| >= 2R.
RealField bump_cutoff(const GridSpec& spec);

}  // namespace fixangle
