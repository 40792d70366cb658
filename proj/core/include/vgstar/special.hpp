#pragma once

#include <complex>

namespace vgs {

// Bessel functions of order zero and the outgoing Hankel function
// H0^(1)(x) = J0(x) + i Y0(x), for x > 0. Relative accuracy near 1e-12 on
// |H0|; ascending series below `kHankelSwitch`, asymptotic series above.
inline constexpr double kHankelSwitch = 16.0;

double bessel_j0(double x);
double bessel_y0(double x);
std::complex<double> hankel1_0(double x);

}  // namespace vgs
