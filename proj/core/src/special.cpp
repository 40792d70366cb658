#include "vgstar/special.hpp"

#include <cmath>

namespace vgs {
namespace {

constexpr long double kEulerGamma = 0.57721566490153286060651209008240243L;
constexpr long double kPiL = 3.14159265358979323846264338327950288L;

// J0 and Y0 from the ascending series, accumulated in long double to
// keep the cancellation near x = 16 under control.
void series_j0_y0(double xd, double& j0, double& y0) {
  const long double x = xd;
  const long double q = x * x / 4.0L;
  long double term = 1.0L;  // (-q)^m / (m!)^2
  long double sj = 1.0L;
  long double sy = 0.0L;   // sum of (-1)^{m+1} H_m q^m/(m!)^2
  long double harmonic = 0.0L;
  for (int m = 1; m < 200; ++m) {
    term *= -q / (static_cast<long double>(m) * m);
    harmonic += 1.0L / m;
    sj += term;
    sy -= harmonic * term;
    if (std::fabs(term) * (1.0L + harmonic) < 1e-22L * (1.0L + std::fabs(sj))) break;
  }
  j0 = static_cast<double>(sj);
  y0 = static_cast<double>((2.0L / kPiL) * ((std::log(x / 2.0L) + kEulerGamma) * sj + sy));
}

// H0^(1)(x) ~ sqrt(2/(pi x)) e^{i(x - pi/4)} sum_k i^k a_k / x^k,
// a_k = (-1)^k [1^2 3^2 ... (2k-1)^2] / (k! 8^k). Stopped at the smallest term.
std::complex<double> asymptotic_h0(double x) {
  double re = 1.0, im = 0.0;
  double a = 1.0;          // |a_k| / x^k
  double prev = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= odd * odd / (8.0 * k * x);
    if (a > prev) break;
    prev = a;
    // i^k (-1)^k = (-i)^k
    switch (k & 3) {
      case 0: re += a; break;
      case 1: im -= a; break;
      case 2: re -= a; break;
      case 3: im += a; break;
    }
    if (a < 1e-17) break;
  }
  const double amp = std::sqrt(2.0 / (3.14159265358979323846 * x));
  const double ph = x - 0.78539816339744830962;
  const double c = std::cos(ph), s = std::sin(ph);
  return {amp * (c * re - s * im), amp * (s * re + c * im)};
}

}  // namespace

double bessel_j0(double x) {
  x = std::fabs(x);
  if (x < kHankelSwitch) {
    double j, y;
    series_j0_y0(x, j, y);
    return j;
  }
  return asymptotic_h0(x).real();
}

double bessel_y0(double x) {
  if (x < kHankelSwitch) {
    double j, y;
    series_j0_y0(x, j, y);
    return y;
  }
  return asymptotic_h0(x).imag();
}

std::complex<double> hankel1_0(double x) {
  if (x < kHankelSwitch) {
    double j, y;
    series_j0_y0(x, j, y);
    return {j, y};
  }
  return asymptotic_h0(x);
}

}  // namespace vgs
