#include "vgstar/quadrature.hpp"

#include <array>
#include <cmath>

namespace vgs {
namespace {

constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, and the centre).
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void panel(const ComplexFn& f, double a, double b, std::complex<double>& kron,
           std::complex<double>& gauss) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const std::complex<double> fc = f(c);
  kron = kWk[7] * fc;
  gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXk[j];
    const std::complex<double> s = f(c - dx) + f(c + dx);
    kron += kWk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  kron *= h;
  gauss *= h;
}

std::complex<double> recurse(const ComplexFn& f, double a, double b, double tol, int depth) {
  std::complex<double> k, g;
  panel(f, a, b, k, g);
  if (depth <= 0 || std::abs(k - g) <= tol) return k;
  const double m = 0.5 * (a + b);
  return recurse(f, a, m, 0.5 * tol, depth - 1) + recurse(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace

std::complex<double> integrate_gk15(const ComplexFn& f, double a, double b, double abs_tol,
                                    int max_depth) {
  if (a == b) return {0.0, 0.0};
  return recurse(f, a, b, abs_tol, max_depth);
}

}  // namespace vgs
