#pragma once

#include <complex>
#include <functional>

namespace vgs {

using ComplexFn = std::function<std::complex<double>(double)>;

// Adaptive Gauss-Kronrod (7/15) on [a, b]. Subdivides until the Kronrod
// vs Gauss difference on each panel drops below its share of `abs_tol`.
std::complex<double> integrate_gk15(const ComplexFn& f, double a, double b,
                                    double abs_tol = 1e-12, int max_depth = 40);

}  // namespace vgs
