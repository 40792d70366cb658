#include "vgstar/greens.hpp"

#include <cmath>
#include <sstream>

#include "vgstar/error.hpp"
#include "vgstar/special.hpp"

namespace vgs {

cplx green_r(double k, double r, int dim) {
  if (dim == 3) {
    const double kr = k * r;
    return cplx(std::cos(kr), std::sin(kr)) / (4.0 * kPi * r);
  }
  const cplx h = hankel1_0(k * r);
  return {-0.25 * h.imag(), 0.25 * h.real()};
}

cplx green(double k, const Point& x, const Point& y, int dim) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::DimensionMismatch, "dim must be 2 or 3");
  if (!(k > 0.0)) throw Error(ErrorCode::InvalidSpec, "wavenumber must be positive");
  const double r = distance(x, y);
  if (r < 1e-12) throw Error(ErrorCode::SingularPoint, "source and observation points coincide");
  return green_r(k, r, dim);
}

void Bandwidth::validate() const {
  if (!(half_width > 0.0) || !(half_width < omega_c)) {
    std::ostringstream os;
    os << "need 0 < half_width < omega_c (got B=" << half_width << ", omega_c=" << omega_c << ")";
    throw Error(ErrorCode::InvalidSpec, os.str());
  }
  if (n_freq < 1) throw Error(ErrorCode::InvalidSpec, "n_freq must be >= 1");
  if (pulse == PulseShape::gaussian && !(sigma > 0.0))
    throw Error(ErrorCode::InvalidSpec, "gaussian pulse needs sigma > 0");
}

std::vector<FreqNode> frequency_grid(const Bandwidth& bw) {
  bw.validate();
  std::vector<FreqNode> out;
  if (bw.n_freq == 1) {
    out.push_back({bw.omega_c, 2.0 * bw.half_width});
    return out;
  }
  const int n = bw.n_freq;
  const double h = 2.0 * bw.half_width / (n - 1);
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double w = (k == 0 || k == n - 1) ? 0.5 * h : h;
    out.push_back({bw.omega_min() + h * k, w});
  }
  out.back().omega = bw.omega_max();
  return out;
}

double pulse_spectrum(const Bandwidth& bw, double omega) {
  if (bw.pulse == PulseShape::flat) return 1.0;
  const double d = omega - bw.omega_c;
  return std::exp(-d * d / (2.0 * bw.sigma * bw.sigma));
}

void ProbeGeometry::validate() const {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::InvalidSpec, "probe dim must be 2 or 3");
  if (!(half_aperture > 0.0)) throw Error(ErrorCode::InvalidSpec, "half_aperture must be > 0");
  if (n_elements_e < 1 || n_elements_r < 1)
    throw Error(ErrorCode::InvalidSpec, "element counts must be >= 1");
}

std::vector<Point> array_positions(int dim, double half_aperture, int n) {
  std::vector<double> u(n, 0.0);
  for (int i = 0; i < n && n > 1; ++i) 
    u[i] = half_aperture * (2.0 * i - (n - 1)) / (n - 1);
  std::vector<Point> out;
  if (dim == 3) {
    out.reserve(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) out.push_back({u[i], u[j], 0.0});
  } else {
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back({u[i], 0.0, 0.0});
  }
  return out;
}

std::vector<Point> ProbeGeometry::emit_positions() const {
  validate();
  return array_positions(dim, half_aperture, n_elements_e);
}

std::vector<Point> ProbeGeometry::receive_positions() const {
  validate();
  return array_positions(dim, half_aperture, n_elements_r);
}

}  // namespace vgs
