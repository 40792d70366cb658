#pragma once

#include <vector>

#include "vgstar/geometry.hpp"

namespace vgs {

// Outgoing free-space Helmholtz kernel: e^{ikr}/(4 pi r) in 3D and
// (i/4) H0^(1)(kr) in 2D. Throws SingularPoint when |x - y| < 1e-12 m.
cplx green(double k, const Point& x, const Point& y, int dim);

// Same kernel from a precomputed distance; no checks, for inner loops.
cplx green_r(double k, double r, int dim);

enum class PulseShape { flat, gaussian };

struct Bandwidth {
  double omega_c = 0.0;     // rad/s
  double half_width = 0.0;  // rad/s
  int n_freq = 1;
  PulseShape pulse = PulseShape::flat;
  double sigma = 0.0;       // rad/s, gaussian pulse only

  void validate() const;
  double omega_min() const { return omega_c - half_width; }
  double omega_max() const { return omega_c + half_width; }
};

struct FreqNode {
  double omega;
  double weight;
};

// Uniform nodes on [omega_c - B, omega_c + B] with trapezoid weights
// summing to 2B. A single node gets the full weight 2B.
std::vector<FreqNode> frequency_grid(const Bandwidth& bw);

// Real spectrum with unit peak at omega_c.
double pulse_spectrum(const Bandwidth& bw, double omega);

// Linear (2D) or square (3D) array on the plane z = 0, centred on the
// origin. In 3D the element counts are per side.
struct ProbeGeometry {
  int dim = 2;
  double half_aperture = 0.0;
  int n_elements_e = 1;
  int n_elements_r = 1;

  void validate() const;
  std::vector<Point> emit_positions() const;
  std::vector<Point> receive_positions() const;
};

// Equally spaced positions on [-l, l] (or [-l, l]^2); n = 1 sits at 0.
std::vector<Point> array_positions(int dim, double half_aperture, int n);

}  // namespace vgs
