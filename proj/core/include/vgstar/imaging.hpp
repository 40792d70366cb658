#pragma once

#include <string>
#include <vector>

#include "vgstar/forward.hpp"
#include "vgstar/geometry.hpp"
#include "vgstar/greens.hpp"

namespace vgs {

// Rectangular grid in the (x, z) plane at y = origin.y; values are
// stored z-major: index = iz * nx + ix.
struct PixelGrid {
  Point origin;
  double dx = 0.0;
  double dz = 0.0;
  int nx = 0;
  int nz = 0;
  std::vector<cplx> values;

  void validate() const;
  Point pixel(int ix, int iz) const { return {origin.x + ix * dx, origin.y, origin.z + iz * dz}; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * nz; }
  cplx& at(int ix, int iz) { return values[static_cast<std::size_t>(iz) * nx + ix]; }
  const cplx& at(int ix, int iz) const { return values[static_cast<std::size_t>(iz) * nx + ix]; }
};

// Grid of nx by nz pixels centred on `center`.
PixelGrid centered_grid(const Point& center, double dx, double dz, int nx, int nz);

struct ImagingConfig {
  double c = 0.0;       // trial backpropagation speed
  double c_star = 0.0;  // true background speed (PSF and oracle paths)
  ProbeGeometry probe;
  Bandwidth bw;

  void validate() const;
  double wavelength() const { return 2.0 * kPi * c_star / bw.omega_c; }
};

// I^c at arbitrary points; deterministic summation order per point.
std::vector<cplx> confocal_values(const ReflectionMatrix& m, double c, const std::vector<Point>& pts);
cplx confocal_value(const ReflectionMatrix& m, double c, const Point& z);
PixelGrid confocal_image(const ReflectionMatrix& m, const ImagingConfig& cfg, const PixelGrid& grid);

// F^c(z, y): image at z of a unit point contrast at y.
cplx psf_value(const Point& z, const Point& y, const ImagingConfig& cfg);
PixelGrid psf_bruteforce(const Point& y0, const ImagingConfig& cfg, const PixelGrid& grid);

// G(xi1, xi2) = int over [-1,1]^(dim-1) of exp(-i u.xi1 + i |u|^2 xi2 / 2) du.
// xi1 uses the x (and in 3D y) components. Absolute accuracy ~1e-12.
cplx g_kernel_1d(double xi1, double xi2);
cplx g_kernel(const Point& xi1, double xi2, int dim);

enum class MapDirection { forward, inverse };

// Image-space position of a physical point for speed ratio c/c_star:
// transverse scaled by (c/c_star)^2, axial by c/c_star.
Point phi_c(const Point& y, double c, double c_star, MapDirection dir = MapDirection::forward);

// Moving imaging point for travel time t0: (c^2 s0, c t0). s0 carries the
// transverse components in x (and y).
Point psi_c(const Point& s0, double t0, double c);

enum class ParaxialRegime { full, broadband };

// Leading-order paraxial PSF at z = phi_c(y0) + dz. Throws NotParaxial
// when |y0_perp| / y0_z > 0.5.
cplx psf_paraxial(const Point& y0, const Point& dz, const ImagingConfig& cfg,
                  ParaxialRegime regime = ParaxialRegime::full);

// Paraxial family member: omega_c, B and sigma scale as 1/eta, the
// half-aperture as sqrt(eta). Element counts scale as 1/sqrt(eta) so the
// pitch stays fixed in wavelengths.
ImagingConfig eta_scaled(const ImagingConfig& base, double eta);

struct FocalSpot {
  Point center;
  int peak_ix = 0;
  int peak_iz = 0;
  double peak_value = 0.0;
  std::vector<std::pair<int, int>> region;  // (ix, iz), 4-connected
  double width_transverse = 0.0;
  double width_axial = 0.0;
};

// -6 dB spot around the strongest pixel within `search_radius` of `near`
// (whole image when search_radius <= 0). Widths are measured along the row
// and column through the peak with linear interpolation of the crossings.
FocalSpot focal_spot(const PixelGrid& img, const Point& near, double search_radius);

// CSV rows x,z,abs,arg in z-major order; PGM of |I| scaled to its maximum.
void write_image_csv(const std::string& path, const PixelGrid& img);
void write_image_pgm(const std::string& path, const PixelGrid& img);

}  // namespace vgs
