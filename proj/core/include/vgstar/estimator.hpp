#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vgstar/forward.hpp"
#include "vgstar/imaging.hpp"
#include "vgstar/medium.hpp"

namespace vgs {

struct GuideStarSpec {
  Point s0;                   // transverse slowness-like offset, s^2/m
  double t0 = 0.0;            // s
  std::vector<double> c_grid; // strictly increasing, uniform step
  std::vector<Point> shifts;  // image-space offsets around each moving pixel

  void validate() const;
  std::size_t n_shifts() const { return shifts.size(); }
  double dc() const { return c_grid.size() > 1 ? c_grid[1] - c_grid[0] : 0.0; }
};

std::vector<double> make_c_grid(double c_min, double c_max, double dc);

// n offsets on a ring of the given radius with jittered angles.
std::vector<Point> ring_shifts(std::size_t n, double radius, std::uint64_t seed);
// n offsets filling the annulus min_radius <= |dz| <= radius with area-uniform
// stratified radii and jittered angles.
std::vector<Point> disc_shifts(std::size_t n, double radius, double min_radius, std::uint64_t seed);

// True when every shift satisfies 2 * radius < |dz| < wavelength.
bool shifts_within_scale_window(const std::vector<Point>& shifts, double scatterer_radius,
                                double wavelength);

enum class TraceMethod { bruteforce, paraxial };

// F^c(phi_c(y0), y0) for each c on the grid.
std::vector<cplx> confocal_trace(const Point& y0, const std::vector<double>& c_grid, const ImagingConfig& cfg,
                                 TraceMethod method = TraceMethod::bruteforce);

// argmax |trace|, ties to the smaller c; optional parabolic refinement on |trace|^2.
double amplitude_estimate(const std::vector<cplx>& trace, const std::vector<double>& c_grid,
                          bool refine = false);

struct KMatrix {
  std::size_t n_shifts = 0;
  std::size_t n_c = 0;
  std::vector<cplx> values;  // row i (shift), column j (speed)

  cplx& at(std::size_t i, std::size_t j) { return values[i * n_c + j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return values[i * n_c + j]; }
};

// K[i][j] = I^{c_j}(psi_{c_j}(s0, t0) + dz_i). When `region` is given every
// evaluation point must lie inside it; points above the probe always fail.
KMatrix build_K_matrix(const ReflectionMatrix& m, const GuideStarSpec& spec,
                       const std::optional<Box>& region = std::nullopt);

struct EstimatorReport {
  std::string mode = "spatial";
  KMatrix K;
  std::vector<double> F;
  std::vector<double> c_grid;
  double c_hat = 0.0;
  std::size_t n_shifts = 0;
  std::uint64_t seed = 0;
};

// F_j = mean_i |K_ij|^2 and c_hat = c_grid[argmax F] (ties to the smaller c).
EstimatorReport spatial_variance_estimate(const KMatrix& k, const std::vector<double>& c_grid);

// V_j = mean over realizations of |I^{c_j}(psi_{c_j}(s0, t0))|^2. Realization n
// uses seed derive_seed(mspec.seed, n).
std::vector<double> ensemble_variance_estimate(const MediumSpec& mspec, std::size_t n_realizations,
                                               const GuideStarSpec& spec, const ImagingConfig& cfg);

std::size_t argmax_first(const std::vector<double>& v);

void write_report_json(const std::string& path, const EstimatorReport& r);
void write_curve_csv(const std::string& path, const std::vector<double>& c_grid, const std::vector<double>& f,
                     const std::string& column = "F");
void write_k_abs_csv(const std::string& path, const KMatrix& k);
// "KMX1", u32 n_shifts, u32 n_c, f64 c_grid[n_c], then (re, im) f64 pairs row by row.
void write_kmx(const std::string& path, const KMatrix& k, const std::vector<double>& c_grid);
KMatrix read_kmx(const std::string& path, std::vector<double>* c_grid = nullptr);

}  // namespace vgs
