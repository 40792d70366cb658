#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vgstar/estimator.hpp"
#include "vgstar/imaging.hpp"
#include "vgstar/medium.hpp"

namespace vgs {

struct ValidationReport {
  std::string name;
  std::vector<double> measured;
  std::vector<double> expected;
  double tolerance = 0.0;
  std::string norm;  // how `passed` was decided
  bool passed = false;
  double runtime_s = 0.0;
  std::vector<std::pair<std::string, double>> details;
};

std::string to_json_line(const ValidationReport& r);
void append_jsonl(const std::string& path, const std::vector<ValidationReport>& reports);
void write_summary_csv(const std::string& path, const std::vector<ValidationReport>& reports);

// Monte-Carlo variance of I^c at the points `zs` against
// (int C) * sum_y |F^c(z, y)|^2 dA over the medium's centre box. Measured and
// expected are pooled over the points; passes when the ratio lies in
// [1/ratio_bound, ratio_bound].
struct VarianceIdentityOptions {
  double ratio_bound = 2.0;
  double quad_spacing = 0.0;  // <= 0: lambda_c / 10
};
ValidationReport check_variance_identity(const MediumSpec& spec, const ImagingConfig& cfg,
                                         const std::vector<Point>& zs, std::size_t n_realizations,
                                         const VarianceIdentityOptions& opt = {});

// Halves the scatterer radius at fixed volume fraction: the raw variance
// must drop by 2^d within `tolerance`, and the identity ratio must be stable.
ValidationReport check_variance_scaling(const MediumSpec& spec, const ImagingConfig& cfg,
                                        const std::vector<Point>& zs, std::size_t n_realizations,
                                        double tolerance = 0.25);

double relative_l2(const std::vector<double>& a, const std::vector<double>& ref);

// Relative L2 distance between F_j (one realization, spatial average over
// guide.shifts) and V_j (ensemble of n_realizations).
ValidationReport check_spatial_vs_ensemble(const MediumSpec& spec, const GuideStarSpec& guide,
                                           const ImagingConfig& cfg, std::size_t n_realizations,
                                           double tolerance = 0.3);

// Same distance for fresh shift sets of each size; passes when the distance
// is non-increasing in the shift count. `make_shifts(n, k)` returns the k-th
// set of n shifts.
ValidationReport check_spatial_vs_ensemble_trend(const MediumSpec& spec, const GuideStarSpec& guide,
                                                 const ImagingConfig& cfg, std::size_t n_realizations,
                                                 const std::vector<std::size_t>& shift_counts,
                                                 double shift_radius, std::uint64_t shift_seed);

// Sample variance of c_hat over `n_seeds` realizations for each shift count
// (fresh ring shift sets); passes when it is non-increasing in the count.
ValidationReport check_estimator_consistency(const MediumSpec& spec, const GuideStarSpec& guide,
                                             const ImagingConfig& cfg, std::size_t n_seeds,
                                             const std::vector<std::size_t>& shift_counts, double shift_radius,
                                             std::uint64_t shift_seed);

// Max-pixel error of the paraxial PSF against brute force over a window of
// +/- 3 resolution cells around phi_c(y0), for each eta level. Passes when
// the error strictly decreases and, for c == c_star, the last level is
// within `tolerance`.
ValidationReport check_paraxial_convergence(const ImagingConfig& base, const Point& y0,
                                            const std::vector<double>& eta_levels,
                                            double tolerance = 0.15, int window_pixels = 25);

// 3D G kernel against a tensor Gauss-Legendre quadrature at random arguments.
ValidationReport check_g_kernel_quadrature(int n_points, std::uint64_t seed, double tolerance = 1e-8);

// I^c(z(c) + dz) on the realization against I^c(z(c)) on the realization
// shifted by phi_c^{-1}(dz), relative L2 error over the shifts. For each eta
// level the configuration is eta_scaled and the shifts scale with eta.
ValidationReport check_local_stationarity(const MediumRealization& r, const GuideStarSpec& guide,
                                          const ImagingConfig& base, const std::vector<double>& eta_levels,
                                          double tolerance = 0.2);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace vgs
