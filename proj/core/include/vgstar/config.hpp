#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "vgstar/estimator.hpp"
#include "vgstar/greens.hpp"
#include "vgstar/imaging.hpp"
#include "vgstar/medium.hpp"

namespace vgs {

enum class ShiftLayout { ring, disc };

struct GuideConfig {
  Point s0;
  double t0 = 3e-5;
  double c_min = 1400.0;
  double c_max = 1600.0;
  double dc = 5.0;
  std::size_t n_shifts = 32;
  ShiftLayout layout = ShiftLayout::ring;
  double shift_radius = 0.0;      // <= 0: lambda_c / 2
  double min_shift_radius = 0.0;  // <= 0: 4 * scatterer radius (disc layout)
};

struct GridConfig {
  Point center{0.0, 0.0, 0.045};
  double dx = 0.0;  // <= 0: lambda_c / 8
  double dz = 0.0;  // <= 0: lambda_c / 8
  int nx = 161;
  int nz = 161;
};

struct ValidationConfig {
  std::size_t n_realizations = 100;
  double patch_half_width = 3e-3;  // local medium patch around the focus
  double variance_ratio_bound = 2.0;
  double variance_scaling_tolerance = 0.25;
  double spatial_ensemble_tolerance = 0.3;
  double paraxial_tolerance = 0.15;
  double stationarity_tolerance = 0.2;
};

struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0: runtime default
  MediumSpec medium;
  ProbeGeometry probe;
  Bandwidth bw;
  double c_image = 1500.0;
  GridConfig grid;
  GuideConfig guide;
  std::size_t ensemble_realizations = 50;
  std::optional<Box> ensemble_domain;  // defaults to the medium domain
  std::string out_dir = "out";
  std::optional<double> noise_snr_db;
  ValidationConfig validation;

  void validate() const;
  ImagingConfig imaging() const;
  PixelGrid pixel_grid() const;
  GuideStarSpec guide_spec() const;
  double wavelength() const { return 2.0 * kPi * medium.c_star / bw.omega_c; }
};

// Desk-scale defaults: 40 mm x 90 mm medium, 15-element emit and
// 64-element receive arrays over 30 mm, 128 frequencies around 3 MHz.
RunConfig default_run_config();

// Parses on top of the defaults; unknown keys and invalid values throw
// Error(InvalidConfig).
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace vgs
