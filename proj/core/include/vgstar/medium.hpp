#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vgstar/geometry.hpp"

namespace vgs {

enum class ContrastLaw { uniform_symmetric, two_point_symmetric };

struct MediumSpec {
  int dim = 2;
  Box domain;                     // metres; 2D uses x and z
  double n0 = 0.0;                // background index 1/c_star^2
  double c_star = 0.0;            // m/s
  double scatterer_radius = 0.0;  // m
  double min_distance = 0.0;      // centre-to-centre hardcore distance, m
  double target_volume_fraction = 0.0;
  double contrast_std = 0.0;      // std of n_i - n0
  ContrastLaw contrast_law = ContrastLaw::uniform_symmetric;
  std::uint64_t seed = 0;

  void validate() const;
  double scatterer_measure() const;  // |Q|
  // Box that scatterer centres are drawn from (domain shrunk by one radius).
  Box center_box() const;
  // Expected centre density inside center_box(), chosen so that the whole
  // domain reaches the target volume fraction.
  double intensity() const;
};

// Spec with n0 matched to c_star and the given relative contrast
// (contrast_std = rel_contrast_std * n0).
MediumSpec make_medium_spec(int dim, const Box& domain, double c_star, double radius,
                            double fraction, double rel_contrast_std, std::uint64_t seed);

struct MediumRealization {
  MediumSpec spec;
  std::vector<Point> centers;
  std::vector<double> contrasts;  // n_i - n0

  std::size_t size() const { return centers.size(); }
  double volume_fraction() const;
};

MediumRealization sample_matern(const MediumSpec& spec);

// n_eps(x): n0 + contrast_i inside scatterer i (open ball), n0 elsewhere.
// Linear scan; use ScattererIndex for repeated queries.
double index_field_eval(const MediumRealization& r, const Point& x);

// Uniform-grid bucket index over the realization's centres.
class ScattererIndex {
 public:
  explicit ScattererIndex(const MediumRealization& r);
  double eval(const Point& x) const;

 private:
  const MediumRealization* r_;
  Point origin_;
  double cell_;
  int nx_, ny_, nz_;
  std::vector<std::vector<int>> buckets_;
  long cell_of(double v, double o, int n) const;
};

// Realization whose index field at x equals the original one at x + dy.
// Centres are wrapped periodically into the centre box; the identity holds
// away from the wrap seam.
MediumRealization shift_realization(const MediumRealization& r, const Point& dy);

struct CovarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

// Ensemble mode: unbiased covariance across realizations at a grid of
// probe points, averaged over the points.
CovarianceEstimate covariance_ensemble(const std::vector<MediumRealization>& rs, const Point& lag,
                                       int points_per_axis = 16);
// Spatial mode: volume average over a regular grid inside the centre box.
CovarianceEstimate covariance_spatial(const MediumRealization& r, const Point& lag,
                                      double spacing);

// Closed forms for balls with i.i.d. zero-mean contrasts.
double covariance_analytic(const MediumSpec& spec, const Point& lag);
double covariance_integral(const MediumSpec& spec);  // sigma^2 * intensity * |Q|^2

// CSV with header x,y[,z],radius,contrast. In 2D the second column is depth.
void write_medium_csv(const std::string& path, const MediumRealization& r);
MediumRealization read_medium_csv(const std::string& path, const MediumSpec& spec);
void write_medium_spec_json(const std::string& path, const MediumSpec& spec);

}  // namespace vgs
