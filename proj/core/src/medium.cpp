#include "vgstar/medium.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "json_io.hpp"
#include "vgstar/error.hpp"
#include "vgstar/rng.hpp"

namespace vgs {
namespace {

constexpr std::uint64_t kStreamX = 1, kStreamY = 2, kStreamZ = 3, kStreamMark = 4,
                        kStreamContrast = 5;

double ball_measure(int dim, double r) {
  return dim == 3 ? 4.0 / 3.0 * kPi * r * r * r : kPi * r * r;
}

// Measure of the intersection of two balls of radius r at distance d.
double ball_overlap(int dim, double r, double d) {
  if (d >= 2.0 * r) return 0.0;
  if (dim == 3) return kPi / 12.0 * (4.0 * r + d) * (2.0 * r - d) * (2.0 * r - d);
  return 2.0 * r * r * std::acos(d / (2.0 * r)) - 0.5 * d * std::sqrt(4.0 * r * r - d * d);
}

double draw_contrast(const MediumSpec& s, std::uint64_t key, std::uint64_t index) {
  const double u = uniform01(key, kStreamContrast, index);
  if (s.contrast_law == ContrastLaw::two_point_symmetric)
    return u < 0.5 ? -s.contrast_std : s.contrast_std;
  return (2.0 * u - 1.0) * std::sqrt(3.0) * s.contrast_std;
}

double wrap(double v, double lo, double hi) {
  const double period = hi - lo;
  double t = std::fmod(v - lo, period);
  if (t < 0) t += period;
  return lo + t;
}

}  // namespace

void MediumSpec::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidSpec, m); };
  if (dim != 2 && dim != 3) bad("dim must be 2 or 3");
  if (!(domain.hi.x > domain.lo.x) || !(domain.hi.z > domain.lo.z) ||
      (dim == 3 && !(domain.hi.y > domain.lo.y)))
    bad("domain box is empty");
  if (!(c_star > 0.0)) bad("c_star must be positive");
  if (!(n0 > 0.0)) bad("n0 must be positive");
  if (std::fabs(n0 * c_star * c_star - 1.0) > 1e-9) bad("n0 must equal 1/c_star^2");
  if (!(scatterer_radius > 0.0)) bad("scatterer_radius must be positive");
  if (min_distance < 2.0 * scatterer_radius) bad("min_distance must be >= 2 * scatterer_radius");
  if (!(target_volume_fraction > 0.0) || !(target_volume_fraction < 1.0))
    bad("target_volume_fraction must lie in (0, 1)");
  if (dim == 2 && target_volume_fraction > 0.5) bad("2D volume fraction above 0.5");
  if (contrast_std < 0.0) bad("contrast_std must be >= 0");
  const Box cb = center_box();
  if (!(cb.hi.x > cb.lo.x) || !(cb.hi.z > cb.lo.z)) bad("domain smaller than a scatterer");
}

double MediumSpec::scatterer_measure() const { return ball_measure(dim, scatterer_radius); }

Box MediumSpec::center_box() const {
  const double r = scatterer_radius;
  Box b = domain;
  b.lo.x += r; b.hi.x -= r;
  b.lo.z += r; b.hi.z -= r;
  if (dim == 3) { b.lo.y += r; b.hi.y -= r; } else { b.lo.y = b.hi.y = 0.0; }
  return b;
}

double MediumSpec::intensity() const {
  return target_volume_fraction * domain.measure(dim) / (scatterer_measure() * center_box().measure(dim));
}

MediumSpec make_medium_spec(int dim, const Box& domain, double c_star, double radius,
                            double fraction, double rel_contrast_std, std::uint64_t seed) {
  MediumSpec s;
  s.dim = dim;
  s.domain = domain;
  s.c_star = c_star;
  s.n0 = 1.0 / (c_star * c_star);
  s.scatterer_radius = radius;
  s.min_distance = 2.0 * radius;
  s.target_volume_fraction = fraction;
  s.contrast_std = rel_contrast_std * s.n0;
  s.seed = seed;
  return s;
}

double MediumRealization::volume_fraction() const {
  return static_cast<double>(centers.size()) * spec.scatterer_measure() / spec.domain.measure(spec.dim);
}

namespace {

// One Matern-II draw with all random streams keyed by `key`.
MediumRealization sample_once(const MediumSpec& spec, std::uint64_t key) {
  const int dim = spec.dim;
  const Box cb = spec.center_box();
  const double delta = spec.min_distance;
  const double v_delta = ball_measure(dim, delta);
  // Retained Matern-II intensity is (1 - exp(-lp v)) / v; invert for lp.
  const double lambda_target = spec.intensity();
  const double load = lambda_target * v_delta;
  if (load >= 0.999) {
    std::ostringstream os;
    os << "volume fraction " << spec.target_volume_fraction
       << " exceeds what Matern-II thinning can reach at min_distance " << delta;
    throw Error(ErrorCode::PackingInfeasible, os.str());
  }
  const double lambda_p = -std::log1p(-load) / v_delta;
  const double mean_count = lambda_p * cb.measure(dim);
  if (mean_count > 5e8) throw Error(ErrorCode::InvalidSpec, "proposal count too large");

  std::mt19937_64 count_rng(splitmix64(key));
  std::poisson_distribution<long> poisson(mean_count);
  const long n = poisson(count_rng);

  std::vector<Point> prop(n);
  std::vector<double> mark(n);
  const Point ext = cb.hi - cb.lo;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    prop[i].x = cb.lo.x + ext.x * uniform01(key, kStreamX, u);
    prop[i].y = dim == 3 ? cb.lo.y + ext.y * uniform01(key, kStreamY, u) : 0.0;
    prop[i].z = cb.lo.z + ext.z * uniform01(key, kStreamZ, u);
    mark[i] = uniform01(key, kStreamMark, u);
  }

  // Bucket grid with cell size delta: neighbours within delta sit in the
  // 3^dim surrounding cells.
  const int gx = std::max(1, static_cast<int>(std::ceil(ext.x / delta)));
  const int gy = dim == 3 ? std::max(1, static_cast<int>(std::ceil(ext.y / delta))) : 1;
  const int gz = std::max(1, static_cast<int>(std::ceil(ext.z / delta)));
  auto cell = [&](double v, double o, int g) {
    return std::clamp(static_cast<int>((v - o) / delta), 0, g - 1);
  };
  std::vector<std::vector<long>> grid(static_cast<size_t>(gx) * gy * gz);
  for (long i = 0; i < n; ++i) {
    const int cx = cell(prop[i].x, cb.lo.x, gx), cy = dim == 3 ? cell(prop[i].y, cb.lo.y, gy) : 0,
              cz = cell(prop[i].z, cb.lo.z, gz);
    grid[(static_cast<size_t>(cz) * gy + cy) * gx + cx].push_back(i);
  }

  std::vector<char> keep(n, 1);
  const int ry = dim == 3 ? 1 : 0;
#pragma omp parallel for schedule(dynamic, 1024)
  for (long i = 0; i < n; ++i) {
    const int cx = cell(prop[i].x, cb.lo.x, gx), cy = dim == 3 ? cell(prop[i].y, cb.lo.y, gy) : 0,
              cz = cell(prop[i].z, cb.lo.z, gz);
    bool survives = true;
    for (int dz = -1; dz <= 1 && survives; ++dz)
      for (int dy = -ry; dy <= ry && survives; ++dy)
        for (int dx = -1; dx <= 1 && survives; ++dx) {
          const int x = cx + dx, y = cy + dy, z = cz + dz;
          if (x < 0 || x >= gx || y < 0 || y >= gy || z < 0 || z >= gz) continue;
          for (long j : grid[(static_cast<size_t>(z) * gy + y) * gx + x]) {
            if (j == i) continue;
            if (distance(prop[i], prop[j]) > delta) continue;
            if (mark[j] < mark[i] || (mark[j] == mark[i] && j < i)) { survives = false; break; }
          }
        }
    keep[i] = survives ? 1 : 0;
  }

  MediumRealization out;
  out.spec = spec;
  for (long i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    out.centers.push_back(prop[i]);
    out.contrasts.push_back(draw_contrast(spec, key, static_cast<std::uint64_t>(i)));
  }
  return out;
}

}  // namespace

MediumRealization sample_matern(const MediumSpec& spec) {
  spec.validate();
  // Small domains fluctuate; redraw on fresh keyed streams until the
  // realized fraction is within 10% of the target.
  constexpr int kAttempts = 16;
  double achieved = 0.0;
  for (int a = 0; a < kAttempts; ++a) {
    const std::uint64_t key = a == 0 ? spec.seed : hash_key(spec.seed, 0xA77E, a);
    MediumRealization r = sample_once(spec, key);
    achieved = r.volume_fraction();
    if (std::fabs(achieved / spec.target_volume_fraction - 1.0) <= 0.10) return r;
  }
  std::ostringstream os;
  os << "realized volume fraction " << achieved << " stays more than 10% off target "
     << spec.target_volume_fraction << " after " << kAttempts << " draws";
  throw Error(ErrorCode::PackingInfeasible, os.str());
}

double index_field_eval(const MediumRealization& r, const Point& x) {
  const double rad = r.spec.scatterer_radius;
  for (size_t i = 0; i < r.centers.size(); ++i)
    if (distance(x, r.centers[i]) < rad) return r.spec.n0 + r.contrasts[i];
  return r.spec.n0;
}

ScattererIndex::ScattererIndex(const MediumRealization& r) : r_(&r) {
  const Box b = r.spec.domain;
  cell_ = std::max(r.spec.scatterer_radius * 2.0, 1e-12);
  origin_ = b.lo;
  nx_ = std::max(1, static_cast<int>(std::ceil((b.hi.x - b.lo.x) / cell_)));
  ny_ = r.spec.dim == 3 ? std::max(1, static_cast<int>(std::ceil((b.hi.y - b.lo.y) / cell_))) : 1;
  nz_ = std::max(1, static_cast<int>(std::ceil((b.hi.z - b.lo.z) / cell_)));
  buckets_.resize(static_cast<size_t>(nx_) * ny_ * nz_);
  for (size_t i = 0; i < r.centers.size(); ++i) {
    const Point& c = r.centers[i];
    const long cx = std::clamp(cell_of(c.x, origin_.x, nx_), 0L, static_cast<long>(nx_) - 1);
    const long cy = r.spec.dim == 3 ? std::clamp(cell_of(c.y, origin_.y, ny_), 0L, static_cast<long>(ny_) - 1) : 0;
    const long cz = std::clamp(cell_of(c.z, origin_.z, nz_), 0L, static_cast<long>(nz_) - 1);
    buckets_[(static_cast<size_t>(cz) * ny_ + cy) * nx_ + cx].push_back(static_cast<int>(i));
  }
}

long ScattererIndex::cell_of(double v, double o, int) const {
  return static_cast<long>(std::floor((v - o) / cell_));
}

double ScattererIndex::eval(const Point& x) const {
  const MediumRealization& r = *r_;
  const double rad = r.spec.scatterer_radius;
  const long cx = cell_of(x.x, origin_.x, nx_), cz = cell_of(x.z, origin_.z, nz_);
  const long cy = r.spec.dim == 3 ? cell_of(x.y, origin_.y, ny_) : 0;
  const int ry = r.spec.dim == 3 ? 1 : 0;
  for (long dz = -1; dz <= 1; ++dz)
    for (long dy = -ry; dy <= ry; ++dy)
      for (long dx = -1; dx <= 1; ++dx) {
        const long a = cx + dx, b = cy + dy, c = cz + dz;
        if (a < 0 || a >= nx_ || b < 0 || b >= ny_ || c < 0 || c >= nz_) continue;
        for (int i : buckets_[(static_cast<size_t>(c) * ny_ + b) * nx_ + a])
          if (distance(x, r.centers[i]) < rad) return r.spec.n0 + r.contrasts[i];
      }
  return r.spec.n0;
}

MediumRealization shift_realization(const MediumRealization& r, const Point& dy) {
  MediumRealization out = r;
  if (dy.x == 0.0 && dy.y == 0.0 && dy.z == 0.0) return out;
  const Box cb = r.spec.center_box();
  for (Point& c : out.centers) {
    c.x = wrap(c.x - dy.x, cb.lo.x, cb.hi.x);
    if (r.spec.dim == 3) c.y = wrap(c.y - dy.y, cb.lo.y, cb.hi.y);
    c.z = wrap(c.z - dy.z, cb.lo.z, cb.hi.z);
  }
  return out;
}

CovarianceEstimate covariance_ensemble(const std::vector<MediumRealization>& rs, const Point& lag,
                                       int points_per_axis) {
  if (rs.size() < 2) throw Error(ErrorCode::InsufficientSamples, "ensemble covariance needs >= 2 realizations");
  const MediumSpec& s = rs.front().spec;
  const Box cb = s.center_box();
  // Probe points chosen so that both x and x + lag stay inside the box.
  std::vector<Point> probes;
  const int ny = s.dim == 3 ? points_per_axis : 1;
  for (int k = 0; k < points_per_axis; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < points_per_axis; ++i) {
        auto lerp = [&](double lo, double hi, double l, int idx, int n) {
          const double a = lo + std::max(0.0, -l), b = hi - std::max(0.0, l);
          return a + (b - a) * (idx + 0.5) / n;
        };
        Point p;
        p.x = lerp(cb.lo.x, cb.hi.x, lag.x, i, points_per_axis);
        p.y = s.dim == 3 ? lerp(cb.lo.y, cb.hi.y, lag.y, j, ny) : 0.0;
        p.z = lerp(cb.lo.z, cb.hi.z, lag.z, k, points_per_axis);
        probes.push_back(p);
      }
  const size_t n = rs.size(), m = probes.size();
  std::vector<double> a(n * m), b(n * m);
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < static_cast<long>(n); ++t) {
    ScattererIndex idx(rs[t]);
    for (size_t p = 0; p < m; ++p) {
      a[t * m + p] = idx.eval(probes[p]);
      b[t * m + p] = idx.eval(probes[p] + lag);
    }
  }
  // Per-point unbiased covariance across realizations, averaged over points;
  // the standard error uses per-realization contributions.
  std::vector<double> ma(m, 0.0), mb(m, 0.0);
  for (size_t t = 0; t < n; ++t)
    for (size_t p = 0; p < m; ++p) { ma[p] += a[t * m + p]; mb[p] += b[t * m + p]; }
  for (size_t p = 0; p < m; ++p) { ma[p] /= n; mb[p] /= n; }
  std::vector<double> per(n, 0.0);
  for (size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (size_t p = 0; p < m; ++p) acc += (a[t * m + p] - ma[p]) * (b[t * m + p] - mb[p]);
    per[t] = acc / m;
  }
  double sum = 0.0;
  for (double v : per) sum += v;
  CovarianceEstimate est;
  est.value = sum / (n - 1);
  const double mean = sum / n;
  double var = 0.0;
  for (double v : per) var += (v - mean) * (v - mean);
  var /= (n - 1);
  est.std_error = std::sqrt(var / n) * static_cast<double>(n) / (n - 1);
  est.n_samples = n;
  return est;
}

CovarianceEstimate covariance_spatial(const MediumRealization& r, const Point& lag, double spacing) {
  const MediumSpec& s = r.spec;
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidSpec, "spacing must be positive");
  const Box cb = s.center_box();
  const double x0 = cb.lo.x + std::max(0.0, -lag.x), x1 = cb.hi.x - std::max(0.0, lag.x);
  const double z0 = cb.lo.z + std::max(0.0, -lag.z), z1 = cb.hi.z - std::max(0.0, lag.z);
  const double y0 = s.dim == 3 ? cb.lo.y + std::max(0.0, -lag.y) : 0.0;
  const double y1 = s.dim == 3 ? cb.hi.y - std::max(0.0, lag.y) : 0.0;
  if (x1 <= x0 || z1 <= z0 || (s.dim == 3 && y1 <= y0))
    throw Error(ErrorCode::InsufficientSamples, "lag larger than the domain");
  const long nx = std::max(1L, static_cast<long>((x1 - x0) / spacing));
  const long nz = std::max(1L, static_cast<long>((z1 - z0) / spacing));
  const long ny = s.dim == 3 ? std::max(1L, static_cast<long>((y1 - y0) / spacing)) : 1;
  const long total = nx * ny * nz;
  if (total < 2) throw Error(ErrorCode::InsufficientSamples, "spatial covariance needs >= 2 samples");
  ScattererIndex idx(r);
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
#pragma omp parallel for reduction(+ : sa, sb, sab, saa, sbb) schedule(static)
  for (long t = 0; t < total; ++t) {
    const long i = t % nx, j = (t / nx) % ny, k = t / (nx * ny);
    Point p{x0 + (i + 0.5) * (x1 - x0) / nx, s.dim == 3 ? y0 + (j + 0.5) * (y1 - y0) / ny : 0.0,
            z0 + (k + 0.5) * (z1 - z0) / nz};
    const double a = idx.eval(p) - s.n0, b = idx.eval(p + lag) - s.n0;
    sa += a; sb += b; sab += a * b; saa += a * a; sbb += b * b;
  }
  const double n = static_cast<double>(total);
  CovarianceEstimate est;
  est.value = (sab - sa * sb / n) / (n - 1);
  // Naive error bar; neighbouring samples are correlated so this is optimistic.
  est.std_error = std::sqrt(std::max(0.0, saa / n) * std::max(0.0, sbb / n) / n);
  est.n_samples = static_cast<size_t>(total);
  return est;
}

double covariance_analytic(const MediumSpec& spec, const Point& lag) {
  return spec.contrast_std * spec.contrast_std * spec.intensity() *
         ball_overlap(spec.dim, spec.scatterer_radius, norm(lag));
}

double covariance_integral(const MediumSpec& spec) {
  const double q = spec.scatterer_measure();
  return spec.contrast_std * spec.contrast_std * spec.intensity() * q * q;
}

void write_medium_csv(const std::string& path, const MediumRealization& r) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f << std::setprecision(17);
  f << (r.spec.dim == 3 ? "x,y,z,radius,contrast\n" : "x,y,radius,contrast\n");
  for (size_t i = 0; i < r.centers.size(); ++i) {
    const Point& c = r.centers[i];
    if (r.spec.dim == 3) f << c.x << ',' << c.y << ',' << c.z;
    else f << c.x << ',' << c.z;
    f << ',' << r.spec.scatterer_radius << ',' << r.contrasts[i] << '\n';
  }
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

MediumRealization read_medium_csv(const std::string& path, const MediumSpec& spec) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw Error(ErrorCode::CorruptFile, "empty medium file " + path);
  const size_t ncol = spec.dim == 3 ? 5 : 4;
  MediumRealization r;
  r.spec = spec;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != ncol) throw Error(ErrorCode::CorruptFile, "bad row in " + path);
    if (spec.dim == 3) r.centers.push_back({v[0], v[1], v[2]});
    else r.centers.push_back({v[0], 0.0, v[1]});
    r.contrasts.push_back(v[ncol - 1]);
  }
  return r;
}

void write_medium_spec_json(const std::string& path, const MediumSpec& spec) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f << detail::medium_spec_to_json(spec).dump(2) << '\n';
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace vgs
