#include "vgstar/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json_io.hpp"
#include "vgstar/error.hpp"
#include "vgstar/rng.hpp"

namespace vgs {

void GuideStarSpec::validate() const {
  if (!(t0 > 0.0)) throw Error(ErrorCode::InvalidSpec, "t0 must be positive");
  if (c_grid.empty()) throw Error(ErrorCode::InvalidSpec, "c grid is empty");
  for (double c : c_grid)
    if (!(c > 0.0)) throw Error(ErrorCode::InvalidSpec, "c grid values must be positive");
  if (c_grid.size() > 1) {
    const double step = c_grid[1] - c_grid[0];
    for (size_t j = 1; j < c_grid.size(); ++j) {
      const double d = c_grid[j] - c_grid[j - 1];
      if (!(d > 0.0)) throw Error(ErrorCode::InvalidSpec, "c grid must be strictly increasing");
      if (std::fabs(d - step) > 1e-9 * std::fabs(step) + 1e-12)
        throw Error(ErrorCode::InvalidSpec, "c grid must be uniform");
    }
  }
  if (shifts.empty()) throw Error(ErrorCode::TooFewShifts, "no shifts given");
}

std::vector<double> make_c_grid(double c_min, double c_max, double dc) {
  if (!(dc > 0.0) || !(c_max >= c_min) || !(c_min > 0.0))
    throw Error(ErrorCode::InvalidSpec, "c grid needs 0 < c_min <= c_max and dc > 0");
  const long n = std::lround(std::floor((c_max - c_min) / dc + 1e-9)) + 1;
  std::vector<double> g(n);
  for (long j = 0; j < n; ++j) g[j] = c_min + dc * j;
  return g;
}

std::vector<Point> ring_shifts(std::size_t n, double radius, std::uint64_t seed) {
  std::vector<Point> out(n);
  for (size_t i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * (i + uniform01(seed, 0x51F7, i)) / static_cast<double>(n);
    out[i] = {radius * std::cos(th), 0.0, radius * std::sin(th)};
  }
  return out;
}

std::vector<Point> disc_shifts(std::size_t n, double radius, double min_radius, std::uint64_t seed) {
  if (!(radius > min_radius) || min_radius < 0.0)
    throw Error(ErrorCode::InvalidSpec, "disc shifts need 0 <= min_radius < radius");
  // Radius strata are assigned to angles through a seeded permutation.
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  for (size_t i = n; i > 1; --i) {
    const auto j = static_cast<size_t>(uniform01(seed, 0xD15C, i) * i);
    std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
  }
  std::vector<Point> out(n);
  const double a2 = min_radius * min_radius, b2 = radius * radius;
  for (size_t i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * (i + uniform01(seed, 0x51F7, i)) / static_cast<double>(n);
    const double u = (perm[i] + uniform01(seed, 0x7AD1, i)) / static_cast<double>(n);
    const double rr = std::sqrt(a2 + (b2 - a2) * u);
    out[i] = {rr * std::cos(th), 0.0, rr * std::sin(th)};
  }
  return out;
}

bool shifts_within_scale_window(const std::vector<Point>& shifts, double scatterer_radius, double wavelength) {
  for (const Point& s : shifts) {
    const double d = norm(s);
    if (!(d > 2.0 * scatterer_radius) || !(d < wavelength)) return false;
  }
  return true;
}

std::vector<cplx> confocal_trace(const Point& y0, const std::vector<double>& c_grid, const ImagingConfig& cfg,
                                 TraceMethod method) {
  std::vector<cplx> out;
  out.reserve(c_grid.size());
  for (double c : c_grid) {
    ImagingConfig k = cfg;
    k.c = c;
    if (method == TraceMethod::paraxial) out.push_back(psf_paraxial(y0, Point{}, k, ParaxialRegime::full));
    else out.push_back(psf_value(phi_c(y0, c, cfg.c_star), y0, k));
  }
  return out;
}

std::size_t argmax_first(const std::vector<double>& v) {
  size_t best = 0;
  for (size_t j = 1; j < v.size(); ++j)
    if (v[j] > v[best]) best = j;
  return best;
}

double amplitude_estimate(const std::vector<cplx>& trace, const std::vector<double>& c_grid, bool refine) {
  if (trace.empty()) throw Error(ErrorCode::EmptyTrace, "trace is empty");
  if (trace.size() != c_grid.size()) throw Error(ErrorCode::DimensionMismatch, "trace and c grid differ in length");
  std::vector<double> p(trace.size());
  for (size_t j = 0; j < trace.size(); ++j) p[j] = std::norm(trace[j]);
  const size_t j = argmax_first(p);
  if (!refine || j == 0 || j + 1 >= p.size()) return c_grid[j];
  const double den = p[j - 1] - 2.0 * p[j] + p[j + 1];
  if (!(den < 0.0)) return c_grid[j];
  const double off = 0.5 * (p[j - 1] - p[j + 1]) / den;
  return c_grid[j] + std::clamp(off, -0.5, 0.5) * (c_grid[j + 1] - c_grid[j]);
}

KMatrix build_K_matrix(const ReflectionMatrix& m, const GuideStarSpec& spec, const std::optional<Box>& region) {
  spec.validate();
  KMatrix k;
  k.n_shifts = spec.n_shifts();
  k.n_c = spec.c_grid.size();
  k.values.assign(k.n_shifts * k.n_c, cplx(0.0, 0.0));
  std::vector<std::vector<Point>> cols(k.n_c);
  for (size_t j = 0; j < k.n_c; ++j) {
    const Point zj = psi_c(spec.s0, spec.t0, spec.c_grid[j]);
    for (size_t i = 0; i < k.n_shifts; ++i) {
      const Point p = zj + spec.shifts[i];
      if (!(p.z > 0.0) || (region && !region->contains(p, m.dim))) {
        std::ostringstream os;
        os << "evaluation point (" << p.x << ", " << p.z << ") for c = " << spec.c_grid[j]
           << " lies outside the imageable region";
        throw Error(ErrorCode::OutOfDomain, os.str());
      }
      cols[j].push_back(p);
    }
  }
  for (size_t j = 0; j < k.n_c; ++j) {
    const auto v = confocal_values(m, spec.c_grid[j], cols[j]);
    for (size_t i = 0; i < k.n_shifts; ++i) k.at(i, j) = v[i];
  }
  return k;
}

EstimatorReport spatial_variance_estimate(const KMatrix& k, const std::vector<double>& c_grid) {
  if (k.n_shifts < 2) throw Error(ErrorCode::TooFewShifts, "spatial averaging needs at least 2 shifts");
  if (k.n_c != c_grid.size() || k.values.size() != k.n_shifts * k.n_c)
    throw Error(ErrorCode::DimensionMismatch, "K does not match the c grid");
  if (k.n_shifts < 16) {
    std::ostringstream os;
    os << "only " << k.n_shifts << " shifts; spatial averages will be noisy";
    warn(os.str());
  }
  EstimatorReport r;
  r.K = k;
  r.c_grid = c_grid;
  r.n_shifts = k.n_shifts;
  r.F.assign(k.n_c, 0.0);
  for (size_t j = 0; j < k.n_c; ++j) {
    double s = 0.0;
    for (size_t i = 0; i < k.n_shifts; ++i) s += std::norm(k.at(i, j));
    r.F[j] = s / static_cast<double>(k.n_shifts);
  }
  r.c_hat = c_grid[argmax_first(r.F)];
  return r;
}

std::vector<double> ensemble_variance_estimate(const MediumSpec& mspec, std::size_t n_realizations,
                                               const GuideStarSpec& spec, const ImagingConfig& cfg) {
  if (n_realizations < 2) throw Error(ErrorCode::InsufficientSamples, "ensemble needs at least 2 realizations");
  spec.validate();
  std::vector<Point> pts;
  for (double c : spec.c_grid) pts.push_back(psi_c(spec.s0, spec.t0, c));
  std::vector<double> v(spec.c_grid.size(), 0.0);
  for (size_t n = 0; n < n_realizations; ++n) {
    MediumSpec s = mspec;
    s.seed = derive_seed(mspec.seed, n);
    const MediumRealization r = sample_matern(s);
    const ReflectionMatrix m = assemble_reflection_matrix(r, cfg.probe, cfg.bw);
    for (size_t j = 0; j < spec.c_grid.size(); ++j) v[j] += std::norm(confocal_value(m, spec.c_grid[j], pts[j]));
  }
  for (double& x : v) x /= static_cast<double>(n_realizations);
  return v;
}

void write_report_json(const std::string& path, const EstimatorReport& r) {
  detail::json j;
  j["mode"] = r.mode;
  j["c_grid"] = r.c_grid;
  j["F"] = r.F;
  j["c_hat"] = r.c_hat;
  j["n_shifts"] = r.n_shifts;
  j["seed"] = r.seed;
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

void write_curve_csv(const std::string& path, const std::vector<double>& c_grid, const std::vector<double>& f,
                     const std::string& column) {
  std::ofstream o(path);
  if (!o) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  o << std::setprecision(17) << "c," << column << '\n';
  for (size_t j = 0; j < c_grid.size(); ++j) o << c_grid[j] << ',' << f[j] << '\n';
  if (!o) throw Error(ErrorCode::IoError, "write failed for " + path);
}

void write_k_abs_csv(const std::string& path, const KMatrix& k) {
  std::ofstream o(path);
  if (!o) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  o << std::setprecision(17);
  for (size_t i = 0; i < k.n_shifts; ++i) {
    for (size_t j = 0; j < k.n_c; ++j) o << (j ? "," : "") << std::abs(k.at(i, j));
    o << '\n';
  }
  if (!o) throw Error(ErrorCode::IoError, "write failed for " + path);
}

namespace {
template <class T>
void put(std::ostream& os, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  os.write(b, sizeof(T));
}
template <class T>
T get(std::istream& is, const std::string& path) {
  char b[sizeof(T)];
  if (!is.read(b, sizeof(T))) throw Error(ErrorCode::CorruptFile, "truncated KMX file " + path);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}
}  // namespace

void write_kmx(const std::string& path, const KMatrix& k, const std::vector<double>& c_grid) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f.write("KMX1", 4);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(k.n_shifts));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(k.n_c));
  for (size_t j = 0; j < k.n_c; ++j) put<double>(f, j < c_grid.size() ? c_grid[j] : 0.0);
  for (const cplx& v : k.values) {
    put<double>(f, v.real());
    put<double>(f, v.imag());
  }
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

KMatrix read_kmx(const std::string& path, std::vector<double>* c_grid) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, "KMX1", 4) != 0)
    throw Error(ErrorCode::CorruptFile, "bad KMX magic in " + path);
  KMatrix k;
  k.n_shifts = get<std::uint32_t>(f, path);
  k.n_c = get<std::uint32_t>(f, path);
  const std::uint64_t expect = 12 + 8ull * k.n_c + 16ull * k.n_shifts * k.n_c;
  f.seekg(0, std::ios::end);
  if (static_cast<std::uint64_t>(f.tellg()) != expect)
    throw Error(ErrorCode::CorruptFile, "KMX file size does not match its header: " + path);
  f.seekg(12);
  std::vector<double> g(k.n_c);
  for (double& c : g) c = get<double>(f, path);
  k.values.resize(k.n_shifts * k.n_c);
  for (cplx& v : k.values) {
    const double re = get<double>(f, path);
    const double im = get<double>(f, path);
    v = cplx(re, im);
  }
  if (c_grid) *c_grid = std::move(g);
  return k;
}

}  // namespace vgs
