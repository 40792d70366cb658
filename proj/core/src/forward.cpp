#include "vgstar/forward.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vgstar/error.hpp"
#include "vgstar/rng.hpp"

namespace vgs {
namespace {

static_assert(std::endian::native == std::endian::little, "RMX I/O assumes a little-endian host");

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Cubature {
  std::vector<Point> offsets;  // in units of the radius
  std::vector<double> weights;
};

Cubature make_cubature(int dim, bool refine) {
  Cubature c;
  c.offsets.push_back({0, 0, 0});
  if (!refine) {
    c.weights.push_back(1.0);
    return c;
  }
  if (dim == 2) {
    // Exact for polynomials of degree <= 3 on the disc.
    const double rho = std::sqrt(3.0) / 2.0;
    c.weights.push_back(1.0 / 3.0);
    for (Point p : {Point{rho, 0, 0}, Point{-rho, 0, 0}, Point{0, 0, rho}, Point{0, 0, -rho}}) {
      c.offsets.push_back(p);
      c.weights.push_back(1.0 / 6.0);
    }
  } else {
    const double rho = std::sqrt(0.8);
    c.weights.push_back(0.25);
    for (Point p : {Point{rho, 0, 0}, Point{-rho, 0, 0}, Point{0, rho, 0}, Point{0, -rho, 0},
                    Point{0, 0, rho}, Point{0, 0, -rho}}) {
      c.offsets.push_back(p);
      c.weights.push_back(0.125);
    }
  }
  return c;
}

void check_radius(const MediumRealization& r, const Bandwidth& bw) {
  const double lambda_min = 2.0 * kPi * r.spec.c_star / bw.omega_max();
  const double a = r.spec.scatterer_radius;
  if (a > lambda_min / 4.0) {
    std::ostringstream os;
    os << "scatterer radius " << a << " m exceeds lambda_min/4 = " << lambda_min / 4.0 << " m";
    throw Error(ErrorCode::ScattererTooLarge, os.str());
  }
  if (a > lambda_min / 20.0) {
    std::ostringstream os;
    os << "scatterer radius " << a << " m exceeds lambda_min/20 = " << lambda_min / 20.0
       << " m; the point-scatterer model is coarse";
    warn(os.str());
  }
}

template <class T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw Error(ErrorCode::CorruptFile, "truncated RMX file " + path);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

ReflectionMatrix empty_reflection_matrix(const ProbeGeometry& probe, const Bandwidth& bw) {
  ReflectionMatrix m;
  m.dim = probe.dim;
  m.emit = probe.emit_positions();
  m.recv = probe.receive_positions();
  for (const FreqNode& f : frequency_grid(bw)) {
    m.omega.push_back(f.omega);
    m.weight.push_back(f.weight);
  }
  m.data.assign(m.ne() * m.nr() * m.nw(), cplx(0.0, 0.0));
  return m;
}

ReflectionMatrix assemble_reflection_matrix(const MediumRealization& r, const ProbeGeometry& probe,
                                            const Bandwidth& bw, const AssemblyOptions& opt) {
  if (probe.dim != r.spec.dim) throw Error(ErrorCode::DimensionMismatch, "probe and medium dimensions differ");
  ReflectionMatrix m = empty_reflection_matrix(probe, bw);
  check_radius(r, bw);
  const int dim = probe.dim;
  const Cubature cub = make_cubature(dim, opt.refine_quadrature);
  const double q = r.spec.scatterer_measure();
  const double rad = r.spec.scatterer_radius;

  // Quadrature points: every scatterer contributes |cub| points carrying
  // contrast * |Q| * weight.
  std::vector<Point> pts;
  std::vector<double> amp;
  pts.reserve(r.size() * cub.offsets.size());
  for (size_t i = 0; i < r.size(); ++i) {
    if (r.contrasts[i] == 0.0) continue;
    for (size_t c = 0; c < cub.offsets.size(); ++c) {
      pts.push_back(r.centers[i] + rad * cub.offsets[c]);
      amp.push_back(r.contrasts[i] * q * cub.weights[c]);
    }
  }
  const long n = static_cast<long>(pts.size());
  if (n == 0) return m;
  const size_t ne = m.ne(), nr = m.nr();

  // Distances are frequency independent; keep them for all k.
  Eigen::MatrixXd de(ne, n), dr(nr, n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    for (size_t e = 0; e < ne; ++e) de(e, i) = distance(m.emit[e], pts[i]);
    for (size_t j = 0; j < nr; ++j) dr(j, i) = distance(m.recv[j], pts[i]);
  }
  for (const double d : {de.minCoeff(), dr.minCoeff()})
    if (d < 1e-12) throw Error(ErrorCode::SingularPoint, "scatterer coincides with a probe element");

  RowMat ge(ne, n), gr(nr, n);
  for (size_t k = 0; k < m.nw(); ++k) {
    const double w = m.omega[k];
    const double kk = w / r.spec.c_star;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
      for (size_t e = 0; e < ne; ++e) ge(e, i) = amp[i] * green_r(kk, de(e, i), dim);
      for (size_t j = 0; j < nr; ++j) gr(j, i) = green_r(kk, dr(j, i), dim);
    }
    Eigen::Map<RowMat> out(m.data.data() + k * ne * nr, ne, nr);
    out.noalias() = ge * gr.transpose();
    out *= w * w * pulse_spectrum(bw, w);
  }
  return m;
}

ReflectionMatrix point_target_matrix(const Point& y0, double tau, double c_star,
                                     const ProbeGeometry& probe, const Bandwidth& bw) {
  if (!(y0.z > 0.0)) throw Error(ErrorCode::InvalidTarget, "target must lie strictly below the probe");
  ReflectionMatrix m = empty_reflection_matrix(probe, bw);
  const size_t ne = m.ne(), nr = m.nr();
  std::vector<cplx> ge(ne), gr(nr);
  for (size_t k = 0; k < m.nw(); ++k) {
    const double w = m.omega[k];
    const double kk = w / c_star;
    for (size_t e = 0; e < ne; ++e) ge[e] = green(kk, m.emit[e], y0, probe.dim);
    for (size_t j = 0; j < nr; ++j) gr[j] = green(kk, m.recv[j], y0, probe.dim);
    const double s = w * w * tau * pulse_spectrum(bw, w);
    for (size_t e = 0; e < ne; ++e)
      for (size_t j = 0; j < nr; ++j) m.at(e, j, k) = s * ge[e] * gr[j];
  }
  return m;
}

cplx born2_residual(const MediumRealization& r, const ProbeGeometry& probe, const Bandwidth& bw,
                    std::size_t e, std::size_t r_idx, std::size_t k) {
  if (probe.dim != r.spec.dim) throw Error(ErrorCode::DimensionMismatch, "probe and medium dimensions differ");
  check_radius(r, bw);
  const auto freqs = frequency_grid(bw);
  const auto xe = probe.emit_positions();
  const auto xr = probe.receive_positions();
  if (e >= xe.size() || r_idx >= xr.size() || k >= freqs.size())
    throw Error(ErrorCode::DimensionMismatch, "entry index out of range");
  const double w = freqs[k].omega;
  const double kk = w / r.spec.c_star;
  const int dim = r.spec.dim;
  const double q = r.spec.scatterer_measure();
  const long n = static_cast<long>(r.size());

  std::vector<cplx> to_e(n);
  for (long j = 0; j < n; ++j) to_e[j] = r.contrasts[j] * green(kk, r.centers[j], xe[e], dim);
  double re = 0.0, im = 0.0;
#pragma omp parallel for reduction(+ : re, im) schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    if (r.contrasts[i] == 0.0) continue;
    cplx inner(0.0, 0.0);
    for (long j = 0; j < n; ++j) {
      if (j == i || to_e[j] == cplx(0.0, 0.0)) continue;
      inner += green_r(kk, distance(r.centers[i], r.centers[j]), dim) * to_e[j];
    }
    const cplx t = r.contrasts[i] * green(kk, r.centers[i], xr[r_idx], dim) * inner;
    re += t.real();
    im += t.imag();
  }
  return std::pow(w, 4) * q * q * pulse_spectrum(bw, w) * cplx(re, im);
}

void add_white_noise(ReflectionMatrix& m, double snr_db, std::uint64_t seed) {
  if (m.data.empty()) return;
  double power = 0.0;
  for (const cplx& v : m.data) power += std::norm(v);
  power /= static_cast<double>(m.data.size());
  const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0) / 2.0);
  CounterRng rng(seed, 0xA015Eull);
  for (cplx& v : m.data) {
    const double a = rng.normal(), b = rng.normal();
    v += cplx(sigma * a, sigma * b);
  }
}

std::vector<double> trapezoid_weights(const std::vector<double>& omega) {
  const size_t n = omega.size();
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double h = (omega.back() - omega.front()) / static_cast<double>(n - 1);
  for (size_t k = 0; k < n; ++k) w[k] = (k == 0 || k == n - 1) ? 0.5 * h : h;
  return w;
}

void write_rmx(const std::string& path, const ReflectionMatrix& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f.write("RMX1", 4);
  const int dim = m.dim;
  put<std::uint32_t>(f, static_cast<std::uint32_t>(dim));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(m.ne()));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(m.nr()));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(m.nw()));
  auto put_point = [&](const Point& p) {
    put<double>(f, p.x);
    if (dim == 3) put<double>(f, p.y);
    put<double>(f, p.z);
  };
  for (const Point& p : m.emit) put_point(p);
  for (const Point& p : m.recv) put_point(p);
  for (double w : m.omega) put<double>(f, w);
  for (size_t e = 0; e < m.ne(); ++e)
    for (size_t r = 0; r < m.nr(); ++r)
      for (size_t k = 0; k < m.nw(); ++k) {
        put<double>(f, m.at(e, r, k).real());
        put<double>(f, m.at(e, r, k).imag());
      }
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

ReflectionMatrix read_rmx(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, "RMX1", 4) != 0)
    throw Error(ErrorCode::CorruptFile, "bad RMX magic in " + path);
  ReflectionMatrix m;
  const auto dim = get<std::uint32_t>(f, path);
  const auto ne = get<std::uint32_t>(f, path);
  const auto nr = get<std::uint32_t>(f, path);
  const auto nw = get<std::uint32_t>(f, path);
  if ((dim != 2 && dim != 3) || ne == 0 || nr == 0 || nw == 0)
    throw Error(ErrorCode::CorruptFile, "bad RMX dimensions in " + path);
  // Reject headers whose payload cannot fit in the file before allocating.
  f.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(f.tellg());
  const std::uint64_t expect = 20 + 8ull * dim * (ne + nr) + 8ull * nw + 16ull * ne * nr * nw;
  if (file_size != expect) throw Error(ErrorCode::CorruptFile, "RMX size does not match header in " + path);
  f.seekg(20);
  m.dim = static_cast<int>(dim);
  auto get_point = [&]() {
    Point p;
    p.x = get<double>(f, path);
    if (dim == 3) p.y = get<double>(f, path);
    p.z = get<double>(f, path);
    return p;
  };
  for (std::uint32_t i = 0; i < ne; ++i) m.emit.push_back(get_point());
  for (std::uint32_t i = 0; i < nr; ++i) m.recv.push_back(get_point());
  for (std::uint32_t i = 0; i < nw; ++i) m.omega.push_back(get<double>(f, path));
  m.weight = trapezoid_weights(m.omega);
  m.data.assign(static_cast<size_t>(ne) * nr * nw, cplx(0.0, 0.0));
  for (size_t e = 0; e < ne; ++e)
    for (size_t r = 0; r < nr; ++r)
      for (size_t k = 0; k < nw; ++k) {
        const double re = get<double>(f, path);
        const double im = get<double>(f, path);
        m.at(e, r, k) = cplx(re, im);
      }
  return m;
}

}  // namespace vgs
