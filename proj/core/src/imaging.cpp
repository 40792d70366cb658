#include "vgstar/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <queue>

#include "vgstar/error.hpp"
#include "vgstar/quadrature.hpp"

namespace vgs {

void PixelGrid::validate() const {
  if (!(dx > 0.0) || !(dz > 0.0)) throw Error(ErrorCode::InvalidSpec, "pixel spacing must be positive");
  if (nx < 1 || nz < 1) throw Error(ErrorCode::InvalidSpec, "grid shape must be at least 1x1");
  if (!(origin.z > 0.0)) throw Error(ErrorCode::OutOfDomain, "grid must lie below the probe (z > 0)");
  if (!values.empty() && values.size() != size())
    throw Error(ErrorCode::DimensionMismatch, "grid values do not match its shape");
}

PixelGrid centered_grid(const Point& center, double dx, double dz, int nx, int nz) {
  PixelGrid g;
  g.dx = dx;
  g.dz = dz;
  g.nx = nx;
  g.nz = nz;
  g.origin = {center.x - 0.5 * (nx - 1) * dx, center.y, center.z - 0.5 * (nz - 1) * dz};
  return g;
}

void ImagingConfig::validate() const {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidSpec, "imaging speed c must be positive");
  if (!(c_star > 0.0)) throw Error(ErrorCode::InvalidSpec, "c_star must be positive");
  probe.validate();
  bw.validate();
}

std::vector<cplx> confocal_values(const ReflectionMatrix& m, double c, const std::vector<Point>& pts) {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidSpec, "imaging speed c must be positive");
  if (m.data.size() != m.ne() * m.nr() * m.nw() || m.weight.size() != m.nw())
    throw Error(ErrorCode::DimensionMismatch, "reflection matrix is inconsistent");
  const size_t ne = m.ne(), nr = m.nr(), nw = m.nw();
  const int dim = m.dim;
  std::vector<cplx> out(pts.size());
#pragma omp parallel
  {
    std::vector<double> de(ne), dr(nr);
    std::vector<cplx> ge(ne), gr(nr);
#pragma omp for schedule(dynamic, 4)
    for (long p = 0; p < static_cast<long>(pts.size()); ++p) {
      const Point& z = pts[p];
      for (size_t e = 0; e < ne; ++e) de[e] = distance(z, m.emit[e]);
      for (size_t r = 0; r < nr; ++r) dr[r] = distance(z, m.recv[r]);
      cplx acc(0.0, 0.0);
      for (size_t k = 0; k < nw; ++k) {
        const double kk = m.omega[k] / c;
        for (size_t e = 0; e < ne; ++e) ge[e] = green_r(kk, de[e], dim);
        for (size_t r = 0; r < nr; ++r) gr[r] = green_r(kk, dr[r], dim);
        const cplx* mk = m.data.data() + k * ne * nr;
        cplx s(0.0, 0.0);
        for (size_t e = 0; e < ne; ++e) {
          cplx row(0.0, 0.0);
          const cplx* me = mk + e * nr;
          for (size_t r = 0; r < nr; ++r) row += std::conj(me[r]) * gr[r];
          s += ge[e] * row;
        }
        acc += m.weight[k] * s;
      }
      out[p] = acc;
    }
  }
  return out;
}

cplx confocal_value(const ReflectionMatrix& m, double c, const Point& z) {
  return confocal_values(m, c, {z}).front();
}

PixelGrid confocal_image(const ReflectionMatrix& m, const ImagingConfig& cfg, const PixelGrid& grid) {
  grid.validate();
  if (m.dim != cfg.probe.dim) throw Error(ErrorCode::DimensionMismatch, "data and imaging dimensions differ");
  std::vector<Point> pts;
  pts.reserve(grid.size());
  for (int iz = 0; iz < grid.nz; ++iz)
    for (int ix = 0; ix < grid.nx; ++ix) pts.push_back(grid.pixel(ix, iz));
  PixelGrid out = grid;
  out.values = confocal_values(m, cfg.c, pts);
  return out;
}

namespace {

std::vector<cplx> psf_values(const std::vector<Point>& zs, const Point& y, const ImagingConfig& cfg) {
  cfg.validate();
  const int dim = cfg.probe.dim;
  const auto xe = cfg.probe.emit_positions();
  const auto xr = cfg.probe.receive_positions();
  const auto freqs = frequency_grid(cfg.bw);
  std::vector<double> ye(xe.size()), yr(xr.size());
  for (size_t e = 0; e < xe.size(); ++e) ye[e] = distance(y, xe[e]);
  for (size_t r = 0; r < xr.size(); ++r) yr[r] = distance(y, xr[r]);
  for (double d : ye) if (d < 1e-12) throw Error(ErrorCode::SingularPoint, "PSF source on an element");
  for (double d : yr) if (d < 1e-12) throw Error(ErrorCode::SingularPoint, "PSF source on an element");
  // Conjugated true-speed Green functions from y, one row per frequency.
  std::vector<cplx> he(freqs.size() * xe.size()), hr(freqs.size() * xr.size());
  for (size_t k = 0; k < freqs.size(); ++k) {
    const double ks = freqs[k].omega / cfg.c_star;
    for (size_t e = 0; e < xe.size(); ++e) he[k * xe.size() + e] = std::conj(green_r(ks, ye[e], dim));
    for (size_t r = 0; r < xr.size(); ++r) hr[k * xr.size() + r] = std::conj(green_r(ks, yr[r], dim));
  }
  std::vector<cplx> out(zs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long p = 0; p < static_cast<long>(zs.size()); ++p) {
    const Point& z = zs[p];
    std::vector<double> de(xe.size()), dr(xr.size());
    for (size_t e = 0; e < xe.size(); ++e) de[e] = distance(z, xe[e]);
    for (size_t r = 0; r < xr.size(); ++r) dr[r] = distance(z, xr[r]);
    cplx acc(0.0, 0.0);
    for (size_t k = 0; k < freqs.size(); ++k) {
      const double w = freqs[k].omega;
      const double kc = w / cfg.c;
      cplx se(0.0, 0.0), sr(0.0, 0.0);
      for (size_t e = 0; e < xe.size(); ++e) se += green_r(kc, de[e], dim) * he[k * xe.size() + e];
      for (size_t r = 0; r < xr.size(); ++r) sr += green_r(kc, dr[r], dim) * hr[k * xr.size() + r];
      acc += freqs[k].weight * w * w * pulse_spectrum(cfg.bw, w) * se * sr;
    }
    out[p] = acc;
  }
  return out;
}

}  // namespace

cplx psf_value(const Point& z, const Point& y, const ImagingConfig& cfg) {
  return psf_values({z}, y, cfg).front();
}

PixelGrid psf_bruteforce(const Point& y0, const ImagingConfig& cfg, const PixelGrid& grid) {
  grid.validate();
  std::vector<Point> pts;
  pts.reserve(grid.size());
  for (int iz = 0; iz < grid.nz; ++iz)
    for (int ix = 0; ix < grid.nx; ++ix) pts.push_back(grid.pixel(ix, iz));
  PixelGrid out = grid;
  out.values = psf_values(pts, y0, cfg);
  return out;
}

cplx g_kernel_1d(double xi1, double xi2) {
  if (xi1 == 0.0 && xi2 == 0.0) return {2.0, 0.0};
  // Split [-1, 1] so that each panel carries a bounded number of phase
  // oscillations; the phase derivative is at most |xi1| + |xi2|.
  const double omega = std::fabs(xi1) + std::fabs(xi2);
  const int panels = std::max(1, static_cast<int>(std::ceil(omega / 8.0)));
  const double h = 2.0 / panels;
  const double tol = 1e-13 / panels;
  auto f = [xi1, xi2](double u) {
    const double ph = -u * xi1 + 0.5 * u * u * xi2;
    return cplx(std::cos(ph), std::sin(ph));
  };
  cplx sum(0.0, 0.0);
  for (int p = 0; p < panels; ++p) {
    const double a = -1.0 + p * h;
    const double b = (p == panels - 1) ? 1.0 : a + h;
    sum += integrate_gk15(f, a, b, tol);
  }
  return sum;
}

cplx g_kernel(const Point& xi1, double xi2, int dim) {
  if (dim == 3) return g_kernel_1d(xi1.x, xi2) * g_kernel_1d(xi1.y, xi2);
  if (dim != 2) throw Error(ErrorCode::DimensionMismatch, "dim must be 2 or 3");
  return g_kernel_1d(xi1.x, xi2);
}

Point phi_c(const Point& y, double c, double c_star, MapDirection dir) {
  const double r = dir == MapDirection::forward ? c / c_star : c_star / c;
  return {r * r * y.x, r * r * y.y, r * y.z};
}

Point psi_c(const Point& s0, double t0, double c) {
  return {c * c * s0.x, c * c * s0.y, c * t0};
}

cplx psf_paraxial(const Point& y0, const Point& dz, const ImagingConfig& cfg, ParaxialRegime regime) {
  cfg.validate();
  const int dim = cfg.probe.dim;
  if (!(y0.z > 0.0)) throw Error(ErrorCode::InvalidTarget, "y0 must lie below the probe");
  if (transverse_norm(y0) / y0.z > 0.5) throw Error(ErrorCode::NotParaxial, "|y0_perp| / y0_z exceeds 0.5");
  const double cs = cfg.c_star;
  const double r = cfg.c / cs;
  const double l = cfg.probe.half_aperture;
  const double d = norm(y0);
  const double ne = dim == 3 ? double(cfg.probe.n_elements_e) * cfg.probe.n_elements_e : cfg.probe.n_elements_e;
  const double nr = dim == 3 ? double(cfg.probe.n_elements_r) * cfg.probe.n_elements_r : cfg.probe.n_elements_r;
  const double aperture = dim == 3 ? 4.0 * l * l : 2.0 * l;
  const double rho_e = ne / aperture, rho_r = nr / aperture;

  // Travel-time mismatch A (seconds) at z = phi_c(y0) + dz.
  const double yy = y0.x * y0.x + y0.y * y0.y;
  const double ydz = y0.x * dz.x + y0.y * dz.y;
  const double dd = dz.x * dz.x + dz.y * dz.y;
  const double a_time = 2.0 * dz.z / cfg.c + ((r * r - 1.0) * yy + 2.0 * ydz + dd / (r * r)) / (d * cs);

  // Amplitude prefactor; in 3D an extra omega^2 rides on each frequency.
  double pref;
  if (dim == 3) {
    pref = rho_e * rho_r * std::pow(l, 4) / (256.0 * std::pow(kPi, 4) * r * r * std::pow(d, 4));
  } else {
    pref = cs * cs * rho_e * rho_r * l * l / (64.0 * kPi * kPi * d * d);
  }
  auto g2 = [&](double w) {
    const double s = w * l / (r * r * cs * d);
    const Point xi1{s * dz.x, s * dz.y, 0.0};
    const double xi2 = (w * l * l / (cs * d)) * (1.0 / (r * r) - 1.0);
    const cplx g = g_kernel(xi1, xi2, dim);
    return g * g;
  };
  const Bandwidth& bw = cfg.bw;
  if (regime == ParaxialRegime::broadband) {
    const double wc = bw.omega_c;
    const double x = bw.half_width * a_time;
    cplx band;
    if (bw.pulse == PulseShape::flat) {
      const double sinc = std::fabs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
      band = 2.0 * bw.half_width * sinc * std::polar(1.0, wc * a_time);
    } else {
      const double s = bw.sigma;
      band = std::sqrt(2.0 * kPi) * s * std::exp(-0.5 * s * s * a_time * a_time) * std::polar(1.0, wc * a_time);
    }
    const double wfac = dim == 3 ? wc * wc : 1.0;
    return pref * wfac * band * g2(wc);
  }
  cplx acc(0.0, 0.0);
  for (const FreqNode& f : frequency_grid(bw)) {
    const double wfac = dim == 3 ? f.omega * f.omega : 1.0;
    acc += f.weight * wfac * pulse_spectrum(bw, f.omega) * std::polar(1.0, f.omega * a_time) * g2(f.omega);
  }
  return pref * acc;
}

ImagingConfig eta_scaled(const ImagingConfig& base, double eta) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidSpec, "eta must be positive");
  ImagingConfig c = base;
  c.bw.omega_c /= eta;
  c.bw.half_width /= eta;
  c.bw.sigma /= eta;
  c.probe.half_aperture *= std::sqrt(eta);
  const double grow = 1.0 / std::sqrt(eta);
  c.probe.n_elements_e = std::max(1, static_cast<int>(std::lround(base.probe.n_elements_e * grow)));
  c.probe.n_elements_r = std::max(1, static_cast<int>(std::lround(base.probe.n_elements_r * grow)));
  return c;
}

namespace {

// Position where |I| crosses `level` between pixel a (inside) and b (outside).
double crossing(double xa, double va, double xb, double vb, double level) {
  if (va == vb) return 0.5 * (xa + xb);
  const double t = (va - level) / (va - vb);
  return xa + t * (xb - xa);
}

}  // namespace

FocalSpot focal_spot(const PixelGrid& img, const Point& near, double search_radius) {
  if (img.values.size() != img.size() || img.size() == 0)
    throw Error(ErrorCode::NoPeakFound, "image has no values");
  int best_ix = -1, best_iz = -1;
  double best = 0.0;
  for (int iz = 0; iz < img.nz; ++iz)
    for (int ix = 0; ix < img.nx; ++ix) {
      if (search_radius > 0.0 && distance(img.pixel(ix, iz), near) > search_radius) continue;
      const double v = std::abs(img.at(ix, iz));
      if (v > best) { best = v; best_ix = ix; best_iz = iz; }
    }
  if (best_ix < 0 || !(best > 0.0)) throw Error(ErrorCode::NoPeakFound, "no non-zero pixel near the requested point");

  FocalSpot fs;
  fs.peak_ix = best_ix;
  fs.peak_iz = best_iz;
  fs.peak_value = best;
  fs.center = img.pixel(best_ix, best_iz);
  const double level = 0.5 * best;

  std::vector<char> seen(img.size(), 0);
  std::queue<std::pair<int, int>> todo;
  todo.push({best_ix, best_iz});
  seen[static_cast<size_t>(best_iz) * img.nx + best_ix] = 1;
  while (!todo.empty()) {
    auto [ix, iz] = todo.front();
    todo.pop();
    fs.region.push_back({ix, iz});
    const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& o : nb) {
      const int jx = ix + o[0], jz = iz + o[1];
      if (jx < 0 || jx >= img.nx || jz < 0 || jz >= img.nz) continue;
      const size_t id = static_cast<size_t>(jz) * img.nx + jx;
      if (seen[id] || std::abs(img.values[id]) < level) continue;
      seen[id] = 1;
      todo.push({jx, jz});
    }
  }

  auto in_region = [&](int ix, int iz) { return seen[static_cast<size_t>(iz) * img.nx + ix] != 0; };
  // Row through the peak.
  {
    int a = best_ix, b = best_ix;
    while (a - 1 >= 0 && in_region(a - 1, best_iz)) --a;
    while (b + 1 < img.nx && in_region(b + 1, best_iz)) ++b;
    const double xa = a > 0 ? crossing(a * img.dx, std::abs(img.at(a, best_iz)), (a - 1) * img.dx,
                                       std::abs(img.at(a - 1, best_iz)), level)
                            : 0.0;
    const double xb = b < img.nx - 1 ? crossing(b * img.dx, std::abs(img.at(b, best_iz)), (b + 1) * img.dx,
                                                std::abs(img.at(b + 1, best_iz)), level)
                                     : (img.nx - 1) * img.dx;
    fs.width_transverse = xb - xa;
  }
  // Column through the peak.
  {
    int a = best_iz, b = best_iz;
    while (a - 1 >= 0 && in_region(best_ix, a - 1)) --a;
    while (b + 1 < img.nz && in_region(best_ix, b + 1)) ++b;
    const double za = a > 0 ? crossing(a * img.dz, std::abs(img.at(best_ix, a)), (a - 1) * img.dz,
                                       std::abs(img.at(best_ix, a - 1)), level)
                            : 0.0;
    const double zb = b < img.nz - 1 ? crossing(b * img.dz, std::abs(img.at(best_ix, b)), (b + 1) * img.dz,
                                                std::abs(img.at(best_ix, b + 1)), level)
                                     : (img.nz - 1) * img.dz;
    fs.width_axial = zb - za;
  }
  return fs;
}

void write_image_csv(const std::string& path, const PixelGrid& img) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f << std::setprecision(17) << "x,z,abs,arg\n";
  for (int iz = 0; iz < img.nz; ++iz)
    for (int ix = 0; ix < img.nx; ++ix) {
      const Point p = img.pixel(ix, iz);
      const cplx v = img.at(ix, iz);
      f << p.x << ',' << p.z << ',' << std::abs(v) << ',' << std::arg(v) << '\n';
    }
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

void write_image_pgm(const std::string& path, const PixelGrid& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  double peak = 0.0;
  for (const cplx& v : img.values) peak = std::max(peak, std::abs(v));
  f << "P5\n" << img.nx << ' ' << img.nz << "\n255\n";
  for (int iz = 0; iz < img.nz; ++iz)
    for (int ix = 0; ix < img.nx; ++ix) {
      const double v = peak > 0.0 ? std::abs(img.at(ix, iz)) / peak : 0.0;
      f.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)))));
    }
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace vgs
