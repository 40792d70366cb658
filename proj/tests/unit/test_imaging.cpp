#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "vgstar/error.hpp"
#include "vgstar/forward.hpp"
#include "vgstar/imaging.hpp"

using namespace vgs;

namespace {

ImagingConfig base_cfg(double c = 1500.0, int n_freq = 64) {
  ImagingConfig cfg;
  cfg.c = c;
  cfg.c_star = 1500.0;
  cfg.probe = ProbeGeometry{2, 0.015, 15, 64};
  cfg.bw = Bandwidth{2 * kPi * 3e6, 6e6, n_freq, PulseShape::flat, 0.0};
  return cfg;
}

// int_0^1 exp(i a u^2) du by its power series.
cplx fresnel_half(double a) {
  cplx sum = 0.0, term = 1.0;
  for (int n = 0; n < 200; ++n) {
    sum += term / double(2 * n + 1);
    term *= cplx(0, a) / double(n + 1);
  }
  return sum;
}

// Composite Simpson oracle for the 1D kernel.
cplx g_simpson(double xi1, double xi2, int n = 200000) {
  const double h = 2.0 / n;
  cplx s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = -1.0 + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::polar(1.0, -u * xi1 + 0.5 * u * u * xi2);
  }
  return s * h / 3.0;
}

PixelGrid argmax_grid(const PixelGrid& g, int& bx, int& bz) {
  double best = -1;
  for (int iz = 0; iz < g.nz; ++iz)
    for (int ix = 0; ix < g.nx; ++ix)
      if (std::abs(g.at(ix, iz)) > best) {
        best = std::abs(g.at(ix, iz));
        bx = ix;
        bz = iz;
      }
  return g;
}

}  // namespace

TEST_CASE("psf equals confocal imaging of point target data") {
  const ImagingConfig cfg = base_cfg(1480.0, 24);
  const Point y0{1e-3, 0.0, 0.03};
  const PixelGrid grid = centered_grid({1e-3, 0.0, 0.0296}, 6e-5, 6e-5, 9, 9);
  const PixelGrid a = psf_bruteforce(y0, cfg, grid);
  const ReflectionMatrix m = point_target_matrix(y0, 1.0, cfg.c_star, cfg.probe, cfg.bw);
  const PixelGrid b = confocal_image(m, cfg, grid);
  double peak = 0;
  for (const cplx& v : a.values) peak = std::max(peak, std::abs(v));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-10 * peak);
}

TEST_CASE("psf at the true speed peaks on the target and is hermitian") {
  const ImagingConfig cfg = base_cfg(1500.0, 32);
  const Point y0{2e-3, 0.0, 0.045};
  const double lam = cfg.wavelength();
  const PixelGrid g = psf_bruteforce(y0, cfg, centered_grid(y0, lam / 8, lam / 8, 11, 11));
  int bx = 0, bz = 0;
  argmax_grid(g, bx, bz);
  CHECK(bx == 5);
  CHECK(bz == 5);
  const Point z{2.3e-3, 0.0, 0.0452};
  CHECK(std::abs(psf_value(z, y0, cfg) - std::conj(psf_value(y0, z, cfg))) <= 1e-12 * std::abs(psf_value(z, y0, cfg)));
}

namespace {

void check_displacement(const ImagingConfig& base, const Point& y0, double ratio) {
  ImagingConfig cfg = base;
  cfg.c = cfg.c_star * ratio;
  const double px = cfg.wavelength() / 8;
  const Point target = phi_c(y0, cfg.c, cfg.c_star);
  // Window of +-2.5 wavelengths so off-centre defocus lobes are seen.
  const PixelGrid g = psf_bruteforce(y0, cfg, centered_grid(target, px, px, 41, 41));
  int bx = 0, bz = 0;
  argmax_grid(g, bx, bz);
  CAPTURE(ratio);
  CHECK(std::abs(bx - 20) <= 1);
  CHECK(std::abs(bz - 20) <= 1);
}

}  // namespace

TEST_CASE("psf peak moves to phi_c(y0) for mismatched speeds") {
  const Point y0{2e-3, 0.0, 0.045};
  for (double ratio : {0.9, 0.95, 1.05, 1.1}) check_displacement(base_cfg(1500.0, 64), y0, ratio);
}

TEST_CASE("psf peak displacement with a narrow aperture") {
  ImagingConfig cfg = base_cfg(1500.0, 64);
  cfg.probe.half_aperture = 0.005;
  cfg.probe.n_elements_e = 5;
  cfg.probe.n_elements_r = 21;
  for (double ratio : {0.9, 0.95, 1.05, 1.1}) check_displacement(cfg, {2e-3, 0.0, 0.045}, ratio);
}

TEST_CASE("kernel special values") {
  CHECK(std::abs(g_kernel_1d(0.0, 0.0) - cplx(2.0, 0.0)) < 1e-14);
  CHECK(std::abs(g_kernel_1d(kPi, 0.0)) < 1e-12);
  for (double x : {0.3, 1.7, 9.0, 41.0}) CHECK(std::abs(g_kernel_1d(x, 0.0) - 2.0 * std::sin(x) / x) < 1e-12);
  for (double a : {0.5, 2.0, 7.0, 15.0}) CHECK(std::abs(g_kernel_1d(0.0, a) - 2.0 * fresnel_half(a / 2)) < 1e-11);
  const cplx g3 = g_kernel({0, 0, 0}, 2.0, 3);
  const cplx f = 2.0 * fresnel_half(1.0);
  CHECK(std::abs(g3 - f * f) < 1e-11);
  CHECK(g3.real() == doctest::Approx(2.8876).epsilon(1e-4));
  CHECK(g3.imag() == doctest::Approx(2.2453).epsilon(1e-4));
}

TEST_CASE("kernel matches an independent quadrature and its symmetries") {
  const double pts[][2] = {{0.4, -1.3}, {5.0, 3.0}, {-12.0, 7.5}, {19.0, -18.0}, {-2.2, 20.0}};
  for (const auto& p : pts) {
    const cplx g = g_kernel_1d(p[0], p[1]);
    CHECK(std::abs(g - g_simpson(p[0], p[1])) < 1e-9);
    CHECK(std::abs(g_kernel_1d(-p[0], -p[1]) - std::conj(g)) < 1e-13);
    CHECK(std::abs(g_kernel_1d(-p[0], p[1]) - g) < 1e-13);
  }
  const cplx sep = g_kernel({1.5, -4.0, 0}, 3.0, 3);
  CHECK(std::abs(sep - g_kernel_1d(1.5, 3.0) * g_kernel_1d(-4.0, 3.0)) < 1e-13);
  CHECK(std::abs(g_kernel({1.5, -4.0, 0}, 3.0, 2) - g_kernel_1d(1.5, 3.0)) < 1e-15);
}

TEST_CASE("speed maps") {
  const Point y{1.0, 0.5, 2.0};
  const Point f = phi_c(y, 3000.0, 1500.0);
  CHECK(f.x == doctest::Approx(4.0));
  CHECK(f.y == doctest::Approx(2.0));
  CHECK(f.z == doctest::Approx(4.0));
  const Point back = phi_c(f, 3000.0, 1500.0, MapDirection::inverse);
  CHECK(back.x == doctest::Approx(y.x));
  CHECK(back.y == doctest::Approx(y.y));
  CHECK(back.z == doctest::Approx(y.z));
  CHECK(phi_c(y, 1500.0, 1500.0) == y);
  const Point p = psi_c({1e-9, 0, 0}, 3e-5, 1500.0);
  CHECK(p.x == doctest::Approx(2.25e-3));
  CHECK(p.z == doctest::Approx(0.045));
  // Mapping the true-speed guide point reproduces the trial-speed one.
  const Point s0{1e-9, -2e-10, 0};
  for (double c : {1400.0, 1550.0}) {
    const Point q = phi_c(psi_c(s0, 3e-5, 1500.0), c, 1500.0);
    const Point q2 = psi_c(s0, 3e-5, c);
    CHECK(q.x == doctest::Approx(q2.x).epsilon(1e-14));
    CHECK(q.y == doctest::Approx(q2.y).epsilon(1e-14));
    CHECK(q.z == doctest::Approx(q2.z).epsilon(1e-14));
  }
}

TEST_CASE("focal spot of a separable gaussian") {
  PixelGrid g = centered_grid({0, 0, 0.01}, 1e-5, 2e-5, 101, 81);
  g.values.resize(g.size());
  const double sx = 1e-4, sz = 3e-4;
  for (int iz = 0; iz < g.nz; ++iz)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Point p = g.pixel(ix, iz);
      const double dz = p.z - 0.01;
      g.at(ix, iz) = std::polar(std::exp(-p.x * p.x / (2 * sx * sx) - dz * dz / (2 * sz * sz)), 3.0 * p.x / sx);
    }
  const FocalSpot fs = focal_spot(g, {0, 0, 0.01}, 0.0);
  const double k = 2.0 * std::sqrt(2.0 * std::log(2.0));
  CHECK(fs.peak_ix == 50);
  CHECK(fs.peak_iz == 40);
  CHECK(fs.width_transverse == doctest::Approx(k * sx).epsilon(0.01));
  CHECK(fs.width_axial == doctest::Approx(k * sz).epsilon(0.01));
  bool has_peak = false;
  for (auto [ix, iz] : fs.region) {
    CHECK(std::abs(g.at(ix, iz)) >= 0.5 * fs.peak_value);
    has_peak |= (ix == fs.peak_ix && iz == fs.peak_iz);
  }
  CHECK(has_peak);

  PixelGrid zero = g;
  std::fill(zero.values.begin(), zero.values.end(), cplx(0.0));
  CHECK_THROWS_AS(focal_spot(zero, {0, 0, 0.01}, 0.0), Error);
}

TEST_CASE("paraxial psf tracks the brute-force psf") {
  // Narrow aperture relative to depth keeps the fourth-order phase small.
  ImagingConfig cfg = base_cfg(1500.0, 64);
  cfg.probe.half_aperture = 0.006;
  cfg.probe.n_elements_e = 12;
  cfg.probe.n_elements_r = 48;
  const Point y0{1e-3, 0.0, 0.045};
  for (double ratio : {1.0, 0.98}) {
    cfg.c = 1500.0 * ratio;
    const Point zc = phi_c(y0, cfg.c, cfg.c_star);
    const double lam = cfg.wavelength();
    double num = 0, den = 0;
    for (int i = -6; i <= 6; ++i)
      for (int j = -6; j <= 6; ++j) {
        const Point dz{i * lam / 2, 0.0, j * lam / 8};
        const cplx b = psf_value(zc + dz, y0, cfg);
        const cplx p = psf_paraxial(y0, dz, cfg);
        num += std::norm(b - p);
        den += std::norm(b);
      }
    CAPTURE(ratio);
    CHECK(std::sqrt(num / den) < 0.15);
  }
  CHECK_THROWS_AS(psf_paraxial({0.03, 0, 0.045}, {}, cfg), Error);
}

TEST_CASE("broadband closed form matches the frequency sum for a modest band") {
  // Peak-normalised sup error over one resolution cell each way.
  ImagingConfig cfg = base_cfg(1500.0, 256);
  cfg.bw.half_width = 0.2 * cfg.bw.omega_c;
  const Point y0{0.0, 0.0, 0.045};
  const double cell_x = 2 * cfg.c_star * y0.z / (cfg.bw.omega_c * cfg.probe.half_aperture);
  const double cell_z = 2 * cfg.c_star / cfg.bw.half_width;
  for (double ratio : {1.0, 0.99}) {
    cfg.c = 1500.0 * ratio;
    double err = 0, peak = 0;
    for (int i = -16; i <= 16; ++i)
      for (int j = -16; j <= 16; ++j) {
        const Point dz{i * cell_x / 16, 0.0, j * cell_z / 16};
        const cplx f = psf_paraxial(y0, dz, cfg, ParaxialRegime::full);
        const cplx b = psf_paraxial(y0, dz, cfg, ParaxialRegime::broadband);
        err = std::max(err, std::abs(f - b));
        peak = std::max(peak, std::abs(f));
      }
    CAPTURE(ratio);
    CHECK(err / peak <= 0.05);
  }
}

TEST_CASE("eta family scaling") {
  const ImagingConfig b = base_cfg();
  const ImagingConfig h = eta_scaled(b, 0.25);
  CHECK(h.bw.omega_c == doctest::Approx(4 * b.bw.omega_c));
  CHECK(h.bw.half_width == doctest::Approx(4 * b.bw.half_width));
  CHECK(h.probe.half_aperture == doctest::Approx(0.5 * b.probe.half_aperture));
  CHECK(h.probe.n_elements_r == 128);
  CHECK_THROWS_AS(eta_scaled(b, 0.0), Error);
}

TEST_CASE("grid validation and image writers") {
  PixelGrid bad = centered_grid({0, 0, 0.0}, 1e-4, 1e-4, 3, 3);
  try {
    bad.validate();
    FAIL("grid on the probe line accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDomain);
  }
  const ImagingConfig cfg = base_cfg(1500.0, 4);
  PixelGrid g = psf_bruteforce({0, 0, 0.02}, cfg, centered_grid({0, 0, 0.02}, 1e-4, 1e-4, 4, 3));
  const auto dir = std::filesystem::temp_directory_path();
  const std::string csv = (dir / "vgstar_img.csv").string(), pgm = (dir / "vgstar_img.pgm").string();
  write_image_csv(csv, g);
  write_image_pgm(pgm, g);
  std::ifstream f(csv);
  std::string line;
  int rows = 0;
  std::getline(f, line);
  CHECK(line == "x,z,abs,arg");
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 12);
  CHECK(std::filesystem::file_size(pgm) == std::string("P5\n4 3\n255\n").size() + 12);
  std::filesystem::remove(csv);
  std::filesystem::remove(pgm);
  ImagingConfig neg = cfg;
  neg.c = -1.0;
  CHECK_THROWS_AS(psf_value({0, 0, 0.02}, {0, 0, 0.03}, neg), Error);
}
