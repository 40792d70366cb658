#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "vgstar/error.hpp"
#include "vgstar/estimator.hpp"
#include "vgstar/rng.hpp"

using namespace vgs;

namespace {

ImagingConfig cfg(int n_freq = 32) {
  ImagingConfig c;
  c.c = 1500.0;
  c.c_star = 1500.0;
  c.probe = ProbeGeometry{2, 0.015, 15, 64};
  c.bw = Bandwidth{2 * kPi * 3e6, 6e6, n_freq, PulseShape::flat, 0.0};
  return c;
}

// Speckle medium patch around the guide point at depth 45 mm.
MediumSpec patch_spec(std::uint64_t seed, double half = 3e-3) {
  return make_medium_spec(2, Box{{-half, 0, 0.045 - half}, {half, 0, 0.045 + half}}, 1500.0, 7.5e-5, 0.15,
                          0.3 / std::sqrt(3.0), seed);
}

KMatrix random_k(std::size_t n, std::size_t nc, std::uint64_t seed) {
  KMatrix k{n, nc, std::vector<cplx>(n * nc)};
  CounterRng g(seed, 1);
  for (cplx& v : k.values) v = {g.normal(), g.normal()};
  return k;
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("c grid and guide spec validation") {
  const auto g = make_c_grid(1400, 1600, 5);
  REQUIRE(g.size() == 41u);
  CHECK(g.front() == 1400.0);
  CHECK(g.back() == 1600.0);
  GuideStarSpec s{{}, 3e-5, g, {{1e-4, 0, 0}}};
  CHECK_NOTHROW(s.validate());
  CHECK(s.dc() == doctest::Approx(5.0));
  s.c_grid = {1400, 1410, 1415};
  CHECK_THROWS_AS(s.validate(), Error);
  s.c_grid = {1400, 1390};
  CHECK_THROWS_AS(s.validate(), Error);
  s.c_grid = g;
  s.t0 = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK_THROWS_AS(make_c_grid(1400, 1600, 0.0), Error);
}

TEST_CASE("shift layouts") {
  const double lam = 5e-4;
  const auto ring = ring_shifts(32, lam / 2, 9);
  REQUIRE(ring.size() == 32u);
  for (const Point& p : ring) {
    CHECK(norm(p) == doctest::Approx(lam / 2).epsilon(1e-12));
    CHECK(p.y == 0.0);
  }
  CHECK(ring_shifts(32, lam / 2, 9) == ring);
  CHECK(ring_shifts(32, lam / 2, 10) != ring);
  CHECK(shifts_within_scale_window(ring, 7.5e-5, lam));
  const auto disc = disc_shifts(64, lam * 0.9, 3e-4, 4);
  for (const Point& p : disc) {
    CHECK(norm(p) >= 3e-4 - 1e-15);
    CHECK(norm(p) <= lam * 0.9 + 1e-15);
  }
  CHECK(shifts_within_scale_window(disc, 7.5e-5, lam));
  CHECK_FALSE(shifts_within_scale_window({{1e-4, 0, 0}}, 7.5e-5, lam));
  CHECK_FALSE(shifts_within_scale_window({{6e-4, 0, 0}}, 7.5e-5, lam));
  CHECK_THROWS_AS(disc_shifts(8, 1e-4, 2e-4, 1), Error);
}

TEST_CASE("amplitude estimate examples") {
  const auto g = make_c_grid(1400, 1600, 5);
  std::vector<cplx> t(g.size(), cplx(1.0, 0.0));
  CHECK(amplitude_estimate(t, g) == 1400.0);
  t[17] = cplx(0.0, 3.0);
  CHECK(amplitude_estimate(t, g) == g[17]);
  CHECK_THROWS_AS(amplitude_estimate({}, {}), Error);
  try {
    amplitude_estimate({}, {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTrace);
  }
  CHECK_THROWS_AS(amplitude_estimate(t, {1.0, 2.0}), Error);

  for (double peak : {1500.0, 1502.0, 1497.5}) {
    std::vector<cplx> s(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) s[j] = std::pow(sinc((g[j] - peak) / 25.0), 2);
    CAPTURE(peak);
    CHECK(std::fabs(amplitude_estimate(s, g) - peak) <= 5.0);
    CHECK(std::fabs(amplitude_estimate(s, g, true) - peak) <= 0.5);
  }
}

TEST_CASE("confocal trace peaks at the true speed") {
  const ImagingConfig c = cfg(32);
  const auto g = make_c_grid(1450, 1550, 5);
  const Point y0{0.0, 0.0, 0.045};
  const auto brute = confocal_trace(y0, g, c);
  const auto para = confocal_trace(y0, g, c, TraceMethod::paraxial);
  CHECK(amplitude_estimate(brute, g) == 1500.0);
  CHECK(amplitude_estimate(para, g) == 1500.0);
}

TEST_CASE("K columns of a point target reproduce the confocal trace") {
  const ImagingConfig c = cfg(32);
  const auto g = make_c_grid(1400, 1600, 5);
  const double t0 = 3e-5;
  const Point y0{0.0, 0.0, c.c_star * t0};
  const ReflectionMatrix m = point_target_matrix(y0, 1.0, c.c_star, c.probe, c.bw);
  const GuideStarSpec spec{{}, t0, g, {{0, 0, 0}}};
  const KMatrix k = build_K_matrix(m, spec);
  const auto trace = confocal_trace(y0, g, c);
  std::vector<double> a, b;
  for (std::size_t j = 0; j < g.size(); ++j) {
    a.push_back(std::abs(k.at(0, j)));
    b.push_back(std::abs(trace[j]));
    CHECK(std::abs(k.at(0, j) - trace[j]) <= 1e-10 * std::abs(trace[j]) + 1e-10 * b.front());
  }
  CHECK(pearson(a, b) >= 0.99);

  ReflectionMatrix zero = m;
  std::fill(zero.data.begin(), zero.data.end(), cplx(0.0));
  for (const cplx& v : build_K_matrix(zero, spec).values) CHECK(v == cplx(0.0));
}

TEST_CASE("K evaluation points must stay in the imageable region") {
  const ImagingConfig c = cfg(4);
  const ReflectionMatrix m = point_target_matrix({0, 0, 0.045}, 1.0, 1500.0, c.probe, c.bw);
  GuideStarSpec spec{{}, 1e-6, make_c_grid(1400, 1600, 100), {{0, 0, -2e-3}}};
  try {
    build_K_matrix(m, spec);
    FAIL("point above the probe accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDomain);
  }
  spec.t0 = 3e-5;
  const Box region{{-0.01, 0, 0.04}, {0.01, 0, 0.05}};
  CHECK_NOTHROW(build_K_matrix(m, spec, region));
  spec.t0 = 4e-5;  // 1600 * 4e-5 = 64 mm
  CHECK_THROWS_AS(build_K_matrix(m, spec, region), Error);
}

TEST_CASE("spatial variance estimate examples and invariances") {
  const auto g = make_c_grid(1400, 1600, 5);
  KMatrix k = random_k(32, g.size(), 3);
  for (std::size_t i = 0; i < k.n_shifts; ++i) k.at(i, 23) *= 4.0;
  const EstimatorReport r = spatial_variance_estimate(k, g);
  CHECK(r.c_hat == g[23]);
  for (double f : r.F) CHECK(f >= 0.0);

  KMatrix flat{16, g.size(), std::vector<cplx>(16 * g.size(), cplx(0.3, -0.4))};
  const EstimatorReport rf = spatial_variance_estimate(flat, g);
  CHECK(rf.c_hat == 1400.0);
  for (double f : rf.F) CHECK(f == doctest::Approx(0.25));

  // Row permutation and global phase leave F unchanged.
  KMatrix perm = k, phase = k;
  for (std::size_t i = 0; i < k.n_shifts; ++i)
    for (std::size_t j = 0; j < k.n_c; ++j) {
      perm.at(i, j) = k.at((i * 7 + 3) % k.n_shifts, j);
      phase.at(i, j) = k.at(i, j) * std::polar(1.0, 1.234);
    }
  const auto fp = spatial_variance_estimate(perm, g).F, fq = spatial_variance_estimate(phase, g).F;
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(fp[j] == doctest::Approx(r.F[j]).epsilon(1e-14));
    CHECK(fq[j] == doctest::Approx(r.F[j]).epsilon(1e-12));
  }

  const KMatrix one = random_k(1, g.size(), 4);
  try {
    spatial_variance_estimate(one, g);
    FAIL("single shift accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewShifts);
  }
}

TEST_CASE("global phase of the data does not change F") {
  const ImagingConfig c = cfg(16);
  const MediumRealization r = sample_matern(patch_spec(21, 2e-3));
  ReflectionMatrix m = assemble_reflection_matrix(r, c.probe, c.bw);
  const GuideStarSpec spec{{}, 3e-5, make_c_grid(1450, 1550, 10), ring_shifts(16, c.wavelength() / 2, 1)};
  const auto f0 = spatial_variance_estimate(build_K_matrix(m, spec), spec.c_grid).F;
  for (cplx& v : m.data) v *= std::polar(1.0, -2.1);
  const auto f1 = spatial_variance_estimate(build_K_matrix(m, spec), spec.c_grid).F;
  for (std::size_t j = 0; j < f0.size(); ++j) CHECK(f1[j] == doctest::Approx(f0[j]).epsilon(1e-10));
}

TEST_CASE("ensemble estimate degenerate inputs") {
  const ImagingConfig c = cfg(8);
  MediumSpec s = patch_spec(5, 1.5e-3);
  s.contrast_std = 0.0;
  const GuideStarSpec spec{{}, 3e-5, make_c_grid(1450, 1550, 50), {{0, 0, 0}}};
  for (double v : ensemble_variance_estimate(s, 3, spec, c)) CHECK(v == 0.0);
  try {
    ensemble_variance_estimate(s, 1, spec, c);
    FAIL("single realization accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientSamples);
  }
}

TEST_CASE("small lattice offsets of the shift set keep column statistics") {
  // Offsets much smaller than a wavelength: each |K| column mean moves by
  // less than three standard errors.
  const ImagingConfig c = cfg(32);
  const MediumRealization r = sample_matern(patch_spec(31));
  const ReflectionMatrix m = assemble_reflection_matrix(r, c.probe, c.bw);
  const auto g = make_c_grid(1450, 1550, 25);
  GuideStarSpec a{{}, 3e-5, g, disc_shifts(64, c.wavelength(), 3e-4, 2)};
  GuideStarSpec b = a;
  for (Point& p : b.shifts) p = p + Point{1e-5, 0.0, -1e-5};
  const KMatrix ka = build_K_matrix(m, a), kb = build_K_matrix(m, b);
  for (std::size_t j = 0; j < g.size(); ++j) {
    double ma = 0, mb = 0, va = 0;
    for (std::size_t i = 0; i < ka.n_shifts; ++i) {
      ma += std::abs(ka.at(i, j));
      mb += std::abs(kb.at(i, j));
    }
    ma /= ka.n_shifts;
    mb /= kb.n_shifts;
    for (std::size_t i = 0; i < ka.n_shifts; ++i) va += std::pow(std::abs(ka.at(i, j)) - ma, 2);
    const double se = std::sqrt(va / (ka.n_shifts - 1) / ka.n_shifts);
    CAPTURE(j);
    CHECK(std::fabs(ma - mb) < 3.0 * se);
  }
}

TEST_CASE("report and matrix files") {
  const auto g = make_c_grid(1400, 1600, 50);
  const KMatrix k = random_k(6, g.size(), 8);
  EstimatorReport r = spatial_variance_estimate(k, g);
  r.seed = 77;
  const auto dir = std::filesystem::temp_directory_path();
  const std::string js = (dir / "vgstar_rep.json").string(), kmx = (dir / "vgstar_k.kmx").string(),
                    csv = (dir / "vgstar_f.csv").string(), kcsv = (dir / "vgstar_k.csv").string();
  write_report_json(js, r);
  std::ifstream f(js);
  const auto j = nlohmann::json::parse(f);
  CHECK(j.at("c_hat").get<double>() == r.c_hat);
  CHECK(j.at("n_shifts").get<std::size_t>() == 6u);
  CHECK(j.at("seed").get<std::uint64_t>() == 77u);
  CHECK(j.at("F").size() == g.size());
  CHECK(j.at("c_grid").get<std::vector<double>>() == g);

  write_kmx(kmx, k, g);
  std::vector<double> g2;
  const KMatrix back = read_kmx(kmx, &g2);
  CHECK(back.values == k.values);
  CHECK(g2 == g);
  std::ofstream(kmx, std::ios::binary | std::ios::app) << "junk";
  CHECK_THROWS_AS(read_kmx(kmx), Error);

  write_curve_csv(csv, g, r.F, "V");
  std::ifstream fc(csv);
  std::string line;
  std::getline(fc, line);
  CHECK(line == "c,V");
  write_k_abs_csv(kcsv, k);
  CHECK(std::filesystem::file_size(kcsv) > 0);
  for (const auto& p : {js, kmx, csv, kcsv}) std::filesystem::remove(p);
}
