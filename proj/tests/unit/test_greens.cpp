#include <doctest.h>

#include <cmath>

#include "vgstar/error.hpp"
#include "vgstar/greens.hpp"

using namespace vgs;

TEST_CASE("3D green closed form") {
  const cplx g = green(1.0, Point{0, 0, 0}, Point{0, 0, 1}, 3);
  CHECK(g.real() == doctest::Approx(0.0430027).epsilon(1e-5));
  CHECK(g.imag() == doctest::Approx(0.0669570).epsilon(1e-5));
  CHECK(std::abs(g - cplx(std::cos(1.0), std::sin(1.0)) / (4.0 * kPi)) < 1e-16);
}

TEST_CASE("2D green at kr = 1") {
  const cplx g = green(2.0, Point{0, 0, 0}, Point{0.3, 0, 0.4}, 2);
  CHECK(g.real() == doctest::Approx(-0.0220642).epsilon(2e-6));
  CHECK(g.imag() == doctest::Approx(0.1912997).epsilon(1e-6));
  const cplx ref(-std::cyl_neumann(0.0, 1.0) / 4.0, std::cyl_bessel_j(0.0, 1.0) / 4.0);
  CHECK(std::abs(g - ref) < 1e-12);
}

TEST_CASE("coincident points are singular") {
  CHECK_THROWS_AS(green(1.0, Point{1, 0, 1}, Point{1, 0, 1}, 2), Error);
  try {
    green(1.0, Point{1, 0, 1}, Point{1, 0, 1 + 1e-13}, 3);
    FAIL("expected SingularPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularPoint);
  }
}

TEST_CASE("reciprocity is exact") {
  const Point a{0.001, 0, 0.02}, b{-0.013, 0, 0.0};
  for (int dim : {2, 3}) CHECK(green(4000.0, a, b, dim) == green(4000.0, b, a, dim));
}

TEST_CASE("2D far field modulus") {
  for (double kr : {60.0, 200.0, 1500.0}) {
    const double g = std::abs(green(kr, Point{}, Point{0, 0, 1.0}, 2));
    CHECK(g == doctest::Approx(std::sqrt(1.0 / (8.0 * kPi * kr))).epsilon(0.01));
  }
}

TEST_CASE("3D outgoing sign at small kr") {
  const double k = 3.0;
  const cplx g = green(k, Point{}, Point{0, 0, 1e-7}, 3);
  CHECK(g.imag() == doctest::Approx(k / (4.0 * kPi)).epsilon(1e-6));
}

TEST_CASE("frequency grid") {
  Bandwidth bw{10.0, 2.0, 1};
  auto g = frequency_grid(bw);
  REQUIRE(g.size() == 1);
  CHECK(g[0].omega == 10.0);
  CHECK(g[0].weight == 4.0);

  bw.n_freq = 3;
  g = frequency_grid(bw);
  REQUIRE(g.size() == 3);
  CHECK(g[0].omega == 8.0);
  CHECK(g[1].omega == 10.0);
  CHECK(g[2].omega == 12.0);
  CHECK(g[0].weight == 1.0);
  CHECK(g[1].weight == 2.0);
  CHECK(g[2].weight == 1.0);

  bw.n_freq = 128;
  double s = 0.0;
  for (const auto& f : frequency_grid(bw)) s += f.weight;
  CHECK(s == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("bandwidth invariants") {
  CHECK_THROWS_AS(frequency_grid(Bandwidth{10.0, 10.0, 4}), Error);
  CHECK_THROWS_AS(frequency_grid(Bandwidth{10.0, 0.0, 4}), Error);
  CHECK_THROWS_AS(frequency_grid(Bandwidth{10.0, 1.0, 0}), Error);
}

TEST_CASE("pulse spectra") {
  Bandwidth flat{10.0, 2.0, 8};
  CHECK(pulse_spectrum(flat, 8.5) == 1.0);
  Bandwidth gauss{10.0, 2.0, 8, PulseShape::gaussian, 0.5};
  CHECK(pulse_spectrum(gauss, 10.0) == 1.0);
  CHECK(pulse_spectrum(gauss, 10.5) == doctest::Approx(0.60653066).epsilon(1e-8));
  CHECK(pulse_spectrum(gauss, 9.5) == doctest::Approx(0.60653066).epsilon(1e-8));
}

TEST_CASE("probe positions are symmetric and on z = 0") {
  ProbeGeometry p{2, 0.015, 15, 64};
  const auto e = p.emit_positions();
  const auto r = p.receive_positions();
  REQUIRE(e.size() == 15);
  REQUIRE(r.size() == 64);
  CHECK(e.front().x == -0.015);
  CHECK(e.back().x == 0.015);
  for (size_t i = 0; i < r.size(); ++i) {
    CHECK(r[i].z == 0.0);
    CHECK(r[i].x == -r[r.size() - 1 - i].x);
  }
  ProbeGeometry p3{3, 0.01, 4, 3};
  CHECK(p3.emit_positions().size() == 16);
  CHECK(p3.receive_positions().size() == 9);
}
