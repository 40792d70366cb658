#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "vgstar/config.hpp"
#include "vgstar/error.hpp"

using namespace vgs;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config accepted: " << text);
  return ErrorCode::InvalidSpec;
}

}  // namespace

TEST_CASE("defaults describe the desk-scale experiment") {
  const RunConfig c = default_run_config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.probe.n_elements_e == 15);
  CHECK(c.probe.n_elements_r == 64);
  CHECK(c.probe.half_aperture == doctest::Approx(0.015));
  CHECK(c.bw.n_freq == 128);
  CHECK(c.medium.c_star == 1500.0);
  CHECK(c.medium.n0 * c.medium.c_star * c.medium.c_star == doctest::Approx(1.0));
  CHECK(c.medium.scatterer_radius == doctest::Approx(7.5e-5));
  CHECK(c.medium.target_volume_fraction == doctest::Approx(0.15));
  CHECK(c.guide.t0 == doctest::Approx(3e-5));
  const GuideStarSpec g = c.guide_spec();
  CHECK(g.c_grid.size() == 41u);
  CHECK(g.n_shifts() == 32u);
  CHECK(shifts_within_scale_window(g.shifts, c.medium.scatterer_radius, c.wavelength()));
  const PixelGrid grid = c.pixel_grid();
  CHECK(grid.dx == doctest::Approx(c.wavelength() / 8));
  CHECK(grid.nx == 161);
}

TEST_CASE("empty object parses to the defaults and round trips") {
  const RunConfig a = parse_run_config("{}");
  const std::string text = run_config_to_json(a);
  const RunConfig b = parse_run_config(text);
  CHECK(run_config_to_json(b) == text);
  CHECK(b.medium.domain.hi.z == doctest::Approx(0.091));
}

TEST_CASE("overrides are applied") {
  const RunConfig c = parse_run_config(R"({
    "seed": 9,
    "medium": {"relative_contrast_std": 0.05, "scatterer_radius": 5e-5},
    "probe": {"n_elements_e": 9},
    "bandwidth": {"n_freq": 32, "pulse": "gaussian", "sigma": 2e6},
    "imaging": {"c": 1480, "grid": {"center": [0.001, 0.03], "nx": 21, "nz": 11}},
    "guide": {"t0": 2e-5, "dc": 10, "n_shifts": 16, "layout": "disc"},
    "ensemble": {"n_realizations": 20, "domain": {"lo": [-0.003, 0.027], "hi": [0.003, 0.033]}},
    "output": {"dir": "runs/a", "noise_snr_db": 20}
  })");
  CHECK(c.seed == 9u);
  CHECK(c.medium.seed == 9u);
  CHECK(c.medium.contrast_std == doctest::Approx(0.05 * c.medium.n0));
  CHECK(c.medium.min_distance == doctest::Approx(1e-4));
  CHECK(c.probe.n_elements_e == 9);
  CHECK(c.bw.pulse == PulseShape::gaussian);
  CHECK(c.c_image == 1480.0);
  CHECK(c.grid.center.x == doctest::Approx(0.001));
  CHECK(c.grid.center.z == doctest::Approx(0.03));
  CHECK(c.guide.layout == ShiftLayout::disc);
  CHECK(c.guide_spec().c_grid.size() == 21u);
  REQUIRE(c.ensemble_domain.has_value());
  CHECK(c.ensemble_domain->lo.z == doctest::Approx(0.027));
  CHECK(c.out_dir == "runs/a");
  REQUIRE(c.noise_snr_db.has_value());
  CHECK(*c.noise_snr_db == 20.0);
}

TEST_CASE("invalid documents are rejected") {
  CHECK(code_of("{not json") == ErrorCode::InvalidConfig);
  CHECK(code_of("[]") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"bogus": 1})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"medium": {"radius": 1e-4}})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"imaging": {"grid": {"spacing": 1}}})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"seed": "one"})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"seed": -3})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"imaging": {"c": -1}})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"medium": {"volume_fraction": 0.7}})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"medium": {"min_distance": 1e-5}})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"medium": {"contrast_std": 1e-8, "relative_contrast_std": 0.1}})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"bandwidth": {"half_width": 1e9}})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"guide": {"layout": "spiral"}})") == ErrorCode::InvalidConfig);
  CHECK(code_of(R"({"imaging": {"grid": {"center": [0.0]}}})") == ErrorCode::InvalidConfig);
}

TEST_CASE("config files") {
  const auto p = (std::filesystem::temp_directory_path() / "vgstar_cfg.json").string();
  std::ofstream(p) << R"({"seed": 4})";
  CHECK(load_run_config(p).seed == 4u);
  std::filesystem::remove(p);
  try {
    load_run_config(p);
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
