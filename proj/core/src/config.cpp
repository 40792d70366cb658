#include "vgstar/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "vgstar/error.hpp"

namespace vgs {
namespace detail {

json point_to_json(const Point& p, int dim) {
  return dim == 3 ? json::array({p.x, p.y, p.z}) : json::array({p.x, p.z});
}

Point point_from_json(const json& j, int dim) {
  if (!j.is_array() || j.size() != static_cast<size_t>(dim))
    throw Error(ErrorCode::InvalidConfig, "expected an array of " + std::to_string(dim) + " numbers");
  for (const auto& v : j)
    if (!v.is_number()) throw Error(ErrorCode::InvalidConfig, "point components must be numbers");
  if (dim == 3) return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  return {j[0].get<double>(), 0.0, j[1].get<double>()};
}

json medium_spec_to_json(const MediumSpec& s) {
  json j;
  j["dim"] = s.dim;
  j["domain"] = {{"lo", point_to_json(s.domain.lo, s.dim)}, {"hi", point_to_json(s.domain.hi, s.dim)}};
  j["n0"] = s.n0;
  j["c_star"] = s.c_star;
  j["scatterer_radius"] = s.scatterer_radius;
  j["min_distance"] = s.min_distance;
  j["volume_fraction"] = s.target_volume_fraction;
  j["contrast_std"] = s.contrast_std;
  j["contrast_law"] = s.contrast_law == ContrastLaw::two_point_symmetric ? "two_point_symmetric" : "uniform_symmetric";
  j["seed"] = s.seed;
  return j;
}

json bandwidth_to_json(const Bandwidth& b) {
  json j;
  j["omega_c"] = b.omega_c;
  j["half_width"] = b.half_width;
  j["n_freq"] = b.n_freq;
  j["pulse"] = b.pulse == PulseShape::gaussian ? "gaussian" : "flat";
  j["sigma"] = b.sigma;
  return j;
}

json probe_to_json(const ProbeGeometry& p) {
  return {{"half_aperture", p.half_aperture}, {"n_elements_e", p.n_elements_e}, {"n_elements_r", p.n_elements_r}};
}

}  // namespace detail

namespace {

using detail::json;

[[noreturn]] void bad(const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); }

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where + " must be a JSON object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) bad("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) bad(where + "." + key + " must be a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) bad(where + "." + key + " must be an integer");
      if constexpr (std::is_unsigned_v<T>)
        if (v.is_number_integer() && !v.is_number_unsigned()) bad(where + "." + key + " must be non-negative");
    } else {
      if (!v.is_number()) bad(where + "." + key + " must be a number");
    }
    out = v.get<T>();
  } catch (const json::exception& e) {
    bad(where + "." + key + ": " + e.what());
  }
}

Box box_from_json(const json& j, int dim, const std::string& where) {
  allow_keys(j, where, {"lo", "hi"});
  if (!j.contains("lo") || !j.contains("hi")) bad(where + " needs lo and hi");
  return {detail::point_from_json(j.at("lo"), dim), detail::point_from_json(j.at("hi"), dim)};
}

json box_to_json(const Box& b, int dim) {
  return {{"lo", detail::point_to_json(b.lo, dim)}, {"hi", detail::point_to_json(b.hi, dim)}};
}

Point transverse_from_json(const json& j, int dim) {
  if (dim == 2) {
    if (j.is_number()) return {j.get<double>(), 0.0, 0.0};
    if (j.is_array() && j.size() == 1 && j[0].is_number()) return {j[0].get<double>(), 0.0, 0.0};
  } else if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>(), 0.0};
  }
  bad("guide.s0 must hold dim - 1 numbers");
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.seed = 1;
  const double cs = 1500.0;
  const double radius = 7.5e-5;
  c.medium = make_medium_spec(2, Box{{-0.02, 0.0, 0.001}, {0.02, 0.0, 0.091}}, cs, radius, 0.15,
                              0.3 / std::sqrt(3.0), c.seed);
  c.probe = ProbeGeometry{2, 0.015, 15, 64};
  c.bw.omega_c = 2.0 * kPi * 3.0e6;
  c.bw.half_width = 6.0e6;
  c.bw.n_freq = 128;
  c.bw.pulse = PulseShape::flat;
  c.c_image = cs;
  return c;
}

void RunConfig::validate() const {
  try {
    medium.validate();
    probe.validate();
    bw.validate();
    if (probe.dim != medium.dim) bad("probe and medium dimensions differ");
    if (!(c_image > 0.0)) bad("imaging.c must be positive");
    if (grid.nx < 1 || grid.nz < 1) bad("imaging.grid shape must be positive");
    if (!(grid.center.z > 0.0)) bad("imaging.grid.center must lie below the probe");
    if (!(guide.t0 > 0.0)) bad("guide.t0 must be positive");
    if (!(guide.dc > 0.0) || !(guide.c_max >= guide.c_min) || !(guide.c_min > 0.0)) bad("invalid guide c range");
    if (guide.n_shifts < 1) bad("guide.n_shifts must be >= 1");
    if (threads < 0) bad("threads must be >= 0");
    if (noise_snr_db && !std::isfinite(*noise_snr_db)) bad("output.noise_snr_db must be finite");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
}

ImagingConfig RunConfig::imaging() const {
  ImagingConfig ic;
  ic.c = c_image;
  ic.c_star = medium.c_star;
  ic.probe = probe;
  ic.bw = bw;
  return ic;
}

PixelGrid RunConfig::pixel_grid() const {
  const double lam = wavelength();
  const double dx = grid.dx > 0.0 ? grid.dx : lam / 8.0;
  const double dz = grid.dz > 0.0 ? grid.dz : lam / 8.0;
  return centered_grid(grid.center, dx, dz, grid.nx, grid.nz);
}

GuideStarSpec RunConfig::guide_spec() const {
  GuideStarSpec g;
  g.s0 = guide.s0;
  g.t0 = guide.t0;
  g.c_grid = make_c_grid(guide.c_min, guide.c_max, guide.dc);
  const double radius = guide.shift_radius > 0.0 ? guide.shift_radius : 0.5 * wavelength();
  const double rmin = guide.min_shift_radius > 0.0 ? guide.min_shift_radius : 4.0 * medium.scatterer_radius;
  if (guide.layout == ShiftLayout::disc) g.shifts = disc_shifts(guide.n_shifts, radius, rmin, seed);
  else g.shifts = ring_shifts(guide.n_shifts, radius, seed);
  return g;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  RunConfig c = default_run_config();
  allow_keys(j, "config", {"seed", "threads", "medium", "probe", "bandwidth", "imaging", "guide", "ensemble",
                           "output", "validation"});
  read(j, "seed", c.seed, "config");
  read(j, "threads", c.threads, "config");

  if (j.contains("medium")) {
    const json& m = j["medium"];
    allow_keys(m, "medium", {"dim", "domain", "c_star", "scatterer_radius", "min_distance", "volume_fraction",
                             "contrast_std", "relative_contrast_std", "contrast_law"});
    if (m.contains("contrast_std") && m.contains("relative_contrast_std"))
      bad("give either medium.contrast_std or medium.relative_contrast_std, not both");
    MediumSpec& s = c.medium;
    const double rel = s.contrast_std / s.n0;
    read(m, "dim", s.dim, "medium");
    if (s.dim != 2 && s.dim != 3) bad("medium.dim must be 2 or 3");
    if (m.contains("domain")) s.domain = box_from_json(m["domain"], s.dim, "medium.domain");
    else if (s.dim == 3) bad("3D media need an explicit medium.domain");
    read(m, "c_star", s.c_star, "medium");
    if (!(s.c_star > 0.0)) bad("medium.c_star must be positive");
    s.n0 = 1.0 / (s.c_star * s.c_star);
    read(m, "scatterer_radius", s.scatterer_radius, "medium");
    s.min_distance = 2.0 * s.scatterer_radius;
    read(m, "min_distance", s.min_distance, "medium");
    read(m, "volume_fraction", s.target_volume_fraction, "medium");
    s.contrast_std = rel * s.n0;
    read(m, "contrast_std", s.contrast_std, "medium");
    if (m.contains("relative_contrast_std")) {
      double r = 0.0;
      read(m, "relative_contrast_std", r, "medium");
      s.contrast_std = r * s.n0;
    }
    if (m.contains("contrast_law")) {
      std::string law;
      read(m, "contrast_law", law, "medium");
      if (law == "uniform_symmetric") s.contrast_law = ContrastLaw::uniform_symmetric;
      else if (law == "two_point_symmetric") s.contrast_law = ContrastLaw::two_point_symmetric;
      else bad("medium.contrast_law must be uniform_symmetric or two_point_symmetric");
    }
  }
  c.medium.seed = c.seed;
  c.probe.dim = c.medium.dim;

  if (j.contains("probe")) {
    const json& p = j["probe"];
    allow_keys(p, "probe", {"half_aperture", "n_elements_e", "n_elements_r"});
    read(p, "half_aperture", c.probe.half_aperture, "probe");
    read(p, "n_elements_e", c.probe.n_elements_e, "probe");
    read(p, "n_elements_r", c.probe.n_elements_r, "probe");
  }
  if (j.contains("bandwidth")) {
    const json& b = j["bandwidth"];
    allow_keys(b, "bandwidth", {"omega_c", "half_width", "n_freq", "pulse", "sigma"});
    read(b, "omega_c", c.bw.omega_c, "bandwidth");
    read(b, "half_width", c.bw.half_width, "bandwidth");
    read(b, "n_freq", c.bw.n_freq, "bandwidth");
    read(b, "sigma", c.bw.sigma, "bandwidth");
    if (b.contains("pulse")) {
      std::string p;
      read(b, "pulse", p, "bandwidth");
      if (p == "flat") c.bw.pulse = PulseShape::flat;
      else if (p == "gaussian") c.bw.pulse = PulseShape::gaussian;
      else bad("bandwidth.pulse must be flat or gaussian");
    }
  }
  if (j.contains("imaging")) {
    const json& im = j["imaging"];
    allow_keys(im, "imaging", {"c", "grid"});
    read(im, "c", c.c_image, "imaging");
    if (im.contains("grid")) {
      const json& g = im["grid"];
      allow_keys(g, "imaging.grid", {"center", "dx", "dz", "nx", "nz"});
      if (g.contains("center")) c.grid.center = detail::point_from_json(g["center"], c.medium.dim);
      read(g, "dx", c.grid.dx, "imaging.grid");
      read(g, "dz", c.grid.dz, "imaging.grid");
      read(g, "nx", c.grid.nx, "imaging.grid");
      read(g, "nz", c.grid.nz, "imaging.grid");
    }
  }
  if (j.contains("guide")) {
    const json& g = j["guide"];
    allow_keys(g, "guide", {"s0", "t0", "c_min", "c_max", "dc", "n_shifts", "layout", "shift_radius",
                            "min_shift_radius"});
    if (g.contains("s0")) c.guide.s0 = transverse_from_json(g["s0"], c.medium.dim);
    read(g, "t0", c.guide.t0, "guide");
    read(g, "c_min", c.guide.c_min, "guide");
    read(g, "c_max", c.guide.c_max, "guide");
    read(g, "dc", c.guide.dc, "guide");
    read(g, "n_shifts", c.guide.n_shifts, "guide");
    read(g, "shift_radius", c.guide.shift_radius, "guide");
    read(g, "min_shift_radius", c.guide.min_shift_radius, "guide");
    if (g.contains("layout")) {
      std::string l;
      read(g, "layout", l, "guide");
      if (l == "ring") c.guide.layout = ShiftLayout::ring;
      else if (l == "disc") c.guide.layout = ShiftLayout::disc;
      else bad("guide.layout must be ring or disc");
    }
  }
  if (j.contains("ensemble")) {
    const json& e = j["ensemble"];
    allow_keys(e, "ensemble", {"n_realizations", "domain"});
    read(e, "n_realizations", c.ensemble_realizations, "ensemble");
    if (e.contains("domain")) c.ensemble_domain = box_from_json(e["domain"], c.medium.dim, "ensemble.domain");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    allow_keys(o, "output", {"dir", "noise_snr_db"});
    read(o, "dir", c.out_dir, "output");
    if (o.contains("noise_snr_db") && !o["noise_snr_db"].is_null()) {
      double v = 0.0;
      read(o, "noise_snr_db", v, "output");
      c.noise_snr_db = v;
    }
  }
  if (j.contains("validation")) {
    const json& v = j["validation"];
    allow_keys(v, "validation", {"n_realizations", "patch_half_width", "variance_ratio_bound",
                                 "variance_scaling_tolerance", "spatial_ensemble_tolerance", "paraxial_tolerance",
                                 "stationarity_tolerance"});
    ValidationConfig& vc = c.validation;
    read(v, "n_realizations", vc.n_realizations, "validation");
    read(v, "patch_half_width", vc.patch_half_width, "validation");
    read(v, "variance_ratio_bound", vc.variance_ratio_bound, "validation");
    read(v, "variance_scaling_tolerance", vc.variance_scaling_tolerance, "validation");
    read(v, "spatial_ensemble_tolerance", vc.spatial_ensemble_tolerance, "validation");
    read(v, "paraxial_tolerance", vc.paraxial_tolerance, "validation");
    read(v, "stationarity_tolerance", vc.stationarity_tolerance, "validation");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  json m = detail::medium_spec_to_json(c.medium);
  m.erase("n0");
  m.erase("seed");
  j["medium"] = m;
  j["probe"] = detail::probe_to_json(c.probe);
  j["bandwidth"] = detail::bandwidth_to_json(c.bw);
  j["imaging"] = {{"c", c.c_image},
                  {"grid",
                   {{"center", detail::point_to_json(c.grid.center, c.medium.dim)},
                    {"dx", c.grid.dx},
                    {"dz", c.grid.dz},
                    {"nx", c.grid.nx},
                    {"nz", c.grid.nz}}}};
  json s0 = c.medium.dim == 3 ? json::array({c.guide.s0.x, c.guide.s0.y}) : json::array({c.guide.s0.x});
  j["guide"] = {{"s0", s0},
                {"t0", c.guide.t0},
                {"c_min", c.guide.c_min},
                {"c_max", c.guide.c_max},
                {"dc", c.guide.dc},
                {"n_shifts", c.guide.n_shifts},
                {"layout", c.guide.layout == ShiftLayout::disc ? "disc" : "ring"},
                {"shift_radius", c.guide.shift_radius},
                {"min_shift_radius", c.guide.min_shift_radius}};
  json e = {{"n_realizations", c.ensemble_realizations}};
  if (c.ensemble_domain) e["domain"] = box_to_json(*c.ensemble_domain, c.medium.dim);
  j["ensemble"] = e;
  json o = {{"dir", c.out_dir}};
  o["noise_snr_db"] = c.noise_snr_db ? json(*c.noise_snr_db) : json(nullptr);
  j["output"] = o;
  const ValidationConfig& v = c.validation;
  j["validation"] = {{"n_realizations", v.n_realizations},
                     {"patch_half_width", v.patch_half_width},
                     {"variance_ratio_bound", v.variance_ratio_bound},
                     {"variance_scaling_tolerance", v.variance_scaling_tolerance},
                     {"spatial_ensemble_tolerance", v.spatial_ensemble_tolerance},
                     {"paraxial_tolerance", v.paraxial_tolerance},
                     {"stationarity_tolerance", v.stationarity_tolerance}};
  return j.dump(2);
}

}  // namespace vgs
