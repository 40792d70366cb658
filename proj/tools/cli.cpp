#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vgstar/config.hpp"
#include "vgstar/error.hpp"
#include "vgstar/estimator.hpp"
#include "vgstar/forward.hpp"
#include "vgstar/imaging.hpp"
#include "vgstar/medium.hpp"
#include "vgstar/rng.hpp"
#include "vgstar/validation.hpp"

namespace vgs::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

struct GridFlags {
  std::optional<int> nx, nz;
  std::optional<double> dx, dz;
  std::vector<double> center;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration");
  app->add_option("--seed", c.seed, "Override the configuration seed");
  app->add_option("--threads", c.threads, "Worker thread cap (0: runtime default)");
  app->add_option("--out", c.out, "Output directory");
}

void add_grid(CLI::App* app, GridFlags& g) {
  app->add_option("--nx", g.nx, "Pixels along x");
  app->add_option("--nz", g.nz, "Pixels along z");
  app->add_option("--dx", g.dx, "Pixel spacing along x (m)");
  app->add_option("--dz", g.dz, "Pixel spacing along z (m)");
  app->add_option("--center", g.center, "Grid centre x,z (m)")->delimiter(',')->expected(2);
}

Point point_arg(const std::vector<double>& v, int dim, const char* flag) {
  if (dim == 3) {
    if (v.size() != 3) throw Error(ErrorCode::InvalidConfig, std::string(flag) + " needs x,y,z in 3D");
    return {v[0], v[1], v[2]};
  }
  if (v.size() != 2) throw Error(ErrorCode::InvalidConfig, std::string(flag) + " needs x,z");
  return {v[0], 0.0, v[1]};
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? default_run_config() : load_run_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.medium.seed = *c.seed;
  }
  if (c.threads) cfg.threads = *c.threads;
  if (c.out) cfg.out_dir = *c.out;
  cfg.validate();
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  return cfg;
}

void apply_grid(RunConfig& cfg, const GridFlags& g) {
  if (g.nx) cfg.grid.nx = *g.nx;
  if (g.nz) cfg.grid.nz = *g.nz;
  if (g.dx) cfg.grid.dx = *g.dx;
  if (g.dz) cfg.grid.dz = *g.dz;
  if (!g.center.empty()) cfg.grid.center = point_arg(g.center, cfg.medium.dim, "--center");
  if (cfg.grid.nx < 1 || cfg.grid.nz < 1) throw Error(ErrorCode::InvalidConfig, "grid shape must be positive");
  if (!(cfg.grid.center.z > 0.0)) throw Error(ErrorCode::InvalidConfig, "grid centre must lie below the probe");
}

std::string out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec || !fs::is_directory(cfg.out_dir))
    throw Error(ErrorCode::IoError, "cannot create output directory " + cfg.out_dir);
  return cfg.out_dir;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

// Median |U2| / |U1| over a few entries, using the scatterers within
// `radius` of `focus` so the O(N^2) double sum stays cheap.
json born_diagnostic(const MediumRealization& r, const RunConfig& cfg, const Point& focus, double radius) {
  MediumRealization sub;
  sub.spec = r.spec;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (distance(r.centers[i], focus) <= radius) {
      sub.centers.push_back(r.centers[i]);
      sub.contrasts.push_back(r.contrasts[i]);
    }
  json j = {{"subsample_size", sub.size()}, {"subsample_radius", radius}};
  if (sub.size() < 2) {
    j["median_ratio"] = nullptr;
    return j;
  }
  const ReflectionMatrix m1 = assemble_reflection_matrix(sub, cfg.probe, cfg.bw);
  const std::size_t k = m1.nw() / 2, e = m1.ne() / 2;
  std::vector<double> ratios;
  for (std::size_t q = 0; q < 5; ++q) {
    const std::size_t ri = q * (m1.nr() - 1) / 4;
    const double u1 = std::abs(m1.at(e, ri, k));
    if (u1 > 0.0) ratios.push_back(std::abs(born2_residual(sub, cfg.probe, cfg.bw, e, ri, k)) / u1);
  }
  std::sort(ratios.begin(), ratios.end());
  j["median_ratio"] = ratios.empty() ? json(nullptr) : json(ratios[ratios.size() / 2]);
  j["entries"] = ratios.size();
  return j;
}

int cmd_gen_medium(const Common& c, std::ostream& out) {
  const RunConfig cfg = load(c);
  const std::string dir = out_dir(cfg);
  const MediumRealization r = sample_matern(cfg.medium);
  write_medium_csv(join(dir, "medium.csv"), r);
  write_medium_spec_json(join(dir, "medium_spec.json"), cfg.medium);
  out << "scatterers " << r.size() << "\nvolume fraction " << r.volume_fraction() << '\n';
  return 0;
}

int cmd_simulate(const Common& c, std::ostream& out) {
  const RunConfig cfg = load(c);
  const std::string dir = out_dir(cfg);
  const MediumRealization r = sample_matern(cfg.medium);
  write_medium_csv(join(dir, "medium.csv"), r);
  ReflectionMatrix m = assemble_reflection_matrix(r, cfg.probe, cfg.bw);
  if (cfg.noise_snr_db) add_white_noise(m, *cfg.noise_snr_db, hash_key(cfg.seed, 0x401, 0));
  write_rmx(join(dir, "data.rmx"), m);
  const json born = born_diagnostic(r, cfg, cfg.grid.center, 1.5e-3);
  json summary = {{"scatterers", r.size()},
                  {"volume_fraction", r.volume_fraction()},
                  {"dims", {m.dim, m.ne(), m.nr(), m.nw()}},
                  {"born2", born}};
  write_json(join(dir, "simulate.json"), summary);
  out << "scatterers " << r.size() << "\nvolume fraction " << r.volume_fraction() << "\nrmx dims " << m.dim << ' '
      << m.ne() << ' ' << m.nr() << ' ' << m.nw() << '\n';
  if (born["median_ratio"].is_null()) out << "born2 residual: subsample too small\n";
  else
    out << "born2 residual: median |U2|/|U1| = " << born["median_ratio"].get<double>() << " over "
        << born["subsample_size"].get<std::size_t>() << " scatterers within 1.5 mm of the grid centre\n";
  return 0;
}

int cmd_image(const Common& c, const std::string& rmx, std::optional<double> speed, const GridFlags& g,
              std::ostream& out) {
  if (speed && !(*speed > 0.0)) throw Error(ErrorCode::InvalidConfig, "--c must be positive");
  RunConfig cfg = load(c);
  if (speed) cfg.c_image = *speed;
  apply_grid(cfg, g);
  const ReflectionMatrix m = read_rmx(rmx);
  ImagingConfig ic = cfg.imaging();
  ic.probe.dim = m.dim;
  const PixelGrid img = confocal_image(m, ic, cfg.pixel_grid());
  const std::string dir = out_dir(cfg);
  write_image_csv(join(dir, "image.csv"), img);
  write_image_pgm(join(dir, "image.pgm"), img);
  const FocalSpot fs = focal_spot(img, cfg.grid.center, 0.0);
  out << "peak at x=" << fs.center.x << " z=" << fs.center.z << " |I|=" << fs.peak_value << '\n';
  return 0;
}

int cmd_psf(const Common& c, std::optional<double> speed, const std::vector<double>& y0v,
            const std::string& method, const GridFlags& g, std::ostream& out) {
  if (speed && !(*speed > 0.0)) throw Error(ErrorCode::InvalidConfig, "--c must be positive");
  RunConfig cfg = load(c);
  if (speed) cfg.c_image = *speed;
  apply_grid(cfg, g);
  const ImagingConfig ic = cfg.imaging();
  const Point y0 = y0v.empty() ? cfg.grid.center : point_arg(y0v, cfg.medium.dim, "--y0");
  PixelGrid grid = cfg.pixel_grid();
  if (g.center.empty()) grid = centered_grid(phi_c(y0, ic.c, ic.c_star), grid.dx, grid.dz, grid.nx, grid.nz);
  PixelGrid img;
  if (method == "paraxial") {
    img = grid;
    img.values.resize(img.size());
    const Point zc = phi_c(y0, ic.c, ic.c_star);
    for (int iz = 0; iz < img.nz; ++iz)
      for (int ix = 0; ix < img.nx; ++ix) img.at(ix, iz) = psf_paraxial(y0, img.pixel(ix, iz) - zc, ic);
  } else {
    img = psf_bruteforce(y0, ic, grid);
  }
  const std::string dir = out_dir(cfg);
  write_image_csv(join(dir, "psf.csv"), img);
  write_image_pgm(join(dir, "psf.pgm"), img);
  const FocalSpot fs = focal_spot(img, phi_c(y0, ic.c, ic.c_star), 0.0);
  write_json(join(dir, "psf.json"), {{"method", method},
                                     {"c", ic.c},
                                     {"peak", {fs.center.x, fs.center.z}},
                                     {"peak_value", fs.peak_value},
                                     {"width_transverse", fs.width_transverse},
                                     {"width_axial", fs.width_axial},
                                     {"spot_pixels", fs.region.size()}});
  out << "peak at x=" << fs.center.x << " z=" << fs.center.z << "\n-6 dB widths " << fs.width_transverse << " m x "
      << fs.width_axial << " m\n";
  return 0;
}

int cmd_estimate(const Common& c, const std::string& rmx, std::optional<double> t0, const std::string& mode,
                 std::optional<std::size_t> n, std::ostream& out) {
  RunConfig cfg = load(c);
  if (t0) cfg.guide.t0 = *t0;
  if (n) {
    cfg.ensemble_realizations = *n;
    cfg.guide.n_shifts = mode == "spatial" ? *n : cfg.guide.n_shifts;
  }
  cfg.validate();
  const GuideStarSpec spec = cfg.guide_spec();
  EstimatorReport rep;
  rep.seed = cfg.seed;
  rep.mode = mode;
  rep.c_grid = spec.c_grid;
  if (mode == "ensemble") {
    MediumSpec ms = cfg.medium;
    if (cfg.ensemble_domain) ms.domain = *cfg.ensemble_domain;
    for (double cj : spec.c_grid) {
      const Point z = psi_c(spec.s0, spec.t0, cj);
      if (!ms.domain.contains(z, ms.dim))
        throw Error(ErrorCode::OutOfDomain, "guide point for c = " + std::to_string(cj) + " lies outside the medium");
    }
    rep.F = ensemble_variance_estimate(ms, cfg.ensemble_realizations, spec, cfg.imaging());
    rep.c_hat = spec.c_grid[argmax_first(rep.F)];
    rep.n_shifts = 0;
  } else {
    if (rmx.empty()) throw Error(ErrorCode::InvalidConfig, "spatial mode needs --rmx");
    const ReflectionMatrix m = read_rmx(rmx);
    const KMatrix k = build_K_matrix(m, spec, cfg.medium.domain);
    rep = spatial_variance_estimate(k, spec.c_grid);
    rep.seed = cfg.seed;
    rep.mode = mode;
  }
  const std::string dir = out_dir(cfg);
  write_report_json(join(dir, "estimate.json"), rep);
  if (mode == "ensemble") {
    write_curve_csv(join(dir, "V.csv"), rep.c_grid, rep.F, "V");
  } else {
    write_curve_csv(join(dir, "F.csv"), rep.c_grid, rep.F, "F");
    write_k_abs_csv(join(dir, "K_abs.csv"), rep.K);
    write_kmx(join(dir, "K.kmx"), rep.K, rep.c_grid);
  }
  out << "c_hat " << rep.c_hat << '\n';
  return 0;
}

MediumSpec patch_around(const RunConfig& cfg, const Point& center, double half, double radius) {
  Box b{{center.x - half, center.y - half, center.z - half}, {center.x + half, center.y + half, center.z + half}};
  if (cfg.medium.dim == 2) b.lo.y = b.hi.y = 0.0;
  MediumSpec s = make_medium_spec(cfg.medium.dim, b, cfg.medium.c_star, radius, cfg.medium.target_volume_fraction,
                                  cfg.medium.contrast_std / cfg.medium.n0, cfg.seed);
  s.contrast_law = cfg.medium.contrast_law;
  return s;
}

int cmd_validate(const Common& c, const std::vector<std::string>& checks, std::ostream& out) {
  const RunConfig cfg = load(c);
  const ValidationConfig& v = cfg.validation;
  const std::string dir = out_dir(cfg);
  const ImagingConfig ic = cfg.imaging();
  const GuideStarSpec guide = cfg.guide_spec();
  const Point focus = psi_c(guide.s0, guide.t0, cfg.medium.c_star);
  const double lam = cfg.wavelength();
  auto want = [&](const std::string& name) {
    return checks.empty() || std::find(checks.begin(), checks.end(), name) != checks.end() ||
           std::find(checks.begin(), checks.end(), "all") != checks.end();
  };
  std::vector<ValidationReport> reports;
  const std::vector<Point> zs{focus, focus + Point{lam / 2, 0.0, 0.0}, focus + Point{0.0, 0.0, lam / 2}};
  const MediumSpec patch = patch_around(cfg, focus, v.patch_half_width, cfg.medium.scatterer_radius);
  if (want("gkernel")) reports.push_back(check_g_kernel_quadrature(20, cfg.seed));
  if (want("paraxial"))
    reports.push_back(check_paraxial_convergence(ic, focus, {1.0, 0.5, 0.25}, v.paraxial_tolerance));
  if (want("variance")) {
    VarianceIdentityOptions o;
    o.ratio_bound = v.variance_ratio_bound;
    reports.push_back(check_variance_identity(patch, ic, zs, v.n_realizations, o));
  }
  if (want("scaling"))
    reports.push_back(check_variance_scaling(patch, ic, zs, v.n_realizations, v.variance_scaling_tolerance));
  if (want("spatial"))
    reports.push_back(check_spatial_vs_ensemble(patch, guide, ic, v.n_realizations, v.spatial_ensemble_tolerance));
  if (want("stationarity")) {
    // The finest level quadruples the band, so the medium must be fine enough for it.
    const double lam_min = 2.0 * kPi * ic.c_star / (4.0 * ic.bw.omega_max());
    const double radius = std::min(cfg.medium.scatterer_radius, lam_min / 5.0);
    const MediumRealization r = sample_matern(patch_around(cfg, focus, 0.5 * v.patch_half_width, radius));
    GuideStarSpec g = guide;
    g.c_grid = {cfg.c_image};
    reports.push_back(check_local_stationarity(r, g, ic, {1.0, 0.5, 0.25}, v.stationarity_tolerance));
  }
  const std::string jl = join(dir, "validation.jsonl");
  std::error_code ec;
  fs::remove(jl, ec);
  append_jsonl(jl, reports);
  write_summary_csv(join(dir, "validation_summary.csv"), reports);
  for (const auto& r : reports) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    for (double m : r.measured) out << ' ' << m;
    out << '\n';
  }
  return 0;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::IoError: return 3;
    case ErrorCode::CorruptFile: return 4;
    default: return 2;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Virtual guide star sound-speed estimation"};
  app.require_subcommand(1);
  Common common;
  GridFlags grid;
  std::string rmx, mode = "spatial", method = "brute";
  std::optional<double> speed, t0;
  std::optional<std::size_t> n;
  std::vector<double> y0;
  std::vector<std::string> checks;

  auto* gen = app.add_subcommand("gen-medium", "Sample a medium realization");
  add_common(gen, common);
  auto* sim = app.add_subcommand("simulate", "Sample a medium and write its reflection matrix");
  add_common(sim, common);
  auto* img = app.add_subcommand("image", "Confocal image from a reflection matrix");
  add_common(img, common);
  add_grid(img, grid);
  img->add_option("--rmx", rmx, "Reflection matrix file")->required();
  img->add_option("--c", speed, "Backpropagation speed (m/s)");
  auto* psf = app.add_subcommand("psf", "Point spread function around phi_c(y0)");
  add_common(psf, common);
  add_grid(psf, grid);
  psf->add_option("--c", speed, "Backpropagation speed (m/s)");
  psf->add_option("--y0", y0, "Point source x,z (m)")->delimiter(',');
  psf->add_option("--method", method, "brute or paraxial")->check(CLI::IsMember({"brute", "paraxial"}));
  auto* est = app.add_subcommand("estimate", "Virtual guide star speed estimate");
  add_common(est, common);
  est->add_option("--rmx", rmx, "Reflection matrix file (spatial mode)");
  est->add_option("--t0", t0, "Travel time (s)");
  est->add_option("--mode", mode, "spatial or ensemble")->check(CLI::IsMember({"spatial", "ensemble"}));
  est->add_option("--n", n, "Shifts (spatial) or realizations (ensemble)");
  auto* val = app.add_subcommand("validate", "Run validation checks");
  add_common(val, common);
  val->add_option("--check", checks, "gkernel, paraxial, variance, scaling, spatial, stationarity or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  std::set<std::string> seen;
  auto sink = set_warning_sink([&err, &seen](const std::string& m) {
    if (seen.insert(m).second) err << "warning: " << m << '\n';
  });
  int code = 1;
  try {
    if (*gen) code = cmd_gen_medium(common, out);
    else if (*sim) code = cmd_simulate(common, out);
    else if (*img) code = cmd_image(common, rmx, speed, grid, out);
    else if (*psf) code = cmd_psf(common, speed, y0, method, grid, out);
    else if (*est) code = cmd_estimate(common, rmx, t0, mode, n, out);
    else if (*val) code = cmd_validate(common, checks, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = 1;
  }
  set_warning_sink(sink);
  return code;
}

}  // namespace vgs::cli
