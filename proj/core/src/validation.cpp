#include "vgstar/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json_io.hpp"
#include "vgstar/error.hpp"
#include "vgstar/rng.hpp"

namespace vgs {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// F^c(z, y) for one image point z and many sources y.
std::vector<cplx> psf_over_sources(const Point& z, const std::vector<Point>& ys, const ImagingConfig& cfg) {
  cfg.validate();
  const int dim = cfg.probe.dim;
  const auto xe = cfg.probe.emit_positions();
  const auto xr = cfg.probe.receive_positions();
  const auto freqs = frequency_grid(cfg.bw);
  const size_t ne = xe.size(), nr = xr.size(), nw = freqs.size();
  std::vector<cplx> ge(nw * ne), gr(nw * nr);
  for (size_t k = 0; k < nw; ++k) {
    const double kc = freqs[k].omega / cfg.c;
    for (size_t e = 0; e < ne; ++e) ge[k * ne + e] = green(kc, z, xe[e], dim);
    for (size_t r = 0; r < nr; ++r) gr[k * nr + r] = green(kc, z, xr[r], dim);
  }
  std::vector<cplx> out(ys.size());
#pragma omp parallel
  {
    std::vector<double> de(ne), dr(nr);
#pragma omp for schedule(dynamic, 16)
    for (long p = 0; p < static_cast<long>(ys.size()); ++p) {
      for (size_t e = 0; e < ne; ++e) de[e] = distance(ys[p], xe[e]);
      for (size_t r = 0; r < nr; ++r) dr[r] = distance(ys[p], xr[r]);
      cplx acc(0.0, 0.0);
      for (size_t k = 0; k < nw; ++k) {
        const double w = freqs[k].omega;
        const double ks = w / cfg.c_star;
        cplx se(0.0, 0.0), sr(0.0, 0.0);
        for (size_t e = 0; e < ne; ++e) se += ge[k * ne + e] * std::conj(green_r(ks, de[e], dim));
        for (size_t r = 0; r < nr; ++r) sr += gr[k * nr + r] * std::conj(green_r(ks, dr[r], dim));
        acc += freqs[k].weight * w * w * pulse_spectrum(cfg.bw, w) * se * sr;
      }
      out[p] = acc;
    }
  }
  return out;
}

// Cell-centred quadrature points covering a 2D box.
std::vector<Point> box_points(const Box& b, double h, double& cell_area) {
  const long nx = std::max(1L, std::lround(std::ceil((b.hi.x - b.lo.x) / h)));
  const long nz = std::max(1L, std::lround(std::ceil((b.hi.z - b.lo.z) / h)));
  const double hx = (b.hi.x - b.lo.x) / nx, hz = (b.hi.z - b.lo.z) / nz;
  cell_area = hx * hz;
  std::vector<Point> pts;
  pts.reserve(static_cast<size_t>(nx * nz));
  for (long k = 0; k < nz; ++k)
    for (long i = 0; i < nx; ++i) pts.push_back({b.lo.x + (i + 0.5) * hx, 0.0, b.lo.z + (k + 0.5) * hz});
  return pts;
}

struct VarianceSample {
  double mc = 0.0;        // pooled Monte-Carlo variance
  double analytic = 0.0;  // pooled right-hand side
};

VarianceSample variance_pair(const MediumSpec& spec, const ImagingConfig& cfg, const std::vector<Point>& zs,
                             std::size_t n, double quad_spacing) {
  if (spec.dim != 2) throw Error(ErrorCode::DimensionMismatch, "variance identity is implemented for 2D media");
  const size_t np = zs.size();
  std::vector<cplx> sum(np, cplx(0.0, 0.0));
  std::vector<double> sum2(np, 0.0);
  for (size_t t = 0; t < n; ++t) {
    MediumSpec s = spec;
    s.seed = derive_seed(spec.seed, t);
    const MediumRealization r = sample_matern(s);
    const ReflectionMatrix m = assemble_reflection_matrix(r, cfg.probe, cfg.bw);
    const auto v = confocal_values(m, cfg.c, zs);
    for (size_t p = 0; p < np; ++p) {
      sum[p] += v[p];
      sum2[p] += std::norm(v[p]);
    }
  }
  VarianceSample out;
  for (size_t p = 0; p < np; ++p) {
    const cplx mean = sum[p] / static_cast<double>(n);
    out.mc += (sum2[p] - static_cast<double>(n) * std::norm(mean)) / static_cast<double>(n - 1);
  }
  out.mc /= static_cast<double>(np);

  const Box cb = spec.center_box();
  const double h = quad_spacing > 0.0 ? quad_spacing : cfg.wavelength() / 10.0;
  double cell = 0.0;
  const auto ys = box_points(cb, h, cell);
  for (const Point& z : zs) {
    const auto f = psf_over_sources(z, ys, cfg);
    double acc = 0.0;
    for (const cplx& v : f) acc += std::norm(v);
    out.analytic += covariance_integral(spec) * acc * cell;
  }
  out.analytic /= static_cast<double>(np);
  return out;
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_json_line(const ValidationReport& r) {
  detail::json j;
  j["name"] = r.name;
  j["measured"] = r.measured;
  j["expected"] = r.expected;
  j["tolerance"] = r.tolerance;
  j["norm"] = r.norm;
  j["passed"] = r.passed;
  j["runtime_s"] = r.runtime_s;
  detail::json d = detail::json::object();
  for (const auto& [k, v] : r.details) d[k] = v;
  j["details"] = d;
  return j.dump();
}

void append_jsonl(const std::string& path, const std::vector<ValidationReport>& reports) {
  std::ofstream f(path, std::ios::app);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  for (const auto& r : reports) f << to_json_line(r) << '\n';
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

void write_summary_csv(const std::string& path, const std::vector<ValidationReport>& reports) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  f << "name,passed,measured,expected,tolerance,runtime_s\n";
  for (const auto& r : reports) {
    f << r.name << ',' << (r.passed ? "true" : "false") << ','
      << (r.measured.empty() ? std::string() : fmt_num(r.measured.front())) << ','
      << (r.expected.empty() ? std::string() : fmt_num(r.expected.front())) << ',' << fmt_num(r.tolerance)
      << ',' << fmt_num(r.runtime_s) << '\n';
  }
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

ValidationReport check_variance_identity(const MediumSpec& spec, const ImagingConfig& cfg,
                                         const std::vector<Point>& zs, std::size_t n_realizations,
                                         const VarianceIdentityOptions& opt) {
  if (n_realizations < 2) throw Error(ErrorCode::InsufficientSamples, "variance identity needs >= 2 realizations");
  if (n_realizations < 50) warn("variance identity with fewer than 50 realizations");
  if (zs.empty()) throw Error(ErrorCode::InvalidSpec, "no evaluation points");
  const auto t0 = Clock::now();
  ValidationReport rep;
  rep.name = "variance_identity";
  rep.tolerance = opt.ratio_bound;
  rep.norm = "ratio measured/expected within [1/tolerance, tolerance]";
  const VarianceSample s = variance_pair(spec, cfg, zs, n_realizations, opt.quad_spacing);
  rep.measured = {s.mc};
  rep.expected = {s.analytic};
  const double ratio = s.analytic > 0.0 ? s.mc / s.analytic : (s.mc == 0.0 ? 1.0 : INFINITY);
  rep.details.push_back({"ratio", ratio});
  rep.details.push_back({"n_realizations", static_cast<double>(n_realizations)});
  rep.details.push_back({"n_points", static_cast<double>(zs.size())});
  rep.passed = (s.mc == 0.0 && s.analytic == 0.0) ||
               (ratio >= 1.0 / opt.ratio_bound && ratio <= opt.ratio_bound);
  rep.runtime_s = seconds_since(t0);
  return rep;
}

ValidationReport check_variance_scaling(const MediumSpec& spec, const ImagingConfig& cfg,
                                        const std::vector<Point>& zs, std::size_t n_realizations,
                                        double tolerance) {
  const auto t0 = Clock::now();
  MediumSpec half = spec;
  half.scatterer_radius *= 0.5;
  half.min_distance *= 0.5;
  half.seed = hash_key(spec.seed, 0xE5, 1);
  const VarianceSample a = variance_pair(spec, cfg, zs, n_realizations, 0.0);
  const VarianceSample b = variance_pair(half, cfg, zs, n_realizations, 0.0);
  ValidationReport rep;
  rep.name = "variance_scaling";
  rep.tolerance = tolerance;
  rep.norm = "|Var(eps)/Var(eps/2) / 2^d - 1| <= tolerance";
  const double expect = std::pow(2.0, spec.dim);
  const double raw = a.mc / b.mc;
  rep.measured = {raw};
  rep.expected = {expect};
  const double ra = a.mc / a.analytic, rb = b.mc / b.analytic;
  rep.details = {{"var_eps", a.mc}, {"var_half_eps", b.mc}, {"ratio_eps", ra}, {"ratio_half_eps", rb},
                 {"ratio_of_ratios", ra / rb}};
  rep.passed = std::fabs(raw / expect - 1.0) <= tolerance;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

double relative_l2(const std::vector<double>& a, const std::vector<double>& ref) {
  if (a.size() != ref.size()) throw Error(ErrorCode::DimensionMismatch, "curves differ in length");
  double num = 0.0, den = 0.0;
  for (size_t j = 0; j < a.size(); ++j) {
    num += (a[j] - ref[j]) * (a[j] - ref[j]);
    den += ref[j] * ref[j];
  }
  return den > 0.0 ? std::sqrt(num / den) : (num == 0.0 ? 0.0 : INFINITY);
}

namespace {

std::vector<double> spatial_curve(const MediumSpec& spec, const GuideStarSpec& guide, const ImagingConfig& cfg) {
  const MediumRealization r = sample_matern(spec);
  const ReflectionMatrix m = assemble_reflection_matrix(r, cfg.probe, cfg.bw);
  return spatial_variance_estimate(build_K_matrix(m, guide), guide.c_grid).F;
}

}  // namespace

ValidationReport check_spatial_vs_ensemble(const MediumSpec& spec, const GuideStarSpec& guide,
                                           const ImagingConfig& cfg, std::size_t n_realizations,
                                           double tolerance) {
  if (n_realizations < 2) throw Error(ErrorCode::InsufficientSamples, "ensemble needs >= 2 realizations");
  const auto t0 = Clock::now();
  const auto f = spatial_curve(spec, guide, cfg);
  MediumSpec ens = spec;
  ens.seed = hash_key(spec.seed, 0xE45, 0);
  const auto v = ensemble_variance_estimate(ens, n_realizations, guide, cfg);
  ValidationReport rep;
  rep.name = "spatial_vs_ensemble";
  rep.tolerance = tolerance;
  rep.norm = "relative L2 distance over the c grid <= tolerance";
  const double d = relative_l2(f, v);
  rep.measured = {d};
  rep.expected = {0.0};
  const size_t jf = argmax_first(f), jv = argmax_first(v);
  rep.details = {{"distance", d},
                 {"n_shifts", static_cast<double>(guide.n_shifts())},
                 {"n_realizations", static_cast<double>(n_realizations)},
                 {"c_hat_spatial", guide.c_grid[jf]},
                 {"c_hat_ensemble", guide.c_grid[jv]}};
  rep.passed = d <= tolerance;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

ValidationReport check_spatial_vs_ensemble_trend(const MediumSpec& spec, const GuideStarSpec& guide,
                                                 const ImagingConfig& cfg, std::size_t n_realizations,
                                                 const std::vector<std::size_t>& shift_counts,
                                                 double shift_radius, std::uint64_t shift_seed) {
  const auto t0 = Clock::now();
  const MediumRealization r = sample_matern(spec);
  const ReflectionMatrix m = assemble_reflection_matrix(r, cfg.probe, cfg.bw);
  MediumSpec ens = spec;
  ens.seed = hash_key(spec.seed, 0xE45, 0);
  const auto v = ensemble_variance_estimate(ens, n_realizations, guide, cfg);
  ValidationReport rep;
  rep.name = "spatial_vs_ensemble_trend";
  rep.norm = "distance non-increasing in the number of shifts";
  rep.passed = true;
  double prev = INFINITY;
  for (size_t n : shift_counts) {
    GuideStarSpec g = guide;
    g.shifts = ring_shifts(n, shift_radius, hash_key(shift_seed, n, 7));
    const auto f = spatial_variance_estimate(build_K_matrix(m, g), g.c_grid).F;
    const double d = relative_l2(f, v);
    rep.measured.push_back(d);
    rep.details.push_back({"n_shifts_" + std::to_string(n), d});
    if (d > prev) rep.passed = false;
    prev = d;
  }
  rep.runtime_s = seconds_since(t0);
  return rep;
}

ValidationReport check_estimator_consistency(const MediumSpec& spec, const GuideStarSpec& guide,
                                             const ImagingConfig& cfg, std::size_t n_seeds,
                                             const std::vector<std::size_t>& shift_counts, double shift_radius,
                                             std::uint64_t shift_seed) {
  if (n_seeds < 2) throw Error(ErrorCode::InsufficientSamples, "consistency needs >= 2 seeds");
  const auto t0 = Clock::now();
  std::vector<std::vector<double>> c_hat(shift_counts.size());
  for (size_t n = 0; n < n_seeds; ++n) {
    MediumSpec s = spec;
    s.seed = derive_seed(spec.seed, n);
    const ReflectionMatrix m = assemble_reflection_matrix(sample_matern(s), cfg.probe, cfg.bw);
    for (size_t q = 0; q < shift_counts.size(); ++q) {
      GuideStarSpec g = guide;
      g.shifts = ring_shifts(shift_counts[q], shift_radius, hash_key(shift_seed, shift_counts[q], n));
      c_hat[q].push_back(spatial_variance_estimate(build_K_matrix(m, g), g.c_grid).c_hat);
    }
  }
  ValidationReport rep;
  rep.name = "estimator_consistency";
  rep.norm = "sample variance of c_hat across seeds non-increasing in the number of shifts";
  rep.passed = true;
  double prev = INFINITY;
  for (size_t q = 0; q < shift_counts.size(); ++q) {
    double mean = 0.0, var = 0.0;
    for (double c : c_hat[q]) mean += c;
    mean /= static_cast<double>(n_seeds);
    for (double c : c_hat[q]) var += (c - mean) * (c - mean);
    var /= static_cast<double>(n_seeds - 1);
    rep.measured.push_back(var);
    rep.details.push_back({"var_n_shifts_" + std::to_string(shift_counts[q]), var});
    rep.details.push_back({"mean_n_shifts_" + std::to_string(shift_counts[q]), mean});
    if (var > prev) rep.passed = false;
    prev = var;
  }
  rep.runtime_s = seconds_since(t0);
  return rep;
}

ValidationReport check_paraxial_convergence(const ImagingConfig& base, const Point& y0,
                                            const std::vector<double>& eta_levels, double tolerance,
                                            int window_pixels) {
  if (eta_levels.size() < 3) throw Error(ErrorCode::InvalidSpec, "convergence study needs >= 3 eta levels");
  for (size_t i = 1; i < eta_levels.size(); ++i)
    if (!(eta_levels[i] < eta_levels[i - 1])) throw Error(ErrorCode::InvalidSpec, "eta levels must decrease");
  const auto t0 = Clock::now();
  ValidationReport rep;
  rep.name = "paraxial_convergence";
  rep.tolerance = tolerance;
  rep.norm = "max |paraxial - brute| / max |brute| strictly decreasing; last level <= tolerance at c = c_star";
  const int n = std::max(3, window_pixels);
  for (double eta : eta_levels) {
    const ImagingConfig cfg = eta_scaled(base, eta);
    const double res_t = 2.0 * cfg.c_star * y0.z / (cfg.bw.omega_c * cfg.probe.half_aperture);
    const double res_a = 2.0 * cfg.c_star / cfg.bw.half_width;
    const Point zc = phi_c(y0, cfg.c, cfg.c_star);
    std::vector<Point> dzs, zs;
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        const Point d{-3.0 * res_t + 6.0 * res_t * a / (n - 1), 0.0, -3.0 * res_a + 6.0 * res_a * b / (n - 1)};
        dzs.push_back(d);
        zs.push_back(zc + d);
      }
    PixelGrid g;
    g.origin = zs.front();
    g.dx = 6.0 * res_t / (n - 1);
    g.dz = 6.0 * res_a / (n - 1);
    g.nx = n;
    g.nz = n;
    const PixelGrid bf = psf_bruteforce(y0, cfg, g);
    std::vector<cplx> par(dzs.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < static_cast<long>(dzs.size()); ++i) par[i] = psf_paraxial(y0, dzs[i], cfg);
    double emax = 0.0, bmax = 0.0;
    for (size_t i = 0; i < par.size(); ++i) {
      emax = std::max(emax, std::abs(par[i] - bf.values[i]));
      bmax = std::max(bmax, std::abs(bf.values[i]));
    }
    const double err = emax / bmax;
    rep.measured.push_back(err);
    rep.details.push_back({"eta_" + fmt_num(eta), err});
  }
  rep.passed = true;
  for (size_t i = 1; i < rep.measured.size(); ++i)
    if (!(rep.measured[i] < rep.measured[i - 1])) rep.passed = false;
  if (std::fabs(base.c - base.c_star) <= 1e-12 * base.c_star && rep.measured.back() > tolerance) rep.passed = false;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

ValidationReport check_g_kernel_quadrature(int n_points, std::uint64_t seed, double tolerance) {
  const auto t0 = Clock::now();
  ValidationReport rep;
  rep.name = "g_kernel_quadrature";
  rep.tolerance = tolerance;
  rep.norm = "max absolute difference <= tolerance";
  std::vector<double> x, w;
  gauss_legendre(160, x, w);
  CounterRng rng(seed, 0x6E);
  double worst = 0.0;
  for (int p = 0; p < n_points; ++p) {
    const double a = rng.uniform(-20.0, 20.0), b = rng.uniform(-20.0, 20.0), c = rng.uniform(-20.0, 20.0);
    cplx direct(0.0, 0.0);
    for (size_t i = 0; i < x.size(); ++i)
      for (size_t j = 0; j < x.size(); ++j) {
        const double ph = -(x[i] * a + x[j] * b) + 0.5 * (x[i] * x[i] + x[j] * x[j]) * c;
        direct += w[i] * w[j] * cplx(std::cos(ph), std::sin(ph));
      }
    const double err = std::abs(g_kernel(Point{a, b, 0.0}, c, 3) - direct);
    worst = std::max(worst, err);
  }
  rep.measured = {worst};
  rep.expected = {0.0};
  rep.passed = worst <= tolerance;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

ValidationReport check_local_stationarity(const MediumRealization& r, const GuideStarSpec& guide,
                                          const ImagingConfig& base, const std::vector<double>& eta_levels,
                                          double tolerance) {
  if (eta_levels.empty()) throw Error(ErrorCode::InvalidSpec, "need at least one eta level");
  const auto t0 = Clock::now();
  ValidationReport rep;
  rep.name = "local_stationarity";
  rep.tolerance = tolerance;
  rep.norm = "relative L2 error over shifts; last level <= tolerance and non-increasing across levels";
  for (double eta : eta_levels) {
    const ImagingConfig cfg = eta_scaled(base, eta);
    const Point zc = psi_c(guide.s0, guide.t0, cfg.c);
    const ReflectionMatrix m = assemble_reflection_matrix(r, cfg.probe, cfg.bw);
    double num = 0.0, den = 0.0;
    for (const Point& s : guide.shifts) {
      const Point dz = eta * s;
      const cplx a = confocal_value(m, cfg.c, zc + dz);
      const MediumRealization moved = shift_realization(r, phi_c(dz, cfg.c, cfg.c_star, MapDirection::inverse));
      const ReflectionMatrix mm = assemble_reflection_matrix(moved, cfg.probe, cfg.bw);
      const cplx b = confocal_value(mm, cfg.c, zc);
      num += std::norm(a - b);
      den += std::norm(b);
    }
    const double err = den > 0.0 ? std::sqrt(num / den) : 0.0;
    rep.measured.push_back(err);
    rep.details.push_back({"eta_" + fmt_num(eta), err});
  }
  rep.passed = rep.measured.back() <= tolerance;
  for (size_t i = 1; i < rep.measured.size(); ++i)
    if (rep.measured[i] > rep.measured[i - 1]) rep.passed = false;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

}  // namespace vgs
