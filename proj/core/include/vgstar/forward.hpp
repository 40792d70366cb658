#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vgstar/geometry.hpp"
#include "vgstar/greens.hpp"
#include "vgstar/medium.hpp"

namespace vgs {

// Frequency-domain inter-element responses. Stored frequency-major in
// memory; the RMX file layout is emitter-major (see write_rmx).
struct ReflectionMatrix {
  int dim = 2;
  std::vector<Point> emit;
  std::vector<Point> recv;
  std::vector<double> omega;
  std::vector<double> weight;  // frequency quadrature weights
  std::vector<cplx> data;

  std::size_t ne() const { return emit.size(); }
  std::size_t nr() const { return recv.size(); }
  std::size_t nw() const { return omega.size(); }
  std::size_t index(std::size_t e, std::size_t r, std::size_t k) const { return (k * ne() + e) * nr() + r; }
  cplx& at(std::size_t e, std::size_t r, std::size_t k) { return data[index(e, r, k)]; }
  const cplx& at(std::size_t e, std::size_t r, std::size_t k) const { return data[index(e, r, k)]; }
};

// Zero-filled matrix laid out for the given probe and band.
ReflectionMatrix empty_reflection_matrix(const ProbeGeometry& probe, const Bandwidth& bw);

struct AssemblyOptions {
  // Replace the centre-point rule by a small symmetric cubature over each
  // ball (5 points in 2D, 7 in 3D).
  bool refine_quadrature = false;
};

// Born single-scattering data, background speed c_star of the realization.
// Warns when radius > lambda_min/20, throws ScattererTooLarge above lambda_min/4.
ReflectionMatrix assemble_reflection_matrix(const MediumRealization& r, const ProbeGeometry& probe,
                                            const Bandwidth& bw, const AssemblyOptions& opt = {});

// Response of an isolated point reflector of strength tau at y0.
ReflectionMatrix point_target_matrix(const Point& y0, double tau, double c_star,
                                     const ProbeGeometry& probe, const Bandwidth& bw);

// Double-scattering term for one (e, r, k) entry; O(N^2) in the scatterer count.
cplx born2_residual(const MediumRealization& r, const ProbeGeometry& probe, const Bandwidth& bw,
                    std::size_t e, std::size_t r_idx, std::size_t k);

// Adds circular complex white noise at the given SNR (dB, relative to the
// RMS of the data).
void add_white_noise(ReflectionMatrix& m, double snr_db, std::uint64_t seed);

void write_rmx(const std::string& path, const ReflectionMatrix& m);
ReflectionMatrix read_rmx(const std::string& path);

// Trapezoid weights recovered from a sorted, uniform frequency list.
std::vector<double> trapezoid_weights(const std::vector<double>& omega);

}  // namespace vgs
