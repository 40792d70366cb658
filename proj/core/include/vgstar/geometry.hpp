#pragma once

#include <cmath>
#include <complex>

namespace vgs {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Points carry three components. `z` is always depth (the axis normal to
// the probe). 2D problems use (x, z) and keep y = 0, so the Euclidean
// distance below is valid in both dimensions.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point& operator+=(const Point& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Point& operator-=(const Point& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
};

inline Point operator+(Point a, const Point& b) { return a += b; }
inline Point operator-(Point a, const Point& b) { return a -= b; }
inline Point operator*(double s, const Point& p) { return {s * p.x, s * p.y, s * p.z}; }
inline bool operator==(const Point& a, const Point& b) {
  return a.x == b.x && a.y == b.y && a.z == b.z;
}

inline double norm(const Point& p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }
inline double distance(const Point& a, const Point& b) { return norm(a - b); }
// Length of the transverse part (x, y).
inline double transverse_norm(const Point& p) { return std::hypot(p.x, p.y); }

struct Box {
  Point lo;
  Point hi;

  bool contains(const Point& p, int dim) const {
    if (p.x < lo.x || p.x > hi.x || p.z < lo.z || p.z > hi.z) return false;
    if (dim == 3 && (p.y < lo.y || p.y > hi.y)) return false;
    return true;
  }
  double measure(int dim) const {
    double m = (hi.x - lo.x) * (hi.z - lo.z);
    return dim == 3 ? m * (hi.y - lo.y) : m;
  }
};

}  // namespace vgs
