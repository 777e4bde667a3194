#ifndef DRQ_GEOMETRY_HPP
#define DRQ_GEOMETRY_HPP

#include <cmath>
#include <numbers>
#include <vector>

namespace drq {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double k, Point2 p) { return {k * p.x, k * p.y}; }

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

// Counterclockwise rotation; BEV convention is x forward, y left.
inline Point2 rotate(Point2 p, double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double radians) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

// Image-plane box in pixels.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x1 >= 0.0 && y1 >= 0.0 && x1 < x2 && y1 < y2;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Trajectory {
  std::vector<Point2> points;
  double stride = 0.0;  // seconds between points

  bool valid() const { return points.size() >= 2 && stride > 0.0; }
};

}  // namespace drq

#endif  // DRQ_GEOMETRY_HPP
