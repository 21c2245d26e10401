#include "haulmap/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/geometries.hpp>
#include <boost/geometry/geometries/point_xy.hpp>

#include "haulmap/errors.hpp"

namespace haulmap::geom {

namespace bg = boost::geometry;

namespace {

using BgPoint = bg::model::d2::point_xy<double>;
using BgRing = bg::model::ring<BgPoint, false, true>;  // ccw, closed
using BgPolygon = bg::model::polygon<BgPoint, false, true>;
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;
using BgLinestring = bg::model::linestring<BgPoint>;

// Snap grid for boolean outputs and the area below which a component is
// treated as a degenerate sliver.
constexpr double kSnap = 1e-9;
constexpr double kSliverArea = 1e-6;

double snap(double v) { return std::round(v / kSnap) * kSnap; }

BgRing to_bg_ring(const std::vector<Point>& ring) {
  BgRing out;
  out.reserve(ring.size());
  for (const Point& p : ring) out.emplace_back(p.x, p.y);
  return out;
}

BgPolygon to_bg(const Polygon& poly) {
  BgPolygon out;
  out.outer() = to_bg_ring(poly.exterior);
  for (const auto& hole : poly.holes) out.inners().push_back(to_bg_ring(hole));
  bg::correct(out);
  return out;
}

BgMultiPolygon to_bg(const MultiPolygon& polys) {
  BgMultiPolygon out;
  out.reserve(polys.size());
  for (const Polygon& p : polys) out.push_back(to_bg(p));
  return out;
}

BgLinestring to_bg(const Polyline& line) {
  BgLinestring out;
  out.reserve(line.size());
  for (const Point& p : line) out.emplace_back(p.x, p.y);
  return out;
}

std::vector<Point> from_bg_ring(const BgRing& ring) {
  std::vector<Point> out;
  out.reserve(ring.size());
  for (const BgPoint& p : ring) out.push_back({p.x(), p.y()});
  return out;
}

Polygon from_bg(const BgPolygon& poly) {
  Polygon out;
  out.exterior = from_bg_ring(poly.outer());
  for (const auto& hole : poly.inners()) out.holes.push_back(from_bg_ring(hole));
  return out;
}

MultiPolygon from_bg(const BgMultiPolygon& polys) {
  MultiPolygon out;
  out.reserve(polys.size());
  for (const BgPolygon& p : polys) out.push_back(from_bg(p));
  return out;
}

// Normalizes a boolean-operation result: snap coordinates, drop duplicate
// points and spikes introduced by snapping, restore orientation/closure, and
// discard sliver components.
void sanitize(BgMultiPolygon& polys) {
  for (auto& poly : polys) {
    for (auto& p : poly.outer()) p = BgPoint(snap(p.x()), snap(p.y()));
    for (auto& ring : poly.inners())
      for (auto& p : ring) p = BgPoint(snap(p.x()), snap(p.y()));
  }
  bg::unique(polys);
  bg::remove_spikes(polys);
  bg::correct(polys);
  polys.erase(std::remove_if(polys.begin(), polys.end(),
                             [](const BgPolygon& p) {
                               return bg::area(p) < kSliverArea;
                             }),
              polys.end());
  for (auto& poly : polys) {
    auto& holes = poly.inners();
    holes.erase(std::remove_if(holes.begin(), holes.end(),
                               [](const BgRing& r) {
                                 return std::abs(bg::area(r)) < kSliverArea;
                               }),
                holes.end());
  }
}

BgMultiPolygon run_buffer(const BgMultiPolygon& in, double dist,
                          int arc_segments) {
  // arc_segments counts chords per quarter circle.
  const std::size_t points_per_circle =
      static_cast<std::size_t>(std::max(arc_segments, 2)) * 4;
  bg::strategy::buffer::distance_symmetric<double> distance(dist);
  bg::strategy::buffer::side_straight side;
  bg::strategy::buffer::join_round join(points_per_circle);
  bg::strategy::buffer::end_round end(points_per_circle);
  bg::strategy::buffer::point_circle circle(points_per_circle);
  BgMultiPolygon out;
  bg::buffer(in, out, distance, side, join, end, circle);
  sanitize(out);
  return out;
}

BgMultiPolygon union_pair(const BgMultiPolygon& a, const BgMultiPolygon& b) {
  BgMultiPolygon out;
  bg::union_(a, b, out);
  sanitize(out);
  return out;
}

BgMultiPolygon union_range(std::vector<BgMultiPolygon>& parts, std::size_t lo,
                           std::size_t hi) {
  if (lo == hi) return {};
  if (hi - lo == 1) return std::move(parts[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  return union_pair(union_range(parts, lo, mid), union_range(parts, mid, hi));
}

}  // namespace

double normalize_angle(double a) {
  double r = std::fmod(a, 2.0 * pi);
  if (r < 0.0) r += 2.0 * pi;
  return r;
}

double circular_diff(double a, double b) {
  double d = std::abs(normalize_angle(a) - normalize_angle(b));
  return d > pi ? 2.0 * pi - d : d;
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double heading_of(Point from, Point to) {
  return normalize_angle(std::atan2(to.y - from.y, to.x - from.x));
}

double length(const Polyline& line) {
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i)
    total += distance(line[i - 1], line[i]);
  return total;
}

double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, a);
  double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, {a.x + t * dx, a.y + t * dy});
}

Polygon make_sector(Point apex, double direction, double radius, double angle,
                    int arc_segments) {
  if (radius <= 0.0) throw InvariantViolation("make_sector: radius must be > 0");
  if (angle <= 0.0 || angle > pi)
    throw InvariantViolation("make_sector: angle must be in (0, pi]");
  if (arc_segments < 2)
    throw InvariantViolation("make_sector: need at least 2 arc segments");

  Polygon out;
  out.exterior.reserve(static_cast<std::size_t>(arc_segments) + 3);
  out.exterior.push_back(apex);
  const double start = direction - angle / 2.0;
  for (int i = 0; i <= arc_segments; ++i) {
    const double theta = start + angle * static_cast<double>(i) /
                                     static_cast<double>(arc_segments);
    out.exterior.push_back(
        {apex.x + radius * std::cos(theta), apex.y + radius * std::sin(theta)});
  }
  out.exterior.push_back(apex);
  return out;
}

MultiPolygon union_all(const MultiPolygon& polys) {
  std::vector<BgMultiPolygon> parts;
  parts.reserve(polys.size());
  for (const Polygon& p : polys) {
    BgPolygon bp = to_bg(p);
    if (bg::area(bp) < kSliverArea) continue;  // degenerate input dropped
    parts.push_back(BgMultiPolygon{std::move(bp)});
  }
  if (parts.empty()) return {};
  return from_bg(union_range(parts, 0, parts.size()));
}

MultiPolygon buffer(const MultiPolygon& shape, double dist, int arc_segments) {
  if (shape.empty()) return {};
  return from_bg(run_buffer(to_bg(shape), dist, arc_segments));
}

MultiPolygon buffer(const Polygon& shape, double dist, int arc_segments) {
  return buffer(MultiPolygon{shape}, dist, arc_segments);
}

Polygon buffer_polyline(const Polyline& line, double dist, int arc_segments) {
  if (line.size() < 2)
    throw InvariantViolation("buffer_polyline: need at least 2 points");
  if (dist <= 0.0)
    throw InvariantViolation("buffer_polyline: distance must be > 0");

  const std::size_t points_per_circle =
      static_cast<std::size_t>(std::max(arc_segments, 2)) * 4;
  bg::strategy::buffer::distance_symmetric<double> distance(dist);
  bg::strategy::buffer::side_straight side;
  bg::strategy::buffer::join_round join(points_per_circle);
  bg::strategy::buffer::end_round end(points_per_circle);
  bg::strategy::buffer::point_circle circle(points_per_circle);
  BgMultiPolygon out;
  bg::buffer(to_bg(line), out, distance, side, join, end, circle);
  sanitize(out);
  if (out.empty())
    throw InvariantViolation("buffer_polyline: degenerate corridor");
  // A connected polyline always buffers to a single component.
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.size(); ++i)
    if (bg::area(out[i]) > bg::area(out[best])) best = i;
  return from_bg(out[best]);
}

MultiPolygon difference(const MultiPolygon& a, const MultiPolygon& b) {
  BgMultiPolygon out;
  bg::difference(to_bg(a), to_bg(b), out);
  sanitize(out);
  return from_bg(out);
}

Polygon fill_holes(const Polygon& poly) {
  Polygon out;
  out.exterior = poly.exterior;
  return out;
}

MultiPolygon fill_holes(const MultiPolygon& polys) {
  MultiPolygon out;
  out.reserve(polys.size());
  for (const Polygon& p : polys) out.push_back(fill_holes(p));
  return out;
}

MultiPolygon close_components(const MultiPolygon& shape, double dilate,
                              double erode, int arc_segments) {
  MultiPolygon closed;
  for (const Polygon& component : shape) {
    MultiPolygon c = buffer(buffer(component, dilate, arc_segments), -erode,
                            arc_segments);
    closed.insert(closed.end(), c.begin(), c.end());
  }
  // Components whose closed shapes genuinely overlap merge here; shapes that
  // only met in their dilated state stay separate.
  return union_all(closed);
}

bool covers(const Polygon& region, Point p) {
  return bg::covered_by(BgPoint(p.x, p.y), to_bg(region));
}

bool covers(const Polygon& region, const Polyline& line) {
  return bg::covered_by(to_bg(line), to_bg(region));
}

bool covers(const MultiPolygon& region, Point p) {
  return bg::covered_by(BgPoint(p.x, p.y), to_bg(region));
}

bool covers(const MultiPolygon& region, const Polyline& line) {
  return bg::covered_by(to_bg(line), to_bg(region));
}

bool covers(const MultiPolygon& region, const Polygon& poly) {
  return bg::covered_by(to_bg(poly), to_bg(region));
}

bool interior_contains(const Polygon& region, Point p) {
  return bg::within(BgPoint(p.x, p.y), to_bg(region));
}

bool interior_contains(const MultiPolygon& region, Point p) {
  return bg::within(BgPoint(p.x, p.y), to_bg(region));
}

bool intersects(const Polygon& a, const Polygon& b) {
  return bg::intersects(to_bg(a), to_bg(b));
}

void canonical_order(MultiPolygon& polys) {
  auto key = [](const Polygon& p) {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    for (const Point& q : p.exterior) {
      min_x = std::min(min_x, q.x);
      min_y = std::min(min_y, q.y);
      max_x = std::max(max_x, q.x);
      max_y = std::max(max_y, q.y);
    }
    return std::array<double, 4>{min_x, min_y, max_x, max_y};
  };
  std::stable_sort(polys.begin(), polys.end(),
                   [&](const Polygon& a, const Polygon& b) {
                     return key(a) < key(b);
                   });
}

double distance(const Polygon& a, const Polygon& b) {
  return bg::distance(to_bg(a), to_bg(b));
}

double area(const Polygon& poly) { return bg::area(to_bg(poly)); }

double area(const MultiPolygon& polys) { return bg::area(to_bg(polys)); }

std::optional<std::string> validity_failure(const Polygon& poly) {
  std::string reason;
  if (bg::is_valid(to_bg(poly), reason)) return std::nullopt;
  return reason;
}

std::optional<std::string> validity_failure(const MultiPolygon& polys) {
  std::string reason;
  if (bg::is_valid(to_bg(polys), reason)) return std::nullopt;
  return reason;
}

}  // namespace haulmap::geom
