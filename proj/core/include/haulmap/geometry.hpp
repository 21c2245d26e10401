#pragma once

#include <optional>
#include <string>
#include <vector>

namespace haulmap {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
inline bool operator!=(Point a, Point b) { return !(a == b); }

using Polyline = std::vector<Point>;

// Planar polygon kernel. Everything here works in projected metres; arcs are
// approximated by inscribed polygons so all areas are slightly conservative.
namespace geom {

inline constexpr double pi = 3.14159265358979323846;

// Angles and small point helpers.
double normalize_angle(double a);          // wraps into [0, 2*pi)
double circular_diff(double a, double b);  // smallest angular separation, in [0, pi]
double distance(Point a, Point b);
double heading_of(Point from, Point to);   // direction of (to - from), in [0, 2*pi)
double length(const Polyline& line);
double point_segment_distance(Point p, Point a, Point b);

// Simple polygon with optional holes. The exterior ring is counter-clockwise,
// holes are clockwise, and rings are closed (first point repeated at the end).
struct Polygon {
  std::vector<Point> exterior;
  std::vector<std::vector<Point>> holes;
};

// Components with pairwise disjoint interiors.
using MultiPolygon = std::vector<Polygon>;

// Circle sector ("pie slice") spanning [direction - angle/2, direction + angle/2]
// with arc_segments chords; arc points lie exactly on the circle.
Polygon make_sector(Point apex, double direction, double radius, double angle,
                    int arc_segments);

// Boolean union. Zero-area inputs are dropped.
MultiPolygon union_all(const MultiPolygon& polys);

// Morphological buffer with round joins. Negative distances erode; erosion may
// split a component or annihilate it entirely. arc_segments counts chords per
// quarter circle.
MultiPolygon buffer(const MultiPolygon& shape, double dist, int arc_segments);
MultiPolygon buffer(const Polygon& shape, double dist, int arc_segments);

// Corridor of half-width dist around a polyline, round caps and joins.
Polygon buffer_polyline(const Polyline& line, double dist, int arc_segments);

MultiPolygon difference(const MultiPolygon& a, const MultiPolygon& b);

Polygon fill_holes(const Polygon& poly);
MultiPolygon fill_holes(const MultiPolygon& polys);

// Dilate-then-erode each component individually, then merge results that
// genuinely overlap afterwards. Components whose closed shapes stay apart are
// kept separate even if their dilated intermediates touched.
MultiPolygon close_components(const MultiPolygon& shape, double dilate,
                              double erode, int arc_segments);

// Closed containment: boundary points count as covered.
bool covers(const Polygon& region, Point p);
bool covers(const Polygon& region, const Polyline& line);
bool covers(const MultiPolygon& region, Point p);
bool covers(const MultiPolygon& region, const Polyline& line);
bool covers(const MultiPolygon& region, const Polygon& poly);

// Strict interior test (boundary points excluded).
bool interior_contains(const Polygon& region, Point p);
bool interior_contains(const MultiPolygon& region, Point p);

bool intersects(const Polygon& a, const Polygon& b);

// Sorts components by their bounding box (min x, min y, max x, max y) so that
// component order is independent of construction history.
void canonical_order(MultiPolygon& polys);

// Minimum point-pair distance; 0 when the regions intersect.
double distance(const Polygon& a, const Polygon& b);

double area(const Polygon& poly);
double area(const MultiPolygon& polys);

// Structural validation (ring closure, orientation, simplicity). Returns a
// description of the first defect, or nullopt when the shape is valid.
std::optional<std::string> validity_failure(const Polygon& poly);
std::optional<std::string> validity_failure(const MultiPolygon& polys);

}  // namespace geom
}  // namespace haulmap
