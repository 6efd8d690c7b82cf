#pragma once

#include "swimfem/geometry.hpp"

#include <array>
#include <functional>
#include <vector>

namespace swimfem {

/// Point set plus constraint segments forming closed loops. The region kept
/// is the set of triangles separated from infinity by an odd number of loops.
struct PlanarStraightLineGraph {
  std::vector<Vec2> points;
  std::vector<std::array<int, 2>> segments;
};

struct RefinementOptions {
  /// Target edge length at a point; null disables refinement.
  std::function<double(const Vec2&)> size;
  /// Triangles below this quality get a Steiner point when possible.
  double min_quality = 0.6;
  int smoothing_passes = 6;
  std::size_t max_points = 2'000'000;
};

struct Triangulation {
  /// Input points first (same indices), then Steiner points.
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
};

/// Constrained Delaunay triangulation of the region enclosed by the segment
/// loops, optionally refined to the size function and smoothed. Input points
/// and segments are never moved or split.
Triangulation triangulate(const PlanarStraightLineGraph& graph, const RefinementOptions& options = {});

}  // namespace swimfem
