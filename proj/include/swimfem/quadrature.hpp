#pragma once

#include <array>
#include <vector>

namespace swimfem::quadrature {

struct Point {
  std::array<double, 3> bary;
  double weight;  // weights sum to 1 (multiply by the cell area)
};

/// Symmetric 6-point rule, exact for degree 4.
const std::vector<Point>& triangle_degree4();
/// Symmetric 12-point rule, exact for degree 6.
const std::vector<Point>& triangle_degree6();

}  // namespace swimfem::quadrature
