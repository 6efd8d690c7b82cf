#include "swimfem/quadrature.hpp"

namespace swimfem::quadrature {
namespace {

void orbit3(std::vector<Point>& rule, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  rule.push_back({{a, a, b}, w});
  rule.push_back({{a, b, a}, w});
  rule.push_back({{b, a, a}, w});
}

void orbit6(std::vector<Point>& rule, double a, double b, double w) {
  const double c = 1.0 - a - b;
  rule.push_back({{a, b, c}, w});
  rule.push_back({{a, c, b}, w});
  rule.push_back({{b, a, c}, w});
  rule.push_back({{b, c, a}, w});
  rule.push_back({{c, a, b}, w});
  rule.push_back({{c, b, a}, w});
}

}  // namespace

const std::vector<Point>& triangle_degree4() {
  static const std::vector<Point> rule = [] {
    std::vector<Point> r;
    orbit3(r, 0.445948490915965, 0.223381589678011);
    orbit3(r, 0.091576213509771, 0.109951743655322);
    return r;
  }();
  return rule;
}

const std::vector<Point>& triangle_degree6() {
  static const std::vector<Point> rule = [] {
    std::vector<Point> r;
    orbit3(r, 0.063089014491502, 0.050844906370207);
    orbit3(r, 0.249286745170910, 0.116786275726379);
    orbit6(r, 0.053145049844817, 0.310352451033784, 0.082851075618374);
    return r;
  }();
  return rule;
}

}  // namespace swimfem::quadrature
