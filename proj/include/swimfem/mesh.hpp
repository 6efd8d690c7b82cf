#pragma once

#include "swimfem/geometry.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace swimfem {

enum class BoundaryKind { DirichletWall, DirichletInflow, NeumannOutflow, Swimmer };

struct BoundaryTag {
  std::string name;
  BoundaryKind kind = BoundaryKind::DirichletWall;
  int body = -1;  // owning body for Swimmer tags
};

struct BoundaryEdge {
  std::array<int, 2> v;  // oriented so that the fluid lies on the left
  int tag = -1;          // index into Mesh::tags, -1 when untagged
};

/// Unstructured triangulation of the fluid domain.
///
/// Cells are counter-clockwise vertex triples. Boundary edges carry a tag and
/// are oriented with the domain on their left, so outer loops run
/// counter-clockwise and loops around holes run clockwise.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<BoundaryTag> tags;
  /// Horizontal mirror line y = value when the mesh was built mirror-symmetric.
  std::optional<double> symmetry_axis;
  /// Growth of the element size away from the boundary, reused by remesh.
  double grading = 0.3;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }

  double signed_area(int cell) const;
  /// Index of the tag called `name`, or -1.
  int find_tag(const std::string& name) const;
  BoundaryKind kind_of(int tag) const {
    return tag < 0 ? BoundaryKind::DirichletWall : tags[static_cast<std::size_t>(tag)].kind;
  }

  /// Checks positive areas, boundary-edge ownership and closed boundary loops.
  /// Re-orients boundary edges; untagged free edges are rejected.
  void validate();

  /// Sorted vertex indices touched by edges carrying `tag`.
  std::vector<int> tag_vertices(int tag) const;
  /// Sorted boundary vertex indices of every edge whose tag belongs to `body`.
  std::vector<int> body_vertices(int body) const;
  std::vector<bool> boundary_vertex_mask() const;
};

struct QualityReport {
  std::vector<double> cell_quality;
  double min_quality = 1.0;
  int min_cell = -1;
};

/// Normalized inradius/circumradius ratio 2 r_in / r_circ of a triangle.
/// 1 for an equilateral triangle, 0 for degenerate or inverted ones.
double triangle_quality(const Vec2& a, const Vec2& b, const Vec2& c);
double cell_quality(const Mesh& mesh, int cell);
QualityReport mesh_quality(const Mesh& mesh);

/// Moves every vertex by the given displacement; throws InvertedElementError
/// naming the first cell whose signed area is not positive.
Mesh displace(const Mesh& mesh, std::span<const Vec2> displacement);
/// Same as displace() with absolute positions.
Mesh with_vertices(const Mesh& mesh, std::vector<Vec2> positions);

/// Splits every cell into four; boundary edges are split accordingly.
Mesh refine_uniform(const Mesh& mesh);

// ---------------------------------------------------------------------------
// Generation

/// Closed polygonal obstacle carved out of the fluid domain.
struct Hole {
  std::vector<Vec2> polygon;
  std::string tag;  // boundary tag name given to the loop
  int body = 0;     // body owning the loop
  /// Boundary spacing along the loop; 0 keeps the polygon vertices as given.
  double spacing = 0.0;

  static Hole circle(const Vec2& center, double radius, int segments, std::string tag, int body);
  static Hole ellipse(const Vec2& center, double semi_x, double semi_y, double angle, int segments,
                      std::string tag, int body);
};

/// Outer boundary: counter-clockwise polygon with one tag name per edge
/// (edge k joins vertex k and k+1).
struct OuterBoundary {
  std::vector<Vec2> polygon;
  std::vector<std::string> edge_tags;
};

struct GenerateOptions {
  /// Growth rate of the element size with distance from holes.
  double grading = 0.3;
  /// Minimum number of segments used to discretize circles and ellipses.
  int min_hole_segments = 16;
  int smoothing_passes = 6;
  /// Build the lower half and mirror it about y = height / 2 (channel only).
  bool mirror_symmetric = false;
  /// Spacing along outer edges with these tag names; the size field grades
  /// away from them like it does from holes.
  std::map<std::string, double> edge_spacing;
};

OuterBoundary rectangle_boundary(double length, double height);

/// Triangulates `outer` minus the holes. Hole loops are tagged as swimmers of
/// their body; outer edge tags default to DirichletWall.
Mesh generate_domain(const OuterBoundary& outer, const std::vector<Hole>& holes, double target_h,
                     const GenerateOptions& options = {});

/// Rectangle [0, length] x [0, height] with sides tagged bottom, right, top, left.
Mesh generate_channel(double length, double height, const std::vector<Hole>& holes, double target_h,
                      const GenerateOptions& options = {});

struct RemeshResult {
  Mesh mesh;
  /// old vertex index -> new vertex index for boundary vertices, -1 elsewhere.
  std::vector<int> vertex_map;
  /// False when the fresh triangulation was worse and the input was kept.
  bool replaced = true;
};

/// Re-triangulates the region bounded by the current boundary loops with a
/// constrained Delaunay mesh sized after the current local edge lengths.
/// Boundary vertices keep their coordinates and tags. Mirror-symmetric meshes
/// are remeshed as a half and mirrored again, which snaps the upper boundary
/// onto the mirror image of the lower one. The input is returned unchanged if
/// the fresh triangulation has a lower minimum quality.
RemeshResult remesh_with_map(const Mesh& mesh);
Mesh remesh(const Mesh& mesh);

/// Bucket grid over the cells of a mesh for point location.
class PointLocator {
 public:
  struct Hit {
    int cell = -1;
    std::array<double, 3> bary{};  // barycentric coordinates in `cell`
    bool inside = false;           // false when snapped to the nearest cell
  };

  explicit PointLocator(const Mesh& mesh);
  Hit locate(const Vec2& p) const;

 private:
  const Mesh* mesh_;
  Vec2 lo_, cell_size_;
  int nx_ = 1, ny_ = 1;
  std::vector<int> start_, items_;
};

// ---------------------------------------------------------------------------
// Files

/// Reads the MSH ASCII 2.2 subset: line (type 1) and triangle (type 2)
/// elements, with physical names mapped to boundary tags.
Mesh load_msh(const std::filesystem::path& path);
Mesh parse_msh(const std::string& text);
void save_msh(const Mesh& mesh, const std::filesystem::path& path);

/// Boundary kind implied by a tag name: "inflow*", "outflow*", "swimmer<i>"
/// or "body<i>"; anything else is a wall.
BoundaryTag tag_from_name(const std::string& name);

}  // namespace swimfem
