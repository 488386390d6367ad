// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace plapdg {

using Vec2 = Eigen::Vector2d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double diameter() const;
  bool contains(const Vec2& x, double tol = 0.0) const;
};

/// A maximal piece of the skeleton. Interior interfaces are shared by the
/// plus and minus element; on the boundary minus == plus and the normal
/// points out of the domain.
struct Interface {
  std::array<int, 2> vertices{};
  int plus = -1;
  int minus = -1;
  int plus_edge = -1;   // local edge index in the plus element
  int minus_edge = -1;  // local edge index in the minus element
  Vec2 normal = Vec2::Zero();
  double length = 0.0;

  bool boundary() const { return plus == minus; }
};

/// Conforming triangulation of a polygonal domain. Local edge i of an
/// element joins its vertices i and (i+1)%3. Elements are stored with
/// positive orientation.
///
/// Immutable after construction.
class TriMesh {
 public:
  TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& elements() const { return elements_; }
  const std::vector<Interface>& interfaces() const { return interfaces_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_interfaces() const { return static_cast<int>(interfaces_.size()); }
  int num_boundary_interfaces() const;

  /// Interface ids of the three local edges of element k.
  const std::array<int, 3>& element_interfaces(int k) const { return element_interfaces_[k]; }
  /// Number of interfaces on the boundary of element k (3 for conforming meshes).
  int interface_count(int /*k*/) const { return 3; }

  Vec2 vertex(int k, int local) const { return vertices_[elements_[k][local]]; }
  double area(int k) const { return areas_[k]; }
  double diameter(int k) const;
  double perimeter(int k) const;
  double h_max() const;
  double total_area() const;

 private:
  void normalize_orientation();
  void build_interfaces();

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<double> areas_;
  std::vector<Interface> interfaces_;
  std::vector<std::array<int, 3>> element_interfaces_;
};

/// n x n grid of squares, each cut along the lower-left to upper-right
/// diagonal, with the smallest n such that every element diameter is at
/// most target_h.
TriMesh build_structured_mesh(const Rect& domain, double target_h);

/// Splits every triangle into four congruent children through the edge
/// midpoints.
TriMesh refine_uniform(const TriMesh& mesh);

/// JSON mesh schema: {"vertices": [[x, y], ...], "elements": [[i, j, k], ...]}
/// with 0-based indices. Interfaces are never stored; they are rebuilt on read.
TriMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh mesh_from_json_text(const std::string& text);
std::string mesh_to_json_text(const TriMesh& mesh);

}  // namespace plapdg
