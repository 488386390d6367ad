// SPDX-License-Identifier: Apache-2.0
#include "plapdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace plapdg {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

}  // namespace

double Rect::diameter() const { return std::hypot(width(), height()); }

bool Rect::contains(const Vec2& x, double tol) const {
  return x.x() >= x0 - tol && x.x() <= x1 + tol && x.y() >= y0 - tol && x.y() <= y1 + tol;
}

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements)
    : vertices_(std::move(vertices)), elements_(std::move(elements)) {
  if (elements_.empty()) throw MeshError("mesh has no elements");
  const int nv = num_vertices();
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    for (int v : elements_[k]) {
      if (v < 0 || v >= nv) {
        throw MeshError("element " + std::to_string(k) + " references vertex " + std::to_string(v) +
                        " out of range");
      }
    }
  }
  normalize_orientation();
  build_interfaces();
}

void TriMesh::normalize_orientation() {
  areas_.resize(elements_.size());
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    auto& e = elements_[k];
    double a = signed_area(vertices_[e[0]], vertices_[e[1]], vertices_[e[2]]);
    const double scale = std::max({(vertices_[e[1]] - vertices_[e[0]]).squaredNorm(),
                                   (vertices_[e[2]] - vertices_[e[0]]).squaredNorm(), 1e-300});
    if (std::abs(a) <= 1e-14 * scale) {
      throw MeshError("zero-area element " + std::to_string(k));
    }
    if (a < 0) {
      std::swap(e[1], e[2]);
      a = -a;
    }
    areas_[k] = a;
  }
}

void TriMesh::build_interfaces() {
  // edge -> (element, local edge) occurrences
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> owners;
  for (int k = 0; k < num_elements(); ++k) {
    for (int i = 0; i < 3; ++i) {
      owners[edge_key(elements_[k][i], elements_[k][(i + 1) % 3])].emplace_back(k, i);
    }
  }

  interfaces_.clear();
  interfaces_.reserve(owners.size());
  element_interfaces_.assign(elements_.size(), {-1, -1, -1});
  for (const auto& [key, occ] : owners) {
    if (occ.size() > 2) {
      throw MeshError("non-conforming mesh: edge (" + std::to_string(key.first) + ", " +
                      std::to_string(key.second) + ") is shared by " + std::to_string(occ.size()) +
                      " elements");
    }
    Interface f;
    const auto [kp, ep] = occ[0];
    f.plus = kp;
    f.plus_edge = ep;
    if (occ.size() == 2) {
      f.minus = occ[1].first;
      f.minus_edge = occ[1].second;
      if (f.minus == f.plus) throw MeshError("non-conforming mesh: degenerate element edge");
    } else {
      f.minus = kp;
      f.minus_edge = ep;
    }
    const int a = elements_[kp][ep];
    const int b = elements_[kp][(ep + 1) % 3];
    f.vertices = {a, b};
    const Vec2 d = vertices_[b] - vertices_[a];
    f.length = d.norm();
    // counter-clockwise element: the outward normal is to the right of a->b
    f.normal = Vec2(d.y(), -d.x()) / f.length;

    const int id = static_cast<int>(interfaces_.size());
    element_interfaces_[f.plus][f.plus_edge] = id;
    element_interfaces_[f.minus][f.minus_edge] = id;
    interfaces_.push_back(f);
  }
}

int TriMesh::num_boundary_interfaces() const {
  return static_cast<int>(std::count_if(interfaces_.begin(), interfaces_.end(),
                                        [](const Interface& f) { return f.boundary(); }));
}

double TriMesh::diameter(int k) const {
  const auto& e = elements_[k];
  return std::max({(vertices_[e[1]] - vertices_[e[0]]).norm(), (vertices_[e[2]] - vertices_[e[1]]).norm(),
                   (vertices_[e[0]] - vertices_[e[2]]).norm()});
}

double TriMesh::perimeter(int k) const {
  const auto& e = elements_[k];
  return (vertices_[e[1]] - vertices_[e[0]]).norm() + (vertices_[e[2]] - vertices_[e[1]]).norm() +
         (vertices_[e[0]] - vertices_[e[2]]).norm();
}

double TriMesh::h_max() const {
  double h = 0.0;
  for (int k = 0; k < num_elements(); ++k) h = std::max(h, diameter(k));
  return h;
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (double x : areas_) a += x;
  return a;
}

TriMesh build_structured_mesh(const Rect& domain, double target_h) {
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw MeshError("degenerate domain rectangle");
  }
  if (!(target_h > 0.0)) throw MeshError("target_h must be positive");
  const double diam = domain.diameter();
  if (target_h > diam * (1.0 + 1e-12)) {
    throw MeshError("target_h exceeds the domain diameter");
  }
  // cell diameter is diam / n; the slack absorbs round-off in diam / target_h
  const int n = std::max(1, static_cast<int>(std::ceil(diam / target_h - 1e-9)));

  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices.emplace_back(domain.x0 + domain.width() * i / n, domain.y0 + domain.height() * j / n);
    }
  }
  std::vector<std::array<int, 3>> elements;
  elements.reserve(static_cast<std::size_t>(2 * n * n));
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      elements.push_back({a, b, c});
      elements.push_back({a, c, d});
    }
  }
  return TriMesh(std::move(vertices), std::move(elements));
}

TriMesh refine_uniform(const TriMesh& mesh) {
  std::vector<Vec2> vertices = mesh.vertices();
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(0.5 * (vertices[a] + vertices[b]));
    return it->second;
  };
  std::vector<std::array<int, 3>> elements;
  elements.reserve(4 * mesh.elements().size());
  for (const auto& e : mesh.elements()) {
    const int m01 = mid(e[0], e[1]);
    const int m12 = mid(e[1], e[2]);
    const int m20 = mid(e[2], e[0]);
    elements.push_back({e[0], m01, m20});
    elements.push_back({m01, e[1], m12});
    elements.push_back({m20, m12, e[2]});
    elements.push_back({m01, m12, m20});
  }
  return TriMesh(std::move(vertices), std::move(elements));
}

}  // namespace plapdg
