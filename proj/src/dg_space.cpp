// SPDX-License-Identifier: Apache-2.0
#include "plapdg/dg_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plapdg/basis.hpp"
#include "plapdg/quadrature.hpp"

namespace plapdg {

ElementGeometry element_geometry(const TriMesh& mesh, int k) {
  ElementGeometry g;
  const Vec2 a = mesh.vertex(k, 0), b = mesh.vertex(k, 1), c = mesh.vertex(k, 2);
  g.origin = a;
  g.jacobian.col(0) = b - a;
  g.jacobian.col(1) = c - a;
  g.det = g.jacobian.determinant();
  g.inverse = g.jacobian.inverse();
  return g;
}

DgSpace::DgSpace(std::shared_ptr<const TriMesh> mesh, int degree)
    : DgSpace(mesh, std::vector<int>(mesh ? mesh->num_elements() : 0, degree)) {}

DgSpace::DgSpace(std::shared_ptr<const TriMesh> mesh, std::vector<int> degrees)
    : mesh_(std::move(mesh)), degrees_(std::move(degrees)) {
  if (!mesh_) throw std::invalid_argument("DgSpace: null mesh");
  if (static_cast<int>(degrees_.size()) != mesh_->num_elements()) {
    throw std::invalid_argument("DgSpace: one degree per element required");
  }
  offsets_.assign(1, 0);
  offsets_.reserve(degrees_.size() + 1);
  geometry_.reserve(degrees_.size());
  for (int k = 0; k < mesh_->num_elements(); ++k) {
    if (degrees_[k] < 0) throw std::invalid_argument("DgSpace: negative degree");
    max_degree_ = std::max(max_degree_, degrees_[k]);
    offsets_.push_back(offsets_.back() + basis_size(degrees_[k]));
    geometry_.push_back(element_geometry(*mesh_, k));
  }
}

DgFunction::DgFunction(std::shared_ptr<const DgSpace> space)
    : space_(std::move(space)), coeffs_(Eigen::VectorXd::Zero(space_->num_dofs())) {}

DgFunction::DgFunction(std::shared_ptr<const DgSpace> space, Eigen::VectorXd coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != space_->num_dofs()) {
    throw std::invalid_argument("DgFunction: coefficient length " + std::to_string(coeffs_.size()) +
                                " does not match " + std::to_string(space_->num_dofs()) + " dofs");
  }
}

PointEval eval_dg(const DgFunction& fn, int k, std::span<const Vec2> points) {
  const DgSpace& space = fn.space();
  const ElementGeometry& geo = space.geometry(k);
  const int r = space.degree(k);
  const int n = basis_size(r);
  const auto c = fn.local(k);
  std::vector<double> v(n), gx(n), gy(n);

  PointEval out;
  out.values.reserve(points.size());
  out.gradients.reserve(points.size());
  for (const Vec2& x : points) {
    const Vec2 ref = geo.to_reference(x);
    const double l0 = 1.0 - ref.x() - ref.y();
    constexpr double tol = 1e-12;
    if (ref.x() < -tol || ref.y() < -tol || l0 < -tol) {
      throw std::out_of_range("eval_dg: point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                              ") outside element " + std::to_string(k));
    }
    eval_reference_basis(r, ref, v, gx, gy);
    double val = 0.0;
    Vec2 g = Vec2::Zero();
    for (int b = 0; b < n; ++b) {
      val += c[b] * v[b];
      g.x() += c[b] * gx[b];
      g.y() += c[b] * gy[b];
    }
    out.values.push_back(val);
    out.gradients.push_back(geo.push_gradient(g));
  }
  return out;
}

DgFunction l2_project(std::shared_ptr<const DgSpace> space, const std::function<double(const Vec2&)>& fn,
                      int quad_degree) {
  DgFunction out(space);
  std::vector<double> v, gx, gy;
  for (int k = 0; k < space->num_elements(); ++k) {
    const int r = space->degree(k);
    const int n = basis_size(r);
    const QuadRule& rule = cached_rule(Shape::Triangle, quad_degree >= 0 ? quad_degree : 2 * r + 6);
    const ElementGeometry& geo = space->geometry(k);
    v.resize(n);
    gx.resize(n);
    gy.resize(n);
    auto c = out.coefficients().segment(space->offset(k), n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      eval_reference_basis(r, rule.points[q], v, gx, gy);
      const double fw = fn(geo.to_physical(rule.points[q])) * rule.weights[q];
      for (int b = 0; b < n; ++b) c[b] += fw * v[b];
    }
  }
  return out;
}

}  // namespace plapdg
