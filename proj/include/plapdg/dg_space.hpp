// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "plapdg/mesh.hpp"

namespace plapdg {

using Mat2 = Eigen::Matrix2d;

/// Affine map x = origin + J * xhat from the reference triangle onto an element.
struct ElementGeometry {
  Vec2 origin = Vec2::Zero();
  Mat2 jacobian = Mat2::Identity();
  Mat2 inverse = Mat2::Identity();
  double det = 1.0;

  Vec2 to_physical(const Vec2& ref) const { return origin + jacobian * ref; }
  Vec2 to_reference(const Vec2& x) const { return inverse * (x - origin); }
  /// Physical gradient from a reference gradient.
  Vec2 push_gradient(const Vec2& ref_grad) const { return inverse.transpose() * ref_grad; }
};

ElementGeometry element_geometry(const TriMesh& mesh, int k);

/// Broken polynomial space with degree r_K on element K.
class DgSpace {
 public:
  DgSpace(std::shared_ptr<const TriMesh> mesh, int degree);
  DgSpace(std::shared_ptr<const TriMesh> mesh, std::vector<int> degrees);

  const TriMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }

  int num_elements() const { return mesh_->num_elements(); }
  int degree(int k) const { return degrees_[k]; }
  int max_degree() const { return max_degree_; }
  const std::vector<int>& degrees() const { return degrees_; }
  int offset(int k) const { return offsets_[k]; }
  int local_dim(int k) const { return offsets_[k + 1] - offsets_[k]; }
  int num_dofs() const { return offsets_.back(); }
  const ElementGeometry& geometry(int k) const { return geometry_[k]; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::vector<int> degrees_;
  std::vector<int> offsets_;
  std::vector<ElementGeometry> geometry_;
  int max_degree_ = 0;
};

class DgFunction {
 public:
  explicit DgFunction(std::shared_ptr<const DgSpace> space);
  DgFunction(std::shared_ptr<const DgSpace> space, Eigen::VectorXd coefficients);

  const DgSpace& space() const { return *space_; }
  const std::shared_ptr<const DgSpace>& space_ptr() const { return space_; }
  Eigen::VectorXd& coefficients() { return coeffs_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }

  /// Coefficients of element k.
  Eigen::Map<const Eigen::VectorXd> local(int k) const {
    return {coeffs_.data() + space_->offset(k), space_->local_dim(k)};
  }

 private:
  std::shared_ptr<const DgSpace> space_;
  Eigen::VectorXd coeffs_;
};

struct PointEval {
  std::vector<double> values;
  std::vector<Vec2> gradients;
};

/// Values and physical gradients of fn restricted to element k. Throws
/// std::out_of_range if a point is outside the closed element (barycentric
/// tolerance 1e-12).
PointEval eval_dg(const DgFunction& fn, int k, std::span<const Vec2> points);

/// Element-wise L2 projection. The basis is orthonormal on the reference
/// triangle, so the local mass matrix is |det J| * I and no solve is needed.
DgFunction l2_project(std::shared_ptr<const DgSpace> space,
                      const std::function<double(const Vec2&)>& fn, int quad_degree = -1);

}  // namespace plapdg
