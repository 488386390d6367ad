// SPDX-License-Identifier: Apache-2.0
#include "sipg_oracle.hpp"

#include <Eigen/SparseLU>

#include "plapdg/basis.hpp"
#include "plapdg/quadrature.hpp"

namespace plapdg::testing {

namespace {

struct Trace {
  std::vector<double> v, dx, dy;  // physical gradients
};

Trace trace_at(const DgSpace& space, int k, const Vec2& x) {
  const ElementGeometry& g = space.geometry(k);
  const int r = space.degree(k);
  const int n = basis_size(r);
  Trace t{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  std::vector<double> rx(n), ry(n);
  eval_reference_basis(r, g.to_reference(x), t.v, rx, ry);
  const Mat2 jit = g.inverse.transpose();
  for (int i = 0; i < n; ++i) {
    const Vec2 pg = jit * Vec2(rx[i], ry[i]);
    t.dx[i] = pg.x();
    t.dy[i] = pg.y();
  }
  return t;
}

}  // namespace

SipgSystem assemble_sipg(const DgSpace& space, const PenaltyField& penalty, double theta,
                         const std::function<double(const Vec2&)>& f, int quad_degree) {
  const TriMesh& mesh = space.mesh();
  const int n = space.num_dofs();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  const QuadRule tri = quadrature_rule(Shape::Triangle, quad_degree);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementGeometry& g = space.geometry(k);
    const int o = space.offset(k);
    for (std::size_t q = 0; q < tri.size(); ++q) {
      const Vec2 x = g.to_physical(tri.points[q]);
      const double w = tri.weights[q] * std::abs(g.det);
      const Trace t = trace_at(space, k, x);
      const int nb = static_cast<int>(t.v.size());
      for (int i = 0; i < nb; ++i) {
        rhs[o + i] += w * f(x) * t.v[i];
        for (int j = 0; j < nb; ++j) trip.emplace_back(o + i, o + j, w * (t.dx[i] * t.dx[j] + t.dy[i] * t.dy[j]));
      }
    }
  }

  const QuadRule seg = quadrature_rule(Shape::Segment, quad_degree);
  for (int fi = 0; fi < mesh.num_interfaces(); ++fi) {
    const Interface& F = mesh.interfaces()[fi];
    const InterfacePenalty& pen = penalty[fi];
    const Vec2 a = mesh.vertices()[F.vertices[0]], b = mesh.vertices()[F.vertices[1]];
    const Vec2 nrm = F.normal;
    // sides: (element, sign in the jump, weight)
    struct Side {
      int k;
      double sign;
      double w;
    };
    std::vector<Side> sides{{F.plus, 1.0, pen.w_plus}};
    if (!F.boundary()) sides.push_back({F.minus, -1.0, pen.w_minus});

    for (std::size_t q = 0; q < seg.size(); ++q) {
      const Vec2 x = a + seg.points[q].x() * (b - a);
      const double ds = seg.weights[q] * F.length;
      std::vector<Trace> tr;
      for (const Side& s : sides) tr.push_back(trace_at(space, s.k, x));
      for (std::size_t si = 0; si < sides.size(); ++si) {
        for (std::size_t sj = 0; sj < sides.size(); ++sj) {
          const Side &S = sides[si], &T = sides[sj];
          const Trace &ti = tr[si], &tj = tr[sj];
          for (std::size_t i = 0; i < ti.v.size(); ++i) {
            const double jv = S.sign * ti.v[i];                           // [v]
            const double gv = S.w * (ti.dx[i] * nrm.x() + ti.dy[i] * nrm.y());  // {grad v}_w . n
            for (std::size_t j = 0; j < tj.v.size(); ++j) {
              const double ju = T.sign * tj.v[j];
              const double gu = T.w * (tj.dx[j] * nrm.x() + tj.dy[j] * nrm.y());
              const double val = pen.sigma * ju * jv - gu * jv + theta * gv * ju;
              trip.emplace_back(space.offset(S.k) + static_cast<int>(i), space.offset(T.k) + static_cast<int>(j),
                                ds * val);
            }
          }
        }
      }
    }
  }
  SipgSystem sys;
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = std::move(rhs);
  return sys;
}

Eigen::VectorXd solve_sipg(const SipgSystem& system) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system.matrix);
  return lu.solve(system.rhs);
}

}  // namespace plapdg::testing
