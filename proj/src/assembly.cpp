// SPDX-License-Identifier: Apache-2.0
#include "plapdg/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "plapdg/basis.hpp"
#include "plapdg/parallel.hpp"
#include "plapdg/quadrature.hpp"
#include "plapdg/simd/kernels.hpp"

namespace plapdg {

// ---------------------------------------------------------------------------
// Quadrature cache

int QuadratureCache::element_degree(int k) const {
  if (options_.fixed_degree > 0) return options_.fixed_degree;
  return options_.multiplier * (3 * space_->degree(k) + 4);
}

int QuadratureCache::face_degree(int f) const {
  const Interface& F = space_->mesh().interfaces()[f];
  return std::max(element_degree(F.plus), element_degree(F.minus));
}

QuadratureCache::QuadratureCache(std::shared_ptr<const DgSpace> space, QuadratureOptions options)
    : space_(std::move(space)), options_(options) {
  if (options_.multiplier < 1) throw std::invalid_argument("quadrature multiplier must be >= 1");
  const TriMesh& mesh = space_->mesh();
  elements_.resize(mesh.num_elements());
  faces_.resize(mesh.num_interfaces());

  // Reference tables are shared between elements of equal degree.
  std::map<std::pair<int, int>, BasisTable> tables;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto key = std::make_pair(space_->degree(k), element_degree(k));
    if (!tables.count(key)) {
      tables.emplace(key, reference_basis(key.first, cached_rule(Shape::Triangle, key.second).points));
    }
  }

  const int workers = worker_count();
  parallel_for(mesh.num_elements(), workers, [&](std::int64_t b, std::int64_t e, int) {
    for (int k = static_cast<int>(b); k < e; ++k) {
      const QuadRule& rule = cached_rule(Shape::Triangle, element_degree(k));
      const BasisTable& t = tables.at({space_->degree(k), element_degree(k)});
      const ElementGeometry& geo = space_->geometry(k);
      Element& el = elements_[k];
      el.nq = static_cast<int>(rule.size());
      el.nb = t.num_basis;
      el.weights.resize(el.nq);
      el.points.resize(el.nq);
      for (int q = 0; q < el.nq; ++q) {
        el.weights[q] = rule.weights[q] * geo.det;
        el.points[q] = geo.to_physical(rule.points[q]);
      }
      el.values = t.values;
      el.gx.resize(t.dx.size());
      el.gy.resize(t.dy.size());
      const Mat2& inv = geo.inverse;
      for (std::size_t i = 0; i < t.dx.size(); ++i) {
        el.gx[i] = inv(0, 0) * t.dx[i] + inv(1, 0) * t.dy[i];
        el.gy[i] = inv(0, 1) * t.dx[i] + inv(1, 1) * t.dy[i];
      }
    }
  });

  parallel_for(mesh.num_interfaces(), workers, [&](std::int64_t b, std::int64_t e, int) {
    std::vector<double> v, dx, dy;
    for (int f = static_cast<int>(b); f < e; ++f) {
      const Interface& F = mesh.interfaces()[f];
      const QuadRule& rule = cached_rule(Shape::Segment, face_degree(f));
      Face& fc = faces_[f];
      fc.nq = static_cast<int>(rule.size());
      fc.normal = F.normal;
      fc.n_plus = space_->local_dim(F.plus);
      fc.n_minus = F.boundary() ? 0 : space_->local_dim(F.minus);
      const Vec2 a = mesh.vertices()[F.vertices[0]];
      const Vec2 d = mesh.vertices()[F.vertices[1]] - a;
      fc.weights.resize(fc.nq);
      fc.points.resize(fc.nq);
      for (int q = 0; q < fc.nq; ++q) {
        fc.weights[q] = rule.weights[q] * F.length;
        fc.points[q] = a + rule.points[q].x() * d;
      }
      const std::size_t size = static_cast<std::size_t>(fc.rows()) * fc.nq;
      for (auto* tab : {&fc.jump, &fc.gx_plus, &fc.gy_plus, &fc.gn_plus, &fc.gx_minus, &fc.gy_minus, &fc.gn_minus}) {
        tab->assign(size, 0.0);
      }
      auto fill_side = [&](int k, int row0, double sign, std::vector<double>& gxs, std::vector<double>& gys,
                           std::vector<double>& gns) {
        const ElementGeometry& geo = space_->geometry(k);
        const int r = space_->degree(k);
        const int nb = basis_size(r);
        v.resize(nb);
        dx.resize(nb);
        dy.resize(nb);
        for (int q = 0; q < fc.nq; ++q) {
          eval_reference_basis(r, geo.to_reference(fc.points[q]), v, dx, dy);
          for (int i = 0; i < nb; ++i) {
            const Vec2 g = geo.push_gradient(Vec2(dx[i], dy[i]));
            const std::size_t at = static_cast<std::size_t>(row0 + i) * fc.nq + q;
            fc.jump[at] = sign * v[i];
            gxs[at] = g.x();
            gys[at] = g.y();
            gns[at] = g.dot(F.normal);
          }
        }
      };
      fill_side(F.plus, 0, 1.0, fc.gx_plus, fc.gy_plus, fc.gn_plus);
      if (!F.boundary()) fill_side(F.minus, fc.n_plus, -1.0, fc.gx_minus, fc.gy_minus, fc.gn_minus);
    }
  });
}

NonlinearFormContext::NonlinearFormContext(std::shared_ptr<const QuadratureCache> cache, PenaltyField penalty,
                                           double delta, FormTerms terms)
    : cache_(std::move(cache)), penalty_(std::move(penalty)), delta_(delta), terms_(terms) {
  if (!(delta_ >= 0.0)) throw std::invalid_argument("gradient floor must be nonnegative");
  if (static_cast<int>(penalty_.faces.size()) != cache_->space().mesh().num_interfaces()) {
    throw std::invalid_argument("penalty field does not match the mesh");
  }
}

namespace {

// ---------------------------------------------------------------------------
// Field evaluation at cached points

struct ElementState {
  std::vector<double> u, gx, gy;
};

struct FaceState {
  std::vector<double> jump, gxp, gyp, gxm, gym;
};

void local_coefficients(const DgFunction& u, const Interface& F, std::vector<double>& cc) {
  const auto cp = u.local(F.plus);
  cc.assign(cp.data(), cp.data() + cp.size());
  if (!F.boundary()) {
    const auto cm = u.local(F.minus);
    cc.insert(cc.end(), cm.data(), cm.data() + cm.size());
  }
}

void eval_element(const BrokenField& field, const QuadratureCache::Element& el, int k, ElementState& s) {
  s.u.assign(el.nq, 0.0);
  s.gx.assign(el.nq, 0.0);
  s.gy.assign(el.nq, 0.0);
  if (field.discrete) {
    const auto c = field.discrete->local(k);
    simd::contract(c.data(), el.values.data(), el.nb, el.nq, s.u.data());
    simd::contract(c.data(), el.gx.data(), el.nb, el.nq, s.gx.data());
    simd::contract(c.data(), el.gy.data(), el.nb, el.nq, s.gy.data());
  }
  if (field.analytic) {
    for (int q = 0; q < el.nq; ++q) {
      const FieldSample a = field.analytic(el.points[q]);
      s.u[q] += field.analytic_coefficient * a.value;
      s.gx[q] += field.analytic_coefficient * a.grad.x();
      s.gy[q] += field.analytic_coefficient * a.grad.y();
    }
  }
}

void eval_face(const BrokenField& field, const QuadratureCache::Face& fc, const Interface& F, FaceState& s,
               std::vector<double>& cc) {
  const int nq = fc.nq;
  for (auto* v : {&s.jump, &s.gxp, &s.gyp, &s.gxm, &s.gym}) v->assign(nq, 0.0);
  if (field.discrete) {
    local_coefficients(*field.discrete, F, cc);
    const int rows = fc.rows();
    simd::contract(cc.data(), fc.jump.data(), rows, nq, s.jump.data());
    simd::contract(cc.data(), fc.gx_plus.data(), rows, nq, s.gxp.data());
    simd::contract(cc.data(), fc.gy_plus.data(), rows, nq, s.gyp.data());
    if (!F.boundary()) {
      simd::contract(cc.data(), fc.gx_minus.data(), rows, nq, s.gxm.data());
      simd::contract(cc.data(), fc.gy_minus.data(), rows, nq, s.gym.data());
    }
  }
  if (field.analytic) {
    const double a = field.analytic_coefficient;
    for (int q = 0; q < nq; ++q) {
      const FieldSample g = field.analytic(fc.points[q]);
      // A continuous field has no jump across interior interfaces; on the
      // boundary the exterior trace is zero.
      if (F.boundary()) s.jump[q] += a * g.value;
      s.gxp[q] += a * g.grad.x();
      s.gyp[q] += a * g.grad.y();
      if (!F.boundary()) {
        s.gxm[q] += a * g.grad.x();
        s.gym[q] += a * g.grad.y();
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Pointwise coefficients of the form

struct Exponents {
  double p;
  double half_pm2;  // (p - 2)/2
  double half_pm4;  // (p - 4)/2
  double delta2;
  bool linear;
};

Exponents exponents(const NonlinearFormContext& ctx) {
  const double p = ctx.p();
  return {p, 0.5 * (p - 2.0), 0.5 * (p - 4.0), ctx.delta() * ctx.delta(), ctx.penalty().p.linear()};
}

// s^{(p-2)/2} for s = |g|^2 >= 0
inline double pow_pm2(const Exponents& e, double s) { return e.linear ? 1.0 : std::pow(s, e.half_pm2); }

// (p-2) max(s, delta^2)^{(p-4)/2}
inline double pow_pm4(const Exponents& e, double s) {
  return e.linear ? 0.0 : (e.p - 2.0) * std::pow(std::max(s, e.delta2), e.half_pm4);
}

struct FacePoint {
  double A_plus, A_minus;      // (|g|^2 + sigma^2 j^2)^{(p-2)/2}
  double Ac_plus, Ac_minus;    // (p-2) (...)^{(p-4)/2}
  double m_plus, m_minus;      // |g|^{p-2}
  double mc_plus, mc_minus;    // (p-2) |g|^{p-4}
  double gn_plus, gn_minus;    // g . n
};

FacePoint face_point(const Exponents& e, double sigma, double j, double gxp, double gyp, double gxm, double gym,
                     const Vec2& n) {
  FacePoint fp;
  const double sj2 = sigma * sigma * j * j;
  const double g2p = gxp * gxp + gyp * gyp;
  const double g2m = gxm * gxm + gym * gym;
  fp.A_plus = pow_pm2(e, g2p + sj2);
  fp.A_minus = pow_pm2(e, g2m + sj2);
  fp.Ac_plus = pow_pm4(e, g2p + sj2);
  fp.Ac_minus = pow_pm4(e, g2m + sj2);
  fp.m_plus = pow_pm2(e, g2p);
  fp.m_minus = pow_pm2(e, g2m);
  fp.mc_plus = pow_pm4(e, g2p);
  fp.mc_minus = pow_pm4(e, g2m);
  fp.gn_plus = gxp * n.x() + gyp * n.y();
  fp.gn_minus = gxm * n.x() + gym * n.y();
  return fp;
}

bool all_finite(const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

[[noreturn]] void non_finite(const char* where, int id) {
  throw AssemblyError(std::string("non-finite integrand on ") + where + " " + std::to_string(id));
}

// Face-local vectors are gathered here and scattered in interface order, so
// sums do not depend on the worker count.
struct FaceBuffers {
  std::vector<std::size_t> offset;
  std::vector<double> data;

  FaceBuffers(const QuadratureCache& cache, bool square) {
    const int nf = cache.space().mesh().num_interfaces();
    offset.assign(nf + 1, 0);
    for (int f = 0; f < nf; ++f) {
      const std::size_t rows = cache.face(f).rows();
      offset[f + 1] = offset[f] + (square ? rows * rows : rows);
    }
    data.assign(offset.back(), 0.0);
  }
  double* at(int f) { return data.data() + offset[f]; }
};

// Residual B(u; u, phi) without the load, for an arbitrary broken field u.
Eigen::VectorXd form_vector(const NonlinearFormContext& ctx, const BrokenField& u) {
  const QuadratureCache& cache = ctx.cache();
  const DgSpace& space = cache.space();
  const TriMesh& mesh = space.mesh();
  const Exponents ex = exponents(ctx);
  const FormTerms& terms = ctx.terms();
  const double theta = ctx.theta();
  const int workers = worker_count();

  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.num_dofs());
  if (terms.volume) {
    parallel_for(mesh.num_elements(), workers, [&](std::int64_t b, std::int64_t e, int) {
      ElementState s;
      std::vector<double> tx, ty;
      for (int k = static_cast<int>(b); k < e; ++k) {
        const auto& el = cache.element(k);
        eval_element(u, el, k, s);
        tx.resize(el.nq);
        ty.resize(el.nq);
        for (int q = 0; q < el.nq; ++q) {
          const double a = el.weights[q] * pow_pm2(ex, s.gx[q] * s.gx[q] + s.gy[q] * s.gy[q]);
          tx[q] = a * s.gx[q];
          ty[q] = a * s.gy[q];
        }
        double* r = out.data() + space.offset(k);
        simd::gemv_acc(el.gx.data(), el.nb, el.nq, tx.data(), r);
        simd::gemv_acc(el.gy.data(), el.nb, el.nq, ty.data(), r);
        if (!all_finite(r, el.nb)) non_finite("element", k);
      }
    });
  }

  FaceBuffers buf(cache, false);
  parallel_for(mesh.num_interfaces(), workers, [&](std::int64_t b, std::int64_t e, int) {
    FaceState s;
    std::vector<double> cc, t_jump, t_plus, t_minus;
    for (int f = static_cast<int>(b); f < e; ++f) {
      const Interface& F = mesh.interfaces()[f];
      const auto& fc = cache.face(f);
      const InterfacePenalty& pen = ctx.penalty()[f];
      eval_face(u, fc, F, s, cc);
      t_jump.assign(fc.nq, 0.0);
      t_plus.assign(fc.nq, 0.0);
      t_minus.assign(fc.nq, 0.0);
      for (int q = 0; q < fc.nq; ++q) {
        const double j = s.jump[q];
        const FacePoint fp = face_point(ex, pen.sigma, j, s.gxp[q], s.gyp[q], s.gxm[q], s.gym[q], fc.normal);
        const double W = fc.weights[q];
        double tj = 0.0;
        if (terms.penalty) tj += pen.sigma * (pen.w_plus * fp.A_plus + pen.w_minus * fp.A_minus) * j;
        if (terms.consistency) tj -= pen.w_plus * fp.m_plus * fp.gn_plus + pen.w_minus * fp.m_minus * fp.gn_minus;
        t_jump[q] = W * tj;
        if (terms.symmetry) {
          t_plus[q] = W * theta * pen.w_plus * fp.A_plus * j;
          t_minus[q] = W * theta * pen.w_minus * fp.A_minus * j;
        }
      }
      double* r = buf.at(f);
      simd::gemv_acc(fc.jump.data(), fc.rows(), fc.nq, t_jump.data(), r);
      if (terms.symmetry) {
        simd::gemv_acc(fc.gn_plus.data(), fc.rows(), fc.nq, t_plus.data(), r);
        simd::gemv_acc(fc.gn_minus.data(), fc.rows(), fc.nq, t_minus.data(), r);
      }
      if (!all_finite(r, fc.rows())) non_finite("interface", f);
    }
  });

  for (int f = 0; f < mesh.num_interfaces(); ++f) {
    const Interface& F = mesh.interfaces()[f];
    const double* r = buf.at(f);
    const int np = space.local_dim(F.plus);
    out.segment(space.offset(F.plus), np) += Eigen::Map<const Eigen::VectorXd>(r, np);
    if (!F.boundary()) {
      out.segment(space.offset(F.minus), space.local_dim(F.minus)) +=
          Eigen::Map<const Eigen::VectorXd>(r + np, space.local_dim(F.minus));
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points

// The forcing is the one integrand that is not built from the basis, so it
// gets a rule of twice the element degree. It is assembled once per solve.
Eigen::VectorXd load_vector(const NonlinearFormContext& ctx, const ScalarFn& f) {
  const QuadratureCache& cache = ctx.cache();
  const DgSpace& space = cache.space();
  auto load_degree = [&](int k) { return std::min(2 * cache.element_degree(k), kMaxQuadratureDegree); };
  std::map<std::pair<int, int>, BasisTable> tables;
  for (int k = 0; k < space.num_elements(); ++k) {
    const auto key = std::make_pair(space.degree(k), load_degree(k));
    if (!tables.count(key)) {
      tables.emplace(key, reference_basis(key.first, cached_rule(Shape::Triangle, key.second).points));
    }
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.num_dofs());
  parallel_for(space.num_elements(), worker_count(), [&](std::int64_t b, std::int64_t e, int) {
    std::vector<double> t;
    for (int k = static_cast<int>(b); k < e; ++k) {
      const QuadRule& rule = cached_rule(Shape::Triangle, load_degree(k));
      const BasisTable& tab = tables.at({space.degree(k), load_degree(k)});
      const ElementGeometry& geo = space.geometry(k);
      const int nq = static_cast<int>(rule.size());
      t.resize(nq);
      for (int q = 0; q < nq; ++q) t[q] = rule.weights[q] * geo.det * f(geo.to_physical(rule.points[q]));
      simd::gemv_acc(tab.values.data(), tab.num_basis, nq, t.data(), out.data() + space.offset(k));
    }
  });
  return out;
}

Eigen::VectorXd residual(const NonlinearFormContext& ctx, const DgFunction& u, const Eigen::VectorXd& load) {
  if (&u.space() != &ctx.space()) throw std::invalid_argument("residual: function lives on a different space");
  return form_vector(ctx, BrokenField::of(u)) - load;
}

Eigen::VectorXd residual(const NonlinearFormContext& ctx, const DgFunction& u, const ScalarFn& f) {
  return residual(ctx, u, load_vector(ctx, f));
}

Eigen::VectorXd consistency_defect(const NonlinearFormContext& ctx, const BrokenField& u, const ScalarFn& f) {
  return form_vector(ctx, u) - load_vector(ctx, f);
}

Eigen::SparseMatrix<double> jacobian(const NonlinearFormContext& ctx, const DgFunction& u) {
  if (&u.space() != &ctx.space()) throw std::invalid_argument("jacobian: function lives on a different space");
  const QuadratureCache& cache = ctx.cache();
  const DgSpace& space = cache.space();
  const TriMesh& mesh = space.mesh();
  const Exponents ex = exponents(ctx);
  const FormTerms& terms = ctx.terms();
  const double theta = ctx.theta();
  const int workers = worker_count();
  const BrokenField field = BrokenField::of(u);

  // Element blocks, row-major nb x nb.
  std::vector<std::size_t> el_offset(mesh.num_elements() + 1, 0);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const std::size_t nb = space.local_dim(k);
    el_offset[k + 1] = el_offset[k] + nb * nb;
  }
  std::vector<double> el_blocks(el_offset.back(), 0.0);
  if (terms.volume) {
    parallel_for(mesh.num_elements(), workers, [&](std::int64_t b, std::int64_t e, int) {
      ElementState s;
      std::vector<double> xa, ya, xc, dg;
      for (int k = static_cast<int>(b); k < e; ++k) {
        const auto& el = cache.element(k);
        eval_element(field, el, k, s);
        const int nb = el.nb, nq = el.nq;
        xa.resize(static_cast<std::size_t>(nb) * nq);
        ya.resize(xa.size());
        xc.resize(xa.size());
        dg.resize(xa.size());
        for (int q = 0; q < nq; ++q) {
          const double g2 = s.gx[q] * s.gx[q] + s.gy[q] * s.gy[q];
          const double a = el.weights[q] * pow_pm2(ex, g2);
          const double c = el.weights[q] * pow_pm4(ex, g2);
          for (int i = 0; i < nb; ++i) {
            const std::size_t at = static_cast<std::size_t>(i) * nq + q;
            xa[at] = a * el.gx[at];
            ya[at] = a * el.gy[at];
            dg[at] = s.gx[q] * el.gx[at] + s.gy[q] * el.gy[at];
            xc[at] = c * dg[at];
          }
        }
        double* A = el_blocks.data() + el_offset[k];
        simd::gram_acc(xa.data(), nb, el.gx.data(), nb, nq, A, nb);
        simd::gram_acc(ya.data(), nb, el.gy.data(), nb, nq, A, nb);
        if (!ex.linear) simd::gram_acc(xc.data(), nb, dg.data(), nb, nq, A, nb);
        if (!all_finite(A, static_cast<std::size_t>(nb) * nb)) non_finite("element", k);
      }
    });
  }

  // Face blocks over the concatenated (plus, minus) rows:
  //   J = sum_q X1 Y1^T + X2 Y2^T + X3 Y3^T + X4 Y4^T.
  FaceBuffers buf(cache, true);
  parallel_for(mesh.num_interfaces(), workers, [&](std::int64_t b, std::int64_t e, int) {
    FaceState s;
    std::vector<double> cc, X1, Y1, X2, Y2, X3, Y3, X4;
    for (int f = static_cast<int>(b); f < e; ++f) {
      const Interface& F = mesh.interfaces()[f];
      const auto& fc = cache.face(f);
      const InterfacePenalty& pen = ctx.penalty()[f];
      eval_face(field, fc, F, s, cc);
      const int rows = fc.rows(), nq = fc.nq;
      const std::size_t size = static_cast<std::size_t>(rows) * nq;
      for (auto* v : {&X1, &Y1, &X2, &Y2, &X3, &Y3, &X4}) v->assign(size, 0.0);
      const double sg = pen.sigma, wp = pen.w_plus, wm = pen.w_minus;
      for (int q = 0; q < nq; ++q) {
        const double j = s.jump[q];
        const FacePoint fp = face_point(ex, sg, j, s.gxp[q], s.gyp[q], s.gxm[q], s.gym[q], fc.normal);
        const double W = fc.weights[q];
        const double Abar = wp * fp.A_plus + wm * fp.A_minus;
        for (int k = 0; k < rows; ++k) {
          const std::size_t at = static_cast<std::size_t>(k) * nq + q;
          const double dj = fc.jump[at];
          const double ap = s.gxp[q] * fc.gx_plus[at] + s.gyp[q] * fc.gy_plus[at];
          const double am = s.gxm[q] * fc.gx_minus[at] + s.gym[q] * fc.gy_minus[at];
          const double y2 = ap + sg * sg * j * dj;
          const double y3 = am + sg * sg * j * dj;
          double y1 = 0.0;
          if (terms.penalty) y1 += sg * j * (wp * fp.Ac_plus * y2 + wm * fp.Ac_minus * y3) + sg * Abar * dj;
          if (terms.consistency) {
            y1 -= wp * (fp.m_plus * fc.gn_plus[at] + fp.mc_plus * fp.gn_plus * ap) +
                  wm * (fp.m_minus * fc.gn_minus[at] + fp.mc_minus * fp.gn_minus * am);
          }
          X1[at] = W * dj;
          Y1[at] = y1;
          if (terms.symmetry) {
            X2[at] = theta * W * j * wp * fp.Ac_plus * fc.gn_plus[at];
            X3[at] = theta * W * j * wm * fp.Ac_minus * fc.gn_minus[at];
            X4[at] = theta * W * (wp * fp.A_plus * fc.gn_plus[at] + wm * fp.A_minus * fc.gn_minus[at]);
            Y2[at] = y2;
            Y3[at] = y3;
          }
        }
      }
      double* A = buf.at(f);
      simd::gram_acc(X1.data(), rows, Y1.data(), rows, nq, A, rows);
      if (terms.symmetry) {
        if (!ex.linear) {
          simd::gram_acc(X2.data(), rows, Y2.data(), rows, nq, A, rows);
          simd::gram_acc(X3.data(), rows, Y3.data(), rows, nq, A, rows);
        }
        simd::gram_acc(X4.data(), rows, fc.jump.data(), rows, nq, A, rows);
      }
      if (!all_finite(A, static_cast<std::size_t>(rows) * rows)) non_finite("interface", f);
    }
  });

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(el_blocks.size() + buf.data.size());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const int nb = space.local_dim(k), o = space.offset(k);
    const double* A = el_blocks.data() + el_offset[k];
    for (int i = 0; i < nb; ++i) {
      for (int j = 0; j < nb; ++j) trip.emplace_back(o + i, o + j, A[i * nb + j]);
    }
  }
  for (int f = 0; f < mesh.num_interfaces(); ++f) {
    const Interface& F = mesh.interfaces()[f];
    const int np = space.local_dim(F.plus);
    const int rows = cache.face(f).rows();
    auto dof = [&](int row) {
      return row < np ? space.offset(F.plus) + row : space.offset(F.minus) + (row - np);
    };
    const double* A = buf.at(f);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < rows; ++j) trip.emplace_back(dof(i), dof(j), A[i * rows + j]);
    }
  }
  Eigen::SparseMatrix<double> J(space.num_dofs(), space.num_dofs());
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

double energy(const NonlinearFormContext& ctx, const DgFunction& u) {
  const QuadratureCache& cache = ctx.cache();
  const TriMesh& mesh = cache.space().mesh();
  const Exponents ex = exponents(ctx);
  const FormTerms& terms = ctx.terms();
  const BrokenField field = BrokenField::of(u);

  double total = 0.0;
  if (terms.volume) {
    ElementState s;
    for (int k = 0; k < mesh.num_elements(); ++k) {
      const auto& el = cache.element(k);
      eval_element(field, el, k, s);
      for (int q = 0; q < el.nq; ++q) {
        total += el.weights[q] * std::pow(s.gx[q] * s.gx[q] + s.gy[q] * s.gy[q], 0.5 * ex.p);
      }
    }
  }
  FaceState s;
  std::vector<double> cc;
  for (int f = 0; f < mesh.num_interfaces(); ++f) {
    const Interface& F = mesh.interfaces()[f];
    const auto& fc = cache.face(f);
    const InterfacePenalty& pen = ctx.penalty()[f];
    eval_face(field, fc, F, s, cc);
    for (int q = 0; q < fc.nq; ++q) {
      const double j = s.jump[q];
      const FacePoint fp = face_point(ex, pen.sigma, j, s.gxp[q], s.gyp[q], s.gxm[q], s.gym[q], fc.normal);
      double t = 0.0;
      if (terms.penalty) t += pen.sigma * (pen.w_plus * fp.A_plus + pen.w_minus * fp.A_minus) * j * j;
      if (terms.consistency) t -= (pen.w_plus * fp.m_plus * fp.gn_plus + pen.w_minus * fp.m_minus * fp.gn_minus) * j;
      if (terms.symmetry) {
        t += ctx.theta() * (pen.w_plus * fp.A_plus * fp.gn_plus + pen.w_minus * fp.A_minus * fp.gn_minus) * j;
      }
      total += fc.weights[q] * t;
    }
  }
  return total;
}

double quasi_norm(const NonlinearFormContext& ctx, const BrokenField& e, const DgFunction& weight) {
  const QuadratureCache& cache = ctx.cache();
  const TriMesh& mesh = cache.space().mesh();
  const double pm2 = ctx.p() - 2.0;
  const BrokenField w = BrokenField::of(weight);

  double total = 0.0;
  ElementState se, sw;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& el = cache.element(k);
    eval_element(e, el, k, se);
    eval_element(w, el, k, sw);
    for (int q = 0; q < el.nq; ++q) {
      const double ge = std::hypot(se.gx[q], se.gy[q]);
      const double gw = std::hypot(sw.gx[q], sw.gy[q]);
      total += el.weights[q] * std::pow(gw + ge, pm2) * ge * ge;
    }
  }
  FaceState fe, fw;
  std::vector<double> cc;
  for (int f = 0; f < mesh.num_interfaces(); ++f) {
    const Interface& F = mesh.interfaces()[f];
    const auto& fc = cache.face(f);
    const InterfacePenalty& pen = ctx.penalty()[f];
    eval_face(e, fc, F, fe, cc);
    eval_face(w, fc, F, fw, cc);
    for (int q = 0; q < fc.nq; ++q) {
      const double j = std::abs(fe.jump[q]);
      const double gp = std::hypot(fw.gxp[q], fw.gyp[q]);
      const double gm = std::hypot(fw.gxm[q], fw.gym[q]);
      double avg = pen.w_plus * std::pow(gp + pen.sigma * j, pm2);
      if (pen.w_minus > 0.0) avg += pen.w_minus * std::pow(gm + pen.sigma * j, pm2);
      total += fc.weights[q] * pen.sigma * avg * j * j;
    }
  }
  return std::sqrt(total);
}

double broken_norm(const NonlinearFormContext& ctx, const BrokenField& e, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("broken_norm: q must be >= 1");
  const QuadratureCache& cache = ctx.cache();
  const TriMesh& mesh = cache.space().mesh();
  double total = 0.0;
  ElementState s;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& el = cache.element(k);
    eval_element(e, el, k, s);
    for (int i = 0; i < el.nq; ++i) total += el.weights[i] * std::pow(std::hypot(s.gx[i], s.gy[i]), q);
  }
  FaceState fs;
  std::vector<double> cc;
  for (int f = 0; f < mesh.num_interfaces(); ++f) {
    const auto& fc = cache.face(f);
    const double sigma = ctx.penalty()[f].sigma;
    eval_face(e, fc, mesh.interfaces()[f], fs, cc);
    for (int i = 0; i < fc.nq; ++i) {
      total += fc.weights[i] * std::pow(sigma, q - 1.0) * std::pow(std::abs(fs.jump[i]), q);
    }
  }
  return std::pow(total, 1.0 / q);
}

double broken_h1_seminorm(const NonlinearFormContext& ctx, const BrokenField& e) {
  const QuadratureCache& cache = ctx.cache();
  double total = 0.0;
  ElementState s;
  for (int k = 0; k < cache.space().num_elements(); ++k) {
    const auto& el = cache.element(k);
    eval_element(e, el, k, s);
    for (int i = 0; i < el.nq; ++i) total += el.weights[i] * (s.gx[i] * s.gx[i] + s.gy[i] * s.gy[i]);
  }
  return std::sqrt(total);
}

}  // namespace plapdg
