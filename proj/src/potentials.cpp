// SPDX-License-Identifier: Apache-2.0
#include "hodge/potentials.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hodge/quadrature.hpp"

namespace hodge {

namespace {

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson-style closest point on triangle.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + ab * (d1 / (d1 - d3)))).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + ac * (d2 / (d2 - d6)))).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + t * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const Vec3 closest = a + ab * (vb * denom) + ac * (vc * denom);
  return (p - closest).norm();
}

}  // namespace

EvaluationGrid EvaluationGrid::tag(const BoundaryMesh& bnd, const std::vector<Vec3>& pts) {
  EvaluationGrid grid;
  grid.points = pts;
  grid.side.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::max();
    int best_t = 0;
    for (std::size_t t = 0; t < bnd.tris.size(); ++t) {
      const auto& T = bnd.tris[t];
      const double d = point_triangle_distance(pts[i], bnd.vertices[T[0]], bnd.vertices[T[1]], bnd.vertices[T[2]]);
      if (d < best) {
        best = d;
        best_t = static_cast<int>(t);
      }
    }
    const auto& T = bnd.tris[best_t];
    const double h = std::max({(bnd.vertices[T[1]] - bnd.vertices[T[0]]).norm(),
                               (bnd.vertices[T[2]] - bnd.vertices[T[0]]).norm(),
                               (bnd.vertices[T[2]] - bnd.vertices[T[1]]).norm()});
    if (best < 2.0 * h) {
      grid.side[i] = Side::NearSurface;
    } else {
      const double sgn = (pts[i] - bnd.centroids[best_t]).dot(bnd.normals[best_t]);
      grid.side[i] = sgn > 0.0 ? Side::Exterior : Side::Interior;
    }
  }
  return grid;
}

PotentialEvaluator::PotentialEvaluator(const BoundarySpaces& sp, const KernelEval& ker)
    : sp_(&sp), ker_(&ker), rule_far_(tri_rule(3)), rule_mid_(tri_rule(7)), rule_near_(tri_rule(12)) {}

const std::vector<TriNode>& PotentialEvaluator::rule_for(int tri, const Vec3& x) const {
  const auto& b = *sp_->bnd;
  const auto& T = b.tris[tri];
  const double h = std::max({(b.vertices[T[1]] - b.vertices[T[0]]).norm(),
                             (b.vertices[T[2]] - b.vertices[T[0]]).norm(),
                             (b.vertices[T[2]] - b.vertices[T[1]]).norm()});
  const double d = (x - b.centroids[tri]).norm();
  if (d > 4.0 * h) return rule_far_;
  if (d > 1.0 * h) return rule_mid_;
  return rule_near_;
}

void PotentialEvaluator::check_off_surface(const Vec3& x) const {
  const auto& b = *sp_->bnd;
  for (std::size_t t = 0; t < b.tris.size(); ++t) {
    const auto& T = b.tris[t];
    const double scale = (b.vertices[T[1]] - b.vertices[T[0]]).norm() + x.norm();
    if (point_triangle_distance(x, b.vertices[T[0]], b.vertices[T[1]], b.vertices[T[2]]) <= 1e-13 * scale)
      throw std::domain_error("PotentialEvaluator: evaluation point lies on the surface");
  }
}

Complex PotentialEvaluator::scalar_SL(const CVector& q_p0, Complex nu, const Vec3& x) const {
  check_off_surface(x);
  const auto& b = *sp_->bnd;
  Complex sum = 0.0;
  for (int t = 0; t < sp_->n_tris(); ++t) {
    if (q_p0[t] == Complex(0.0, 0.0)) continue;
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    Complex acc = 0.0;
    for (const auto& q : rule_for(t, x)) {
      const Vec3 y = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      acc += q.w * KernelEval::eval_G(nu, x - y);
    }
    sum += 2.0 * b.areas[t] * acc * q_p0[t];
  }
  return sum;
}

CVec3 PotentialEvaluator::grad_scalar_SL(const CVector& q_p0, Complex nu, const Vec3& x) const {
  check_off_surface(x);
  const auto& b = *sp_->bnd;
  CVec3 sum = CVec3::Zero();
  for (int t = 0; t < sp_->n_tris(); ++t) {
    if (q_p0[t] == Complex(0.0, 0.0)) continue;
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    CVec3 acc = CVec3::Zero();
    for (const auto& q : rule_for(t, x)) {
      const Vec3 y = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      acc += q.w * KernelEval::eval_gradG(nu, x - y);
    }
    sum += (2.0 * b.areas[t] * q_p0[t]) * acc;
  }
  return sum;
}

CVec3 PotentialEvaluator::vector_SL(const CVector& p_div, Complex nu, const Vec3& x) const {
  check_off_surface(x);
  const auto& b = *sp_->bnd;
  CVec3 sum = CVec3::Zero();
  for (int t = 0; t < sp_->n_tris(); ++t) {
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    CVec3 acc = CVec3::Zero();
    for (const auto& q : rule_for(t, x)) {
      const Vec3 y = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      acc += (q.w * KernelEval::eval_G(nu, x - y)) * sp_->eval_div_field(p_div, t, y);
    }
    sum += 2.0 * b.areas[t] * acc;
  }
  return sum;
}

CVec3 PotentialEvaluator::grad_psitilde(const CVector& v_p0, const Vec3& x) const {
  check_off_surface(x);
  const auto& b = *sp_->bnd;
  CVec3 sum = CVec3::Zero();
  for (int t = 0; t < sp_->n_tris(); ++t) {
    if (v_p0[t] == Complex(0.0, 0.0)) continue;
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    CVec3 acc = CVec3::Zero();
    for (const auto& q : rule_for(t, x)) {
      const Vec3 y = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      acc += q.w * ker_->eval_gtilde_grad(x - y);
    }
    sum += (2.0 * b.areas[t] * v_p0[t]) * acc;
  }
  return sum;
}

CVec3 PotentialEvaluator::Upsilon(const CVector& xi_p1, const Vec3& x) const {
  check_off_surface(x);
  const auto& b = *sp_->bnd;
  CVec3 sum = CVec3::Zero();
  for (int t = 0; t < sp_->n_tris(); ++t) {
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    CVec3 acc = CVec3::Zero();
    for (const auto& q : rule_for(t, x)) {
      const Vec3 y = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      acc += (q.w * sp_->eval_p1(xi_p1, t, y)) * (ker_->eval_matG(x - y) * b.normals[t].cast<Complex>());
    }
    sum += 2.0 * b.areas[t] * acc;
  }
  return sum;
}

FieldEval PotentialEvaluator::eval_SL(const CVector& p_div, const CVector& q_p0, const Vec3& x) const {
  check_off_surface(x);
  const auto& b = *sp_->bnd;
  const Complex kappa = ker_->ctx().kappa, kt = ker_->ctx().kappa_tilde;
  const Complex kt2 = kt * kt;
  const double eta = ker_->ctx().eta;
  FieldEval out;
  for (int t = 0; t < sp_->n_tris(); ++t) {
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    const Complex divp = sp_->eval_div_of_div_field(p_div, t);
    CVec3 val = CVec3::Zero(), crl = CVec3::Zero();
    Complex dv = 0.0;
    for (const auto& q : rule_for(t, x)) {
      const Vec3 y = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      const Vec3 d = x - y;
      const CVec3 p = sp_->eval_div_field(p_div, t, y);
      const Complex Gk = KernelEval::eval_G(kappa, d);
      const Complex Gkt = KernelEval::eval_G(kt, d);
      const CVec3 gGkt = KernelEval::eval_gradG(kt, d);
      const CVec3 gGtilde = ker_->eval_gtilde_grad(d);
      // value: -Psi_k(p) - grad psitilde(div p) + grad psi_kt(q)
      val += q.w * (-Gk * p - divp * gGtilde + q_p0[t] * gGkt);
      // div: -(1/eta) psi_kt(div p) - kt^2 psi_kt(q)
      dv += q.w * (-(1.0 / eta) * Gkt * divp - kt2 * Gkt * q_p0[t]);
      // curl: -curl Psi_k(p) = -grad G x p
      crl += q.w * (-ccross(KernelEval::eval_gradG(kappa, d), p));
    }
    out.value += 2.0 * b.areas[t] * val;
    out.div += 2.0 * b.areas[t] * dv;
    out.curl += 2.0 * b.areas[t] * crl;
  }
  return out;
}

FieldEval PotentialEvaluator::eval_DL(const CVector& eta_curl, const CVector& xi_p1, const Vec3& x) const {
  check_off_surface(x);
  const auto& b = *sp_->bnd;
  const Complex kappa = ker_->ctx().kappa, kt = ker_->ctx().kappa_tilde;
  const Complex k2 = ker_->ctx().kappa2;
  FieldEval out;
  for (int t = 0; t < sp_->n_tris(); ++t) {
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    const Vec3 n = b.normals[t];
    // m = eta x n expands in the div basis with the same coefficients.
    const Complex divm = sp_->eval_div_of_div_field(eta_curl, t);
    CVec3 val = CVec3::Zero(), crl = CVec3::Zero();
    Complex dv = 0.0;
    for (const auto& q : rule_for(t, x)) {
      const Vec3 y = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      const Vec3 d = x - y;
      const CVec3 m = sp_->eval_div_field(eta_curl, t, y);
      const Complex xi = sp_->eval_p1(xi_p1, t, y);
      const CVec3 gGk = KernelEval::eval_gradG(kappa, d);
      const Complex Gk = KernelEval::eval_G(kappa, d);
      // value: curl Psi_k(m) + Upsilon(xi)
      val += q.w * (ccross(gGk, m) + xi * (ker_->eval_matG(d) * n.cast<Complex>()));
      // div: div Upsilon(xi) = (1/eta) * (n(y).grad_x G_kt) xi
      dv += q.w * (xi / ker_->ctx().eta) * cdot(KernelEval::eval_gradG(kt, d), n);
      // curl: curl curl Psi_k(m) + curl Psi_k(xi n)
      //     = grad psi_k(div m) + k^2 Psi_k(m) + grad G x (xi n)
      crl += q.w * (divm * gGk + k2 * Gk * m + ccross(gGk, xi * n.cast<Complex>()));
    }
    out.value += 2.0 * b.areas[t] * val;
    out.div += 2.0 * b.areas[t] * dv;
    out.curl += 2.0 * b.areas[t] * crl;
  }
  return out;
}

std::vector<CVec3> PotentialEvaluator::reconstruct(const CVector& p_div, const CVector& q_p0,
                                                   const CVector& eta_curl, const CVector& xi_p1,
                                                   const EvaluationGrid& grid) const {
  std::vector<CVec3> vals(grid.points.size());
  parallel_for(grid.points.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const FieldEval sl = eval_SL(p_div, q_p0, grid.points[i]);
      const FieldEval dl = eval_DL(eta_curl, xi_p1, grid.points[i]);
      vals[i] = sl.value + dl.value;
    }
  });
  return vals;
}

}  // namespace hodge
