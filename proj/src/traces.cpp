// SPDX-License-Identifier: Apache-2.0
#include "hodge/traces.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "hodge/quadrature.hpp"

namespace hodge {

namespace {
constexpr int kLocalEdgePairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
}

BoundarySpaces::BoundarySpaces(const BoundaryMesh& b) : bnd(&b) {
  std::map<std::array<int, 2>, int> index;
  for (const auto& T : b.tris)
    for (const auto& le : kLocalEdgePairs) {
      int p = T[le[0]], q = T[le[1]];
      if (p > q) std::swap(p, q);
      index.emplace(std::array<int, 2>{p, q}, 0);
    }
  for (auto& [e, id] : index) {
    id = static_cast<int>(edges.size());
    edges.push_back(e);
  }

  vertex_to_p1.assign(b.vertices.size(), -1);
  for (const auto& T : b.tris)
    for (int v : T)
      if (vertex_to_p1[v] < 0) {
        vertex_to_p1[v] = static_cast<int>(p1_vertices.size());
        p1_vertices.push_back(v);
      }
  // Deterministic P1 ordering: sort by parent vertex id.
  std::sort(p1_vertices.begin(), p1_vertices.end());
  for (std::size_t k = 0; k < p1_vertices.size(); ++k) vertex_to_p1[p1_vertices[k]] = static_cast<int>(k);

  const std::size_t nt = b.tris.size();
  tri_edges.resize(nt);
  tri_div.resize(nt);
  grad_lambda.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    const Vec3 n = b.normals[t];
    const double A = b.areas[t];
    // Surface gradients of barycentric coordinates: grad lambda_k is the
    // in-plane normal of the opposite edge, scaled to slope 1.
    const Vec3 e0 = v2 - v1, e1 = v0 - v2, e2 = v1 - v0;
    grad_lambda[t][0] = n.cross(e0) / (2.0 * A);
    grad_lambda[t][1] = n.cross(e1) / (2.0 * A);
    grad_lambda[t][2] = n.cross(e2) / (2.0 * A);
    for (int le = 0; le < 3; ++le) {
      int a = T[kLocalEdgePairs[le][0]], bb = T[kLocalEdgePairs[le][1]];
      double orient = 1.0;
      if (a > bb) {
        std::swap(a, bb);
        orient = -1.0;
      }
      tri_edges[t][le] = index.at({a, bb});
      // div rho_e = curl_G(w_e) = 2 n . (grad la x grad lb), with the sign of
      // the canonical a -> b direction.
      const int la = kLocalEdgePairs[le][0], lb = kLocalEdgePairs[le][1];
      tri_div[t][le] = orient * 2.0 * n.dot(grad_lambda[t][la].cross(grad_lambda[t][lb]));
    }
  }
}

Vec3 BoundarySpaces::rwg_rotated(int t, int local_edge, const Vec3& x) const {
  const auto& T = bnd->tris[t];
  const int la = kLocalEdgePairs[local_edge][0], lb = kLocalEdgePairs[local_edge][1];
  int a = T[la], b = T[lb];
  double orient = 1.0;
  if (a > b) orient = -1.0;
  // barycentric coordinates of x on the (flat) triangle
  const Vec3 v0 = bnd->vertices[T[0]];
  double lam[3];
  lam[1] = grad_lambda[t][1].dot(x - v0);
  lam[2] = grad_lambda[t][2].dot(x - v0);
  lam[0] = 1.0 - lam[1] - lam[2];
  return orient * (lam[la] * grad_lambda[t][lb] - lam[lb] * grad_lambda[t][la]);
}

Vec3 BoundarySpaces::rwg(int t, int local_edge, const Vec3& x) const {
  return rwg_rotated(t, local_edge, x).cross(bnd->normals[t]);
}

CVec3 BoundarySpaces::eval_div_field(const CVector& coeffs, int t, const Vec3& x) const {
  CVec3 v = CVec3::Zero();
  for (int le = 0; le < 3; ++le) v += coeffs[tri_edges[t][le]] * rwg(t, le, x).cast<Complex>();
  return v;
}

CVec3 BoundarySpaces::eval_curl_field(const CVector& coeffs, int t, const Vec3& x) const {
  CVec3 v = CVec3::Zero();
  for (int le = 0; le < 3; ++le) v += coeffs[tri_edges[t][le]] * rwg_rotated(t, le, x).cast<Complex>();
  return v;
}

Complex BoundarySpaces::eval_p0(const CVector& coeffs, int t) const { return coeffs[t]; }

Complex BoundarySpaces::eval_p1(const CVector& coeffs, int t, const Vec3& x) const {
  const auto& T = bnd->tris[t];
  const Vec3 v0 = bnd->vertices[T[0]];
  double lam[3];
  lam[1] = grad_lambda[t][1].dot(x - v0);
  lam[2] = grad_lambda[t][2].dot(x - v0);
  lam[0] = 1.0 - lam[1] - lam[2];
  Complex v = 0.0;
  for (int k = 0; k < 3; ++k) v += coeffs[vertex_to_p1[T[k]]] * lam[k];
  return v;
}

Complex BoundarySpaces::eval_div_of_div_field(const CVector& coeffs, int t) const {
  Complex v = 0.0;
  for (int le = 0; le < 3; ++le) v += coeffs[tri_edges[t][le]] * tri_div[t][le];
  return v;
}

CVector BoundarySpaces::interpolate_div(const std::function<CVec3(const Vec3&)>& f) const {
  // dof = flux across the edge; orientation fixed so that dof(rho_e) = 1.
  // rho_e = w_e x n has flux w_e . t along the a->b tangent, so integrate
  // f . (t x n) over the edge.
  CVector dofs = CVector::Zero(n_edges());
  std::vector<char> done(edges.size(), 0);
  const GaussRule1D g = gauss_legendre_01(4);
  for (std::size_t t = 0; t < bnd->tris.size(); ++t)
    for (int le = 0; le < 3; ++le) {
      const int e = tri_edges[t][le];
      if (done[e]) continue;
      done[e] = 1;
      const Vec3 a = bnd->vertices[edges[e][0]], b = bnd->vertices[edges[e][1]];
      const Vec3 tangent = b - a;
      const Vec3 nu = tangent.cross(bnd->normals[t]);  // in-plane flux direction of rho_e
      Complex flux = 0.0;
      for (std::size_t q = 0; q < g.x.size(); ++q) flux += g.w[q] * cdot(f(a + g.x[q] * tangent), nu);
      dofs[e] = flux;
    }
  return dofs;
}

CVector BoundarySpaces::interpolate_curl(const std::function<CVec3(const Vec3&)>& f) const {
  CVector dofs = CVector::Zero(n_edges());
  const GaussRule1D g = gauss_legendre_01(4);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Vec3 a = bnd->vertices[edges[e][0]], b = bnd->vertices[edges[e][1]];
    Complex circ = 0.0;
    for (std::size_t q = 0; q < g.x.size(); ++q) circ += g.w[q] * cdot(f(a + g.x[q] * (b - a)), b - a);
    dofs[e] = circ;
  }
  return dofs;
}

CVector BoundarySpaces::interpolate_p0(const std::function<Complex(const Vec3&)>& f) const {
  CVector dofs = CVector::Zero(n_tris());
  const auto rule = tri_rule(4);
  for (int t = 0; t < n_tris(); ++t) {
    const auto& T = bnd->tris[t];
    const Vec3 v0 = bnd->vertices[T[0]], v1 = bnd->vertices[T[1]], v2 = bnd->vertices[T[2]];
    Complex mean = 0.0;
    for (const auto& q : rule) mean += q.w * f(v0 + q.u * (v1 - v0) + q.v * (v2 - v0));
    dofs[t] = 2.0 * mean;  // weights sum to 1/2
  }
  return dofs;
}

CVector BoundarySpaces::interpolate_p1(const std::function<Complex(const Vec3&)>& f) const {
  CVector dofs(n_p1());
  for (int k = 0; k < n_p1(); ++k) dofs[k] = f(bnd->vertices[p1_vertices[k]]);
  return dofs;
}

RSparse trace_tangential(const EdgeSpace& edge, const BoundarySpaces& sp) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < sp.n_edges(); ++e) {
    const int vol = edge.edge_index(sp.edges[e][0], sp.edges[e][1]);
    if (vol < 0) throw std::runtime_error("trace_tangential: boundary edge missing from volume edge space");
    trip.emplace_back(e, vol, 1.0);  // both sides use the canonical a < b direction
  }
  RSparse R(sp.n_edges(), edge.dof_count());
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

RSparse trace_scalar(const NodalSpace& nodal, const BoundarySpaces& sp) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < sp.n_p1(); ++k) trip.emplace_back(k, sp.p1_vertices[k], 1.0);
  RSparse R(sp.n_p1(), nodal.dof_count());
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

RSparse surface_div(const BoundarySpaces& sp) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < sp.n_tris(); ++t)
    for (int le = 0; le < 3; ++le) trip.emplace_back(t, sp.tri_edges[t][le], sp.tri_div[t][le]);
  RSparse D(sp.n_tris(), sp.n_edges());
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

RSparse surface_curl(const BoundarySpaces& sp) {
  // curl_G(phi_v) = grad_G(phi_v) x n expanded in the div basis. The flux of
  // grad_G phi x n across an edge is the tangential derivative of phi along
  // it, so the coefficient is phi(b) - phi(a) on the canonical a -> b edge.
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < sp.n_edges(); ++e) {
    const int a = sp.edges[e][0], b = sp.edges[e][1];
    trip.emplace_back(e, sp.vertex_to_p1[b], 1.0);
    trip.emplace_back(e, sp.vertex_to_p1[a], -1.0);
  }
  RSparse C(sp.n_edges(), sp.n_p1());
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

DualityGrams duality_grams(const BoundarySpaces& sp) {
  DualityGrams g;
  g.pair_tau = RMatrix::Zero(sp.n_edges(), sp.n_edges());
  g.pair_scalar = RMatrix::Zero(sp.n_p1(), sp.n_tris());
  const auto rule = tri_rule(3);  // exact for the quadratic integrands
  for (int t = 0; t < sp.n_tris(); ++t) {
    const auto& T = sp.bnd->tris[t];
    const Vec3 v0 = sp.bnd->vertices[T[0]], v1 = sp.bnd->vertices[T[1]], v2 = sp.bnd->vertices[T[2]];
    const double A2 = 2.0 * sp.bnd->areas[t];
    for (const auto& q : rule) {
      const Vec3 x = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      const double wt = q.w * A2;
      Vec3 rho[3], wrot[3];
      for (int le = 0; le < 3; ++le) {
        wrot[le] = sp.rwg_rotated(t, le, x);
        rho[le] = wrot[le].cross(sp.bnd->normals[t]);
      }
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          g.pair_tau(sp.tri_edges[t][i], sp.tri_edges[t][j]) += wt * rho[i].dot(wrot[j]);
      const double lam[3] = {1.0 - q.u - q.v, q.u, q.v};
      for (int k = 0; k < 3; ++k) g.pair_scalar(sp.vertex_to_p1[T[k]], t) += wt * lam[k];
    }
  }
  return g;
}

BoundaryMass boundary_mass(const BoundarySpaces& sp) {
  std::vector<Eigen::Triplet<double>> t_rwg, t_div, t_p1, t_p0;
  const auto rule = tri_rule(3);
  for (int t = 0; t < sp.n_tris(); ++t) {
    const auto& T = sp.bnd->tris[t];
    const Vec3 v0 = sp.bnd->vertices[T[0]], v1 = sp.bnd->vertices[T[1]], v2 = sp.bnd->vertices[T[2]];
    const double A2 = 2.0 * sp.bnd->areas[t];
    Eigen::Matrix3d mr = Eigen::Matrix3d::Zero(), mp = Eigen::Matrix3d::Zero();
    for (const auto& q : rule) {
      const Vec3 x = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      const double wt = q.w * A2;
      Vec3 rho[3];
      for (int le = 0; le < 3; ++le) rho[le] = sp.rwg(t, le, x);
      const double lam[3] = {1.0 - q.u - q.v, q.u, q.v};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          mr(i, j) += wt * rho[i].dot(rho[j]);
          mp(i, j) += wt * lam[i] * lam[j];
        }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        t_rwg.emplace_back(sp.tri_edges[t][i], sp.tri_edges[t][j], mr(i, j));
        t_div.emplace_back(sp.tri_edges[t][i], sp.tri_edges[t][j],
                           sp.tri_div[t][i] * sp.tri_div[t][j] * sp.bnd->areas[t]);
        t_p1.emplace_back(sp.vertex_to_p1[T[i]], sp.vertex_to_p1[T[j]], mp(i, j));
      }
    t_p0.emplace_back(t, t, sp.bnd->areas[t]);
  }
  BoundaryMass m;
  m.rwg.resize(sp.n_edges(), sp.n_edges());
  m.rwg_div.resize(sp.n_edges(), sp.n_edges());
  m.p1.resize(sp.n_p1(), sp.n_p1());
  m.p0.resize(sp.n_tris(), sp.n_tris());
  m.rwg.setFromTriplets(t_rwg.begin(), t_rwg.end());
  m.rwg_div.setFromTriplets(t_div.begin(), t_div.end());
  m.p1.setFromTriplets(t_p1.begin(), t_p1.end());
  m.p0.setFromTriplets(t_p0.begin(), t_p0.end());
  return m;
}

}  // namespace hodge
