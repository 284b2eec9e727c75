// SPDX-License-Identifier: Apache-2.0
#include "hodge/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hodge/quadrature.hpp"

namespace hodge {

WaveContext::WaveContext(double omega_, double eps0_, double mu0_) : omega(omega_), eps0(eps0_), mu0(mu0_) {
  if (omega < 0.0 || eps0 <= 0.0 || mu0 <= 0.0)
    throw std::invalid_argument("WaveContext: need omega >= 0, eps0 > 0, mu0 > 0");
  eta = mu0 * eps0 * eps0;
  kappa2 = Complex(mu0 * eps0 * omega * omega, 0.0);
  kappa = std::sqrt(kappa2);
  kappa_tilde = kappa / std::sqrt(eta);
}

WaveContext WaveContext::from_kappa2(Complex kappa2_, double eta_) {
  if (kappa2_.real() < 0.0 || kappa2_.imag() < 0.0 || eta_ <= 0.0)
    throw std::invalid_argument("WaveContext: need Re(kappa2) >= 0, Im(kappa2) >= 0, eta > 0");
  WaveContext ctx;
  ctx.eta = eta_;
  ctx.kappa2 = kappa2_;
  ctx.kappa = std::sqrt(kappa2_);
  ctx.kappa_tilde = ctx.kappa / std::sqrt(eta_);
  // Bookkeeping primaries consistent with (kappa2, eta): mu0 = eta, eps0 = 1.
  ctx.mu0 = eta_;
  ctx.eps0 = 1.0;
  ctx.omega = std::sqrt(std::abs(kappa2_) / (ctx.mu0 * ctx.eps0));
  return ctx;
}

MaterialField MaterialField::constant(Complex mu_val, Complex eps_val) {
  MaterialField m;
  m.mu[0] = mu_val;
  m.eps[0] = eps_val;
  return m;
}

Complex MaterialField::mu_of(int region) const {
  auto it = mu.find(region);
  if (it == mu.end()) it = mu.find(0);  // region 0 acts as default
  if (it == mu.end()) throw std::runtime_error("MaterialField: no mu for region " + std::to_string(region));
  return it->second;
}

Complex MaterialField::eps_of(int region) const {
  auto it = eps.find(region);
  if (it == eps.end()) it = eps.find(0);
  if (it == eps.end()) throw std::runtime_error("MaterialField: no eps for region " + std::to_string(region));
  return it->second;
}

void MaterialField::validate() const {
  auto check = [](const std::map<int, Complex>& m, const char* name) {
    for (const auto& [r, v] : m) {
      if (!(v.real() > 0.0) || v.imag() < 0.0)
        throw std::runtime_error(std::string("MaterialField: ") + name + " violates Re > 0, Im >= 0 in region " +
                                 std::to_string(r));
    }
  };
  check(mu, "mu");
  check(eps, "eps");
}

TetGeometry::TetGeometry(const VolumeMesh& mesh, int t) {
  const auto& T = mesh.tets[t];
  const Vec3 v0 = mesh.vertices[T[0]];
  Mat3 J;
  J.col(0) = mesh.vertices[T[1]] - v0;
  J.col(1) = mesh.vertices[T[2]] - v0;
  J.col(2) = mesh.vertices[T[3]] - v0;
  const double det = J.determinant();
  if (det <= 0.0) throw std::runtime_error("TetGeometry: singular or inverted tet " + std::to_string(t));
  volume = det / 6.0;
  const Mat3 Jinv = J.inverse();
  for (int k = 0; k < 3; ++k) grad_lambda[k + 1] = Jinv.row(k);
  grad_lambda[0] = -(grad_lambda[1] + grad_lambda[2] + grad_lambda[3]);
}

std::array<double, 4> TetGeometry::barycentric(const VolumeMesh& mesh, int t, const Vec3& x) const {
  const auto& T = mesh.tets[t];
  std::array<double, 4> lam;
  double sum = 0.0;
  for (int k = 1; k < 4; ++k) {
    lam[k] = grad_lambda[k].dot(x - mesh.vertices[T[0]]);
    sum += lam[k];
  }
  lam[0] = 1.0 - sum;
  return lam;
}

namespace {
constexpr int kLocalEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
}

EdgeSpace::EdgeSpace(const VolumeMesh& m) : mesh(&m) {
  std::map<std::array<int, 2>, int> index;
  for (const auto& T : m.tets)
    for (const auto& le : kLocalEdges) {
      int a = T[le[0]], b = T[le[1]];
      if (a > b) std::swap(a, b);
      index.emplace(std::array<int, 2>{a, b}, 0);
    }
  edges.reserve(index.size());
  for (auto& [e, id] : index) {
    id = static_cast<int>(edges.size());
    edges.push_back(e);
  }
  tet_edges.resize(m.tets.size());
  tet_edge_sign.resize(m.tets.size());
  for (std::size_t t = 0; t < m.tets.size(); ++t) {
    const auto& T = m.tets[t];
    for (int e = 0; e < 6; ++e) {
      int a = T[kLocalEdges[e][0]], b = T[kLocalEdges[e][1]];
      const double sign = a < b ? 1.0 : -1.0;
      if (a > b) std::swap(a, b);
      tet_edges[t][e] = index.at({a, b});
      tet_edge_sign[t][e] = sign;
    }
  }
}

int EdgeSpace::edge_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::array<int, 2>{a, b});
  if (it == edges.end() || (*it)[0] != a || (*it)[1] != b) return -1;
  return static_cast<int>(it - edges.begin());
}

CVector EdgeSpace::interpolate(const std::function<CVec3(const Vec3&)>& field) const {
  CVector dofs = CVector::Zero(dof_count());
  const GaussRule1D g = gauss_legendre_01(4);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Vec3 a = mesh->vertices[edges[e][0]], b = mesh->vertices[edges[e][1]];
    Complex circ = 0.0;
    for (std::size_t q = 0; q < g.x.size(); ++q) circ += g.w[q] * cdot(field(a + g.x[q] * (b - a)), b - a);
    dofs[e] = circ;
  }
  return dofs;
}

CVec3 EdgeSpace::eval(const CVector& coeffs, int t, const Vec3& x) const {
  const TetGeometry geo(*mesh, t);
  const auto lam = geo.barycentric(*mesh, t, x);
  CVec3 val = CVec3::Zero();
  for (int e = 0; e < 6; ++e) {
    const int la = kLocalEdges[e][0], lb = kLocalEdges[e][1];
    const Vec3 w = lam[la] * geo.grad_lambda[lb] - lam[lb] * geo.grad_lambda[la];
    val += (coeffs[tet_edges[t][e]] * tet_edge_sign[t][e]) * w.cast<Complex>();
  }
  return val;
}

CVec3 EdgeSpace::eval_curl(const CVector& coeffs, int t) const {
  const TetGeometry geo(*mesh, t);
  CVec3 val = CVec3::Zero();
  for (int e = 0; e < 6; ++e) {
    const int la = kLocalEdges[e][0], lb = kLocalEdges[e][1];
    const Vec3 c = 2.0 * geo.grad_lambda[la].cross(geo.grad_lambda[lb]);
    val += (coeffs[tet_edges[t][e]] * tet_edge_sign[t][e]) * c.cast<Complex>();
  }
  return val;
}

CVector NodalSpace::interpolate(const std::function<Complex(const Vec3&)>& f) const {
  CVector dofs(dof_count());
  for (int v = 0; v < dof_count(); ++v) dofs[v] = f(mesh->vertices[v]);
  return dofs;
}

Complex NodalSpace::eval(const CVector& coeffs, int t, const Vec3& x) const {
  const TetGeometry geo(*mesh, t);
  const auto lam = geo.barycentric(*mesh, t, x);
  Complex val = 0.0;
  for (int k = 0; k < 4; ++k) val += coeffs[mesh->tets[t][k]] * lam[k];
  return val;
}

CVec3 NodalSpace::eval_grad(const CVector& coeffs, int t) const {
  const TetGeometry geo(*mesh, t);
  CVec3 val = CVec3::Zero();
  for (int k = 0; k < 4; ++k) val += coeffs[mesh->tets[t][k]] * geo.grad_lambda[k].cast<Complex>();
  return val;
}

VolumeForms assemble_volume_form(const VolumeMesh& mesh, const EdgeSpace& edge, const NodalSpace& nodal,
                                 const MaterialField& mat, const WaveContext& ctx) {
  (void)ctx;
  mat.validate();
  const int nE = edge.dof_count(), nV = nodal.dof_count();
  std::vector<Eigen::Triplet<Complex>> t_cc, t_mix, t_mp, t_me;
  const auto rule = tet_rule(2);

  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const TetGeometry geo(mesh, t);
    const auto& T = mesh.tets[t];
    const Complex mu_inv = 1.0 / mat.mu_of(mesh.region_tag[t]);
    const Complex eps = mat.eps_of(mesh.region_tag[t]);

    std::array<Vec3, 6> curl;
    for (int e = 0; e < 6; ++e)
      curl[e] = 2.0 * edge.tet_edge_sign[t][e] *
                geo.grad_lambda[kLocalEdges[e][0]].cross(geo.grad_lambda[kLocalEdges[e][1]]);

    // curl-curl block: constant integrands.
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        t_cc.emplace_back(edge.tet_edges[t][i], edge.tet_edges[t][j], mu_inv * geo.volume * curl[j].dot(curl[i]));

    // Quadrature loop for the degree-2 integrands.
    Eigen::Matrix<double, 6, 6> me = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 4> gm = Eigen::Matrix<double, 6, 4>::Zero();
    Eigen::Matrix<double, 4, 4> mp = Eigen::Matrix<double, 4, 4>::Zero();
    for (const auto& q : rule) {
      const double lam[4] = {1.0 - q.u - q.v - q.w, q.u, q.v, q.w};
      std::array<Vec3, 6> w;
      for (int e = 0; e < 6; ++e) {
        const int la = kLocalEdges[e][0], lb = kLocalEdges[e][1];
        w[e] = edge.tet_edge_sign[t][e] * (lam[la] * geo.grad_lambda[lb] - lam[lb] * geo.grad_lambda[la]);
      }
      const double wt = q.wt * 6.0 * geo.volume;
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) me(i, j) += wt * w[j].dot(w[i]);
        for (int k = 0; k < 4; ++k) gm(i, k) += wt * geo.grad_lambda[k].dot(w[i]);
      }
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) mp(k, l) += wt * lam[k] * lam[l];
    }
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) t_me.emplace_back(edge.tet_edges[t][i], edge.tet_edges[t][j], eps * me(i, j));
      for (int k = 0; k < 4; ++k) t_mix.emplace_back(edge.tet_edges[t][i], T[k], eps * gm(i, k));
    }
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) t_mp.emplace_back(T[k], T[l], Complex(mp(k, l)));
  }

  VolumeForms vf;
  vf.A_cc.resize(nE, nE);
  vf.M_eps.resize(nE, nE);
  vf.G_mix.resize(nE, nV);
  vf.M_P.resize(nV, nV);
  vf.A_cc.setFromTriplets(t_cc.begin(), t_cc.end());
  vf.M_eps.setFromTriplets(t_me.begin(), t_me.end());
  vf.G_mix.setFromTriplets(t_mix.begin(), t_mix.end());
  vf.M_P.setFromTriplets(t_mp.begin(), t_mp.end());
  return vf;
}

Complex volume_form_value(const VolumeForms& vf, const WaveContext& ctx, const CVector& U, const CVector& P,
                          const CVector& V, const CVector& Q) {
  const double w2 = ctx.omega * ctx.omega;
  return bdot(V, vf.A_cc * U) - w2 * bdot(V, vf.M_eps * U) + bdot(V, vf.G_mix * P) + bdot(Q, vf.M_P * P) -
         bdot(Q, vf.G_mix.transpose() * U);
}

CVector assemble_source(const std::function<CVec3(const Vec3&)>& J, const EdgeSpace& edge) {
  const VolumeMesh& mesh = *edge.mesh;
  CVector rhs = CVector::Zero(edge.dof_count());
  const auto rule = tet_rule(5);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const TetGeometry geo(mesh, t);
    const auto& T = mesh.tets[t];
    const Vec3 v0 = mesh.vertices[T[0]];
    for (const auto& q : rule) {
      const Vec3 x = v0 + q.u * (mesh.vertices[T[1]] - v0) + q.v * (mesh.vertices[T[2]] - v0) +
                     q.w * (mesh.vertices[T[3]] - v0);
      const CVec3 val = J(x);
      const double lam[4] = {1.0 - q.u - q.v - q.w, q.u, q.v, q.w};
      const double wt = q.wt * 6.0 * geo.volume;
      for (int e = 0; e < 6; ++e) {
        const int la = kLocalEdges[e][0], lb = kLocalEdges[e][1];
        const Vec3 w = edge.tet_edge_sign[t][e] * (lam[la] * geo.grad_lambda[lb] - lam[lb] * geo.grad_lambda[la]);
        rhs[edge.tet_edges[t][e]] += wt * cdot(val, w);
      }
    }
  }
  return rhs;
}

}  // namespace hodge

namespace hodge {

RSparse assemble_nodal_stiffness(const VolumeMesh& mesh, const NodalSpace& nodal) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const TetGeometry geo(mesh, t);
    const auto& T = mesh.tets[t];
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l)
        trip.emplace_back(T[k], T[l], geo.volume * geo.grad_lambda[k].dot(geo.grad_lambda[l]));
  }
  RSparse K(nodal.dof_count(), nodal.dof_count());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

}  // namespace hodge
