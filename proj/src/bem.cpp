// SPDX-License-Identifier: Apache-2.0
#include "hodge/bem.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace hodge {

PanelQuadrature::PanelQuadrature(int singular, int regular) : singular_order(singular), regular_order(regular) {
  if (singular < 2 || regular < 2) throw std::invalid_argument("PanelQuadrature: orders must be >= 2");
  coincident = sauter_schwab_rule(3, singular);
  common_edge = sauter_schwab_rule(2, singular);
  common_vertex = sauter_schwab_rule(1, singular);
  // Tensor rules: n nodes per dim integrate triangle polynomials of degree
  // 2n-2, so n = regular_order + 1 covers degree 2*regular_order - 1.
  far = disjoint_pair_rule(regular + 1);
  mid = disjoint_pair_rule(regular + 4);
  near_field = disjoint_pair_rule(regular + 8);
}

namespace {

struct PanelData {
  std::array<Vec3, 3> v;      // vertices in mesh order
  Vec3 n;                      // outward normal
  double area;
  double h;                    // longest edge
  Vec3 centroid;
  std::array<Vec3, 3> glam;   // surface gradients of barycentric hats
  std::array<Vec3, 3> crl;    // grad_G phi_k x n (constant per triangle)
  std::array<int, 3> edge_id;  // local edge slot -> global edge
  std::array<double, 3> ediv;  // div rho_e on this triangle
  std::array<int, 3> p1_id;    // local vertex -> P1 dof
};

// Values of the three local rho basis functions at a physical point.
struct BasisAtPoint {
  Vec3 rho[3];
  double lam[3];
};

BasisAtPoint basis_at(const PanelData& p, const Vec3& x) {
  BasisAtPoint b;
  b.lam[1] = p.glam[1].dot(x - p.v[0]);
  b.lam[2] = p.glam[2].dot(x - p.v[0]);
  b.lam[0] = 1.0 - b.lam[1] - b.lam[2];
  constexpr int le[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int e = 0; e < 3; ++e) {
    const Vec3 w = b.lam[le[e][0]] * p.glam[le[e][1]] - b.lam[le[e][1]] * p.glam[le[e][0]];
    b.rho[e] = w.cross(p.n);
  }
  return b;
}

// Per-pair local accumulators for every primitive operator.
struct LocalBlocks {
  Complex sG = 0, sGt = 0, sGred = 0;
  double sG0 = 0;
  CMat3 Vv = CMat3::Zero(), C = CMat3::Zero(), Ct = CMat3::Zero(), Cn = CMat3::Zero(), Bn = CMat3::Zero(),
        Nt = CMat3::Zero(), Nn = CMat3::Zero();
  Mat3 Vv0 = Mat3::Zero();
  CVec3 Kp = CVec3::Zero(), Kd = CVec3::Zero(), Htk = CVec3::Zero();
};

}  // namespace

BemOperators assemble_primitive_ops(const KernelEval& ker, const BoundarySpaces& sp, const PanelQuadrature& quad,
                                    int threads) {
  const BoundaryMesh& bnd = *sp.bnd;
  const int nT = sp.n_tris(), nE = sp.n_edges(), nP1 = sp.n_p1();
  const Complex kappa = ker.ctx().kappa, kt = ker.ctx().kappa_tilde;

  std::vector<PanelData> panels(nT);
  for (int t = 0; t < nT; ++t) {
    PanelData& p = panels[t];
    const auto& T = bnd.tris[t];
    for (int k = 0; k < 3; ++k) p.v[k] = bnd.vertices[T[k]];
    p.n = bnd.normals[t];
    p.area = bnd.areas[t];
    p.centroid = bnd.centroids[t];
    p.h = std::max({(p.v[1] - p.v[0]).norm(), (p.v[2] - p.v[0]).norm(), (p.v[2] - p.v[1]).norm()});
    for (int k = 0; k < 3; ++k) {
      p.glam[k] = sp.grad_lambda[t][k];
      p.crl[k] = p.glam[k].cross(p.n);
      p.edge_id[k] = sp.tri_edges[t][k];
      p.ediv[k] = sp.tri_div[t][k];
      p.p1_id[k] = sp.vertex_to_p1[T[k]];
    }
  }

  auto make_zero = [&]() {
    BemOperators ops;
    ops.Vs_kt = CMatrix::Zero(nT, nT);
    ops.W = CMatrix::Zero(nE, nE);
    ops.Wt = CMatrix::Zero(nE, nE);
    ops.Vv = CMatrix::Zero(nE, nE);
    ops.Vdp = CMatrix::Zero(nE, nT);
    ops.C = CMatrix::Zero(nE, nE);
    ops.Ct = CMatrix::Zero(nE, nP1);
    ops.Cn = CMatrix::Zero(nP1, nE);
    ops.Kp = CMatrix::Zero(nP1, nT);
    ops.Kd = CMatrix::Zero(nT, nP1);
    ops.Bn = CMatrix::Zero(nP1, nE);
    ops.Ht = CMatrix::Zero(nP1, nE);
    ops.Nt = CMatrix::Zero(nE, nP1);
    ops.Nn = CMatrix::Zero(nP1, nP1);
    ops.Vs0 = RMatrix::Zero(nT, nT);
    ops.Vv0 = RMatrix::Zero(nE, nE);
    ops.W0 = RMatrix::Zero(nE, nE);
    return ops;
  };

  // Evaluate each kernel once per point pair and accumulate every operator.
  // The pair (vx, vy) carries the vertex order with common vertices leading,
  // as the Sauter-Schwab transforms require; bases evaluate from the
  // physical point, so they are unaffected by the permutation.
  auto accumulate_pair = [&](const PanelData& px, const PanelData& py, const std::array<Vec3, 3>& vx,
                             const std::array<Vec3, 3>& vy, const std::vector<PanelPairNode>& rule,
                             LocalBlocks& lb) {
    const double jac = 4.0 * px.area * py.area;
    for (const auto& nd : rule) {
      const Vec3 x = vx[0] + nd.u1 * (vx[1] - vx[0]) + nd.v1 * (vx[2] - vx[0]);
      const Vec3 y = vy[0] + nd.u2 * (vy[1] - vy[0]) + nd.v2 * (vy[2] - vy[0]);
      const Vec3 d = x - y;
      const double r = d.norm();
      if (r <= 0.0) continue;  // measure-zero guard for coincident rules
      const double w = nd.w * jac;
      const double inv4pir = 1.0 / (4.0 * M_PI * r);
      const Complex Gk = std::exp(I_UNIT * kappa * r) * inv4pir;
      const Complex Gkt = std::exp(I_UNIT * kt * r) * inv4pir;
      const Complex dGk = (I_UNIT * kappa - 1.0 / r) * Gk / r;  // grad_x G = dGk * d
      const Complex dGkt = (I_UNIT * kt - 1.0 / r) * Gkt / r;
      const Complex gt1 = ker.gtilde_d1(r), gt2 = ker.gtilde_d2(r), gtr = ker.gtilde_reduced(r);

      const BasisAtPoint bx = basis_at(px, x), by = basis_at(py, y);

      lb.sG += w * Gk;
      lb.sGt += w * Gkt;
      lb.sGred += w * gtr;
      lb.sG0 += w * inv4pir;

      const double dn_y = d.dot(py.n);  // d . n(y)
      const double dn_x = d.dot(px.n);
      // hess(Gtilde) n(y) = gt2 (u.n) u + gt1/r (n - (u.n) u), u = d/r
      const Complex c1 = gt2 * dn_y / (r * r) - gt1 * dn_y / (r * r * r);
      const CVec3 hn = c1 * d.cast<Complex>() + (gt1 / r) * py.n.cast<Complex>();
      const Complex n_hn = c1 * dn_x + (gt1 / r) * px.n.dot(py.n);
      const double nx_ny = px.n.dot(py.n);
      const Vec3 d_cross_ny = d.cross(py.n);

      for (int j = 0; j < 3; ++j) {
        const Vec3& rj = by.rho[j];
        const double nx_rj = px.n.dot(rj);
        for (int i = 0; i < 3; ++i) {
          const Vec3& ri = bx.rho[i];
          lb.Vv(i, j) += w * Gk * ri.dot(rj);
          lb.Vv0(i, j) += w * inv4pir * ri.dot(rj);
          lb.C(i, j) += (w * dGk) * d.dot(rj.cross(ri));
          lb.Bn(i, j) += (w * Gk) * (bx.lam[i] * nx_rj);         // rows: P1 hat at x
          lb.Ct(i, j) += (w * dGk) * (ri.dot(d_cross_ny) * by.lam[j]);
          lb.Cn(i, j) += (w * Gk) * px.crl[i].dot(rj);
          lb.Nt(i, j) += (w * by.lam[j]) * (Gk * ri.dot(py.n) + cdot(hn, ri));
          lb.Nn(i, j) += (w * bx.lam[i] * by.lam[j]) * (Gk * nx_ny + n_hn);
        }
      }
      for (int k = 0; k < 3; ++k) {
        lb.Kp(k) += (w * bx.lam[k]) * (dGkt * dn_x);
        lb.Kd(k) += (w * by.lam[k]) * (dGkt * dn_y);
        lb.Htk(k) += (w * bx.lam[k]) * (gt1 * dn_x / r);
      }
    }
  };

  auto scatter = [](BemOperators& ops, int t, int s, const PanelData& px, const PanelData& py,
                    const LocalBlocks& lb) {
    ops.Vs_kt(t, s) += lb.sGt;
    ops.Vs0(t, s) += lb.sG0;
    for (int i = 0; i < 3; ++i) {
      const int ei = px.edge_id[i];
      ops.Vdp(ei, s) += px.ediv[i] * lb.sGt;
      ops.Kp(px.p1_id[i], s) += lb.Kp(i);
      ops.Kd(t, py.p1_id[i]) += lb.Kd(i);
      for (int j = 0; j < 3; ++j) {
        const int ej = py.edge_id[j];
        ops.W(ei, ej) += px.ediv[i] * py.ediv[j] * lb.sG;
        ops.W0(ei, ej) += px.ediv[i] * py.ediv[j] * lb.sG0;
        ops.Wt(ei, ej) += px.ediv[i] * py.ediv[j] * lb.sGred;
        ops.Vv(ei, ej) += lb.Vv(i, j);
        ops.Vv0(ei, ej) += lb.Vv0(i, j);
        ops.C(ei, ej) += lb.C(i, j);
        ops.Bn(px.p1_id[i], ej) += lb.Bn(i, j);
        ops.Ht(px.p1_id[i], ej) += lb.Htk(i) * py.ediv[j];
        ops.Cn(px.p1_id[i], ej) += lb.Cn(i, j);
        ops.Ct(ei, py.p1_id[j]) += lb.Ct(i, j);
        ops.Nt(ei, py.p1_id[j]) += lb.Nt(i, j);
        ops.Nn(px.p1_id[i], py.p1_id[j]) += lb.Nn(i, j);
      }
    }
  };

  // Permute common vertices of a pair to the leading positions.
  auto classify = [&](int t, int s, std::array<int, 3>& permt, std::array<int, 3>& perms) {
    const auto& Tt = bnd.tris[t];
    const auto& Ts = bnd.tris[s];
    int nc = 0;
    bool used_t[3] = {false, false, false}, used_s[3] = {false, false, false};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (!used_s[j] && Tt[i] == Ts[j]) {
          permt[nc] = i;
          perms[nc] = j;
          used_t[i] = used_s[j] = true;
          ++nc;
          break;
        }
    int a = nc, b = nc;
    for (int i = 0; i < 3; ++i)
      if (!used_t[i]) permt[a++] = i;
    for (int j = 0; j < 3; ++j)
      if (!used_s[j]) perms[b++] = j;
    if (nc == 3 && t != s) throw std::runtime_error("bem: distinct panels share 3 vertices");
    return nc;
  };

  const int nchunk = std::max(1, std::min(effective_threads(threads), nT));
  std::vector<BemOperators> partials(nchunk, make_zero());

  auto run_chunk = [&](int chunk, int lo, int hi) {
    BemOperators& ops = partials[chunk];
    for (int t = lo; t < hi; ++t) {
      for (int s = 0; s < nT; ++s) {
        const PanelData& px = panels[t];
        const PanelData& py = panels[s];
        std::array<int, 3> permt{0, 1, 2}, perms{0, 1, 2};
        const int nc = classify(t, s, permt, perms);
        const std::vector<PanelPairNode>* rule;
        if (nc == 3) {
          rule = &quad.coincident;
        } else if (nc == 2) {
          rule = &quad.common_edge;
        } else if (nc == 1) {
          rule = &quad.common_vertex;
        } else {
          const double dist = (px.centroid - py.centroid).norm();
          const double h = std::max(px.h, py.h);
          rule = dist > 4.0 * h ? &quad.far : (dist > 1.5 * h ? &quad.mid : &quad.near_field);
        }
        const std::array<Vec3, 3> vx{px.v[permt[0]], px.v[permt[1]], px.v[permt[2]]};
        const std::array<Vec3, 3> vy{py.v[perms[0]], py.v[perms[1]], py.v[perms[2]]};
        LocalBlocks lb;
        accumulate_pair(px, py, vx, vy, *rule, lb);
        scatter(ops, t, s, px, py, lb);
      }
    }
  };

  if (nchunk == 1) {
    run_chunk(0, 0, nT);
  } else {
    std::vector<std::thread> workers;
    const int per = (nT + nchunk - 1) / nchunk;
    for (int c = 0; c < nchunk; ++c)
      workers.emplace_back(run_chunk, c, std::min(nT, c * per), std::min(nT, (c + 1) * per));
    for (auto& w : workers) w.join();
  }

  // Deterministic reduction in chunk order.
  BemOperators& ops = partials[0];
  for (int c = 1; c < nchunk; ++c) {
    const BemOperators& p = partials[c];
    ops.Vs_kt += p.Vs_kt; ops.W += p.W; ops.Wt += p.Wt; ops.Vv += p.Vv; ops.Vdp += p.Vdp;
    ops.C += p.C; ops.Ct += p.Ct; ops.Cn += p.Cn; ops.Kp += p.Kp; ops.Kd += p.Kd;
    ops.Bn += p.Bn; ops.Ht += p.Ht; ops.Nt += p.Nt; ops.Nn += p.Nn;
    ops.Vs0 += p.Vs0; ops.Vv0 += p.Vv0; ops.W0 += p.W0;
  }
  return std::move(partials[0]);
}

RMatrix CalderonBlocks::D_DN() const {
  RMatrix D = RMatrix::Zero(dim_HN(), dim_HD());
  D.topLeftCorner(n_edge, n_edge) = grams.pair_tau;
  D.bottomRightCorner(n_tri, n_p1) = grams.pair_scalar.transpose();
  return D;
}

RMatrix CalderonBlocks::D_ND() const {
  RMatrix D = RMatrix::Zero(dim_HD(), dim_HN());
  D.topLeftCorner(n_edge, n_edge) = grams.pair_tau.transpose();
  D.bottomRightCorner(n_p1, n_tri) = grams.pair_scalar;
  return D;
}

CMatrix CalderonBlocks::full_A() const {
  const int nD = dim_HD(), nN = dim_HN();
  CMatrix A = CMatrix::Zero(nD + nN, nD + nN);
  A.topLeftCorner(nN, nD) = ADD;
  A.topRightCorner(nN, nN) = AND_;
  A.bottomLeftCorner(nD, nD) = ADN;
  A.bottomRightCorner(nD, nN) = ANN;
  return A;
}

RMatrix CalderonBlocks::full_D() const {
  const int nD = dim_HD(), nN = dim_HN();
  RMatrix D = RMatrix::Zero(nD + nN, nD + nN);
  D.topLeftCorner(nN, nD) = D_DN();
  D.bottomRightCorner(nD, nN) = D_ND();
  return D;
}

CalderonBlocks assemble_calderon(const BemOperators& ops, const KernelEval& ker, const BoundarySpaces& sp,
                                 const CalderonOptions& opt) {
  const int nE = sp.n_edges(), nT = sp.n_tris(), nP1 = sp.n_p1();
  const Complex k2 = ker.ctx().kappa2;
  CalderonBlocks cb;
  cb.n_edge = nE;
  cb.n_tri = nT;
  cb.n_p1 = nP1;
  cb.grams = duality_grams(sp);

  // A^NN = {T_N}.SL on H_N, tested by H_D = (n x rho, P1).
  cb.ANN = CMatrix::Zero(nE + nP1, nE + nT);
  cb.ANN.topLeftCorner(nE, nE) = -ops.C;
  cb.ANN.bottomLeftCorner(nP1, nE) = -ops.Bn - (opt.drop_Htilde ? CMatrix::Zero(nP1, nE) : ops.Ht);
  cb.ANN.bottomRightCorner(nP1, nT) = ops.Kp;

  // A^DN = {T_N}.DL on H_D, tested by H_D.
  cb.ADN = CMatrix::Zero(nE + nP1, nE + nP1);
  cb.ADN.topLeftCorner(nE, nE) = -ops.W + k2 * ops.Vv;
  cb.ADN.topRightCorner(nE, nP1) = ops.Ct;
  cb.ADN.bottomLeftCorner(nP1, nE) = ops.Cn;
  cb.ADN.bottomRightCorner(nP1, nP1) = ops.Nn;

  // A^DD = {T_D}.DL on H_D, tested by H_N = (rho, P0).
  cb.ADD = CMatrix::Zero(nE + nT, nE + nP1);
  cb.ADD.topLeftCorner(nE, nE) = ops.C;
  cb.ADD.topRightCorner(nE, nP1) = ops.Nt;
  cb.ADD.bottomRightCorner(nT, nP1) = ops.Kd;

  // A^ND = {T_D}.SL on H_N, tested by H_N.
  cb.AND_ = CMatrix::Zero(nE + nT, nE + nT);
  cb.AND_.topLeftCorner(nE, nE) = -ops.Vv + ops.Wt;
  cb.AND_.topRightCorner(nE, nT) = -ops.Vdp;
  cb.AND_.bottomLeftCorner(nT, nE) = -ops.Vdp.transpose();
  cb.AND_.bottomRightCorner(nT, nT) = -k2 * ops.Vs_kt;

  return cb;
}

CalderonBlocks assemble_calderon(const KernelEval& ker, const BoundarySpaces& sp, const PanelQuadrature& quad,
                                 int threads, const CalderonOptions& opt) {
  const BemOperators ops = assemble_primitive_ops(ker, sp, quad, threads);
  return assemble_calderon(ops, ker, sp, opt);
}

}  // namespace hodge
