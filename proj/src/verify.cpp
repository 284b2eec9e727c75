// SPDX-License-Identifier: Apache-2.0
#include "hodge/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hodge/quadrature.hpp"

namespace hodge {

namespace {

// Radial Helmholtz kernel derivatives for the point-source fields.
Complex G_val(Complex nu, double r) { return std::exp(I_UNIT * nu * r) / (4.0 * M_PI * r); }
Complex G_d1(Complex nu, double r) { return (I_UNIT * nu - 1.0 / r) * G_val(nu, r); }
Complex G_d2(Complex nu, double r) {
  const Complex a = I_UNIT * nu - 1.0 / r;
  return (a * a + 1.0 / (r * r)) * G_val(nu, r);
}

CMat3 hess_G(Complex nu, const Vec3& d) {
  const double r = d.norm();
  const Vec3 u = d / r;
  const Mat3 uu = u * u.transpose();
  return G_d2(nu, r) * uu.cast<Complex>() + (G_d1(nu, r) / r) * (Mat3::Identity() - uu).cast<Complex>();
}

}  // namespace

CVec3 PointSourceField::value(const Vec3& x) const {
  CVec3 v = CVec3::Zero();
  if (use_grad) v += KernelEval::eval_gradG(ctx.kappa_tilde, x - x_grad);
  if (use_curl) v += ccross(KernelEval::eval_gradG(ctx.kappa, x - x_curl), c);
  return v;
}

CVec3 PointSourceField::curl(const Vec3& x) const {
  CVec3 v = CVec3::Zero();
  if (use_curl) {
    // curl curl (G c) = grad(grad G . c) + kappa^2 G c
    const Vec3 d = x - x_curl;
    v += hess_G(ctx.kappa, d) * c + ctx.kappa2 * G_val(ctx.kappa, d.norm()) * c;
  }
  return v;
}

Complex PointSourceField::div(const Vec3& x) const {
  if (!use_grad) return 0.0;
  const Complex kt2 = ctx.kappa_tilde * ctx.kappa_tilde;
  return -kt2 * G_val(ctx.kappa_tilde, (x - x_grad).norm());
}

Complex PointSourceField::pressure(const Vec3& x, Complex eps) const { return -eps * div(x); }

CVec3 PointSourceField::grad_pressure(const Vec3& x, Complex eps) const {
  if (!use_grad) return CVec3::Zero();
  const Complex kt2 = ctx.kappa_tilde * ctx.kappa_tilde;
  return (eps * kt2) * KernelEval::eval_gradG(ctx.kappa_tilde, x - x_grad);
}

double hminus_half_norm(const CVector& a, const RMatrix& V0) {
  if (a.size() == 0) return 0.0;
  const Complex s = a.dot(V0.cast<Complex>() * a);  // a^H V0 a
  const double scale = a.squaredNorm() * V0.cwiseAbs().maxCoeff();
  if (s.real() < -1e-12 * (1.0 + scale))
    throw std::runtime_error("hminus_half_norm: negative quadratic form, single-layer Gram is broken");
  return std::sqrt(std::max(0.0, s.real()));
}

bool IdentityReport::all_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

const IdentityEntry* IdentityReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

namespace {

// ---------------------------------------------------------------------------
// trace interpolation of an evaluated field (offset from the surface)

struct OffsetGeometry {
  std::vector<Vec3> edge_normal;    // averaged normals at edges
  std::vector<Vec3> vertex_normal;  // area-weighted normals at P1 vertices
};

OffsetGeometry offset_geometry(const BoundarySpaces& sp) {
  const auto& b = *sp.bnd;
  OffsetGeometry g;
  g.edge_normal.assign(sp.n_edges(), Vec3::Zero());
  g.vertex_normal.assign(sp.n_p1(), Vec3::Zero());
  for (int t = 0; t < sp.n_tris(); ++t) {
    for (int le = 0; le < 3; ++le) g.edge_normal[sp.tri_edges[t][le]] += b.areas[t] * b.normals[t];
    for (int k = 0; k < 3; ++k) g.vertex_normal[sp.vertex_to_p1[b.tris[t][k]]] += b.areas[t] * b.normals[t];
  }
  for (auto& n : g.edge_normal) n.normalize();
  for (auto& n : g.vertex_normal) n.normalize();
  return g;
}

struct CompoundTraces {
  CVector p, q;    // T_N = (gamma_R, gamma_n)
  CVector eta, xi; // T_D = (gamma_t, eta gamma_D)
};

// One-sided compound traces of an off-surface field, sampled at x + shift*n.
CompoundTraces traces_at_offset(const BoundarySpaces& sp, const OffsetGeometry& og,
                                const std::function<FieldEval(const Vec3&)>& field, double shift, double eta_coef) {
  const auto& b = *sp.bnd;
  CompoundTraces tr;
  tr.p = CVector::Zero(sp.n_edges());
  tr.eta = CVector::Zero(sp.n_edges());
  tr.q = CVector::Zero(sp.n_tris());
  tr.xi = CVector::Zero(sp.n_p1());

  const GaussRule1D g1 = gauss_legendre_01(3);
  for (int e = 0; e < sp.n_edges(); ++e) {
    const Vec3 a = b.vertices[sp.edges[e][0]], bb = b.vertices[sp.edges[e][1]];
    const Vec3 off = shift * og.edge_normal[e];
    Complex circ_val = 0.0, circ_curl = 0.0;
    for (std::size_t k = 0; k < g1.x.size(); ++k) {
      const FieldEval f = field(a + off + g1.x[k] * (bb - a));
      circ_val += g1.w[k] * cdot(f.value, bb - a);
      circ_curl += g1.w[k] * cdot(f.curl, bb - a);
    }
    tr.eta[e] = circ_val;    // gamma_t dofs: tangential circulations
    tr.p[e] = -circ_curl;    // gamma_R dofs: flux of -gamma_tau(curl)
  }
  const auto rule = tri_rule(2);
  for (int t = 0; t < sp.n_tris(); ++t) {
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    const Vec3 off = shift * b.normals[t];
    Complex mean = 0.0;
    for (const auto& q : rule) {
      const FieldEval f = field(v0 + off + q.u * (v1 - v0) + q.v * (v2 - v0));
      mean += q.w * cdot(f.value, b.normals[t]);
    }
    tr.q[t] = 2.0 * mean;  // panel mean of F.n
  }
  for (int k = 0; k < sp.n_p1(); ++k) {
    const FieldEval f = field(b.vertices[sp.p1_vertices[k]] + shift * og.vertex_normal[k]);
    tr.xi[k] = eta_coef * f.div;  // eta gamma_D at vertices
  }
  return tr;
}

CompoundTraces richardson(const CompoundTraces& td, const CompoundTraces& t2d) {
  CompoundTraces r;
  r.p = 2.0 * td.p - t2d.p;
  r.q = 2.0 * td.q - t2d.q;
  r.eta = 2.0 * td.eta - t2d.eta;
  r.xi = 2.0 * td.xi - t2d.xi;
  return r;
}

CVector random_cvector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(u(rng), u(rng));
  return v;
}

double mass_norm(const CVector& a, const RSparse& M) {
  const Complex s = a.dot(M.cast<Complex>() * a);
  return std::sqrt(std::max(0.0, s.real()));
}

}  // namespace

JumpResiduals jump_relation_residuals(const BoundarySpaces& sp, const KernelEval& ker, const BoundaryMass& mass,
                                      const RMatrix& Vv0, const RMatrix& Vs0, unsigned seed, const Sabotage& sab) {
  std::mt19937 rng(seed);
  const CVector p = random_cvector(sp.n_edges(), rng);
  const CVector q = random_cvector(sp.n_tris(), rng);
  const CVector eta = random_cvector(sp.n_edges(), rng);
  const CVector xi = random_cvector(sp.n_p1(), rng);

  const PotentialEvaluator pot(sp, ker);
  const OffsetGeometry og = offset_geometry(sp);
  const double h = sp.bnd->max_diameter();
  const double delta = std::min(h * h, 0.4 * h);
  const double etac = ker.ctx().eta;

  auto SL = [&](const Vec3& x) { return pot.eval_SL(p, q, x); };
  auto DL = [&](const Vec3& x) { return pot.eval_DL(eta, xi, x); };

  auto sided = [&](const std::function<FieldEval(const Vec3&)>& f, double sign) {
    const CompoundTraces td = traces_at_offset(sp, og, f, sign * delta, etac);
    const CompoundTraces t2d = traces_at_offset(sp, og, f, sign * 2.0 * delta, etac);
    return richardson(td, t2d);
  };

  const CompoundTraces sl_in = sided(SL, -1.0), sl_ex = sided(SL, +1.0);
  const CompoundTraces dl_in = sided(DL, -1.0), dl_ex = sided(DL, +1.0);

  const double jump_sign = sab.flip_jump_sign ? -1.0 : 1.0;
  auto jump = [&](const CompoundTraces& in, const CompoundTraces& ex) {
    CompoundTraces j;
    j.p = jump_sign * (in.p - ex.p);
    j.q = jump_sign * (in.q - ex.q);
    j.eta = jump_sign * (in.eta - ex.eta);
    j.xi = jump_sign * (in.xi - ex.xi);
    return j;
  };
  const CompoundTraces jsl = jump(sl_in, sl_ex), jdl = jump(dl_in, dl_ex);

  auto norm_N = [&](const CVector& a, const CVector& b) {
    const double n1 = hminus_half_norm(a, Vv0), n2 = hminus_half_norm(b, Vs0);
    return std::sqrt(n1 * n1 + n2 * n2);
  };
  auto norm_D = [&](const CVector& a, const CVector& b) {
    const double n1 = mass_norm(a, mass.rwg), n2 = mass_norm(b, mass.p1);
    return std::sqrt(n1 * n1 + n2 * n2);
  };

  JumpResiduals res;
  // [T_D] SL = 0, relative to the one-sided trace magnitude
  res.TD_SL = norm_D(jsl.eta, jsl.xi) /
              std::max({norm_D(sl_in.eta, sl_in.xi), norm_D(sl_ex.eta, sl_ex.xi), 1e-300});
  // [T_N] SL = (p, q)
  res.TN_SL = norm_N(jsl.p - p, jsl.q - q) / norm_N(p, q);
  // [T_N] DL = 0
  res.TN_DL = norm_N(jdl.p, jdl.q) /
              std::max({norm_N(dl_in.p, dl_in.q), norm_N(dl_ex.p, dl_ex.q), 1e-300});
  // [T_D] DL = (eta, xi)
  res.TD_DL = norm_D(jdl.eta - eta, jdl.xi - xi) / norm_D(eta, xi);
  return res;
}

namespace {

// Mass-weighted pseudo-inverse recovery for the rectangular duality Grams.
struct DualityRecovery {
  RMatrix RD;  // moments on H_N tests -> H_D coefficients
  RMatrix RN;  // moments on H_D tests -> H_N coefficients
};

DualityRecovery make_recovery(const CalderonBlocks& cb, const BoundaryMass& mass) {
  const int nE = cb.n_edge, nT = cb.n_tri, nV = cb.n_p1;
  RMatrix MN = RMatrix::Zero(nE + nT, nE + nT);
  MN.topLeftCorner(nE, nE) = RMatrix(mass.rwg);
  MN.bottomRightCorner(nT, nT) = RMatrix(mass.p0);
  const RMatrix D_DN = cb.D_DN();  // (E+T) x (E+V)
  const RMatrix D_ND = cb.D_ND();  // (E+V) x (E+T)

  DualityRecovery rec;
  // c_D = argmin || D_DN c - y ||_{MN^-1}
  const RMatrix MNinv_DDN = MN.llt().solve(D_DN);
  rec.RD = (D_DN.transpose() * MNinv_DDN).ldlt().solve(MNinv_DDN.transpose());
  // c_N = MN^-1 D_ND^T (D_ND MN^-1 D_ND^T)^-1 y  (min-MN-norm interpolant)
  const RMatrix MNinv_DNDt = MN.llt().solve(D_ND.transpose());
  rec.RN = MNinv_DNDt * (D_ND * MNinv_DNDt).ldlt().solve(RMatrix::Identity(nE + nV, nE + nV));
  return rec;
}

// Gram-weighted operator 2-norm by power iteration on M^-1 X^H M X.
double weighted_norm(const CMatrix& X, const RMatrix& M, int iters = 60) {
  const Eigen::LLT<CMatrix> llt(CMatrix(M.cast<Complex>()));
  CVector v = CVector::Ones(X.cols());
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    const CVector w = X * v;
    const CVector mw = M.cast<Complex>() * w;
    const double num = std::max(0.0, w.dot(mw).real());
    const CVector mv = M.cast<Complex>() * v;
    const double den = std::max(1e-300, v.dot(mv).real());
    const double nl = num / den;
    CVector next = llt.solve((X.adjoint() * mw).eval());
    next.normalize();
    if (it > 4 && std::abs(nl - lam) < 1e-8 * std::max(1.0, nl)) {
      lam = nl;
      break;
    }
    lam = nl;
    v = next;
  }
  return std::sqrt(std::max(0.0, lam));
}

RMatrix coefficient_gram(const CalderonBlocks& cb, const BoundaryMass& mass) {
  const int nE = cb.n_edge, nT = cb.n_tri, nV = cb.n_p1;
  const int n = (nE + nV) + (nE + nT);
  RMatrix M = RMatrix::Zero(n, n);
  M.block(0, 0, nE, nE) = RMatrix(mass.rwg);
  M.block(nE, nE, nV, nV) = RMatrix(mass.p1);
  M.block(nE + nV, nE + nV, nE, nE) = RMatrix(mass.rwg);
  M.block(2 * nE + nV, 2 * nE + nV, nT, nT) = RMatrix(mass.p0);
  return M;
}

}  // namespace

double calderon_projector_residual(const CalderonBlocks& cb, const BoundaryMass& mass) {
  const DualityRecovery rec = make_recovery(cb, mass);
  const int nD = cb.dim_HD(), nN = cb.dim_HN();
  const CMatrix A = cb.full_A();
  CMatrix Q(nD + nN, nD + nN);
  Q.topRows(nD) = rec.RD.cast<Complex>() * A.topRows(nN);
  Q.bottomRows(nN) = rec.RN.cast<Complex>() * A.bottomRows(nD);
  const CMatrix X = Q * Q - 0.25 * CMatrix::Identity(nD + nN, nD + nN);
  return weighted_norm(X, coefficient_gram(cb, mass));
}

namespace {

// Interpolate the compound traces of an exact field into the discrete spaces.
void interpolate_cauchy(const BoundarySpaces& sp, const PointSourceField& f, double eta, CVector& eta_c,
                        CVector& xi_c, CVector& p_c, CVector& q_c) {
  eta_c = sp.interpolate_curl([&](const Vec3& x) { return f.value(x); });
  p_c = sp.interpolate_curl([&](const Vec3& x) { return CVec3(-f.curl(x)); });
  xi_c = sp.interpolate_p1([&](const Vec3& x) { return eta * f.div(x); });
  const auto& b = *sp.bnd;
  q_c = CVector::Zero(sp.n_tris());
  const auto rule = tri_rule(3);
  for (int t = 0; t < sp.n_tris(); ++t) {
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    Complex mean = 0.0;
    for (const auto& q : rule) mean += q.w * cdot(f.value(v0 + q.u * (v1 - v0) + q.v * (v2 - v0)), b.normals[t]);
    q_c[t] = 2.0 * mean;
  }
}

}  // namespace

double cauchy_annihilation_residual(const CalderonBlocks& cb, const BoundaryMass& mass, const BoundarySpaces& sp,
                                    const PointSourceField& field, bool interior) {
  CVector eta_c, xi_c, p_c, q_c;
  interpolate_cauchy(sp, field, field.ctx.eta, eta_c, xi_c, p_c, q_c);
  CVector z(cb.dim_HD() + cb.dim_HN());
  z << eta_c, xi_c, p_c, q_c;

  const CMatrix A = cb.full_A();
  const CMatrix D = cb.full_D().cast<Complex>();
  // Interior Cauchy data lies in ker(P+) = ker(1/2 Id - A);
  // exterior data in ker(P-) = ker(1/2 Id + A).
  const CVector annihilating = interior ? CVector(0.5 * (D * z) - A * z) : CVector(0.5 * (D * z) + A * z);
  const CVector passing = interior ? CVector(0.5 * (D * z) + A * z) : CVector(0.5 * (D * z) - A * z);

  // Dual (test-space) norms: M^-1-weighted moment norms.
  const int nE = cb.n_edge, nT = cb.n_tri, nV = cb.n_p1;
  RMatrix Mtest = RMatrix::Zero(cb.dim_HN() + cb.dim_HD(), cb.dim_HN() + cb.dim_HD());
  Mtest.block(0, 0, nE, nE) = RMatrix(mass.rwg);
  Mtest.block(nE, nE, nT, nT) = RMatrix(mass.p0);
  Mtest.block(nE + nT, nE + nT, nE, nE) = RMatrix(mass.rwg);
  Mtest.block(2 * nE + nT, 2 * nE + nT, nV, nV) = RMatrix(mass.p1);
  const Eigen::LLT<RMatrix> llt(Mtest);
  auto dual_norm = [&](const CVector& m) {
    const CVector re = llt.solve(m.real()).cast<Complex>() + I_UNIT * llt.solve(m.imag()).cast<Complex>();
    return std::sqrt(std::max(0.0, m.dot(re).real()));
  };
  return dual_norm(annihilating) / std::max(dual_norm(passing), 1e-300);
}

double ConvergenceReport::rate(int i, double ConvergenceRow::*field) const {
  if (i <= 0 || i >= static_cast<int>(rows.size())) return 0.0;
  const double e0 = rows[i - 1].*field, e1 = rows[i].*field;
  if (e0 <= 0.0 || e1 <= 0.0) return 0.0;
  return std::log2(e0 / e1);
}

ManufacturedProblem make_manufactured_problem(const BoundarySpaces& sp, const WaveContext& ctx) {
  ManufacturedProblem mp;
  mp.interior.ctx = ctx;
  mp.interior.x_grad = Vec3(1.9, 0.35, 0.62);
  mp.interior.x_curl = Vec3(1.9, 0.35, 0.62);
  mp.interior.c = CVec3(Complex(0.4, 0.15), Complex(-0.3, 0.0), Complex(0.55, 0.2));
  mp.exterior.ctx = ctx;
  mp.exterior.x_grad = Vec3(0.12, -0.21, 0.17);
  mp.exterior.x_curl = Vec3(0.12, -0.21, 0.17);
  mp.exterior.c = CVec3(Complex(-0.25, 0.1), Complex(0.5, -0.05), Complex(0.35, 0.0));

  const PointSourceField& Uin = mp.interior;
  const PointSourceField& Uex = mp.exterior;
  const double mu0 = ctx.mu0, eps0 = ctx.eps0, eta = ctx.eta;

  TransmissionData d;
  // g_R = mu0^-1 gamma_R(U_in) - gamma_R(U_ex): div-space dofs are the
  // negated circulations of the rotated field.
  d.g_R = sp.interpolate_curl(
      [&](const Vec3& x) { return CVec3(-(Uin.curl(x) / mu0 - Uex.curl(x))); });
  d.zeta_t = sp.interpolate_curl([&](const Vec3& x) { return CVec3(Uin.value(x) - Uex.value(x)); });
  d.zeta_D = sp.interpolate_p1([&](const Vec3& x) { return eps0 * Uin.div(x) - eta * Uex.div(x); });
  const auto& b = *sp.bnd;
  d.g_n = CVector::Zero(sp.n_tris());
  const auto rule = tri_rule(3);
  for (int t = 0; t < sp.n_tris(); ++t) {
    const auto& T = b.tris[t];
    const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
    Complex mean = 0.0;
    for (const auto& q : rule) {
      const Vec3 y = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
      mean += q.w * cdot(CVec3(eps0 * Uin.value(y) - Uex.value(y)), b.normals[t]);
    }
    d.g_n[t] = 2.0 * mean;
  }
  d.J = nullptr;
  mp.data = d;
  return mp;
}

ManufacturedLevel run_manufactured_level(int level, const WaveContext& ctx, int threads) {
  const PanelQuadrature quad;
  const MaterialField mat = MaterialField::constant(ctx.mu0, ctx.eps0);

  ManufacturedLevel L;
  L.mesh = std::make_unique<VolumeMesh>(gen_ball(level));
  L.assembly = std::make_unique<CoupledAssembly>(*L.mesh, mat, ctx, quad, threads);
  const CoupledAssembly& A = *L.assembly;
  L.sys = assemble_system(A);
  const ManufacturedProblem mp = make_manufactured_problem(*A.bsp, ctx);
  assemble_rhs(A, mp.data, L.sys);
  L.ws = std::make_unique<SolveWorkspace>();
  L.sol = solve(L.sys, A, mp.data, L.ws.get());
  const Solution& sol = L.sol;
  const VolumeMesh& mesh = *L.mesh;

  ConvergenceRow row;
  row.level = level;
  row.h = A.bnd.max_diameter();
  row.dofs = L.sys.dim();

  // interior errors by order-5 quadrature against the exact fields
  const auto rule = tet_rule(5);
  double e_l2 = 0, n_l2 = 0, e_curl = 0, n_curl = 0, e_p = 0, n_p = 0;
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& T = mesh.tets[t];
    const Vec3 v0 = mesh.vertices[T[0]];
    const TetGeometry geo(mesh, t);
    const CVec3 curl_h = A.edge->eval_curl(sol.U, static_cast<int>(t));
    const CVec3 gradP_h = A.nodal->eval_grad(sol.P, static_cast<int>(t));
    for (const auto& q : rule) {
      const Vec3 x = v0 + q.u * (mesh.vertices[T[1]] - v0) + q.v * (mesh.vertices[T[2]] - v0) +
                     q.w * (mesh.vertices[T[3]] - v0);
      const double wt = q.wt * 6.0 * geo.volume;
      const CVec3 Ue = mp.interior.value(x);
      const CVec3 Uh = A.edge->eval(sol.U, static_cast<int>(t), x);
      const CVec3 Ce = mp.interior.curl(x);
      const Complex Pe = mp.interior.pressure(x, ctx.eps0);
      const Complex Ph = A.nodal->eval(sol.P, static_cast<int>(t), x);
      const CVec3 Ge = mp.interior.grad_pressure(x, ctx.eps0);
      e_l2 += wt * (Uh - Ue).squaredNorm();
      n_l2 += wt * Ue.squaredNorm();
      e_curl += wt * (curl_h - Ce).squaredNorm();
      n_curl += wt * Ce.squaredNorm();
      e_p += wt * (std::norm(Ph - Pe) + (gradP_h - Ge).squaredNorm());
      n_p += wt * (std::norm(Pe) + Ge.squaredNorm());
    }
  }
  row.err_L2_U = std::sqrt(e_l2 / n_l2);
  row.err_Hcurl_U = std::sqrt(e_curl / std::max(n_curl, 1e-300));
  row.err_H1_P = n_p > 1e-300 ? std::sqrt(e_p / n_p) : std::sqrt(e_p);

  // exterior Neumann trace error in the -1/2 norms
  CVector eta_c, xi_c, p_ex, q_ex;
  interpolate_cauchy(*A.bsp, mp.exterior, ctx.eta, eta_c, xi_c, p_ex, q_ex);
  const double np1 = hminus_half_norm(CVector(sol.p - p_ex), A.ops.Vv0);
  const double nq1 = hminus_half_norm(CVector(sol.q - q_ex), A.ops.Vs0);
  const double npd = hminus_half_norm(p_ex, A.ops.Vv0), nqd = hminus_half_norm(q_ex, A.ops.Vs0);
  row.err_traceN = std::sqrt(np1 * np1 + nq1 * nq1) / std::sqrt(npd * npd + nqd * nqd);

  // exterior pointwise error at |x| = 3
  std::vector<Vec3> pts = {{3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {-3, 0, 0}, {0, -3, 0}, {0, 0, -3},
                           {std::sqrt(3.0), std::sqrt(3.0), std::sqrt(3.0)}};
  const EvaluationGrid grid = EvaluationGrid::tag(A.bnd, pts);
  const auto vals = eval_exterior(sol, A, grid);
  double e_ext = 0, n_ext = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const CVec3 exact = mp.exterior.value(pts[i]);
    e_ext += (vals[i] - exact).squaredNorm();
    n_ext += exact.squaredNorm();
  }
  row.err_exterior = std::sqrt(e_ext / n_ext);

  L.row = row;
  return L;
}

ConvergenceReport manufactured_transmission(const std::vector<int>& levels, const WaveContext& ctx, int threads) {
  ConvergenceReport rep;
  for (int level : levels) rep.rows.push_back(run_manufactured_level(level, ctx, threads).row);
  return rep;
}

namespace {

// Block-diagonal norm Gram of the coupled trial space with sparse volume
// blocks and dense boundary blocks.
struct SystemGram {
  RSparse M_U, M_P;
  RMatrix M_p, M_q;
  Eigen::SimplicialLDLT<RSparse> ldlt_U, ldlt_P;
  Eigen::LLT<RMatrix> llt_p, llt_q;
  int nU, nP, np, nq;

  CVector apply(const CVector& x) const {
    CVector y(x.size());
    y.segment(0, nU) = M_U.cast<Complex>() * x.segment(0, nU);
    y.segment(nU, nP) = M_P.cast<Complex>() * x.segment(nU, nP);
    y.segment(nU + nP, np) = M_p.cast<Complex>() * x.segment(nU + nP, np);
    y.segment(nU + nP + np, nq) = M_q.cast<Complex>() * x.segment(nU + nP + np, nq);
    return y;
  }
  CVector solve(const CVector& x) const {
    CVector y(x.size());
    auto solve_block = [](const auto& slv, const CVector& v) {
      return CVector(slv.solve(v.real().eval()).template cast<Complex>() +
                     I_UNIT * slv.solve(v.imag().eval()).template cast<Complex>());
    };
    y.segment(0, nU) = solve_block(ldlt_U, x.segment(0, nU));
    y.segment(nU, nP) = solve_block(ldlt_P, x.segment(nU, nP));
    y.segment(nU + nP, np) = solve_block(llt_p, x.segment(nU + nP, np));
    y.segment(nU + nP + np, nq) = solve_block(llt_q, x.segment(nU + nP + np, nq));
    return y;
  }
};

void init_system_gram(SystemGram& g, const CoupledAssembly& A, const CoupledSystem& sys) {
  g.nU = sys.nU;
  g.nP = sys.nP;
  g.np = sys.np;
  g.nq = sys.nq;
  const MaterialField unit = MaterialField::constant(1.0, 1.0);
  const WaveContext unit_ctx(0.0, 1.0, 1.0);
  const VolumeForms vf = assemble_volume_form(*A.mesh, *A.edge, *A.nodal, unit, unit_ctx);
  g.M_U = RSparse(vf.A_cc.real()) + RSparse(vf.M_eps.real());
  g.M_P = assemble_nodal_stiffness(*A.mesh, *A.nodal) + RSparse(vf.M_P.real());
  g.M_p = A.ops.Vv0 + A.ops.W0;
  g.M_q = A.ops.Vs0;
  g.ldlt_U.compute(g.M_U);
  g.ldlt_P.compute(g.M_P);
  g.llt_p.compute(g.M_p);
  g.llt_q.compute(g.M_q);
  if (g.ldlt_U.info() != Eigen::Success || g.ldlt_P.info() != Eigen::Success)
    throw std::runtime_error("estimate_infsup: norm Gram factorization failed");
}

}  // namespace

RMatrix system_norm_gram(const CoupledAssembly& A, const CoupledSystem& sys) {
  SystemGram g;
  init_system_gram(g, A, sys);
  RMatrix M = RMatrix::Zero(sys.dim(), sys.dim());
  M.block(0, 0, g.nU, g.nU) = RMatrix(g.M_U);
  M.block(g.nU, g.nU, g.nP, g.nP) = RMatrix(g.M_P);
  M.block(g.nU + g.nP, g.nU + g.nP, g.np, g.np) = g.M_p;
  M.block(g.nU + g.nP + g.np, g.nU + g.nP + g.np, g.nq, g.nq) = g.M_q;
  return M;
}

double estimate_infsup(const CoupledAssembly& A, const CoupledSystem& sys, SolveWorkspace& ws) {
  if (!ws.factored) {
    ws.lu.compute(sys.G);
    ws.factored = true;
  }
  SystemGram M;
  init_system_gram(M, A, sys);
  const int n = sys.dim();
  std::mt19937 rng(20240u);
  CVector x = random_cvector(n, rng);
  x.normalize();
  double sigma2 = 0.0;
  for (int it = 0; it < 80; ++it) {
    // inverse iteration on the pencil (G^H M^-1 G, M)
    const CVector y = M.apply(x);
    const CVector u = ws.lu.adjoint().solve(y);
    const CVector v = M.apply(u);
    CVector xn = ws.lu.solve(v);
    xn /= xn.norm();
    const CVector w = sys.G * xn;
    const CVector t = M.solve(w);
    const double num = std::max(0.0, w.dot(t).real());
    const CVector mx = M.apply(xn);
    const double den = std::max(1e-300, xn.dot(mx).real());
    const double s2 = num / den;
    if (it > 6 && std::abs(s2 - sigma2) < 1e-9 * std::max(sigma2, 1e-30)) {
      sigma2 = s2;
      break;
    }
    sigma2 = s2;
    x = xn;
  }
  return std::sqrt(sigma2);
}

std::vector<double> resonance_sweep(const VolumeMesh& mesh, double eta, const std::vector<double>& kappa2_grid,
                                    const PanelQuadrature& quad, int threads) {
  std::vector<double> conds;
  conds.reserve(kappa2_grid.size());
  const MaterialField mat = MaterialField::constant(eta, 1.0);  // mu0 = eta, eps0 = 1
  for (double k2 : kappa2_grid) {
    const WaveContext ctx = WaveContext::from_kappa2(Complex(k2, 0.0), eta);
    const CoupledAssembly A(mesh, mat, ctx, quad, threads);
    CoupledSystem sys = assemble_system(A);
    const TransmissionData zero = TransmissionData::zero(*A.bsp);
    const Solution sol = solve(sys, A, zero);
    conds.push_back(sol.condition_estimate);
  }
  return conds;
}

IdentityReport potential_identity_report(const WaveContext& ctx, const BoundarySpaces& sp) {
  IdentityReport rep;
  auto add = [&rep](const std::string& name, double residual, double tol) {
    rep.entries.push_back({name, residual, tol, residual < tol});
  };
  const KernelEval ker(ctx);

  std::mt19937 rng(777u);
  const CVector pr = random_cvector(sp.n_edges(), rng);
  const CVector qr = random_cvector(sp.n_tris(), rng);
  const CVector etar = random_cvector(sp.n_edges(), rng);
  const CVector xir = random_cvector(sp.n_p1(), rng);
  const PotentialEvaluator pot(sp, ker);
  const RSparse Dg = surface_div(sp);
  const CVector divp = Dg.cast<Complex>() * pr;

  std::vector<Vec3> far_pts;
  {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (far_pts.size() < 10) {
      Vec3 x(u(rng), u(rng), u(rng));
      x.normalize();
      far_pts.push_back((2.5 + 0.8 * std::abs(u(rng))) * x);
    }
  }

  {
    // div Psi_nu(p) = psi_nu(div_G p), FD divergence vs direct evaluation
    const Complex nu = ctx.kappa;
    double worst = 0.0;
    const double hfd = 1e-4;
    for (const auto& x : far_pts) {
      Complex div_fd = 0.0;
      for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = hfd;
        div_fd += (pot.vector_SL(pr, nu, x + e)[k] - pot.vector_SL(pr, nu, x - e)[k]) / (2.0 * hfd);
      }
      const Complex rhs = pot.scalar_SL(divp, nu, x);
      worst = std::max(worst, std::abs(div_fd - rhs) / std::max(std::abs(rhs), 1e-14));
    }
    add("div_vectorSL_identity", worst, 1e-6);
  }
  {
    // curl Upsilon(xi) = curl Psi(xi n), FD curls of both
    double worst = 0.0;
    const double hfd = 1e-4;
    const auto& b = *sp.bnd;
    auto psi_xin = [&](const Vec3& x) {
      CVec3 acc = CVec3::Zero();
      const auto rule = tri_rule(5);
      for (int t = 0; t < sp.n_tris(); ++t) {
        const auto& T = b.tris[t];
        const Vec3 v0 = b.vertices[T[0]], v1 = b.vertices[T[1]], v2 = b.vertices[T[2]];
        CVec3 a = CVec3::Zero();
        for (const auto& q : rule) {
          const Vec3 y = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
          a += (q.w * sp.eval_p1(xir, t, y) * KernelEval::eval_G(ctx.kappa, x - y)) * b.normals[t].cast<Complex>();
        }
        acc += 2.0 * b.areas[t] * a;
      }
      return acc;
    };
    auto fd_curl = [&](const std::function<CVec3(const Vec3&)>& f, const Vec3& x) {
      CVec3 c;
      std::array<CVec3, 3> dp, dm;
      for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = hfd;
        dp[k] = f(x + e);
        dm[k] = f(x - e);
      }
      auto d = [&](int comp, int dir) { return (dp[dir][comp] - dm[dir][comp]) / (2.0 * hfd); };
      c[0] = d(2, 1) - d(1, 2);
      c[1] = d(0, 2) - d(2, 0);
      c[2] = d(1, 0) - d(0, 1);
      return c;
    };
    for (const auto& x : far_pts) {
      const CVec3 lhs = fd_curl([&](const Vec3& y) { return pot.Upsilon(xir, y); }, x);
      const CVec3 rhs = fd_curl(psi_xin, x);
      worst = std::max(worst, (lhs - rhs).norm() / std::max(rhs.norm(), 1e-14));
    }
    add("curl_Upsilon_identity", worst, 1e-6);
  }

  // PDE residuals: curl curl F - eta grad div F - kappa^2 F with analytic
  // first derivatives and 4th-order FD outer derivatives.
  auto pde_residual = [&](const std::function<FieldEval(const Vec3&)>& f) {
    const double hfd = 0.02;
    const double c4[4] = {8.0 / 12.0, -1.0 / 12.0, 0, 0};
    double worst = 0.0;
    for (const auto& x : far_pts) {
      CVec3 curlcurl = CVec3::Zero(), graddiv = CVec3::Zero();
      for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = hfd;
        CVec3 dcurl = CVec3::Zero();
        Complex ddiv = 0.0;
        for (int s = 1; s <= 2; ++s) {
          const FieldEval fp = f(x + double(s) * e), fm = f(x - double(s) * e);
          dcurl += (c4[s - 1] / hfd) * (fp.curl - fm.curl);
          ddiv += (c4[s - 1] / hfd) * (fp.div - fm.div);
        }
        graddiv[k] = ddiv;
        if (k == 0) {
          curlcurl[1] += -dcurl[2];
          curlcurl[2] += dcurl[1];
        } else if (k == 1) {
          curlcurl[0] += dcurl[2];
          curlcurl[2] += -dcurl[0];
        } else {
          curlcurl[0] += -dcurl[1];
          curlcurl[1] += dcurl[0];
        }
      }
      const FieldEval f0 = f(x);
      const CVec3 resid = curlcurl - ctx.eta * graddiv - ctx.kappa2 * f0.value;
      const double scale = std::max({curlcurl.norm(), (ctx.eta * graddiv).norm(),
                                     (ctx.kappa2 * f0.value).norm(), 1e-12});
      worst = std::max(worst, resid.norm() / scale);
    }
    return worst;
  };
  add("SL_pde_residual", pde_residual([&](const Vec3& x) { return pot.eval_SL(pr, qr, x); }), 1e-5);
  add("DL_pde_residual", pde_residual([&](const Vec3& x) { return pot.eval_DL(etar, xir, x); }), 1e-5);
  return rep;
}

IdentityReport run_identity_suite(const WaveContext& ctx, const VolumeMesh& mesh, const Sabotage& sab,
                                  int threads) {
  IdentityReport rep;
  auto add = [&rep](const std::string& name, double residual, double tol) {
    rep.entries.push_back({name, residual, tol, residual < tol});
  };

  BoundaryMesh bnd = extract_boundary(mesh);
  if (sab.flip_orientation) bnd.flip_orientation();
  const BoundarySpaces sp(bnd);
  const KernelEval ker(ctx);
  const PanelQuadrature quad;
  const BoundaryMass mass = boundary_mass(sp);

  // --- surface calculus ---------------------------------------------------
  {
    const RSparse dg = surface_div(sp);
    const RSparse cg = surface_curl(sp);
    const RMatrix prod = RMatrix(dg) * RMatrix(cg);
    add("div_curl_zero", prod.cwiseAbs().maxCoeff(), 1e-12);
  }
  {
    double worst = 0.0;
    const auto rule = tri_rule(2);
    for (int t = 0; t < sp.n_tris(); ++t) {
      const auto& T = bnd.tris[t];
      const Vec3 v0 = bnd.vertices[T[0]], v1 = bnd.vertices[T[1]], v2 = bnd.vertices[T[2]];
      for (const auto& q : rule) {
        const Vec3 x = v0 + q.u * (v1 - v0) + q.v * (v2 - v0);
        for (int le = 0; le < 3; ++le) {
          const Vec3 w = sp.rwg_rotated(t, le, x);
          const Vec3 r = sp.rwg(t, le, x);
          worst = std::max(worst, (w - bnd.normals[t].cross(r)).norm());
        }
      }
    }
    add("rotation_consistency", worst, 1e-13);
  }
  {
    const DualityGrams dg = duality_grams(sp);
    add("tau_self_pairing_zero", dg.pair_tau.diagonal().cwiseAbs().maxCoeff(), 1e-13);
    const RVector ones_t = RVector::Ones(sp.n_tris());
    const RVector ones_v = RVector::Ones(sp.n_p1());
    add("scalar_pairing_total_area", std::abs(ones_v.dot(dg.pair_scalar * ones_t) - bnd.total_area()),
        1e-12 * bnd.total_area());
  }

  // --- kernel branch consistency -------------------------------------------
  {
    double worst = 0.0;
    if (std::abs(ctx.kappa) > 0.0 && std::abs(ctx.kappa - ctx.kappa_tilde) > 0.0) {
      for (double f = 0.5; f <= 1.5; f += 0.125) {
        const double r = f * ker.series_threshold() / std::abs(ctx.kappa);
        const KernelEval lo(ctx, 1e9, 16);   // force series
        const KernelEval hi(ctx, 1e-12, 16); // force closed form
        for (int mode = 0; mode < 3; ++mode) {
          const Complex a = mode == 0 ? lo.gtilde_reduced(r) : (mode == 1 ? lo.gtilde_d1(r) : lo.gtilde_d2(r));
          const Complex b = mode == 0 ? hi.gtilde_reduced(r) : (mode == 1 ? hi.gtilde_d1(r) : hi.gtilde_d2(r));
          const double scale = std::max(std::abs(a), std::abs(b));
          if (scale > 0) worst = std::max(worst, std::abs(a - b) / scale);
        }
      }
    }
    add("kernel_branch_consistency", worst, 1e-11);
  }

  // --- potential identities at far points ----------------------------------
  {
    const IdentityReport pot_rep = potential_identity_report(ctx, sp);
    for (const auto& e : pot_rep.entries) rep.entries.push_back(e);
  }

  // --- jump relations -------------------------------------------------------
  {
    const BemOperators ops0 = assemble_primitive_ops(ker, sp, quad, threads);
    const JumpResiduals jr = jump_relation_residuals(sp, ker, mass, ops0.Vv0, ops0.Vs0, 4242u, sab);
    add("jump_TD_SL", jr.TD_SL, 5e-2);
    add("jump_TN_SL", jr.TN_SL, 5e-2);
    add("jump_TN_DL", jr.TN_DL, 5e-2);
    add("jump_TD_DL", jr.TD_DL, 5e-2);

    // --- two-last-terms matrix identity ------------------------------------
    {
      const CMatrix lhs = ops0.Nt;
      const CMatrix rhs = ops0.Bn.transpose() + (sab.drop_Htilde ? CMatrix::Zero(sp.n_edges(), sp.n_p1())
                                                                 : CMatrix(ops0.Ht.transpose()));
      std::mt19937 rng2(99u);
      double worst = 0.0;
      for (int trial = 0; trial < 3; ++trial) {
        const CVector v = random_cvector(sp.n_p1(), rng2);
        const double num = ((lhs - rhs) * v).norm();
        const double den = std::max((lhs * v).norm(), (rhs * v).norm());
        worst = std::max(worst, num / std::max(den, 1e-300));
      }
      add("two_last_terms", worst, 1e-8);
    }

    // --- Calderon projector -------------------------------------------------
    {
      const CalderonOptions copt{sab.drop_Htilde};
      const CalderonBlocks cb = assemble_calderon(ops0, ker, sp, copt);
      add("calderon_projector", calderon_projector_residual(cb, mass), 0.15);

      PointSourceField inner;
      inner.ctx = ctx;
      inner.x_grad = inner.x_curl = Vec3(1.8, 0.4, 0.7);  // outside the unit ball
      inner.c = CVec3(Complex(0.3, 0.1), Complex(-0.45, 0.2), Complex(0.25, 0.0));
      add("valid_cauchy_interior", cauchy_annihilation_residual(cb, mass, sp, inner, true), 0.15);

      PointSourceField outer;
      outer.ctx = ctx;
      outer.x_grad = outer.x_curl = Vec3(0.15, -0.18, 0.12);
      outer.c = CVec3(Complex(0.2, -0.1), Complex(0.4, 0.05), Complex(-0.3, 0.15));
      add("valid_cauchy_exterior", cauchy_annihilation_residual(cb, mass, sp, outer, false), 0.15);
    }
  }

  return rep;
}

}  // namespace hodge
