// SPDX-License-Identifier: Apache-2.0
#include "hodge/coupling.hpp"

#include <stdexcept>

namespace hodge {

TransmissionData TransmissionData::zero(const BoundarySpaces& sp) {
  TransmissionData d;
  d.g_R = CVector::Zero(sp.n_edges());
  d.g_n = CVector::Zero(sp.n_tris());
  d.zeta_D = CVector::Zero(sp.n_p1());
  d.zeta_t = CVector::Zero(sp.n_edges());
  return d;
}

CVector CoupledSystem::rhs() const {
  CVector b(dim());
  b.segment(0, nU + nP) = rhs_F;
  b.segment(offset_p(), np + nq) = rhs_R;
  return b;
}

CoupledAssembly::CoupledAssembly(const VolumeMesh& m, const MaterialField& mat_, const WaveContext& ctx_,
                                 const PanelQuadrature& quad, int threads)
    : mesh(&m), ctx(ctx_), mat(mat_) {
  bnd = extract_boundary(m);
  edge.emplace(m);
  nodal.emplace(m);
  bsp.emplace(bnd);
  R_t = trace_tangential(*edge, *bsp);
  R_s = trace_scalar(*nodal, *bsp);
  R_t_c = R_t.cast<Complex>();
  R_s_c = R_s.cast<Complex>();
  vforms = assemble_volume_form(m, *edge, *nodal, mat, ctx);
  const KernelEval ker(ctx);
  ops = assemble_primitive_ops(ker, *bsp, quad, threads);
  blocks = assemble_calderon(ops, ker, *bsp);
}

namespace {

// Lift a boundary-block matrix into volume rows/columns through the trace
// maps. TD_test = [[R_t, 0], [0, +R_s]], TD_trial = [[R_t, 0], [0, -R_s]].
CMatrix lift_rows(const CSparse& R_t, const CSparse& R_s, const CMatrix& B, double s_sign) {
  // B has rows (n_edge + n_p1) in H_D test space; output rows (nU + nP).
  const int nE = static_cast<int>(R_t.cols()), nV = static_cast<int>(R_s.cols());
  const int nbe = static_cast<int>(R_t.rows()), nbp = static_cast<int>(R_s.rows());
  CMatrix out = CMatrix::Zero(nE + nV, B.cols());
  out.topRows(nE) = R_t.transpose() * B.topRows(nbe);
  out.bottomRows(nV) = s_sign * (R_s.transpose() * B.bottomRows(nbp));
  return out;
}

CMatrix lift_cols(const CSparse& R_t, const CSparse& R_s, const CMatrix& B, double s_sign) {
  // B has cols (n_edge + n_p1) in H_D trial space; output cols (nU + nP).
  const int nE = static_cast<int>(R_t.cols()), nV = static_cast<int>(R_s.cols());
  const int nbe = static_cast<int>(R_t.rows()), nbp = static_cast<int>(R_s.rows());
  CMatrix out = CMatrix::Zero(B.rows(), nE + nV);
  out.leftCols(nE) = B.leftCols(nbe) * R_t;
  out.rightCols(nV) = s_sign * (B.rightCols(nbp) * R_s);
  return out;
}

}  // namespace

CoupledSystem assemble_system(const CoupledAssembly& A) {
  const int nU = A.edge->dof_count(), nP = A.nodal->dof_count();
  const int np = A.bsp->n_edges(), nq = A.bsp->n_tris();

  CoupledSystem sys;
  sys.nU = nU;
  sys.nP = nP;
  sys.np = np;
  sys.nq = nq;
  sys.G = CMatrix::Zero(sys.dim(), sys.dim());

  // Volume block: B_kappa in the (U, P) x (V, Q) arrangement.
  const double w2 = A.ctx.omega * A.ctx.omega;
  sys.G.block(0, 0, nU, nU) = CMatrix(A.vforms.A_cc) - w2 * CMatrix(A.vforms.M_eps);
  sys.G.block(0, nU, nU, nP) = CMatrix(A.vforms.G_mix);
  sys.G.block(nU, 0, nP, nU) = -CMatrix(A.vforms.G_mix).transpose();
  sys.G.block(nU, nU, nP, nP) = CMatrix(A.vforms.M_P);

  // Trace-coupled blocks.
  const CMatrix D_ND = A.blocks.D_ND().cast<Complex>();
  const CMatrix D_DN = A.blocks.D_DN().cast<Complex>();

  // (1,1) += TD_test^T (-A^DN) TD_trial
  sys.G.block(0, 0, nU + nP, nU + nP) +=
      lift_rows(A.R_t_c, A.R_s_c, lift_cols(A.R_t_c, A.R_s_c, -A.blocks.ADN, -1.0), 1.0);
  // (1,2) = TD_test^T (-A^NN + 1/2 D_ND)
  sys.G.block(0, nU + nP, nU + nP, np + nq) = lift_rows(A.R_t_c, A.R_s_c, -A.blocks.ANN + 0.5 * D_ND, 1.0);
  // (2,1) = (A^DD + 1/2 D_DN) TD_trial
  sys.G.block(nU + nP, 0, np + nq, nU + nP) = lift_cols(A.R_t_c, A.R_s_c, A.blocks.ADD + 0.5 * D_DN, -1.0);
  // (2,2) = A^ND
  sys.G.block(nU + nP, nU + nP, np + nq, np + nq) = A.blocks.AND_;

  sys.rhs_F = CVector::Zero(nU + nP);
  sys.rhs_R = CVector::Zero(np + nq);
  return sys;
}

void assemble_rhs(const CoupledAssembly& A, const TransmissionData& data, CoupledSystem& sys) {
  const int nU = sys.nU, nP = sys.nP, np = sys.np, nq = sys.nq;
  sys.rhs_F = CVector::Zero(nU + nP);
  sys.rhs_R = CVector::Zero(np + nq);

  if (data.J) sys.rhs_F.segment(0, nU) = assemble_source(data.J, *A.edge);

  CVector gvec(np + nq);
  gvec << data.g_R, data.g_n;
  CVector zvec(A.bsp->n_edges() + A.bsp->n_p1());
  zvec << data.zeta_t, data.zeta_D;

  const CMatrix D_ND = A.blocks.D_ND().cast<Complex>();
  const CMatrix D_DN = A.blocks.D_DN().cast<Complex>();

  // F(V) = (J, V) - <g, TD_test V> - <A^DN zeta, TD_test V>
  const CVector bd_moments = D_ND * gvec + A.blocks.ADN * zvec;
  sys.rhs_F.segment(0, nU) -= A.R_t_c.transpose() * bd_moments.segment(0, A.bsp->n_edges());
  sys.rhs_F.segment(nU, nP) -= A.R_s_c.transpose() * bd_moments.segment(A.bsp->n_edges(), A.bsp->n_p1());

  // R(a) = <(A^DD + 1/2 Id) zeta, a>
  sys.rhs_R = (A.blocks.ADD + 0.5 * D_DN) * zvec;
}

namespace {

// Hager-Higham style 1-norm estimate of inv(G) from an LU factorization.
double inv_norm1_estimate(const Eigen::PartialPivLU<CMatrix>& lu, int n) {
  CVector x = CVector::Constant(n, Complex(1.0 / n, 0.0));
  double est = 0.0;
  for (int it = 0; it < 5; ++it) {
    const CVector y = lu.solve(x);
    const double norm1 = y.cwiseAbs().sum();
    if (norm1 <= est) break;
    est = norm1;
    CVector z(n);
    for (int i = 0; i < n; ++i) {
      const double a = std::abs(y[i]);
      z[i] = a > 0 ? y[i] / a : Complex(1.0, 0.0);
    }
    const CVector w = lu.adjoint().solve(z);
    int jmax = 0;
    w.cwiseAbs().maxCoeff(&jmax);
    x = CVector::Zero(n);
    x[jmax] = 1.0;
  }
  return est;
}

}  // namespace

Solution solve(const CoupledSystem& sys, const CoupledAssembly& A, const TransmissionData& data,
               SolveWorkspace* ws) {
  const CVector b = sys.rhs();
  SolveWorkspace local;
  SolveWorkspace& w = ws ? *ws : local;
  if (!w.factored) {
    w.lu.compute(sys.G);
    w.factored = true;
  }
  const Eigen::PartialPivLU<CMatrix>& lu = w.lu;
  const CVector x = lu.solve(b);

  Solution sol;
  sol.U = x.segment(sys.offset_U(), sys.nU);
  sol.P = x.segment(sys.offset_P(), sys.nP);
  sol.p = x.segment(sys.offset_p(), sys.np);
  sol.q = x.segment(sys.offset_q(), sys.nq);
  sol.dir_eta = A.R_t_c * sol.U - data.zeta_t;
  sol.dir_xi = -(A.R_s_c * sol.P) - data.zeta_D;

  const double bnorm = b.norm();
  sol.residual = bnorm > 0 ? (sys.G * x - b).norm() / bnorm : (sys.G * x).norm();
  const double gnorm1 = sys.G.cwiseAbs().colwise().sum().maxCoeff();
  sol.condition_estimate = gnorm1 * inv_norm1_estimate(lu, sys.dim());
  sol.near_resonance = sol.condition_estimate > 1e14;
  return sol;
}

std::vector<CVec3> eval_exterior(const Solution& sol, const CoupledAssembly& A, const EvaluationGrid& grid) {
  const KernelEval ker(A.ctx);
  const PotentialEvaluator pot(*A.bsp, ker);
  // Exterior-only field: U_ext = -SL(T_N^+ U_ext) - DL(T_D^+ U_ext).
  return pot.reconstruct(-sol.p, -sol.q, -sol.dir_eta, -sol.dir_xi, grid);
}

}  // namespace hodge
