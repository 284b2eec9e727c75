// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hodge/coupling.hpp"
#include "hodge/verify.hpp"

using namespace hodge;

namespace {

CVector random_cvector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(u(rng), u(rng));
  return v;
}

}  // namespace

TEST_CASE("zero data solves to zero") {
  const VolumeMesh mesh = gen_ball(0);
  const WaveContext ctx = WaveContext::from_kappa2(Complex(1.0, 0.0), 2.0);
  const MaterialField mat = MaterialField::constant(ctx.mu0, ctx.eps0);
  const CoupledAssembly A(mesh, mat, ctx, PanelQuadrature{});
  CoupledSystem sys = assemble_system(A);
  const TransmissionData zero = TransmissionData::zero(*A.bsp);
  assemble_rhs(A, zero, sys);
  CHECK(sys.rhs().norm() == 0.0);
  const Solution sol = solve(sys, A, zero);
  CHECK(sol.U.norm() == 0.0);
  CHECK(sol.P.norm() == 0.0);
  CHECK(sol.p.norm() == 0.0);
  CHECK(sol.q.norm() == 0.0);
  CHECK_FALSE(sol.near_resonance);  // system nonsingular at this kappa

  const EvaluationGrid grid = EvaluationGrid::tag(A.bnd, {Vec3(3, 0, 0)});
  const auto vals = eval_exterior(sol, A, grid);
  CHECK(vals[0].norm() == 0.0);
}

TEST_CASE("block (1,1) with boundary blocks zeroed equals the volume form") {
  const VolumeMesh mesh = gen_ball(0);
  const WaveContext ctx = WaveContext::from_kappa2(Complex(1.0, 0.0), 2.0);
  const MaterialField mat = MaterialField::constant(Complex(1.3, 0.1), Complex(0.9, 0.2));
  CoupledAssembly A(mesh, mat, ctx, PanelQuadrature{});
  A.blocks.ADN.setZero();
  const CoupledSystem sys = assemble_system(A);
  const int nU = sys.nU, nP = sys.nP;
  const double w2 = ctx.omega * ctx.omega;
  CMatrix expect = CMatrix::Zero(nU + nP, nU + nP);
  expect.topLeftCorner(nU, nU) = CMatrix(A.vforms.A_cc) - w2 * CMatrix(A.vforms.M_eps);
  expect.topRightCorner(nU, nP) = CMatrix(A.vforms.G_mix);
  expect.bottomLeftCorner(nP, nU) = -CMatrix(A.vforms.G_mix).transpose();
  expect.bottomRightCorner(nP, nP) = CMatrix(A.vforms.M_P);
  CHECK((sys.G.topLeftCorner(nU + nP, nU + nP) - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupling blocks reproduce the projector pairings on random vectors") {
  const VolumeMesh mesh = gen_ball(0);
  const WaveContext ctx = WaveContext::from_kappa2(Complex(1.0, 0.0), 2.0);
  const MaterialField mat = MaterialField::constant(ctx.mu0, ctx.eps0);
  const CoupledAssembly A(mesh, mat, ctx, PanelQuadrature{});
  const CoupledSystem sys = assemble_system(A);
  const int nU = sys.nU, nP = sys.nP, np = sys.np, nq = sys.nq;
  const int nbe = A.bsp->n_edges(), nbp = A.bsp->n_p1();

  // (1,2) block tested against <(-A^NN + 1/2 Id) pvec, (gamma_t V, gamma Q)>
  const CVector pv = random_cvector(np + nq, 1u);
  const CVector vtest = random_cvector(nU, 2u);
  const CVector qtest = random_cvector(nP, 3u);
  CVector full_test(nU + nP);
  full_test << vtest, qtest;
  const Complex lhs = bdot(full_test, sys.G.block(0, nU + nP, nU + nP, np + nq) * pv);

  const CMatrix D_ND = A.blocks.D_ND().cast<Complex>();
  const CVector moments = (-A.blocks.ANN + 0.5 * D_ND) * pv;
  CVector tr(nbe + nbp);
  tr.segment(0, nbe) = A.R_t_c * vtest;
  tr.segment(nbe, nbp) = A.R_s_c * qtest;
  const Complex rhs = bdot(tr, moments);
  CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));

  // (2,1) block tested against <(A^DD + 1/2 Id)(gamma_t U, -gamma P), a>
  const CVector uvec = random_cvector(nU, 4u);
  const CVector pvec = random_cvector(nP, 5u);
  const CVector atest = random_cvector(np + nq, 6u);
  CVector full_trial(nU + nP);
  full_trial << uvec, pvec;
  const Complex lhs2 = bdot(atest, sys.G.block(nU + nP, 0, np + nq, nU + nP) * full_trial);
  CVector td(nbe + nbp);
  td.segment(0, nbe) = A.R_t_c * uvec;
  td.segment(nbe, nbp) = -(A.R_s_c * pvec);
  const CMatrix D_DN = A.blocks.D_DN().cast<Complex>();
  const Complex rhs2 = bdot(atest, (A.blocks.ADD + 0.5 * D_DN) * td);
  CHECK(std::abs(lhs2 - rhs2) < 1e-12 * std::abs(rhs2));
}

TEST_CASE("rhs functionals") {
  const VolumeMesh mesh = gen_ball(0);
  const WaveContext ctx = WaveContext::from_kappa2(Complex(1.0, 0.0), 2.0);
  const MaterialField mat = MaterialField::constant(ctx.mu0, ctx.eps0);
  const CoupledAssembly A(mesh, mat, ctx, PanelQuadrature{});
  CoupledSystem sys = assemble_system(A);

  // only J nonzero: R vanishes identically
  TransmissionData d = TransmissionData::zero(*A.bsp);
  d.J = [](const Vec3&) { return CVec3(Complex(1.0), Complex(0.0), Complex(0.5)); };
  assemble_rhs(A, d, sys);
  CHECK(sys.rhs_R.norm() == 0.0);
  CHECK(sys.rhs_F.norm() > 0.0);

  // random zeta: R computed by block application vs direct re-pairing
  TransmissionData dz = TransmissionData::zero(*A.bsp);
  dz.zeta_t = random_cvector(A.bsp->n_edges(), 7u);
  dz.zeta_D = random_cvector(A.bsp->n_p1(), 8u);
  assemble_rhs(A, dz, sys);
  CVector zvec(A.bsp->n_edges() + A.bsp->n_p1());
  zvec << dz.zeta_t, dz.zeta_D;
  const CVector direct = (A.blocks.ADD + 0.5 * A.blocks.D_DN().cast<Complex>()) * zvec;
  CHECK((sys.rhs_R - direct).norm() < 1e-12 * direct.norm());
}

TEST_CASE("solver reproduces a synthetic Gram system") {
  const VolumeMesh mesh = gen_ball(0);
  const WaveContext ctx = WaveContext::from_kappa2(Complex(1.0, 0.0), 2.0);
  const MaterialField mat = MaterialField::constant(ctx.mu0, ctx.eps0);
  const CoupledAssembly A(mesh, mat, ctx, PanelQuadrature{});
  CoupledSystem sys = assemble_system(A);
  sys.G = system_norm_gram(A, sys).cast<Complex>();
  const CVector x_known = random_cvector(sys.dim(), 9u);
  const CVector b = sys.G * x_known;
  sys.rhs_F = b.segment(0, sys.nU + sys.nP);
  sys.rhs_R = b.segment(sys.offset_p(), sys.np + sys.nq);
  const TransmissionData zero = TransmissionData::zero(*A.bsp);
  const Solution sol = solve(sys, A, zero);
  CVector x(sys.dim());
  x << sol.U, sol.P, sol.p, sol.q;
  CHECK((x - x_known).norm() < 1e-12 * x_known.norm());
  CHECK(sol.residual < 1e-12);
}

TEST_CASE("static case runs through the same code path") {
  const VolumeMesh mesh = gen_ball(0);
  const WaveContext ctx(0.0, std::sqrt(2.0), 1.0);  // omega = 0: Hodge-Laplace
  CHECK(std::abs(ctx.kappa) == 0.0);
  const MaterialField mat = MaterialField::constant(ctx.mu0, ctx.eps0);
  const CoupledAssembly A(mesh, mat, ctx, PanelQuadrature{});
  CoupledSystem sys = assemble_system(A);
  const ManufacturedProblem mp = make_manufactured_problem(*A.bsp, ctx);
  assemble_rhs(A, mp.data, sys);
  const Solution sol = solve(sys, A, mp.data);
  CHECK(std::isfinite(sol.U.norm()));
  CHECK(sol.residual < 1e-10);
}

TEST_CASE("assembly is reproducible bit for bit") {
  const VolumeMesh mesh = gen_ball(0);
  const WaveContext ctx = WaveContext::from_kappa2(Complex(1.0, 0.0), 2.0);
  const MaterialField mat = MaterialField::constant(ctx.mu0, ctx.eps0);
  const CoupledAssembly A1(mesh, mat, ctx, PanelQuadrature{});
  const CoupledAssembly A2(mesh, mat, ctx, PanelQuadrature{});
  const CoupledSystem s1 = assemble_system(A1), s2 = assemble_system(A2);
  CHECK((s1.G - s2.G).cwiseAbs().maxCoeff() == 0.0);
}
