// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hodge/verify.hpp"

using namespace hodge;

TEST_CASE("point-source fields solve the scaled equation (FD oracle)") {
  for (double k2 : {1.0, 0.0}) {
    PointSourceField f;
    f.ctx = WaveContext::from_kappa2(Complex(k2, 0.0), 2.0);
    f.x_grad = Vec3(0.1, 0.2, -0.1);
    f.x_curl = Vec3(0.1, 0.2, -0.1);
    f.c = CVec3(Complex(0.3, 0.1), Complex(-0.2, 0.4), Complex(0.5, 0.0));
    const double h = 0.01;
    const double c4[2] = {8.0 / 12.0, -1.0 / 12.0};
    for (const Vec3& x : {Vec3(1.5, 0.3, 0.2), Vec3(-1.2, 0.8, 1.0)}) {
      // curl curl - eta grad div - kappa^2, with analytic curl/div inside
      CVec3 curlcurl = CVec3::Zero(), graddiv = CVec3::Zero();
      for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = h;
        CVec3 dcurl = CVec3::Zero();
        Complex ddiv = 0.0;
        for (int s = 1; s <= 2; ++s) {
          dcurl += (c4[s - 1] / h) * (f.curl(x + double(s) * e) - f.curl(x - double(s) * e));
          ddiv += (c4[s - 1] / h) * (f.div(x + double(s) * e) - f.div(x - double(s) * e));
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
      const CVec3 resid = curlcurl - f.ctx.eta * graddiv - f.ctx.kappa2 * f.value(x);
      const double scale = std::max({curlcurl.norm(), (f.ctx.eta * graddiv).norm(), f.value(x).norm(), 1e-10});
      CHECK(resid.norm() / scale < 1e-7);
    }
    // P = -div(eps U) consistency
    const Vec3 x(0.9, -0.6, 0.4);
    CHECK(std::abs(f.pressure(x, Complex(2.0)) + 2.0 * f.div(x)) < 1e-14);
  }
}

TEST_CASE("hminus_half_norm basics") {
  const BoundaryMesh bnd_l1 = extract_boundary(gen_ball(1));
  const BoundarySpaces sp(bnd_l1);
  const KernelEval ker(WaveContext::from_kappa2(Complex(0.0, 0.0), 1.0));
  const BemOperators ops = assemble_primitive_ops(ker, sp, PanelQuadrature{});

  CHECK(hminus_half_norm(CVector::Zero(sp.n_tris()), ops.Vs0) == 0.0);
  const CVector ones = CVector::Ones(sp.n_tris());
  const double n1 = hminus_half_norm(ones, ops.Vs0);
  CHECK(std::abs(n1 * n1 - 4.0 * M_PI) / (4.0 * M_PI) < 0.05);  // level-1 sphere
  std::mt19937 rng(1u);
  std::uniform_real_distribution<double> u(-1, 1);
  CVector a(sp.n_tris());
  for (int i = 0; i < a.size(); ++i) a[i] = Complex(u(rng), u(rng));
  CHECK(std::abs(hminus_half_norm(CVector(2.0 * a), ops.Vs0) - 2.0 * hminus_half_norm(a, ops.Vs0)) <
        1e-13 * hminus_half_norm(a, ops.Vs0));
  // broken Gram raises
  RMatrix bad = -ops.Vs0;
  CHECK_THROWS_AS(hminus_half_norm(ones, bad), std::runtime_error);
}

TEST_CASE("identity suite on the collapsed static case") {
  // eta = 1, kappa = 0: many terms vanish structurally
  const WaveContext ctx(0.0, 1.0, 1.0);
  const IdentityReport rep = run_identity_suite(ctx, gen_ball(1));
  for (const char* name : {"div_curl_zero", "rotation_consistency", "tau_self_pairing_zero",
                           "scalar_pairing_total_area", "kernel_branch_consistency", "two_last_terms",
                           "div_vectorSL_identity", "curl_Upsilon_identity", "SL_pde_residual",
                           "DL_pde_residual"}) {
    const IdentityEntry* e = rep.find(name);
    REQUIRE(e != nullptr);
    CHECK(e->pass);
  }
  // jump relations measured on the level-1 mesh: loose sanity here, the
  // pinned tolerance is exercised at the acceptance level
  for (const char* name : {"jump_TD_SL", "jump_TN_SL", "jump_TN_DL", "jump_TD_DL"}) {
    const IdentityEntry* e = rep.find(name);
    REQUIRE(e != nullptr);
    CHECK(e->residual < 0.35);
  }
}

TEST_CASE("negative controls break named tests") {
  const WaveContext ctx = WaveContext::from_kappa2(Complex(1.0, 0.0), 2.0);
  const VolumeMesh mesh = gen_ball(1);

  const IdentityReport clean = run_identity_suite(ctx, mesh);

  Sabotage flip_o;
  flip_o.flip_orientation = true;
  const IdentityReport rep_o = run_identity_suite(ctx, mesh, flip_o);
  CHECK_FALSE(rep_o.find("jump_TN_SL")->pass);

  Sabotage flip_j;
  flip_j.flip_jump_sign = true;
  const IdentityReport rep_j = run_identity_suite(ctx, mesh, flip_j);
  CHECK_FALSE(rep_j.find("jump_TN_SL")->pass);
  CHECK_FALSE(rep_j.find("jump_TD_DL")->pass);

  Sabotage drop_h;
  drop_h.drop_Htilde = true;
  const IdentityReport rep_h = run_identity_suite(ctx, mesh, drop_h);
  CHECK_FALSE(rep_h.find("two_last_terms")->pass);
  // the clean run passes the same tests
  CHECK(clean.find("two_last_terms")->pass);
}

TEST_CASE("manufactured transmission study smoke") {
  const WaveContext ctx(1.0 / std::pow(2.0, 0.25), std::sqrt(2.0), 1.0);  // kappa = 1, eta = 2
  const ConvergenceReport rep = manufactured_transmission({0, 1}, ctx);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) {
    CHECK(std::isfinite(r.err_L2_U));
    CHECK(r.err_L2_U > 0.0);
    CHECK(std::isfinite(r.err_traceN));
    CHECK(std::isfinite(r.err_exterior));
  }
  // errors decrease from level 0 to level 1
  CHECK(rep.rows[1].err_L2_U < rep.rows[0].err_L2_U);
  CHECK(rep.rows[1].err_exterior < rep.rows[0].err_exterior);
  CHECK(rep.rate(1, &ConvergenceRow::err_L2_U) > 0.0);
}

TEST_CASE("synthetic identity system has unit inf-sup") {
  const VolumeMesh mesh = gen_ball(0);
  const WaveContext ctx = WaveContext::from_kappa2(Complex(1.0, 0.0), 2.0);
  const MaterialField mat = MaterialField::constant(ctx.mu0, ctx.eps0);
  const CoupledAssembly A(mesh, mat, ctx, PanelQuadrature{});
  CoupledSystem sys = assemble_system(A);
  sys.G = system_norm_gram(A, sys).cast<Complex>();
  SolveWorkspace ws;
  const double sigma = estimate_infsup(A, sys, ws);
  CHECK(sigma == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("convergence report rates") {
  ConvergenceReport rep;
  ConvergenceRow r0, r1;
  r0.err_L2_U = 0.4;
  r1.err_L2_U = 0.1;
  rep.rows = {r0, r1};
  CHECK(rep.rate(1, &ConvergenceRow::err_L2_U) == doctest::Approx(2.0));
  CHECK(rep.rate(0, &ConvergenceRow::err_L2_U) == 0.0);
}
