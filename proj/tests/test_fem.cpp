// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "hodge/fem.hpp"
#include "hodge/quadrature.hpp"

using namespace hodge;

TEST_CASE("WaveContext derived constants") {
  const WaveContext ctx(2.0, 1.5, 0.5);
  CHECK(ctx.eta == doctest::Approx(0.5 * 1.5 * 1.5));
  CHECK(ctx.kappa2.real() == doctest::Approx(0.5 * 1.5 * 4.0));
  CHECK(std::abs(ctx.kappa * ctx.kappa - ctx.kappa2) < 1e-15);
  CHECK(std::abs(ctx.kappa_tilde * std::sqrt(Complex(ctx.eta)) - ctx.kappa) < 1e-15);
  CHECK_THROWS_AS(WaveContext(-1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(WaveContext::from_kappa2(Complex(-1.0, 0.0), 1.0), std::invalid_argument);
  // principal root keeps Im(kappa) >= 0
  const WaveContext c2 = WaveContext::from_kappa2(Complex(2.0, 3.0), 2.0);
  CHECK(c2.kappa.imag() >= 0.0);
}

TEST_CASE("MaterialField sign constraints") {
  MaterialField bad = MaterialField::constant(Complex(1.0, 0.0), Complex(-1.0, 0.0));
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);
  MaterialField bad2 = MaterialField::constant(Complex(1.0, -0.5), Complex(1.0, 0.0));
  CHECK_THROWS_AS(bad2.validate(), std::runtime_error);
  MaterialField ok = MaterialField::constant(Complex(2.0, 0.1), Complex(1.0, 0.0));
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("constant P pairing on the unit cube") {
  const VolumeMesh mesh = gen_cube(1);
  const EdgeSpace edge(mesh);
  const NodalSpace nodal(mesh);
  const MaterialField mat = MaterialField::constant(1.0, 1.0);
  const WaveContext ctx(0.0, 1.0, 1.0);
  const VolumeForms vf = assemble_volume_form(mesh, edge, nodal, mat, ctx);

  const CVector U = CVector::Zero(edge.dof_count()), V = U;
  const CVector P = CVector::Ones(nodal.dof_count()), Q = P;
  // gradient terms vanish on constants; B = int P Q = 1
  CHECK(std::abs(volume_form_value(vf, ctx, U, P, V, Q) - 1.0) < 1e-12);
}

TEST_CASE("interpolated gradient fields are curl free") {
  const VolumeMesh mesh = gen_cube(2);
  const EdgeSpace edge(mesh);
  auto grad_phi = [](const Vec3& x) {
    return CVec3(Complex(std::cos(x.x())), Complex(0.3 * x.z()), Complex(0.3 * x.y() + 2.0 * x.z()));
  };
  const CVector U = edge.interpolate(grad_phi);
  const MaterialField mat = MaterialField::constant(1.0, 1.0);
  const WaveContext ctx(0.0, 1.0, 1.0);
  const NodalSpace nodal(mesh);
  const VolumeForms vf = assemble_volume_form(mesh, edge, nodal, mat, ctx);
  CHECK(std::abs(bdot(U, vf.A_cc * U)) < 1e-12 * U.squaredNorm());
  for (std::size_t t = 0; t < mesh.tets.size(); ++t)
    CHECK(edge.eval_curl(U, static_cast<int>(t)).norm() < 1e-12);
}

TEST_CASE("reference tet curl-curl entries match an independent oracle") {
  VolumeMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  mesh.tets = {{0, 1, 2, 3}};
  mesh.region_tag = {1};
  const EdgeSpace edge(mesh);
  const NodalSpace nodal(mesh);
  const MaterialField mat = MaterialField::constant(1.0, 1.0);
  const WaveContext ctx(0.0, 1.0, 1.0);
  const VolumeForms vf = assemble_volume_form(mesh, edge, nodal, mat, ctx);

  // Oracle: curls of the Whitney basis via 6th-order finite differences of
  // pointwise basis evaluation, then exact constant-times-volume integration.
  auto basis_value = [&](int e, const Vec3& x) {
    CVector coeffs = CVector::Zero(6);
    coeffs[e] = 1.0;
    return edge.eval(coeffs, 0, x);
  };
  const double h = 1e-4;
  const Vec3 x0(0.2, 0.25, 0.3);
  const double c6[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  std::array<CVec3, 6> curls;
  for (int e = 0; e < 6; ++e) {
    Eigen::Matrix3cd Jm;  // Jm(i, j) = d_j (component i)
    for (int j = 0; j < 3; ++j) {
      CVec3 der = CVec3::Zero();
      for (int s = 1; s <= 3; ++s) {
        Vec3 dx = Vec3::Zero();
        dx[j] = s * h;
        der += (c6[s - 1] / h) * (basis_value(e, x0 + dx) - basis_value(e, x0 - dx));
      }
      Jm.col(j) = der;
    }
    curls[e] = CVec3(Jm(2, 1) - Jm(1, 2), Jm(0, 2) - Jm(2, 0), Jm(1, 0) - Jm(0, 1));
  }
  const double vol = 1.0 / 6.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const Complex expect = vol * cdot(curls[j], curls[i]);
      CHECK(std::abs(vf.A_cc.coeff(i, j) - expect) < 1e-8);
    }
  // P-mass against the closed form V/10 diagonal, V/20 off-diagonal
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      CHECK(std::abs(vf.M_P.coeff(k, l) - (k == l ? vol / 10.0 : vol / 20.0)) < 1e-15);
}

TEST_CASE("patch test: constant-curl field reproduces |curl|^2 mu^-1 volume") {
  const VolumeMesh mesh = gen_cube(2);
  const EdgeSpace edge(mesh);
  const NodalSpace nodal(mesh);
  const Complex mu(2.0, 0.5);
  const MaterialField mat = MaterialField::constant(mu, 1.0);
  const WaveContext ctx(0.0, 1.0, 1.0);
  const VolumeForms vf = assemble_volume_form(mesh, edge, nodal, mat, ctx);
  const Vec3 a(0.4, -0.7, 1.1);  // curl(a x x) = 2a
  const CVector U = edge.interpolate([&](const Vec3& x) { return CVec3(a.cross(x).cast<Complex>()); });
  const Complex expect = (2.0 * a).squaredNorm() / mu;
  CHECK(std::abs(bdot(U, vf.A_cc * U) - expect) < 1e-10 * std::abs(expect));
}

TEST_CASE("assembled form matches direct quadrature of the mixed form") {
  const VolumeMesh mesh = gen_cube(1);
  const EdgeSpace edge(mesh);
  const NodalSpace nodal(mesh);
  const MaterialField mat = MaterialField::constant(1.0, Complex(1.5, 0.2));
  const WaveContext ctx(1.0, 1.0, 1.0);
  const VolumeForms vf = assemble_volume_form(mesh, edge, nodal, mat, ctx);

  auto Uf = [](const Vec3& x) { return CVec3(Complex(x.y(), 0.1), Complex(x.z() * x.z(), 0), Complex(x.x())); };
  auto Pf = [](const Vec3& x) { return Complex(x.x() * x.y(), 0.5 * x.z()); };
  const CVector U = edge.interpolate(Uf);
  const CVector P = nodal.interpolate(Pf);
  const CVector V =
      edge.interpolate([](const Vec3& x) { return CVec3(Complex(0.3), Complex(x.x()), Complex(-x.y())); });
  const CVector Q = nodal.interpolate([](const Vec3& x) { return Complex(x.z(), -0.2 * x.x()); });

  Complex direct = 0.0;
  const auto rule = tet_rule(5);
  const Complex eps = mat.eps_of(1);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const TetGeometry geo(mesh, t);
    const auto& T = mesh.tets[t];
    const Vec3 v0 = mesh.vertices[T[0]];
    const CVec3 cu = edge.eval_curl(U, static_cast<int>(t));
    const CVec3 cv = edge.eval_curl(V, static_cast<int>(t));
    const CVec3 gp = nodal.eval_grad(P, static_cast<int>(t));
    const CVec3 gq = nodal.eval_grad(Q, static_cast<int>(t));
    for (const auto& q : rule) {
      const Vec3 x = v0 + q.u * (mesh.vertices[T[1]] - v0) + q.v * (mesh.vertices[T[2]] - v0) +
                     q.w * (mesh.vertices[T[3]] - v0);
      const double wt = q.wt * 6.0 * geo.volume;
      const CVec3 uu = edge.eval(U, static_cast<int>(t), x);
      const CVec3 vv = edge.eval(V, static_cast<int>(t), x);
      const Complex pp = nodal.eval(P, static_cast<int>(t), x);
      const Complex qq = nodal.eval(Q, static_cast<int>(t), x);
      direct += wt * (cdot(cu, cv) + eps * cdot(gp, vv) + pp * qq - eps * cdot(uu, gq) -
                      ctx.omega * ctx.omega * eps * cdot(uu, vv));
    }
  }
  const Complex assembled = volume_form_value(vf, ctx, U, P, V, Q);
  CHECK(std::abs(assembled - direct) < 1e-11 * std::abs(direct));
}

TEST_CASE("assembly invariant under tet reordering") {
  VolumeMesh mesh = gen_cube(1);
  VolumeMesh shuffled = mesh;
  std::mt19937 rng(5u);
  std::vector<int> perm(mesh.tets.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t t = 0; t < perm.size(); ++t) {
    shuffled.tets[t] = mesh.tets[perm[t]];
    shuffled.region_tag[t] = mesh.region_tag[perm[t]];
  }
  const MaterialField mat = MaterialField::constant(Complex(1.2, 0.1), Complex(0.8, 0.3));
  const WaveContext ctx(1.5, 1.0, 1.0);
  const EdgeSpace e1(mesh), e2(shuffled);
  const NodalSpace n1(mesh), n2(shuffled);
  const VolumeForms a = assemble_volume_form(mesh, e1, n1, mat, ctx);
  const VolumeForms b = assemble_volume_form(shuffled, e2, n2, mat, ctx);
  // global edge numbering is sorted, hence mesh-order independent
  CHECK((CMatrix(a.A_cc) - CMatrix(b.A_cc)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((CMatrix(a.M_eps) - CMatrix(b.M_eps)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((CMatrix(a.G_mix) - CMatrix(b.G_mix)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((CMatrix(a.M_P) - CMatrix(b.M_P)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("source functional") {
  const VolumeMesh mesh = gen_cube(1);
  const EdgeSpace edge(mesh);

  const CVector zero = assemble_source([](const Vec3&) { return CVec3::Zero(); }, edge);
  CHECK(zero.norm() == 0.0);

  // constant current: pair with the interpolated constant
  const Vec3 c(0.7, -0.4, 1.2);
  const CVector rhs = assemble_source([&](const Vec3&) { return CVec3(c.cast<Complex>()); }, edge);
  const CVector e = edge.interpolate([&](const Vec3&) { return CVec3(c.cast<Complex>()); });
  CHECK(std::abs(bdot(e, rhs) - c.squaredNorm()) < 1e-10);

  // locality: source supported in one tet touches only its six edges
  const TetGeometry geo(mesh, 0);
  auto inside0 = [&](const Vec3& x) {
    const auto lam = geo.barycentric(mesh, 0, x);
    for (double l : lam)
      if (l < -1e-12) return false;
    return true;
  };
  const CVector loc = assemble_source(
      [&](const Vec3& x) { return inside0(x) ? CVec3(Complex(1.0), Complex(0.0), Complex(0.0)) : CVec3::Zero(); },
      edge);
  std::set<int> active(edge.tet_edges[0].begin(), edge.tet_edges[0].end());
  for (int i = 0; i < loc.size(); ++i)
    if (!active.count(i)) CHECK(std::abs(loc[i]) == 0.0);
}

TEST_CASE("omega enters only through the separate mass term") {
  const VolumeMesh mesh = gen_cube(1);
  const EdgeSpace edge(mesh);
  const NodalSpace nodal(mesh);
  const MaterialField mat = MaterialField::constant(1.0, 2.0);
  const VolumeForms v0 = assemble_volume_form(mesh, edge, nodal, mat, WaveContext(0.0, 1.0, 1.0));
  const VolumeForms v2 = assemble_volume_form(mesh, edge, nodal, mat, WaveContext(2.0, 1.0, 1.0));
  CHECK((CMatrix(v0.A_cc) - CMatrix(v2.A_cc)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((CMatrix(v0.M_eps) - CMatrix(v2.M_eps)).cwiseAbs().maxCoeff() == 0.0);
}
