// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <functional>
#include <map>
#include <vector>

#include "hodge/common.hpp"
#include "hodge/mesh.hpp"

namespace hodge {

/// Physical constants of the exterior medium and derived wavenumbers:
/// eta = mu0*eps0^2, kappa^2 = mu0*eps0*omega^2, kappa_tilde = kappa/sqrt(eta).
/// kappa is the principal square root, keeping Im(kappa) >= 0.
struct WaveContext {
  double omega = 0.0, eps0 = 1.0, mu0 = 1.0;
  double eta = 1.0;
  Complex kappa2{0.0, 0.0};
  Complex kappa{0.0, 0.0};
  Complex kappa_tilde{0.0, 0.0};

  WaveContext() = default;
  WaveContext(double omega_, double eps0_, double mu0_);
  /// Direct (kappa^2, eta) construction for sweeps and tests.
  static WaveContext from_kappa2(Complex kappa2_, double eta_);
};

/// Per-region complex material values, stored as absolute mu and eps.
struct MaterialField {
  std::map<int, Complex> mu, eps;

  static MaterialField constant(Complex mu_val, Complex eps_val);
  Complex mu_of(int region) const;
  Complex eps_of(int region) const;
  void validate() const;  // sign constraints: Re in (0, inf), Im >= 0
};

/// Lowest-order H(curl) edge elements (Whitney 1-forms). Global edges are
/// vertex pairs (a,b) with a < b; the basis has unit circulation along its
/// edge in the a->b direction.
struct EdgeSpace {
  const VolumeMesh* mesh = nullptr;
  std::vector<std::array<int, 2>> edges;             // sorted pairs, lexicographic order
  std::vector<std::array<int, 6>> tet_edges;         // local edge -> global edge
  std::vector<std::array<double, 6>> tet_edge_sign;  // +1 iff local matches canonical direction

  explicit EdgeSpace(const VolumeMesh& m);
  int dof_count() const { return static_cast<int>(edges.size()); }
  int edge_index(int a, int b) const;  // -1 when absent

  /// Circulation interpolation of a smooth field onto the edge dofs.
  CVector interpolate(const std::function<CVec3(const Vec3&)>& field) const;
  /// Pointwise value of the interpolant inside tet t.
  CVec3 eval(const CVector& coeffs, int t, const Vec3& x) const;
  CVec3 eval_curl(const CVector& coeffs, int t) const;
};

/// P1 nodal elements; dofs are the mesh vertices.
struct NodalSpace {
  const VolumeMesh* mesh = nullptr;
  explicit NodalSpace(const VolumeMesh& m) : mesh(&m) {}
  int dof_count() const { return static_cast<int>(mesh->vertices.size()); }

  CVector interpolate(const std::function<Complex(const Vec3&)>& f) const;
  Complex eval(const CVector& coeffs, int t, const Vec3& x) const;
  CVec3 eval_grad(const CVector& coeffs, int t) const;
};

/// Galerkin matrices of the interior mixed form:
///   A_cc[i][j]  = int mu^-1 curl b_j . curl b_i
///   G_mix[i][k] = int eps grad q_k . b_i
///   M_P[k][l]   = int q_l q_k
///   M_eps[i][j] = int eps b_j . b_i
struct VolumeForms {
  CSparse A_cc, G_mix, M_P, M_eps;
};

VolumeForms assemble_volume_form(const VolumeMesh& mesh, const EdgeSpace& edge, const NodalSpace& nodal,
                                 const MaterialField& mat, const WaveContext& ctx);

/// Bilinear form value B_kappa((U,P),(V,Q)); test coefficients enter
/// unconjugated, matching the variational statement.
Complex volume_form_value(const VolumeForms& vf, const WaveContext& ctx, const CVector& U, const CVector& P,
                          const CVector& V, const CVector& Q);

/// Source functional entries int J . b_i by order-4 tet quadrature.
CVector assemble_source(const std::function<CVec3(const Vec3&)>& J, const EdgeSpace& edge);

/// Nodal stiffness int grad q_k . grad q_l (H1 seminorm Gram).
RSparse assemble_nodal_stiffness(const VolumeMesh& mesh, const NodalSpace& nodal);

/// Barycentric gradients of a tet (constant vectors), and helpers shared by
/// assembly and evaluation.
struct TetGeometry {
  std::array<Vec3, 4> grad_lambda;
  double volume;
  TetGeometry(const VolumeMesh& mesh, int t);
  std::array<double, 4> barycentric(const VolumeMesh& mesh, int t, const Vec3& x) const;
};

}  // namespace hodge
