// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hodge/common.hpp"
#include "hodge/fem.hpp"
#include "hodge/mesh.hpp"

namespace hodge {

/// Discrete boundary trace spaces at lowest order.
///
/// Per boundary edge e = (a,b) with a < b (global vertex ids):
///   curl basis w_e = lambda_a grad_G lambda_b - lambda_b grad_G lambda_a
///     (the tangential trace of the volume edge element; unit circulation),
///   div basis  rho_e = w_e x n  (normal-continuous, unit edge flux,
///     div_G rho_e = +-1/A per adjacent triangle).
/// The rotation identity w_e = n x rho_e holds pointwise.
struct BoundarySpaces {
  const BoundaryMesh* bnd = nullptr;
  std::vector<std::array<int, 2>> edges;          // sorted (a,b), lexicographic
  std::vector<std::array<int, 3>> tri_edges;      // local edge slots (0:01, 1:02, 2:12) -> global edge
  std::vector<std::array<double, 3>> tri_div;     // div_G rho_e on this triangle
  std::vector<std::array<Vec3, 3>> grad_lambda;   // surface gradients of the P1 hats per tri
  std::vector<int> p1_vertices;                   // boundary vertex ids (P1 dofs)
  std::vector<int> vertex_to_p1;                  // parent vertex id -> P1 dof (-1 if interior)

  explicit BoundarySpaces(const BoundaryMesh& b);
  explicit BoundarySpaces(BoundaryMesh&&) = delete;  // the mesh must outlive the spaces

  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_tris() const { return static_cast<int>(bnd->tris.size()); }
  int n_p1() const { return static_cast<int>(p1_vertices.size()); }

  /// rho_e restricted to triangle t at physical point x (zero when e is not
  /// an edge of t).
  Vec3 rwg(int t, int local_edge, const Vec3& x) const;
  Vec3 rwg_rotated(int t, int local_edge, const Vec3& x) const;  // w_e = n x rho_e

  /// Pointwise evaluation of coefficient vectors on triangle t.
  CVec3 eval_div_field(const CVector& coeffs, int t, const Vec3& x) const;
  CVec3 eval_curl_field(const CVector& coeffs, int t, const Vec3& x) const;
  Complex eval_p0(const CVector& coeffs, int t) const;
  Complex eval_p1(const CVector& coeffs, int t, const Vec3& x) const;
  Complex eval_div_of_div_field(const CVector& coeffs, int t) const;

  /// Interpolations onto the discrete spaces.
  CVector interpolate_div(const std::function<CVec3(const Vec3&)>& f) const;   // edge fluxes
  CVector interpolate_curl(const std::function<CVec3(const Vec3&)>& f) const;  // edge circulations
  CVector interpolate_p0(const std::function<Complex(const Vec3&)>& f) const;  // panel means
  CVector interpolate_p1(const std::function<Complex(const Vec3&)>& f) const;  // vertex values
};

/// gamma_t: volume edge dofs -> CurlTraceSpace coefficients (index map).
RSparse trace_tangential(const EdgeSpace& edge, const BoundarySpaces& sp);

/// gamma (scalar Dirichlet): nodal dofs -> boundary P1 coefficients.
RSparse trace_scalar(const NodalSpace& nodal, const BoundarySpaces& sp);

/// div_G: DivTraceSpace coeffs -> P0 coeffs (exact on RWG).
RSparse surface_div(const BoundarySpaces& sp);

/// curl_G: P1 coeffs -> DivTraceSpace coeffs (rotated surface gradients).
RSparse surface_curl(const BoundarySpaces& sp);

/// Duality pairing matrices. pair_tau[i][j] = int rho_i . w_j (antisymmetric);
/// pair_scalar[k][l] = int phi_k chi_l over triangle l (P1 x P0).
struct DualityGrams {
  RMatrix pair_tau;     // n_edges x n_edges
  RMatrix pair_scalar;  // n_p1 x n_tris
};
DualityGrams duality_grams(const BoundarySpaces& sp);

/// L2 mass matrices used for norms and projections.
struct BoundaryMass {
  RSparse rwg;       // int rho_i . rho_j
  RSparse rwg_div;   // int div rho_i div rho_j
  RSparse p1;        // int phi_k phi_l
  RSparse p0;        // diag(area)
};
BoundaryMass boundary_mass(const BoundarySpaces& sp);

}  // namespace hodge
