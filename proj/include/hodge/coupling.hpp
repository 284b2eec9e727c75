// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>

#include "hodge/bem.hpp"
#include "hodge/fem.hpp"
#include "hodge/potentials.hpp"
#include "hodge/traces.hpp"

namespace hodge {

/// Transmission data (g_R, g_n, zeta_D, zeta_t) in discrete trace
/// coefficients plus the volume source.
struct TransmissionData {
  CVector g_R;     // div-trace coefficients
  CVector g_n;     // P0
  CVector zeta_D;  // P1
  CVector zeta_t;  // curl-trace coefficients
  std::function<CVec3(const Vec3&)> J;  // nullable -> zero source

  static TransmissionData zero(const BoundarySpaces& sp);
};

/// Dense block system over [U edges | P nodes | p div-trace | q P0] with the
/// right-hand side split into the volume/trace functional F and the
/// boundary-equation functional R.
struct CoupledSystem {
  CMatrix G;
  CVector rhs_F;  // rows tested by (V, Q)
  CVector rhs_R;  // rows tested by H_N
  int nU = 0, nP = 0, np = 0, nq = 0;
  int offset_U() const { return 0; }
  int offset_P() const { return nU; }
  int offset_p() const { return nU + nP; }
  int offset_q() const { return nU + nP + np; }
  int dim() const { return nU + nP + np + nq; }
  CVector rhs() const;
};

struct Solution {
  CVector U, P;        // volume solution
  CVector p, q;        // exterior Neumann pair
  CVector dir_eta;     // derived exterior Dirichlet: gamma_t U - zeta_t
  CVector dir_xi;      // derived exterior Dirichlet: -gamma P - zeta_D
  double residual = 0.0;
  double condition_estimate = 0.0;
  bool near_resonance = false;
};

/// Everything the coupled solve needs on one mesh, assembled once.
struct CoupledAssembly {
  const VolumeMesh* mesh = nullptr;
  BoundaryMesh bnd;
  std::optional<EdgeSpace> edge;
  std::optional<NodalSpace> nodal;
  std::optional<BoundarySpaces> bsp;
  RSparse R_t, R_s;    // tangential / scalar trace matrices
  CSparse R_t_c, R_s_c;  // complex copies used in block products
  VolumeForms vforms;
  BemOperators ops;  // primitive boundary operators (kept for norms/tests)
  CalderonBlocks blocks;
  WaveContext ctx;
  MaterialField mat;

  CoupledAssembly(const VolumeMesh& m, const MaterialField& mat_, const WaveContext& ctx_,
                  const PanelQuadrature& quad, int threads = 0);
};

CoupledSystem assemble_system(const CoupledAssembly& A);
void assemble_rhs(const CoupledAssembly& A, const TransmissionData& data, CoupledSystem& sys);

/// Reusable dense factorization of the system matrix.
struct SolveWorkspace {
  Eigen::PartialPivLU<CMatrix> lu;
  bool factored = false;
};

/// Dense LU with partial pivoting; reports the relative residual and a
/// 1-norm condition estimate. Estimates beyond 1e14 set near_resonance
/// ("near-resonance or discretization breakdown"). A workspace carries the
/// factorization across calls on the same system.
Solution solve(const CoupledSystem& sys, const CoupledAssembly& A, const TransmissionData& data,
               SolveWorkspace* ws = nullptr);

/// Exterior field by the representation formula for the Cauchy data
/// (p, T_D U - zeta) with the exterior sign convention.
std::vector<CVec3> eval_exterior(const Solution& sol, const CoupledAssembly& A, const EvaluationGrid& grid);

}  // namespace hodge
