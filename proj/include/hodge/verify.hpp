// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hodge/coupling.hpp"

namespace hodge {

/// Radiating point-source solutions of the scaled Hodge-Helmholtz equation:
///   U(x) = grad G_kt(x - x_g) + curl(G_k(x - x_c) c).
/// Both families solve curl curl U - eta grad div U - kappa^2 U = 0 away from
/// their source points; div U = -kt^2 G_kt(x - x_g) and the curl family is
/// divergence free.
struct PointSourceField {
  WaveContext ctx;
  Vec3 x_grad = Vec3::Zero(), x_curl = Vec3::Zero();
  CVec3 c = CVec3::Zero();
  bool use_grad = true, use_curl = true;

  CVec3 value(const Vec3& x) const;
  CVec3 curl(const Vec3& x) const;
  Complex div(const Vec3& x) const;
  Complex pressure(const Vec3& x, Complex eps) const;   // P = -div(eps U)
  CVec3 grad_pressure(const Vec3& x, Complex eps) const;
};

/// sqrt(Re a^H V0 a); V0 is the static single-layer Gram of the matching
/// space. Throws when the quadratic form comes out negative beyond roundoff.
double hminus_half_norm(const CVector& a, const RMatrix& V0);

struct Sabotage {
  bool flip_orientation = false;
  bool flip_jump_sign = false;
  bool drop_Htilde = false;
};

struct IdentityEntry {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityEntry> entries;
  bool all_pass() const;
  const IdentityEntry* find(const std::string& name) const;
};

/// Executable oracles for the exactly-testable identities on one mesh:
/// surface calculus, kernel branches, potential identities and PDE residuals,
/// jump relations, the two-last-terms matrix identity, Calderon projector
/// idempotence and valid-Cauchy-data annihilation.
IdentityReport run_identity_suite(const WaveContext& ctx, const VolumeMesh& mesh, const Sabotage& sab = {},
                                  int threads = 0);

/// Potential identities and PDE residuals at far points (criterion-level
/// oracles, also part of the identity suite).
IdentityReport potential_identity_report(const WaveContext& ctx, const BoundarySpaces& sp);

struct JumpResiduals {
  double TD_SL, TN_SL, TN_DL, TD_DL;  // relative residuals
};
JumpResiduals jump_relation_residuals(const BoundarySpaces& sp, const KernelEval& ker, const BoundaryMass& mass,
                                      const RMatrix& Vv0, const RMatrix& Vs0, unsigned seed,
                                      const Sabotage& sab = {});

/// Gram-weighted norm of (Dinv A)^2 - 1/4 Id, with Dinv the mass-weighted
/// pseudo-inverse of the rectangular duality Gram.
double calderon_projector_residual(const CalderonBlocks& cb, const BoundaryMass& mass);

/// Relative dual-norm residual of P^+ applied to interior Cauchy data of an
/// exact solution (and of P^- applied to exterior data when interior=false).
double cauchy_annihilation_residual(const CalderonBlocks& cb, const BoundaryMass& mass, const BoundarySpaces& sp,
                                    const PointSourceField& field, bool interior);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  int dofs = 0;
  double err_L2_U = 0.0, err_Hcurl_U = 0.0, err_H1_P = 0.0, err_traceN = 0.0;
  double err_exterior = 0.0;  // relative pointwise at |x| = 3
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  /// log2 ratios between consecutive rows; index i pairs rows i-1, i.
  double rate(int i, double ConvergenceRow::*field) const;
};

/// Symmetric-coupling convergence study against the no-contrast manufactured
/// transmission solution on the unit ball.
ConvergenceReport manufactured_transmission(const std::vector<int>& levels, const WaveContext& ctx,
                                            int threads = 0);

/// One level of the manufactured study with its assembly and factorization
/// retained, so follow-up probes (inf-sup, projector tests) can reuse them.
struct ManufacturedLevel {
  std::unique_ptr<VolumeMesh> mesh;
  std::unique_ptr<CoupledAssembly> assembly;
  CoupledSystem sys;
  std::unique_ptr<SolveWorkspace> ws;
  Solution sol;
  ConvergenceRow row;
};
ManufacturedLevel run_manufactured_level(int level, const WaveContext& ctx, int threads = 0);

/// Data and exact fields of the manufactured problem (shared by tests).
struct ManufacturedProblem {
  PointSourceField interior, exterior;
  TransmissionData data;
};
ManufacturedProblem make_manufactured_problem(const BoundarySpaces& sp, const WaveContext& ctx);

/// Dense block-diagonal norm Gram of the coupled trial space
/// (H(curl) x H1 x H_N discrete norms).
RMatrix system_norm_gram(const CoupledAssembly& A, const CoupledSystem& sys);

/// Smallest Gram-weighted singular value of the coupled operator; the Grams
/// are the discrete H(curl) x H1 x H_N norm matrices. The workspace carries
/// (or receives) the factorization of the system matrix.
double estimate_infsup(const CoupledAssembly& A, const CoupledSystem& sys, SolveWorkspace& ws);

/// Condition estimates of the coupled system over a kappa^2 grid.
std::vector<double> resonance_sweep(const VolumeMesh& mesh, double eta, const std::vector<double>& kappa2_grid,
                                    const PanelQuadrature& quad, int threads = 0);

}  // namespace hodge
