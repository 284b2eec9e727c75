// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hodge/common.hpp"
#include "hodge/kernels.hpp"
#include "hodge/quadrature.hpp"
#include "hodge/traces.hpp"

namespace hodge {

/// Regularized panel-pair quadrature: Sauter-Schwab tables for coincident,
/// common-edge and common-vertex pairs, distance-banded tensor rules for
/// disjoint pairs. The base disjoint rule integrates polynomial pairs of
/// degree 2*regular_order - 1 exactly.
struct PanelQuadrature {
  int singular_order = 5;
  int regular_order = 4;

  std::vector<PanelPairNode> coincident, common_edge, common_vertex;
  std::vector<PanelPairNode> far, mid, near_field;

  PanelQuadrature(int singular = 5, int regular = 4);
};

/// Galerkin matrices of the primitive boundary operators. Test/trial bases:
/// rho = div-conforming edge functions, phi = P1 hats, chi = P0 indicators.
/// All averaged traces are assembled directly as singular Galerkin double
/// integrals (never as one-sided trace plus half identity).
struct BemOperators {
  // scalar single layer and its div-div / mixed variants
  CMatrix Vs_kt;  ///< int int chi_k G_kt chi_l
  CMatrix W;      ///< int int div rho_i G_k div rho_j
  CMatrix Wt;     ///< int int div rho_i Gtilde* div rho_j (constant-removed kernel)
  CMatrix Vv;     ///< int int rho_i(x).rho_j(y) G_k
  CMatrix Vdp;    ///< int int div rho_i(x) G_kt chi_l(y)
  // Cauchy-singular families
  CMatrix C;      ///< int int grad_x G_k . (rho_j(y) x rho_i(x))
  CMatrix Ct;     ///< int int rho_i(x) . (grad_x G_k x n(y)) phi_l(y)
  CMatrix Cn;     ///< int int (grad_G phi_k x n)(x) . rho_j(y) G_k
  CMatrix Kp;     ///< int int phi_k(x) n(x).grad_x G_kt chi_l(y)
  CMatrix Kd;     ///< int int chi_k(x) n(y).grad_x G_kt phi_l(y)
  // Gtilde-based (normal vector single layer traces)
  CMatrix Bn;     ///< int int phi_k(x) n(x).rho_j(y) G_k
  CMatrix Ht;     ///< int int phi_k(x) n(x).grad_x Gtilde div rho_j(y)
  CMatrix Nt;     ///< int int phi_l(y) rho_i(x).(matG(x-y) n(y))
  CMatrix Nn;     ///< int int phi_k(x) phi_l(y) n(x).(matG(x-y) n(y))
  // static kernels for the -1/2 inner products
  RMatrix Vs0;    ///< int int chi_k G_0 chi_l
  RMatrix Vv0;    ///< int int rho_i.rho_j G_0
  RMatrix W0;     ///< int int div rho_i G_0 div rho_j
};

BemOperators assemble_primitive_ops(const KernelEval& ker, const BoundarySpaces& sp, const PanelQuadrature& quad,
                                    int threads = 0);

/// The four Calderon blocks in the discrete (H_D, H_N) bases, composed from
/// the primitives through the potential identities, plus the duality Grams.
/// Row spaces: ADD/AND tested by H_N = (rho, P0); ADN/ANN tested by
/// H_D = (n x rho, P1). Column spaces: H_D = (n x rho, P1), H_N = (rho, P0).
struct CalderonBlocks {
  CMatrix ADD, AND_, ADN, ANN;
  DualityGrams grams;
  int n_edge = 0, n_tri = 0, n_p1 = 0;

  int dim_HD() const { return n_edge + n_p1; }
  int dim_HN() const { return n_edge + n_tri; }

  /// Duality pairing matrices for the half-identity terms.
  RMatrix D_DN() const;  // H_N-test x H_D-trial
  RMatrix D_ND() const;  // H_D-test x H_N-trial
  /// Tested matrix of the full Calderon operator A on H_D x H_N.
  CMatrix full_A() const;
  RMatrix full_D() const;
};

struct CalderonOptions {
  bool drop_Htilde = false;  // negative control: omit the Gtilde matrix in ANN
};

CalderonBlocks assemble_calderon(const KernelEval& ker, const BoundarySpaces& sp, const PanelQuadrature& quad,
                                 int threads = 0, const CalderonOptions& opt = {});
CalderonBlocks assemble_calderon(const BemOperators& ops, const KernelEval& ker, const BoundarySpaces& sp,
                                 const CalderonOptions& opt = {});

}  // namespace hodge
