// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "hodge/common.hpp"

namespace hodge {

/// Gauss-Legendre rule on [0,1].
struct GaussRule1D {
  std::vector<double> x, w;
};
GaussRule1D gauss_legendre_01(int n);

/// Quadrature node on the reference triangle {u>=0, v>=0, u+v<=1},
/// weights sum to 1/2.
struct TriNode {
  double u, v, w;
};

/// Collapsed (Duffy) tensor-Gauss rule with n*n nodes; integrates bivariate
/// polynomials of total degree <= 2n-2 exactly.
std::vector<TriNode> tri_rule(int n);

/// Quadrature node on the reference tetrahedron, weights sum to 1/6.
struct TetNode {
  double u, v, w, wt;
};

/// Symmetric rule exact for the given polynomial degree (2 or 5).
std::vector<TetNode> tet_rule(int degree);

/// One point pair for a regularized Sauter-Schwab rule: barycentric-like
/// coordinates (u,v) on each of the two reference triangles. Common vertices
/// of the panel pair must be permuted to the leading positions.
struct PanelPairNode {
  double u1, v1, u2, v2, w;
};

/// Sauter-Schwab tables for the three singular panel-pair cases.
/// n_common: 3 = coincident, 2 = common edge, 1 = common vertex.
std::vector<PanelPairNode> sauter_schwab_rule(int n_common, int order);

/// Tensor product of two triangle rules for disjoint panel pairs.
std::vector<PanelPairNode> disjoint_pair_rule(int n_per_dim);

}  // namespace hodge
