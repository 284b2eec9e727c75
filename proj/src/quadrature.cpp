// SPDX-License-Identifier: Apache-2.0
#include "hodge/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace hodge {

GaussRule1D gauss_legendre_01(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: n must be >= 1");
  GaussRule1D rule;
  rule.x.resize(n);
  rule.w.resize(n);
  // Newton iteration on Legendre polynomials over [-1,1], then map to [0,1].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.x[i] = 0.5 * (1.0 - x);  // descending roots -> ascending nodes
    rule.w[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

std::vector<TriNode> tri_rule(int n) {
  const GaussRule1D g = gauss_legendre_01(n);
  std::vector<TriNode> nodes;
  nodes.reserve(n * n);
  // Duffy map (s,t) -> (u, v) = (s, t(1-s)), Jacobian (1-s).
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = g.x[i], t = g.x[j];
      nodes.push_back({s, t * (1.0 - s), g.w[i] * g.w[j] * (1.0 - s)});
    }
  return nodes;
}

std::vector<TetNode> tet_rule(int degree) {
  std::vector<TetNode> nodes;
  if (degree <= 2) {
    // 4-point rule, exact for degree 2.
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    const double w = 0.25 / 6.0;
    nodes = {{a, b, b, w}, {b, a, b, w}, {b, b, a, w}, {b, b, b, w}};
  } else {
    // Keast 14-point rule, exact for degree 5 (covers the order-4 needs).
    // Weights sum to 1/6 (reference tet volume).
    struct Orbit {
      double a, w;
      int type;  // 0: (a,a,a,b) 4 perms, 1: (a,a,b,b) 6 perms
    };
    const Orbit orbits[] = {
        {0.31088591926330003, 0.018781320953002642, 0},
        {0.09273525031089123, 0.012248840519393658, 0},
        {0.04550370412564965, 0.007091003462846911, 1},
    };
    for (const auto& ob : orbits) {
      if (ob.type == 0) {
        const double a = ob.a, b = 1.0 - 3.0 * a;
        const double bc[4][4] = {{b, a, a, a}, {a, b, a, a}, {a, a, b, a}, {a, a, a, b}};
        for (auto& p : bc) nodes.push_back({p[1], p[2], p[3], ob.w});
      } else {
        const double a = ob.a, b = 0.5 - a;
        const double bc[6][4] = {{a, a, b, b}, {a, b, a, b}, {a, b, b, a},
                                 {b, a, a, b}, {b, a, b, a}, {b, b, a, a}};
        for (auto& p : bc) nodes.push_back({p[1], p[2], p[3], ob.w});
      }
    }
  }
  return nodes;
}

std::vector<PanelPairNode> sauter_schwab_rule(int n_common, int order) {
  if (order < 1) throw std::invalid_argument("sauter_schwab_rule: order must be >= 1");
  const GaussRule1D g = gauss_legendre_01(order);
  std::vector<PanelPairNode> rule;

  // Regularizing coordinate transforms from Sauter & Schwab. Points are
  // produced in coordinates with 0 <= x2 <= x1 <= 1 and shifted to the
  // reference triangle via u = x1 - x2, v = x2.
  auto push = [&rule](double a1, double a2, double b1, double b2, double w) {
    rule.push_back({a1 - a2, a2, b1 - b2, b2, w});
  };

  for (int iw = 0; iw < order; ++iw)
    for (int i3 = 0; i3 < order; ++i3)
      for (int i2 = 0; i2 < order; ++i2)
        for (int i1 = 0; i1 < order; ++i1) {
          const double xi = g.x[iw], e1 = g.x[i1], e2 = g.x[i2], e3 = g.x[i3];
          const double wbase = g.w[iw] * g.w[i1] * g.w[i2] * g.w[i3];
          const double xi3 = xi * xi * xi;
          if (n_common == 3) {
            const double lw = wbase * xi3 * e1 * e1 * e2;
            push(xi, xi * (1 - e1 + e1 * e2), xi * (1 - e1 * e2 * e3), xi * (1 - e1), lw);
            push(xi * (1 - e1 * e2 * e3), xi * (1 - e1), xi, xi * (1 - e1 + e1 * e2), lw);
            push(xi, xi * e1 * (1 - e2 + e2 * e3), xi * (1 - e1 * e2), xi * e1 * (1 - e2), lw);
            push(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * (1 - e2 + e2 * e3), lw);
            push(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * (1 - e2), lw);
            push(xi, xi * e1 * (1 - e2), xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), lw);
          } else if (n_common == 2) {
            const double lw = wbase * xi3 * e1 * e1 * e2;
            push(xi, xi * e1 * e3, xi * (1 - e1 * e2), xi * e1 * (1 - e2), wbase * xi3 * e1 * e1);
            push(xi, xi * e1, xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), lw);
            push(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * e2 * e3, lw);
            push(xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), xi, xi * e1, lw);
            push(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * e2, lw);
          } else if (n_common == 1) {
            const double lw = wbase * xi3 * e2;
            push(xi, xi * e1, xi * e2, xi * e2 * e3, lw);
            push(xi * e2, xi * e2 * e3, xi, xi * e1, lw);
          } else {
            throw std::invalid_argument("sauter_schwab_rule: n_common must be 1, 2 or 3");
          }
        }
  return rule;
}

std::vector<PanelPairNode> disjoint_pair_rule(int n_per_dim) {
  const auto tri = tri_rule(n_per_dim);
  std::vector<PanelPairNode> rule;
  rule.reserve(tri.size() * tri.size());
  for (const auto& a : tri)
    for (const auto& b : tri) rule.push_back({a.u, a.v, b.u, b.v, a.w * b.w});
  return rule;
}

}  // namespace hodge
