// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hodge/common.hpp"
#include "hodge/fem.hpp"

namespace hodge {

/// Fundamental-solution kernels for the scaled Hodge-Helmholtz operator:
///   G_nu(d)      = exp(i nu |d|) / (4 pi |d|)
///   Gtilde       = (G_kappa - G_kappa_tilde) / kappa^2
///   matG         = G_kappa Id + hess(Gtilde)
///
/// Gtilde contains an x-independent term i(kappa - kappa_tilde)/(4 pi kappa^2)
/// that blows up as kappa -> 0 but is annihilated by differentiation; only
/// derivatives (and the constant-removed value) are exposed. Small |kappa| r
/// is evaluated by a Taylor series in powers of kappa r; the closed-form
/// branch groups terms through exp(z)-1-... differences so both branches stay
/// accurate near the threshold. At kappa == 0 the series yields the analytic
/// limit branch; eta == 1 forces all Gtilde quantities to exact zero.
class KernelEval {
 public:
  explicit KernelEval(const WaveContext& ctx, double series_threshold = 1e-2, int series_terms = 12);

  const WaveContext& ctx() const { return ctx_; }

  static Complex eval_G(Complex nu, const Vec3& d);
  static CVec3 eval_gradG(Complex nu, const Vec3& d);  // gradient in x of G(x - y)

  /// Radial derivatives g'(r), g''(r) and constant-removed value g*(r) of
  /// Gtilde; branch chosen by |kappa| r against the threshold.
  Complex gtilde_d1(double r) const;
  Complex gtilde_d2(double r) const;
  Complex gtilde_reduced(double r) const;

  CVec3 eval_gtilde_grad(const Vec3& d) const;
  CMat3 eval_gtilde_hess(const Vec3& d) const;
  CMat3 eval_matG(const Vec3& d) const;

  double series_threshold() const { return threshold_; }

  /// Relative mismatch of series vs closed form at |kappa| r = threshold
  /// (largest over d1/d2/reduced); the constructor enforces < 1e-12.
  double branch_self_test() const;

 private:
  Complex series_sum(double r, int dmode) const;  // dmode: 0 value*, 1 d1, 2 d2
  Complex closed_d1(double r) const;
  Complex closed_d2(double r) const;
  Complex closed_reduced(double r) const;

  WaveContext ctx_;
  double threshold_;
  int terms_;
  bool trivial_;  // eta == 1 or kappa == 0 with eta == 1: Gtilde identically 0
};

}  // namespace hodge
