// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hodge {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CSparse = Eigen::SparseMatrix<Complex>;
using RSparse = Eigen::SparseMatrix<double>;

constexpr Complex I_UNIT{0.0, 1.0};

/// Unconjugated dot product (Eigen's .dot conjugates the first factor).
template <typename A, typename B>
inline Complex cdot(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return Complex(a(0)) * Complex(b(0)) + Complex(a(1)) * Complex(b(1)) + Complex(a(2)) * Complex(b(2));
}
inline Complex bdot(const CVector& a, const CVector& b) { return (a.array() * b.array()).sum(); }
inline CVec3 ccross(const CVec3& a, const CVec3& b) {
  return CVec3(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0));
}

/// Number of worker threads honoring HODGE_COUPLE_DETERMINISTIC and an
/// explicit request (0 = auto).
inline int effective_threads(int requested = 0) {
  if (const char* env = std::getenv("HODGE_COUPLE_DETERMINISTIC"); env && env[0] == '1') return 1;
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Chunked parallel loop over [0, n). Each worker owns a contiguous index
// range, so writes to disjoint rows are race-free and the result does not
// depend on the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn,
                         int requested_threads = 0) {
  const int nt = effective_threads(requested_threads);
  if (nt <= 1 || n < 2) {
    chunk_fn(0, n);
    return;
  }
  std::vector<std::thread> workers;
  const std::size_t per = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const std::size_t lo = std::min(n, t * per), hi = std::min(n, (t + 1) * per);
    if (lo >= hi) break;
    workers.emplace_back(chunk_fn, lo, hi);
  }
  for (auto& w : workers) w.join();
}

}  // namespace hodge
