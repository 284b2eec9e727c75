// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Desk scale: unit sphere levels 0-2.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "hodge/io.hpp"
#include "hodge/verify.hpp"

using namespace hodge;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int idx, bool pass, const std::string& label, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", idx, label.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// kappa = 1, eta = 2 reference context and its static counterpart
WaveContext ctx_k1() { return WaveContext(1.0 / std::pow(2.0, 0.25), std::sqrt(2.0), 1.0); }
WaveContext ctx_k0() { return WaveContext(0.0, std::sqrt(2.0), 1.0); }

}  // namespace

int main() {
  const WaveContext c1 = ctx_k1();
  const WaveContext c0 = ctx_k0();

  // ---- criterion 1: kernel branch consistency ------------------------------
  {
    Timer t;
    const KernelEval ker(c1);
    double worst = ker.branch_self_test();
    const KernelEval series_only(c1, 1e9, 16);
    const KernelEval closed_only(c1, 1e-12, 12);
    for (double f = 0.5; f <= 1.5001; f += 0.02) {
      const double r = f * ker.series_threshold() / std::abs(c1.kappa);
      for (int mode = 0; mode < 3; ++mode) {
        const Complex a = mode == 0 ? series_only.gtilde_reduced(r)
                                    : (mode == 1 ? series_only.gtilde_d1(r) : series_only.gtilde_d2(r));
        const Complex b = mode == 0 ? closed_only.gtilde_reduced(r)
                                    : (mode == 1 ? closed_only.gtilde_d1(r) : closed_only.gtilde_d2(r));
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
      }
    }
    const double sec = t.seconds();
    report(1, worst < 1e-11 && sec < 1.0, "kernel branch consistency",
           "max rel mismatch " + fmt(worst) + " (limit 1e-11), " + fmt(sec) + " s (limit 1 s)");
  }

  // Shared level data at kappa = 1 (reused by criteria 3, 4, 5, 6, 8).
  std::vector<ManufacturedLevel> lv1;
  for (int level : {0, 1, 2}) lv1.push_back(run_manufactured_level(level, c1));

  // ---- criterion 2: potential identities -----------------------------------
  {
    Timer t;
    const CoupledAssembly& A = *lv1[2].assembly;
    const IdentityReport rep = potential_identity_report(c1, *A.bsp);
    double worst_id = 0.0, worst_pde = 0.0;
    for (const auto& e : rep.entries) {
      if (e.name == "div_vectorSL_identity" || e.name == "curl_Upsilon_identity")
        worst_id = std::max(worst_id, e.residual);
      if (e.name == "SL_pde_residual" || e.name == "DL_pde_residual")
        worst_pde = std::max(worst_pde, e.residual);
    }
    const double sec = t.seconds();
    report(2, worst_id < 1e-6 && worst_pde < 1e-5 && sec < 30.0, "potential identities",
           "FD identities " + fmt(worst_id) + " (limit 1e-6), PDE residuals " + fmt(worst_pde) +
               " (limit 1e-5), " + fmt(sec) + " s (limit 30 s)");
  }

  // ---- criterion 3: jump relations over three levels ------------------------
  {
    Timer t;
    std::vector<JumpResiduals> res;
    for (int l = 0; l < 3; ++l) {
      const CoupledAssembly& A = *lv1[l].assembly;
      const KernelEval ker(c1);
      const BoundaryMass mass = boundary_mass(*A.bsp);
      res.push_back(jump_relation_residuals(*A.bsp, ker, mass, A.ops.Vv0, A.ops.Vs0, 4242u));
    }
    auto mono = [&](double JumpResiduals::*f) {
      return res[0].*f > res[1].*f && res[1].*f > res[2].*f;
    };
    const bool monotone = mono(&JumpResiduals::TD_SL) && mono(&JumpResiduals::TN_SL) &&
                          mono(&JumpResiduals::TN_DL) && mono(&JumpResiduals::TD_DL);
    const double final_worst = std::max({res[2].TD_SL, res[2].TN_SL, res[2].TN_DL, res[2].TD_DL});
    const double sec = t.seconds();
    report(3, monotone && final_worst < 5e-2 && sec < 300.0, "jump relations",
           std::string("monotone ") + (monotone ? "yes" : "NO") + ", final max " + fmt(final_worst) +
               " (limit 0.05), " + fmt(sec) + " s (limit 300 s)");
  }

  // ---- criterion 4: two-last-terms matrix identity ---------------------------
  {
    Timer t;
    const BemOperators& ops = lv1[2].assembly->ops;
    const CMatrix lhs = ops.Nt;
    const CMatrix rhs = ops.Bn.transpose() + CMatrix(ops.Ht.transpose());
    double worst = 0.0;
    std::srand(7);
    for (int trial = 0; trial < 4; ++trial) {
      CVector v(lhs.cols());
      for (int i = 0; i < v.size(); ++i)
        v[i] = Complex(2.0 * std::rand() / RAND_MAX - 1.0, 2.0 * std::rand() / RAND_MAX - 1.0);
      worst = std::max(worst, ((lhs - rhs) * v).norm() / (rhs * v).norm());
    }
    const double sec = t.seconds();
    report(4, worst < 1e-8 && sec < 60.0, "two-last-terms identity",
           "random-vector residual " + fmt(worst) + " (limit 1e-8), " + fmt(sec) + " s (limit 60 s)");
  }

  // ---- criterion 5: Calderon projector ---------------------------------------
  {
    Timer t;
    std::vector<double> proj, ann;
    PointSourceField inner;
    inner.ctx = c1;
    inner.x_grad = inner.x_curl = Vec3(1.8, 0.4, 0.7);
    inner.c = CVec3(Complex(0.3, 0.1), Complex(-0.45, 0.2), Complex(0.25, 0.0));
    for (int l = 0; l < 3; ++l) {
      const CoupledAssembly& A = *lv1[l].assembly;
      const BoundaryMass mass = boundary_mass(*A.bsp);
      proj.push_back(calderon_projector_residual(A.blocks, mass));
      ann.push_back(cauchy_annihilation_residual(A.blocks, mass, *A.bsp, inner, true));
    }
    const bool proj_ok = proj[0] > proj[1] && proj[1] > proj[2] && proj[2] < 0.15;
    const bool ann_ok = ann[0] > ann[1] && ann[1] > ann[2];
    const double sec = t.seconds();
    report(5, proj_ok && ann_ok && sec < 600.0, "Calderon projector",
           "residuals " + fmt(proj[0]) + " > " + fmt(proj[1]) + " > " + fmt(proj[2]) +
               " (limit 0.15); P+ annihilation " + fmt(ann[0]) + " > " + fmt(ann[1]) + " > " + fmt(ann[2]) +
               "; " + fmt(sec) + " s (limit 600 s)");
  }

  // ---- criterion 6: manufactured transmission convergence --------------------
  {
    Timer t;
    std::vector<ManufacturedLevel> lv0;
    for (int level : {0, 1, 2}) lv0.push_back(run_manufactured_level(level, c0));
    const double rate1 = std::log2(lv1[0].row.err_L2_U / lv1[2].row.err_L2_U) / 2.0;
    const double rate0 = std::log2(lv0[0].row.err_L2_U / lv0[2].row.err_L2_U) / 2.0;
    const double ext1 = lv1[2].row.err_exterior, ext0 = lv0[2].row.err_exterior;
    const double sec = t.seconds();
    report(6, rate1 >= 0.8 && rate0 >= 0.8 && ext1 < 0.02 && ext0 < 0.02 && sec < 900.0,
           "manufactured transmission convergence",
           "L2(U) rates kappa=1: " + fmt(rate1) + ", kappa=0: " + fmt(rate0) +
               " (limit 0.8); exterior errors " + fmt(ext1) + ", " + fmt(ext0) + " (limit 0.02); " +
               fmt(sec) + " s (limit 900 s)");
  }

  // ---- criterion 7: uniqueness smoke with variable coefficients --------------
  {
    const VolumeMesh mesh = gen_ball(1);
    MaterialField mat;
    mat.mu[0] = Complex(c1.mu0, 0.0);
    mat.eps[0] = Complex(2.0, 0.1) * c1.eps0;  // eps contrast 2 + 0.1i
    const CoupledAssembly A(mesh, mat, c1, PanelQuadrature{});
    CoupledSystem sys = assemble_system(A);
    const TransmissionData zero = TransmissionData::zero(*A.bsp);
    assemble_rhs(A, zero, sys);
    const Solution sol = solve(sys, A, zero);
    const double norm = sol.U.norm() + sol.P.norm() + sol.p.norm() + sol.q.norm();
    const double scale = std::sqrt(double(sys.dim()));
    report(7, norm < 1e-8 * scale && !sol.near_resonance, "uniqueness smoke (variable coefficients)",
           "solution norm " + fmt(norm) + " (limit " + fmt(1e-8 * scale) + ")");
  }

  // ---- criterion 8: inf-sup probe and resonance sweep -------------------------
  {
    Timer t;
    std::vector<double> sig;
    for (int l = 0; l < 3; ++l)
      sig.push_back(estimate_infsup(*lv1[l].assembly, lv1[l].sys, *lv1[l].ws));
    const bool stable = sig[1] > 0.5 * sig[0] && sig[2] > 0.5 * sig[0];

    std::vector<double> grid;
    for (double k2 = 0.4; k2 <= 9.0; k2 += 0.28) grid.push_back(k2);
    const std::vector<double> conds = resonance_sweep(gen_ball(1), 2.0, grid, PanelQuadrature{});
    std::vector<double> sorted = conds;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    int spikes = 0, max_run = 0, run = 0;
    for (double c : conds) {
      if (c > 10.0 * median) {
        ++spikes;
        ++run;
      } else {
        run = 0;
      }
      max_run = std::max(max_run, run);
    }
    const bool spikes_ok = spikes >= 1 && spikes <= static_cast<int>(0.4 * conds.size()) && max_run <= 3;
    const double sec = t.seconds();
    report(8, stable && spikes_ok, "inf-sup probe and resonance sweep",
           "sigma_min " + fmt(sig[0]) + ", " + fmt(sig[1]) + ", " + fmt(sig[2]) + " (floor " +
               fmt(0.5 * sig[0]) + "); spikes " + std::to_string(spikes) + "/" +
               std::to_string(conds.size()) + ", longest run " + std::to_string(max_run) + "; " + fmt(sec) +
               " s");
  }

  // ---- criterion 9: negative controls -----------------------------------------
  {
    Timer t;
    const VolumeMesh mesh = gen_ball(1);
    Sabotage flip_o;
    flip_o.flip_orientation = true;
    Sabotage flip_j;
    flip_j.flip_jump_sign = true;
    Sabotage drop_h;
    drop_h.drop_Htilde = true;
    std::vector<std::string> broken;
    bool all_detected = true;
    for (const auto& [sab, name] : {std::pair{flip_o, "orientation flip"}, std::pair{flip_j, "jump-sign flip"},
                                    std::pair{drop_h, "Htilde omission"}}) {
      const IdentityReport rep = run_identity_suite(c1, mesh, sab);
      int failed = 0;
      std::string first;
      for (const auto& e : rep.entries)
        if (!e.pass) {
          ++failed;
          if (first.empty()) first = e.name;
        }
      if (failed == 0) all_detected = false;
      broken.push_back(std::string(name) + " -> " + (failed ? first : "NOT DETECTED") + " (" +
                       std::to_string(failed) + " tests)");
    }
    const double sec = t.seconds();
    report(9, all_detected, "negative controls",
           broken[0] + "; " + broken[1] + "; " + broken[2] + "; " + fmt(sec) + " s");
  }

  // ---- criterion 10: determinism ----------------------------------------------
  {
    RunConfig cfg;
    cfg.omega = c1.omega;
    cfg.eps0 = c1.eps0;
    cfg.mu0 = c1.mu0;
    cfg.materials = MaterialField::constant(c1.mu0, c1.eps0);
    cfg.levels = {0, 1};
    cfg.out_dir = "acceptance_out";
    cfg.prefix = "det";
    cmd_convergence(cfg);
    std::ifstream f1("acceptance_out/det_convergence.csv", std::ios::binary);
    std::stringstream s1;
    s1 << f1.rdbuf();
    cmd_convergence(cfg);
    std::ifstream f2("acceptance_out/det_convergence.csv", std::ios::binary);
    std::stringstream s2;
    s2 << f2.rdbuf();
    const bool same = !s1.str().empty() && s1.str() == s2.str();
    std::filesystem::remove_all("acceptance_out");
    report(10, same, "determinism", same ? "byte-identical CSV across two runs" : "outputs differ");
  }

  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
