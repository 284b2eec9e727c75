// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hodge/verify.hpp"

namespace hodge {

/// Batch-run configuration, parsed from strict JSON (unknown keys rejected,
/// complex numbers as [re, im] pairs).
struct RunConfig {
  // mesh
  std::string generator = "ball";  // "cube" | "ball" | "" (file)
  int mesh_param = 1;
  std::string mesh_file;
  int refine = 0;

  // physics
  double omega = 0.0, eps0 = 1.0, mu0 = 1.0;
  MaterialField materials = MaterialField::constant(1.0, 1.0);

  // data
  std::string family = "zero";  // "zero" | "manufactured" | "source_constant"
  CVec3 J_const = CVec3::Zero();

  // quadrature overrides
  int singular_order = 5, regular_order = 4;

  // outputs
  std::string out_dir = ".";
  std::string prefix = "hodge";

  // mode-specific
  std::vector<int> levels = {0, 1, 2};
  Vec3 grid_min = Vec3(-2, -2, -2), grid_max = Vec3(2, 2, 2);
  int grid_n[3] = {8, 8, 8};

  int threads = 0;
  unsigned seed = 1234;

  WaveContext wave() const { return WaveContext(omega, eps0, mu0); }
  VolumeMesh build_mesh() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& json_text);

/// CSV helpers (RFC 4180, "\r\n" line endings, %.17g numbers).
std::string format_double(double v);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_vtk_volume(const std::string& path, const VolumeMesh& mesh, const EdgeSpace& edge,
                      const CVector& U, const CVector& P);
void write_vtk_structured(const std::string& path, const Vec3& origin, const Vec3& spacing, const int n[3],
                          const std::vector<CVec3>& field, const std::vector<int>& near_mask);

/// Subcommand drivers; each returns a process exit code.
int cmd_solve(const RunConfig& cfg, const std::string& dump_dir = "");
int cmd_verify(const RunConfig& cfg);
int cmd_convergence(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);

std::vector<std::vector<std::string>> convergence_csv_rows(const ConvergenceReport& rep);
extern const std::vector<std::string> kConvergenceHeader;

}  // namespace hodge
