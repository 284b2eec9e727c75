// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "hodge/common.hpp"

namespace hodge {

/// Tetrahedral mesh of the scatterer. All tets are positively oriented and
/// every interior face is shared by exactly two tets; construction-time
/// validation enforces this.
struct VolumeMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  std::vector<int> region_tag;  // material region per tet

  double tet_volume(int t) const;
  double bbox_diagonal() const;
  double total_volume() const;

  /// Throws std::runtime_error when an invariant is violated.
  void validate() const;
};

/// Oriented boundary triangulation sharing the parent mesh's vertex index
/// space. Normals point out of the enclosed volume; triangle winding follows
/// the right-hand rule with respect to the normal.
struct BoundaryMesh {
  const VolumeMesh* parent = nullptr;
  std::vector<Vec3> vertices;  // copy of parent vertices (shared index space)
  std::vector<std::array<int, 3>> tris;
  std::vector<Vec3> normals;
  std::vector<double> areas;
  std::vector<Vec3> centroids;

  double total_area() const;
  double max_diameter() const;  // mesh width h
  int component_count() const;  // connected components by edge adjacency
  void flip_orientation();      // test sabotage helper: reverses normals/winding
};

VolumeMesh gen_cube(int n);
VolumeMesh gen_ball(int level);
VolumeMesh refine_uniform(const VolumeMesh& mesh);
VolumeMesh load_gmsh(const std::string& path);

BoundaryMesh extract_boundary(const VolumeMesh& mesh);

}  // namespace hodge
