// SPDX-License-Identifier: Apache-2.0
#include "hodge/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hodge {

namespace {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

// Ensure positive orientation by swapping the last two vertices.
void fix_orientation(const std::vector<Vec3>& verts, std::array<int, 4>& t) {
  if (signed_volume(verts[t[0]], verts[t[1]], verts[t[2]], verts[t[3]]) < 0.0) std::swap(t[2], t[3]);
}

std::array<int, 3> sorted_face(int a, int b, int c) {
  std::array<int, 3> f{a, b, c};
  std::sort(f.begin(), f.end());
  return f;
}

// Local faces, each wound so its normal points away from the opposite vertex
// of a positively oriented tet.
constexpr int kFaceVerts[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

}  // namespace

double VolumeMesh::tet_volume(int t) const {
  const auto& T = tets[t];
  return signed_volume(vertices[T[0]], vertices[T[1]], vertices[T[2]], vertices[T[3]]);
}

double VolumeMesh::bbox_diagonal() const {
  Vec3 lo = vertices.front(), hi = vertices.front();
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

double VolumeMesh::total_volume() const {
  double vol = 0.0;
  for (std::size_t t = 0; t < tets.size(); ++t) vol += tet_volume(static_cast<int>(t));
  return vol;
}

void VolumeMesh::validate() const {
  if (vertices.empty() || tets.empty()) throw std::runtime_error("mesh: empty mesh");
  if (region_tag.size() != tets.size()) throw std::runtime_error("mesh: region_tag size mismatch");
  for (std::size_t t = 0; t < tets.size(); ++t) {
    for (int v : tets[t])
      if (v < 0 || v >= static_cast<int>(vertices.size()))
        throw std::runtime_error("mesh: vertex index out of range in tet " + std::to_string(t));
    if (tet_volume(static_cast<int>(t)) <= 0.0)
      throw std::runtime_error("mesh: non-positive tet volume in tet " + std::to_string(t));
  }
  // Duplicate vertices: tolerance relative to the bounding-box diagonal.
  const double tol = 1e-12 * bbox_diagonal();
  std::vector<int> order(vertices.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return vertices[a].x() < vertices[b].x(); });
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (vertices[order[j]].x() - vertices[order[i]].x() > tol) break;
      if ((vertices[order[i]] - vertices[order[j]]).norm() <= tol)
        throw std::runtime_error("mesh: duplicate vertices " + std::to_string(order[i]) + ", " +
                                 std::to_string(order[j]));
    }
  // Face adjacency counts.
  std::map<std::array<int, 3>, int> count;
  for (const auto& T : tets)
    for (const auto& fv : kFaceVerts) ++count[sorted_face(T[fv[0]], T[fv[1]], T[fv[2]])];
  for (const auto& [f, c] : count)
    if (c > 2)
      throw std::runtime_error("mesh: non-manifold face shared by " + std::to_string(c) + " tets");
}

double BoundaryMesh::total_area() const {
  double a = 0.0;
  for (double s : areas) a += s;
  return a;
}

double BoundaryMesh::max_diameter() const {
  double h = 0.0;
  for (const auto& T : tris)
    for (int k = 0; k < 3; ++k)
      h = std::max(h, (vertices[T[k]] - vertices[T[(k + 1) % 3]]).norm());
  return h;
}

int BoundaryMesh::component_count() const {
  std::vector<int> root(tris.size());
  std::iota(root.begin(), root.end(), 0);
  std::function<int(int)> find = [&](int x) { return root[x] == x ? x : root[x] = find(root[x]); };
  std::map<std::array<int, 2>, int> edge_owner;
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int k = 0; k < 3; ++k) {
      int a = tris[t][k], b = tris[t][(k + 1) % 3];
      std::array<int, 2> e{std::min(a, b), std::max(a, b)};
      auto [it, fresh] = edge_owner.emplace(e, static_cast<int>(t));
      if (!fresh) root[find(it->second)] = find(static_cast<int>(t));
    }
  int n = 0;
  for (std::size_t t = 0; t < tris.size(); ++t)
    if (find(static_cast<int>(t)) == static_cast<int>(t)) ++n;
  return n;
}

void BoundaryMesh::flip_orientation() {
  for (auto& T : tris) std::swap(T[1], T[2]);
  for (auto& n : normals) n = -n;
}

VolumeMesh gen_cube(int n) {
  if (n < 1) throw std::invalid_argument("gen_cube: n must be >= 1");
  VolumeMesh mesh;
  const int nv = n + 1;
  auto vid = [&](int i, int j, int k) { return (i * nv + j) * nv + k; };
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nv; ++j)
      for (int k = 0; k < nv; ++k)
        mesh.vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);

  // Kuhn split: six tets per cell along the main diagonal, one per axis
  // permutation. Face-compatible across cells.
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (const auto& p : perms) {
          int c[3] = {i, j, k};
          std::array<int, 4> tet;
          tet[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            tet[s + 1] = vid(c[0], c[1], c[2]);
          }
          fix_orientation(mesh.vertices, tet);
          mesh.tets.push_back(tet);
          mesh.region_tag.push_back(1);
        }
  return mesh;
}

namespace {

// Geodesic sphere: icosahedron refined `level` times, vertices projected to
// the unit sphere. Returns vertices and CCW-from-outside triangles.
void geodesic_sphere(int level, std::vector<Vec3>& verts, std::vector<std::array<int, 3>>& tris) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::array<int, 2>, int> midpoint;
    auto mid = [&](int a, int b) {
      std::array<int, 2> key{std::min(a, b), std::max(a, b)};
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (v[a] + v[b]).normalized();
      v.push_back(m);
      int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(4 * f.size());
    for (const auto& T : f) {
      int m01 = mid(T[0], T[1]), m12 = mid(T[1], T[2]), m02 = mid(T[0], T[2]);
      nf.push_back({T[0], m01, m02});
      nf.push_back({T[1], m12, m01});
      nf.push_back({T[2], m02, m12});
      nf.push_back({m01, m12, m02});
    }
    f.swap(nf);
  }
  verts.swap(v);
  tris.swap(f);
}

}  // namespace

VolumeMesh gen_ball(int level) {
  if (level < 0) throw std::invalid_argument("gen_ball: level must be >= 0");
  std::vector<Vec3> sv;
  std::vector<std::array<int, 3>> st;
  geodesic_sphere(level, sv, st);
  const int nsv = static_cast<int>(sv.size());
  const int nshell = 1 << level;  // radial layers match the angular width

  VolumeMesh mesh;
  mesh.vertices.emplace_back(0, 0, 0);  // center = vertex 0
  for (int s = 1; s <= nshell; ++s) {
    const double r = double(s) / nshell;
    for (const auto& p : sv) mesh.vertices.push_back(r * p);
  }
  auto shell_id = [&](int s, int k) { return 1 + (s - 1) * nsv + k; };

  auto add = [&](std::array<int, 4> t) {
    fix_orientation(mesh.vertices, t);
    mesh.tets.push_back(t);
    mesh.region_tag.push_back(1);
  };

  // Innermost shell coned to the center.
  for (const auto& T : st) add({0, shell_id(1, T[0]), shell_id(1, T[1]), shell_id(1, T[2])});

  // Prisms between consecutive shells, split into three tets. Sorting the
  // prism corners by global index makes the quad-face diagonals ((p0,q1),
  // (p0,q2), (p1,q2)) consistent between neighboring prisms.
  for (int s = 1; s < nshell; ++s)
    for (const auto& T : st) {
      int loc[3] = {T[0], T[1], T[2]};
      std::sort(loc, loc + 3);
      const int p0 = shell_id(s, loc[0]), p1 = shell_id(s, loc[1]), p2 = shell_id(s, loc[2]);
      const int q0 = shell_id(s + 1, loc[0]), q1 = shell_id(s + 1, loc[1]), q2 = shell_id(s + 1, loc[2]);
      add({p0, p1, p2, q2});
      add({p0, p1, q2, q1});
      add({p0, q1, q2, q0});
    }
  return mesh;
}

VolumeMesh refine_uniform(const VolumeMesh& mesh) {
  VolumeMesh out;
  out.vertices = mesh.vertices;
  std::map<std::array<int, 2>, int> midpoint;
  auto mid = [&](int a, int b) {
    std::array<int, 2> key{std::min(a, b), std::max(a, b)};
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    out.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
    int id = static_cast<int>(out.vertices.size()) - 1;
    midpoint.emplace(key, id);
    return id;
  };
  auto add = [&](std::array<int, 4> t, int tag) {
    fix_orientation(out.vertices, t);
    out.tets.push_back(t);
    out.region_tag.push_back(tag);
  };
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& T = mesh.tets[t];
    const int tag = mesh.region_tag[t];
    const int m01 = mid(T[0], T[1]), m02 = mid(T[0], T[2]), m03 = mid(T[0], T[3]);
    const int m12 = mid(T[1], T[2]), m13 = mid(T[1], T[3]), m23 = mid(T[2], T[3]);
    // Bey red refinement: four corner tets plus the octahedron split along
    // the m02-m13 diagonal.
    add({T[0], m01, m02, m03}, tag);
    add({T[1], m01, m12, m13}, tag);
    add({T[2], m02, m12, m23}, tag);
    add({T[3], m03, m13, m23}, tag);
    add({m01, m02, m03, m13}, tag);
    add({m01, m02, m12, m13}, tag);
    add({m02, m03, m13, m23}, tag);
    add({m02, m12, m13, m23}, tag);
  }
  return out;
}

VolumeMesh load_gmsh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_gmsh: cannot open " + path);
  VolumeMesh mesh;
  std::string line;
  int lineno = 0;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) throw std::runtime_error("load_gmsh: unexpected EOF reading " + std::string(what));
    ++lineno;
    return line;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("$MeshFormat", 0) == 0) {
      std::istringstream fmt(next_line("format"));
      double version = 0;
      int file_type = -1, data_size = 0;
      fmt >> version >> file_type >> data_size;
      if (std::abs(version - 2.2) > 1e-9 || file_type != 0)
        throw std::runtime_error("load_gmsh: unsupported format version at line " + std::to_string(lineno) +
                                 " (need 2.2 ASCII)");
      next_line("$EndMeshFormat");
    } else if (line.rfind("$Nodes", 0) == 0) {
      const int n = std::stoi(next_line("node count"));
      mesh.vertices.resize(n);
      for (int i = 0; i < n; ++i) {
        std::istringstream ls(next_line("node"));
        int id;
        double x, y, z;
        if (!(ls >> id >> x >> y >> z) || id < 1 || id > n)
          throw std::runtime_error("load_gmsh: bad node at line " + std::to_string(lineno));
        mesh.vertices[id - 1] = Vec3(x, y, z);
      }
      next_line("$EndNodes");
    } else if (line.rfind("$Elements", 0) == 0) {
      const int n = std::stoi(next_line("element count"));
      for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line))
          throw std::runtime_error("load_gmsh: $Elements count mismatch at line " + std::to_string(lineno) +
                                   " (expected " + std::to_string(n) + " elements)");
        ++lineno;
        if (line.rfind("$EndElements", 0) == 0)
          throw std::runtime_error("load_gmsh: $Elements count mismatch at line " + std::to_string(lineno));
        std::istringstream ls(line);
        int id, type, ntags;
        ls >> id >> type >> ntags;
        std::vector<int> tags(ntags);
        for (int& t : tags) ls >> t;
        if (type == 4) {
          std::array<int, 4> tet;
          for (int& v : tet) {
            if (!(ls >> v)) throw std::runtime_error("load_gmsh: bad tet at line " + std::to_string(lineno));
            --v;  // 1-indexed
          }
          if (signed_volume(mesh.vertices[tet[0]], mesh.vertices[tet[1]], mesh.vertices[tet[2]],
                            mesh.vertices[tet[3]]) == 0.0)
            throw std::runtime_error("load_gmsh: degenerate tet at line " + std::to_string(lineno));
          fix_orientation(mesh.vertices, tet);
          mesh.tets.push_back(tet);
          mesh.region_tag.push_back(ntags > 0 ? tags[0] : 1);
        }
        // type 2 (surface triangles) and others: skipped, boundary is recomputed
      }
      next_line("$EndElements");
      if (line.rfind("$EndElements", 0) != 0)
        throw std::runtime_error("load_gmsh: $Elements count mismatch at line " + std::to_string(lineno));
    }
  }
  if (mesh.tets.empty()) throw std::runtime_error("load_gmsh: no tetrahedra in " + path);
  mesh.validate();
  return mesh;
}

BoundaryMesh extract_boundary(const VolumeMesh& mesh) {
  struct FaceInfo {
    int count = 0;
    int tet = -1;
    std::array<int, 3> wound{};  // winding with outward normal for its tet
  };
  std::map<std::array<int, 3>, FaceInfo> faces;
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& T = mesh.tets[t];
    for (const auto& fv : kFaceVerts) {
      std::array<int, 3> wound{T[fv[0]], T[fv[1]], T[fv[2]]};
      auto& info = faces[sorted_face(wound[0], wound[1], wound[2])];
      ++info.count;
      if (info.count == 1) {
        info.tet = static_cast<int>(t);
        info.wound = wound;
      }
      if (info.count > 2) throw std::runtime_error("extract_boundary: non-manifold face");
    }
  }
  BoundaryMesh bnd;
  bnd.parent = &mesh;
  bnd.vertices = mesh.vertices;
  for (const auto& [key, info] : faces) {
    if (info.count != 1) continue;
    const auto& w = info.wound;
    const Vec3 a = mesh.vertices[w[0]], b = mesh.vertices[w[1]], c = mesh.vertices[w[2]];
    Vec3 nrm = (b - a).cross(c - a);
    const double area2 = nrm.norm();
    if (area2 <= 0.0) throw std::runtime_error("extract_boundary: degenerate boundary face");
    bnd.tris.push_back(w);
    bnd.normals.push_back(nrm / area2);
    bnd.areas.push_back(0.5 * area2);
    bnd.centroids.push_back((a + b + c) / 3.0);
  }
  return bnd;
}

}  // namespace hodge
