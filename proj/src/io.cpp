// SPDX-License-Identifier: Apache-2.0
#include "hodge/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hodge {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw std::runtime_error("config: " + path + ": " + msg);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) config_error(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) config_error(path + "." + it.key(), "unknown key");
}

Complex parse_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    config_error(path, "complex values are [re, im] pairs");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

CVec3 parse_cvec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) config_error(path, "expected a 3-vector of [re, im] pairs");
  CVec3 v;
  for (int k = 0; k < 3; ++k) v[k] = parse_complex(j[k], path + "[" + std::to_string(k) + "]");
  return v;
}

Vec3 parse_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) config_error(path, "expected [x, y, z]");
  for (int k = 0; k < 3; ++k)
    if (!j[k].is_number()) config_error(path, "expected numeric entries");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: JSON parse error: ") + e.what());
  }
  RunConfig cfg;
  check_keys(j, "$", {"mesh", "physics", "data", "quadrature", "output", "levels", "grid", "threads", "seed"});

  if (j.contains("mesh")) {
    const auto& m = j["mesh"];
    check_keys(m, "$.mesh", {"generator", "param", "file", "refine"});
    if (m.contains("file")) {
      cfg.mesh_file = m["file"].get<std::string>();
      cfg.generator.clear();
    }
    if (m.contains("generator")) {
      cfg.generator = m["generator"].get<std::string>();
      if (cfg.generator != "cube" && cfg.generator != "ball")
        config_error("$.mesh.generator", "must be \"cube\" or \"ball\"");
    }
    if (m.contains("param")) cfg.mesh_param = m["param"].get<int>();
    if (m.contains("refine")) cfg.refine = m["refine"].get<int>();
  }

  if (j.contains("physics")) {
    const auto& p = j["physics"];
    check_keys(p, "$.physics", {"omega", "eps0", "mu0", "materials"});
    if (p.contains("omega")) cfg.omega = p["omega"].get<double>();
    if (p.contains("eps0")) cfg.eps0 = p["eps0"].get<double>();
    if (p.contains("mu0")) cfg.mu0 = p["mu0"].get<double>();
    if (cfg.omega < 0.0) config_error("$.physics.omega", "omega must be >= 0");
    if (cfg.eps0 <= 0.0 || cfg.mu0 <= 0.0) config_error("$.physics", "eps0 and mu0 must be positive");
    if (p.contains("materials")) {
      cfg.materials.mu.clear();
      cfg.materials.eps.clear();
      for (auto it = p["materials"].begin(); it != p["materials"].end(); ++it) {
        int region = 0;
        try {
          region = std::stoi(it.key());
        } catch (...) {
          config_error("$.physics.materials." + it.key(), "region keys are integers");
        }
        check_keys(it.value(), "$.physics.materials." + it.key(), {"eps", "mu"});
        cfg.materials.eps[region] = parse_complex(it.value().at("eps"), "$.physics.materials." + it.key() + ".eps");
        cfg.materials.mu[region] = parse_complex(it.value().at("mu"), "$.physics.materials." + it.key() + ".mu");
      }
    }
    try {
      cfg.materials.validate();
    } catch (const std::exception& e) {
      config_error("$.physics.materials", e.what());
    }
  }

  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, "$.data", {"family", "J"});
    if (d.contains("family")) cfg.family = d["family"].get<std::string>();
    if (cfg.family != "zero" && cfg.family != "manufactured" && cfg.family != "source_constant")
      config_error("$.data.family", "must be \"zero\", \"manufactured\" or \"source_constant\"");
    if (d.contains("J")) cfg.J_const = parse_cvec3(d["J"], "$.data.J");
  }

  if (j.contains("quadrature")) {
    const auto& q = j["quadrature"];
    check_keys(q, "$.quadrature", {"singular_order", "regular_order"});
    if (q.contains("singular_order")) cfg.singular_order = q["singular_order"].get<int>();
    if (q.contains("regular_order")) cfg.regular_order = q["regular_order"].get<int>();
  }

  if (j.contains("output")) {
    const auto& o = j["output"];
    check_keys(o, "$.output", {"dir", "prefix"});
    if (o.contains("dir")) cfg.out_dir = o["dir"].get<std::string>();
    if (o.contains("prefix")) cfg.prefix = o["prefix"].get<std::string>();
  }

  if (j.contains("levels")) {
    cfg.levels.clear();
    for (const auto& l : j["levels"]) cfg.levels.push_back(l.get<int>());
    if (cfg.levels.empty()) config_error("$.levels", "must be non-empty");
  }

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, "$.grid", {"min", "max", "n"});
    if (g.contains("min")) cfg.grid_min = parse_vec3(g["min"], "$.grid.min");
    if (g.contains("max")) cfg.grid_max = parse_vec3(g["max"], "$.grid.max");
    if (g.contains("n")) {
      const auto& n = g["n"];
      if (!n.is_array() || n.size() != 3) config_error("$.grid.n", "expected [nx, ny, nz]");
      for (int k = 0; k < 3; ++k) cfg.grid_n[k] = n[k].get<int>();
    }
  }

  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<unsigned>();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

VolumeMesh RunConfig::build_mesh() const {
  VolumeMesh m;
  if (!mesh_file.empty()) {
    m = load_gmsh(mesh_file);
  } else if (generator == "cube") {
    m = gen_cube(mesh_param);
  } else {
    m = gen_ball(mesh_param);
  }
  for (int r = 0; r < refine; ++r) m = refine_uniform(m);
  return m;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << csv_field(fields[i]);
    }
    out << "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void write_vtk_volume(const std::string& path, const VolumeMesh& mesh, const EdgeSpace& edge,
                      const CVector& U, const CVector& P) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_vtk_volume: cannot open " + path);
  out << "# vtk DataFile Version 2.0\nhodge-couple volume solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const auto& v : mesh.vertices)
    out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  out << "CELLS " << mesh.tets.size() << ' ' << 5 * mesh.tets.size() << '\n';
  for (const auto& t : mesh.tets) out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  out << "CELL_TYPES " << mesh.tets.size() << '\n';
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) out << "10\n";

  out << "POINT_DATA " << mesh.vertices.size() << '\n';
  out << "SCALARS P_re double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < P.size(); ++v) out << format_double(P[v].real()) << '\n';
  out << "SCALARS P_im double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < P.size(); ++v) out << format_double(P[v].imag()) << '\n';

  out << "CELL_DATA " << mesh.tets.size() << '\n';
  out << "VECTORS U_re double\n";
  std::vector<CVec3> cell_vals(mesh.tets.size());
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& T = mesh.tets[t];
    const Vec3 c = 0.25 * (mesh.vertices[T[0]] + mesh.vertices[T[1]] + mesh.vertices[T[2]] + mesh.vertices[T[3]]);
    cell_vals[t] = edge.eval(U, static_cast<int>(t), c);
  }
  for (const auto& v : cell_vals)
    out << format_double(v[0].real()) << ' ' << format_double(v[1].real()) << ' ' << format_double(v[2].real())
        << '\n';
  out << "VECTORS U_im double\n";
  for (const auto& v : cell_vals)
    out << format_double(v[0].imag()) << ' ' << format_double(v[1].imag()) << ' ' << format_double(v[2].imag())
        << '\n';
}

void write_vtk_structured(const std::string& path, const Vec3& origin, const Vec3& spacing, const int n[3],
                          const std::vector<CVec3>& field, const std::vector<int>& near_mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_vtk_structured: cannot open " + path);
  out << "# vtk DataFile Version 2.0\nhodge-couple exterior field\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
  out << "ORIGIN " << format_double(origin[0]) << ' ' << format_double(origin[1]) << ' '
      << format_double(origin[2]) << '\n';
  out << "SPACING " << format_double(spacing[0]) << ' ' << format_double(spacing[1]) << ' '
      << format_double(spacing[2]) << '\n';
  out << "POINT_DATA " << field.size() << '\n';
  out << "VECTORS U_re double\n";
  for (const auto& v : field)
    out << format_double(v[0].real()) << ' ' << format_double(v[1].real()) << ' ' << format_double(v[2].real())
        << '\n';
  out << "VECTORS U_im double\n";
  for (const auto& v : field)
    out << format_double(v[0].imag()) << ' ' << format_double(v[1].imag()) << ' ' << format_double(v[2].imag())
        << '\n';
  out << "SCALARS near_surface int 1\nLOOKUP_TABLE default\n";
  for (int m : near_mask) out << m << '\n';
}

namespace {

TransmissionData build_data(const RunConfig& cfg, const CoupledAssembly& A) {
  if (cfg.family == "manufactured") return make_manufactured_problem(*A.bsp, A.ctx).data;
  TransmissionData d = TransmissionData::zero(*A.bsp);
  if (cfg.family == "source_constant") {
    const CVec3 Jc = cfg.J_const;
    d.J = [Jc](const Vec3&) { return Jc; };
  }
  return d;
}

std::string out_path(const RunConfig& cfg, const std::string& suffix) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / (cfg.prefix + suffix)).string();
}

void dump_matrix(const std::string& path, const CMatrix& M) {
  std::ofstream out(path, std::ios::binary);
  out << M.rows() << ' ' << M.cols() << '\n';
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(M(i, j).real()) << ' ' << format_double(M(i, j).imag());
    }
    out << '\n';
  }
}

}  // namespace

int cmd_solve(const RunConfig& cfg, const std::string& dump_dir) {
  const VolumeMesh mesh = cfg.build_mesh();
  const PanelQuadrature quad(cfg.singular_order, cfg.regular_order);
  const CoupledAssembly A(mesh, cfg.materials, cfg.wave(), quad, cfg.threads);
  CoupledSystem sys = assemble_system(A);
  const TransmissionData data = build_data(cfg, A);
  assemble_rhs(A, data, sys);
  const Solution sol = solve(sys, A, data);

  if (!dump_dir.empty()) {
    std::filesystem::create_directories(dump_dir);
    dump_matrix((std::filesystem::path(dump_dir) / "ADD.txt").string(), A.blocks.ADD);
    dump_matrix((std::filesystem::path(dump_dir) / "AND.txt").string(), A.blocks.AND_);
    dump_matrix((std::filesystem::path(dump_dir) / "ADN.txt").string(), A.blocks.ADN);
    dump_matrix((std::filesystem::path(dump_dir) / "ANN.txt").string(), A.blocks.ANN);
    dump_matrix((std::filesystem::path(dump_dir) / "G.txt").string(), sys.G);
  }

  write_vtk_volume(out_path(cfg, "_solution.vtk"), mesh, *A.edge, sol.U, sol.P);

  std::vector<std::vector<std::string>> rows;
  for (int e = 0; e < sol.p.size(); ++e)
    rows.push_back({"p", std::to_string(e), format_double(sol.p[e].real()), format_double(sol.p[e].imag())});
  for (int t = 0; t < sol.q.size(); ++t)
    rows.push_back({"q", std::to_string(t), format_double(sol.q[t].real()), format_double(sol.q[t].imag())});
  for (int e = 0; e < sol.dir_eta.size(); ++e)
    rows.push_back(
        {"eta", std::to_string(e), format_double(sol.dir_eta[e].real()), format_double(sol.dir_eta[e].imag())});
  for (int k = 0; k < sol.dir_xi.size(); ++k)
    rows.push_back(
        {"xi", std::to_string(k), format_double(sol.dir_xi[k].real()), format_double(sol.dir_xi[k].imag())});
  write_csv(out_path(cfg, "_traces.csv"), {"component", "dof", "re", "im"}, rows);

  std::ofstream log(out_path(cfg, "_residual.txt"), std::ios::binary);
  log << "residual " << format_double(sol.residual) << "\n";
  log << "condition_estimate " << format_double(sol.condition_estimate) << "\n";
  if (sol.near_resonance) log << "warning near-resonance or discretization breakdown\n";
  return sol.residual < 1e-10 ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg) {
  const VolumeMesh mesh = cfg.build_mesh();
  const IdentityReport rep = run_identity_suite(cfg.wave(), mesh, {}, cfg.threads);

  std::vector<std::vector<std::string>> rows;
  std::ofstream txt(out_path(cfg, "_verify.txt"), std::ios::binary);
  for (const auto& e : rep.entries) {
    txt << (e.pass ? "PASS" : "FAIL") << ' ' << e.name << " residual " << format_double(e.residual)
        << " tol " << format_double(e.tol) << "\n";
    rows.push_back({e.name, format_double(e.residual), format_double(e.tol), e.pass ? "1" : "0"});
  }
  write_csv(out_path(cfg, "_verify.csv"), {"identity", "residual", "tol", "pass"}, rows);
  for (const auto& e : rep.entries)
    std::cout << (e.pass ? "PASS " : "FAIL ") << e.name << " (residual " << e.residual << ", tol " << e.tol
              << ")\n";
  return rep.all_pass() ? 0 : 1;
}

const std::vector<std::string> kConvergenceHeader = {"level",     "h",          "dofs",      "err_L2_U",
                                                     "err_Hcurl_U", "err_H1_P", "err_traceN", "rate_L2_U",
                                                     "rate_Hcurl_U", "rate_H1_P", "rate_traceN"};

std::vector<std::vector<std::string>> convergence_csv_rows(const ConvergenceReport& rep) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    rows.push_back({std::to_string(r.level), format_double(r.h), std::to_string(r.dofs),
                    format_double(r.err_L2_U), format_double(r.err_Hcurl_U), format_double(r.err_H1_P),
                    format_double(r.err_traceN),
                    format_double(rep.rate(static_cast<int>(i), &ConvergenceRow::err_L2_U)),
                    format_double(rep.rate(static_cast<int>(i), &ConvergenceRow::err_Hcurl_U)),
                    format_double(rep.rate(static_cast<int>(i), &ConvergenceRow::err_H1_P)),
                    format_double(rep.rate(static_cast<int>(i), &ConvergenceRow::err_traceN))});
  }
  return rows;
}

int cmd_convergence(const RunConfig& cfg) {
  const ConvergenceReport rep = manufactured_transmission(cfg.levels, cfg.wave(), cfg.threads);
  write_csv(out_path(cfg, "_convergence.csv"), kConvergenceHeader, convergence_csv_rows(rep));
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  const VolumeMesh mesh = cfg.build_mesh();
  const PanelQuadrature quad(cfg.singular_order, cfg.regular_order);
  const CoupledAssembly A(mesh, cfg.materials, cfg.wave(), quad, cfg.threads);
  CoupledSystem sys = assemble_system(A);
  const TransmissionData data = build_data(cfg, A);
  assemble_rhs(A, data, sys);
  const Solution sol = solve(sys, A, data);

  std::vector<Vec3> pts;
  Vec3 spacing;
  for (int k = 0; k < 3; ++k)
    spacing[k] = cfg.grid_n[k] > 1 ? (cfg.grid_max[k] - cfg.grid_min[k]) / (cfg.grid_n[k] - 1) : 1.0;
  for (int kz = 0; kz < cfg.grid_n[2]; ++kz)
    for (int ky = 0; ky < cfg.grid_n[1]; ++ky)
      for (int kx = 0; kx < cfg.grid_n[0]; ++kx)
        pts.push_back(cfg.grid_min + Vec3(kx * spacing[0], ky * spacing[1], kz * spacing[2]));

  const EvaluationGrid grid = EvaluationGrid::tag(A.bnd, pts);
  const auto vals = eval_exterior(sol, A, grid);
  std::vector<int> mask(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    mask[i] = grid.side[i] == EvaluationGrid::Side::NearSurface ? 1 : 0;
  write_vtk_structured(out_path(cfg, "_exterior.vtk"), cfg.grid_min, spacing, cfg.grid_n, vals, mask);
  return 0;
}

}  // namespace hodge
