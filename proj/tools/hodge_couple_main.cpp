// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hodge/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Symmetric FEM-BEM coupling for Hodge-Helmholtz transmission problems"};
  app.require_subcommand(1);

  std::string config_path, dump_dir;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--threads", threads, "worker thread count (0 = auto)");
  };
  CLI::App* solve = app.add_subcommand("solve", "assemble and solve the coupled system");
  add_common(solve);
  solve->add_option("--dump-matrices", dump_dir, "directory for raw operator dumps");
  CLI::App* verify = app.add_subcommand("verify", "run the identity test suite");
  add_common(verify);
  CLI::App* conv = app.add_subcommand("convergence", "manufactured-solution convergence study");
  add_common(conv);
  CLI::App* eval = app.add_subcommand("eval", "evaluate the exterior field on a grid");
  add_common(eval);

  CLI11_PARSE(app, argc, argv);

  try {
    hodge::RunConfig cfg = hodge::parse_config(config_path);
    if (threads > 0) cfg.threads = threads;
    if (solve->parsed()) return hodge::cmd_solve(cfg, dump_dir);
    if (verify->parsed()) return hodge::cmd_verify(cfg);
    if (conv->parsed()) return hodge::cmd_convergence(cfg);
    if (eval->parsed()) return hodge::cmd_eval(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
