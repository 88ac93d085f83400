#include <iostream>

#include <CLI11.hpp>

#include "reinsure/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal reinsurance layers under a ratio criterion"};
  reinsure::cli::Invocation inv;
  app.add_option("--config", inv.config_path, "configuration file")->required();
  app.add_option("--out", inv.out_path, "CSV output path");
  app.add_option("--command", inv.command,
                 "evaluate, optimize, check, sweep or asymptotics");
  app.add_option("--tol-quad", inv.tol_quad, "quadrature tolerance");
  app.add_option("--tol-root", inv.tol_root, "root-finding tolerance");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return reinsure::cli::kExitConfig;
  }
  return reinsure::cli::execute(inv, std::cout, std::cerr);
}
