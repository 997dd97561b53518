#include <CLI11.hpp>

#include <cstdio>

int main(int argc, char** argv) {
  CLI::App app{"Finite-strain rope/membrane solver"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run a convergence study for one case");
  auto* list = app.add_subcommand("list", "List available cases");
  auto* verify = app.add_subcommand("verify", "Run the property suite");
  (void)run;
  (void)list;
  (void)verify;
  CLI11_PARSE(app, argc, argv);
  std::printf("placeholder\n");
  return 0;
}
