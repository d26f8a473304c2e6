#include <CLI11.hpp>

#include "finslerforge/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"finslerforge: geometric engine for anisotropic-scaling Finsler gravity models"};
  finslerforge::CliOptions opt;
  app.add_option("command", opt.command,
                 "hessian | connection | curvature | verify-solution | generate-solution | "
                 "brane | mdr | hl-action");
  app.add_option("--config", opt.config_path, "JSON run configuration")->required();
  app.add_option("--out", opt.out_dir, "output directory (default: from config, else '.')");
  app.add_option("--tol", opt.tol_override, "override check tolerances");
  app.add_option("--grid-scale", opt.grid_scale, "scale factor for grid counts");
  app.add_option("--seed", opt.seed_override, "override the RNG seed");
  CLI11_PARSE(app, argc, argv);
  return finslerforge::run_cli(opt);
}
