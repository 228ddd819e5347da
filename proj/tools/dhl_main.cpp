// Command-line front end; everything goes through the C API in dhl.h.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dhl.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  int resolution = 0;
  std::string eps_schedule;
};

int run_command(const std::string& command, const Options& opt) {
  dhl_config* cfg = nullptr;
  dhl_status st = dhl_config_load(opt.config.c_str(), &cfg);
  if (st == DHL_OK && opt.resolution > 0)
    st = dhl_config_set(cfg, "problem.resolution", std::to_string(opt.resolution).c_str());
  if (st == DHL_OK && !opt.eps_schedule.empty())
    st = dhl_config_set(cfg, "solver.eps_schedule", opt.eps_schedule.c_str());
  if (st == DHL_OK) st = dhl_run(cfg, command.c_str(), opt.out.empty() ? nullptr : opt.out.c_str());
  if (st != DHL_OK)
    std::fprintf(stderr, "error: %s: %s\n", dhl_status_name(st), dhl_last_error());
  dhl_config_free(cfg);
  return dhl_exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dhl — Dirichlet problems for degenerate k-Hessian and prescribed "
               "k-curvature equations"};
  app.require_subcommand(1);

  Options opt;
  int rc = 0;
  for (const std::string name : {"solve", "sweep", "verify", "geometry"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "configuration file")->required();
    sub->add_option("--out", opt.out, "output directory (overrides the configuration)");
    sub->add_option("--resolution", opt.resolution, "grid resolution override");
    sub->add_option("--eps-schedule", opt.eps_schedule, "comma-separated schedule override");
    sub->callback([&rc, &opt, name] { rc = run_command(name, opt); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
