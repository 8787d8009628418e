// vortex-shock: command-line driver for the shock-formation experiments.
//
//   vortex-shock <blowup|exact|compare|eps-sweep|bkm> --scenario <path>
//                [--out <dir>] [--threads N]
//
// The environment variable VORTEX_SHOCK_THREADS overrides --threads.  Exit
// codes: 0 success, 2 invalid input (CLI usage, scenario contents, guarded
// time requests, unwritable outputs), 3 numerical failure (CFL violation,
// divergent iterations, non-finite states).  Failures print one JSON error
// object on stderr.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vshock/cli.hpp"
#include "vshock/parallel.hpp"
#include "vshock/reports.hpp"

namespace {

int exit_code_for(const vshock::error& e) {
  switch (e.kind()) {
    case vshock::error_kind::validation:
    case vshock::error_kind::io:
      return 2;
    case vshock::error_kind::numerical:
      return 3;
  }
  return 3;
}

void print_error_json(const vshock::error& e) {
  std::cerr << vshock::error_to_json(e).dump() << std::endl;
}

void print_plain_error(const std::string& type, const std::string& message) {
  nlohmann::json doc = {{"error", {{"type", type},
                                   {"message", message},
                                   {"context", nlohmann::json::object()}}}};
  std::cerr << doc.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shock formation lab for the axisymmetric swirl-free vorticity model"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  int threads = 0;

  const char* names[] = {"blowup", "exact", "compare", "eps-sweep", "bkm"};
  const char* descriptions[] = {
      "scan the initial data for the shock time and blow-up points",
      "evaluate the exact characteristic solution on a grid",
      "finite-volume solver vs exact solution under grid refinement",
      "perturbed dynamics vs the limit trajectory for several eps",
      "sup |w| growth against the predicted blow-up rate"};
  for (int k = 0; k < 5; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], descriptions[k]);
    sub->add_option("--scenario", scenario_path, "scenario JSON file")
        ->required();
    sub->add_option("--out", out_dir, "output directory (default: scenario output.dir)");
    sub->add_option("--threads", threads, "worker threads (0 = all hardware threads)")
        ->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    print_plain_error("validation", e.what());
    return 2;
  }

  try {
    if (const char* env = std::getenv("VORTEX_SHOCK_THREADS")) {
      // The environment wins over the flag so wrappers can pin the count.
      try {
        std::size_t pos = 0;
        int n = std::stoi(env, &pos);
        if (pos != std::string(env).size() || n < 0) throw std::invalid_argument(env);
        threads = n;
      } catch (const std::exception&) {
        throw vshock::validation_error(
            "VORTEX_SHOCK_THREADS must be a nonnegative integer",
            {{"value", env}});
      }
    }

    vshock::Scenario sc = vshock::load_scenario(scenario_path);
    int effective = threads > 0 ? threads : sc.solution_opts.threads;
    vshock::set_thread_count(effective);
    sc.solution_opts.threads = effective;
    sc.solver_opts.threads = effective;

    vshock::CommandContext ctx;
    ctx.out_dir = out_dir.empty() ? sc.output_dir : out_dir;
    ctx.scenario = std::move(sc);
    ctx.log = &std::cout;

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "blowup") return vshock::cmd_blowup(ctx);
    if (cmd == "exact") return vshock::cmd_exact(ctx);
    if (cmd == "compare") return vshock::cmd_compare(ctx);
    if (cmd == "eps-sweep") return vshock::cmd_eps_sweep(ctx);
    if (cmd == "bkm") return vshock::cmd_bkm(ctx);
    print_plain_error("internal", "unknown subcommand " + cmd);
    return 3;
  } catch (const vshock::error& e) {
    print_error_json(e);
    return exit_code_for(e);
  } catch (const std::exception& e) {
    print_plain_error("internal", e.what());
    return 3;
  }
}
