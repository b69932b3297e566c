#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mottsim/experiments.hpp"
#include "mottsim/trace.hpp"

using namespace mottsim;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven Hubbard chain: adaptive exact time propagation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  bool full = false;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "configuration file (omit for the built-in default)");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--full", full, "eight-site chain instead of the six-site default");
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "override the ground-state start seed");

  CLI::App* sim = app.add_subcommand(
      "simulate", "propagate the switch-on, write trace.csv + summary.txt");
  CLI::App* bench = app.add_subcommand(
      "benchmark", "error against matvec sweeps, write benchmark.csv");
  CLI::App* conv = app.add_subcommand(
      "convergence", "order and timescale tables, write orders.csv");
  CLI::App* gs = app.add_subcommand(
      "ground-state", "ground-state report, write summary.txt");
  for (CLI::App* sub : {sim, bench, conv, gs}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  int n_sites = 6;
  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = parse_config(read_file(config_path));
    if (full) cfg.model.n_sites = 8;
    if (seed_opt->count() > 0) cfg.run.seed = seed;
    n_sites = cfg.model.n_sites;

    std::filesystem::create_directories(out_dir);

    if (*sim) {
      const SimulateResult res = run_simulate(cfg);
      write_simulate_outputs(res, cfg, out_dir);
      std::cout << "method " << res.method << ", dim " << res.dim
                << ", matvecs " << res.matvecs << ", final norm "
                << norm2(res.psi) << '\n'
                << "wrote " << out_dir << "/trace.csv, " << out_dir
                << "/summary.txt\n";
    } else if (*bench) {
      const BenchmarkResult res = run_benchmark(cfg);
      write_text_file(out_dir + "/benchmark.csv", benchmark_to_csv(res));
      std::cout << "reference " << res.ref_method << " at tol " << res.ref_tol
                << " (" << res.ref_matvecs << " matvecs)\n"
                << "wrote " << out_dir << "/benchmark.csv ("
                << res.rows.size() << " rows)\n";
    } else if (*conv) {
      const ConvergenceResult res = run_convergence(cfg);
      write_text_file(out_dir + "/orders.csv", orders_to_csv(res));
      for (const OrderRow& row : res.rows)
        if (row.kind == "local_slope" || row.kind == "global_slope")
          std::cout << row.scheme << ' ' << row.kind << ' ' << row.value
                    << '\n';
      std::cout << "wrote " << out_dir << "/orders.csv\n";
    } else if (*gs) {
      const GroundReport rep = run_ground_state(cfg);
      write_text_file(out_dir + "/summary.txt", ground_report_text(rep, cfg));
      std::cout << "E0 " << rep.energy << ", residual " << rep.residual
                << ", dim " << rep.dim << '\n'
                << "wrote " << out_dir << "/summary.txt\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SchemeTableError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const PropagationError& e) {
    try {
      std::filesystem::create_directories(out_dir);
      write_text_file(
          out_dir + "/trace.csv",
          trace_to_csv(e.trace, occupation_names(n_sites), {"g"}));
      std::cerr << "error: " << e.what() << " (partial trace written to "
                << out_dir << "/trace.csv)\n";
    } catch (const std::exception&) {
      std::cerr << "error: " << e.what() << '\n';
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
