#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mottsim/config.hpp"
#include "mottsim/fock_basis.hpp"
#include "mottsim/hubbard.hpp"
#include "mottsim/krylov.hpp"
#include "mottsim/pulse.hpp"
#include "mottsim/stepper.hpp"

namespace mottsim {

// Model assembled from a config: basis (sector-resolved), static and drive
// operators wired into a generator, and the column names that go with the
// per-site occupation observables.
struct BuiltModel {
  FockBasis basis;
  HubbardParams params;
  Generator gen;
  std::vector<std::string> observable_names;
  std::vector<std::string> drive_names;
};

BuiltModel build_model(const ModelConfig& model, const DriveConfig& drive);

// Column names for the per-site occupations, n_<i>_up then n_<i>_dn per
// site. Exposed so a partial trace can be serialized without rebuilding the
// model.
std::vector<std::string> occupation_names(int n_sites);

// Resolves a scheme name: CF2/CF4 builtin, dopri45 (the Runge-Kutta
// baseline), anything else is read as a scheme-table path.
struct ResolvedScheme {
  bool dopri = false;
  CFMScheme scheme;  // empty when dopri
};
ResolvedScheme resolve_scheme(const std::string& name);

struct SimulateResult {
  CVector psi;
  PropagationTrace trace;
  std::vector<std::string> observable_names;
  std::vector<std::string> drive_names;
  GroundStateResult ground;
  std::string method;
  std::size_t dim = 0;
  std::uint64_t matvecs = 0;  // propagation only; ground state not included
  double wall_seconds = 0.0;
};

SimulateResult run_simulate(const ExperimentConfig& cfg);

// Writes trace.csv and summary.txt into out_dir.
void write_simulate_outputs(const SimulateResult& result,
                            const ExperimentConfig& cfg,
                            const std::string& out_dir);

struct BenchmarkRow {
  std::string method;
  std::string mode;  // "adaptive" | "uniform"
  double tol = 0.0;      // adaptive rows
  long n_steps = 0;      // uniform rows
  std::uint64_t matvecs = 0;
  double error = 0.0;    // |psi(t_end) - psi_ref(t_end)|
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::string ref_method;
  double ref_tol = 0.0;
  std::uint64_t ref_matvecs = 0;
};

BenchmarkResult run_benchmark(const ExperimentConfig& cfg);
std::string benchmark_to_csv(const BenchmarkResult& result);

struct OrderRow {
  std::string kind;    // local_error | local_slope | global_error |
                       // global_slope | timescale_error
  std::string scheme;
  double x = 0.0;      // tau, n_steps, or timescale; 0 for slopes
  double value = 0.0;
};

struct ConvergenceResult {
  std::vector<OrderRow> rows;
};

ConvergenceResult run_convergence(const ExperimentConfig& cfg);
std::string orders_to_csv(const ConvergenceResult& result);

struct GroundReport {
  double energy = 0.0;
  double residual = 0.0;
  std::size_t dim = 0;
  std::vector<double> occupations;  // matches occupation_names order
  bool degenerate = false;
  std::uint64_t matvecs = 0;
};

GroundReport run_ground_state(const ExperimentConfig& cfg);
std::string ground_report_text(const GroundReport& report,
                               const ExperimentConfig& cfg);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mottsim
