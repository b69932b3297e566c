#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mottsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SectorMode { Auto, None, Explicit };

// Defaults reproduce the switching setup on the desk-scale six-site chain:
// U = 10 in units of the hopping, source/drain offsets 1.04 U on the end
// sites, half filling.
struct ModelConfig {
  int n_sites = 6;
  bool chain = true;       // nearest-neighbor open chain; else explicit matrix
  double chain_v = -1.0;
  std::vector<double> hopping;  // row-major n_sites x n_sites when !chain
  double interaction = 10.0;
  double v_sd = 20.8;      // end-site bias: V_0 = +v_sd/2, V_{N-1} = -v_sd/2
  double v_g = 0.0;        // interior gate potential
  std::vector<double> site_potentials;  // overrides the layout when nonempty
  SectorMode sector_mode = SectorMode::Auto;
  int n_up = 0;
  int n_down = 0;

  bool operator==(const ModelConfig&) const = default;
};

struct DriveConfig {
  double t0 = 10.0;
  double timescale = 0.03125;

  bool operator==(const DriveConfig&) const = default;
};

struct RunConfig {
  std::string scheme = "CF4";  // CF2 | CF4 | dopri45 | path to a scheme table
  double t_start = 0.0;
  double t_end = 50.0;
  double tol = 1e-7;
  double krylov_tol = 1e-12;
  int krylov_m_max = 96;
  double output_dt = 1.0;
  std::uint64_t seed = 12345;
  double tau_min = 1e-12;
  double tau_max = 0.0;   // 0: whole span
  double tau_init = 0.0;  // 0: automatic
  double safety = 0.9;
  double fac_min = 0.2;
  double fac_max = 5.0;
  int k_max = 0;          // defect truncation depth; 0: scheme order

  bool operator==(const RunConfig&) const = default;
};

struct BenchmarkConfig {
  std::vector<double> tols = {1e-5, 1e-6, 1e-7, 1e-8};
  std::vector<long> steps = {250, 500, 1000, 2000};
  double ref_tol = 1e-11;

  bool operator==(const BenchmarkConfig&) const = default;
};

struct ConvergenceConfig {
  std::vector<double> taus = {0.0625, 0.03125, 0.015625, 0.0078125};
  std::vector<long> global_steps = {64, 128, 256, 512};
  std::vector<double> timescales = {0.125, 0.0625, 0.03125};
  double t_probe = 0.0;    // 0: two timescales past the switch center
  double fixed_tau = 0.0;  // 0: smallest entry of taus

  bool operator==(const ConvergenceConfig&) const = default;
};

struct ExperimentConfig {
  ModelConfig model;
  DriveConfig drive;
  RunConfig run;
  BenchmarkConfig benchmark;
  ConvergenceConfig convergence;

  bool operator==(const ExperimentConfig&) const = default;
};

// Sectioned key-value text; see README for the grammar. Unknown sections,
// unknown keys, duplicate keys, and malformed numbers are reported with the
// line number. parse_config(serialize_config(c)) == c.
ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace mottsim
