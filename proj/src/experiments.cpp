#include "mottsim/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mottsim/cfm.hpp"
#include "mottsim/text_util.hpp"
#include "mottsim/trace.hpp"

namespace mottsim {

namespace {

Sector auto_sector(int n_sites) { return {(n_sites + 1) / 2, n_sites / 2}; }

FockBasis basis_from(const ModelConfig& m) {
  switch (m.sector_mode) {
    case SectorMode::None:
      return FockBasis::full(m.n_sites);
    case SectorMode::Explicit:
      return FockBasis::in_sector(m.n_sites, {m.n_up, m.n_down});
    case SectorMode::Auto:
      break;
  }
  return FockBasis::in_sector(m.n_sites, auto_sector(m.n_sites));
}

std::vector<double> potential_layout(const ModelConfig& m) {
  if (!m.site_potentials.empty()) return m.site_potentials;
  std::vector<double> pot(static_cast<std::size_t>(m.n_sites), m.v_g);
  if (m.n_sites >= 2) {
    pot.front() = 0.5 * m.v_sd;
    pot.back() = -0.5 * m.v_sd;
  }
  return pot;
}

HubbardParams params_from(const ModelConfig& m) {
  HubbardParams p;
  if (m.chain) {
    p = HubbardParams::chain(m.n_sites, m.chain_v, m.interaction);
  } else {
    p.n_sites = m.n_sites;
    p.hopping = m.hopping;
    p.interaction = m.interaction;
  }
  p.site_potentials = potential_layout(m);
  return p;
}

GroundStateResult static_ground(const SparseOperator& h, double tol,
                                std::uint64_t seed) {
  const HermitianApply apply = [&h](std::span<const Complex> v,
                                    std::span<Complex> out) {
    h.apply(v, out);
  };
  return ground_state(apply, h.dim(), tol, seed);
}

KrylovConfig krylov_from(const RunConfig& r) {
  return {r.krylov_tol, r.krylov_m_max, true};
}

ControllerConfig controller_from(const RunConfig& r) {
  ControllerConfig c;
  c.tol = r.tol;
  c.safety = r.safety;
  c.fac_min = r.fac_min;
  c.fac_max = r.fac_max;
  c.tau_min = r.tau_min;
  c.tau_max = r.tau_max;
  c.tau_init = r.tau_init;
  c.k_max = r.k_max;
  return c;
}

std::vector<double> output_grid(const RunConfig& r) {
  const double span = r.t_end - r.t_start;
  if (span / r.output_dt > 1e7)
    throw ConfigError("config: output grid exceeds 10^7 points");
  const double reltol = 1e-9 * std::max(1.0, std::abs(r.t_end));
  std::vector<double> out;
  const long k_last = static_cast<long>(std::floor(span / r.output_dt + 1e-9));
  for (long k = 0; k <= k_last; ++k) {
    const double t = r.t_start + static_cast<double>(k) * r.output_dt;
    if (t > r.t_end || std::abs(t - r.t_end) <= reltol) break;
    out.push_back(t);
  }
  out.push_back(r.t_end);
  return out;
}

SampleFn occupation_sampler(const FockBasis& basis) {
  return [&basis](double, std::span<const Complex> psi) {
    std::vector<double> obs;
    obs.reserve(2 * static_cast<std::size_t>(basis.n_sites()));
    for (int i = 0; i < basis.n_sites(); ++i) {
      obs.push_back(occupation_expectation(basis, psi, i, Spin::Up));
      obs.push_back(occupation_expectation(basis, psi, i, Spin::Down));
    }
    return obs;
  };
}

std::uint64_t run_matvecs(const PropagationResult& run) {
  return run.trace.steps.empty() ? 0 : run.trace.steps.back().matvecs;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly =
        std::log(std::max(y[i], std::numeric_limits<double>::min()));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string csv_num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return fmt17(v);
}

}  // namespace

std::vector<std::string> occupation_names(int n_sites) {
  std::vector<std::string> names;
  names.reserve(2 * static_cast<std::size_t>(n_sites));
  for (int i = 0; i < n_sites; ++i) {
    names.push_back("n_" + std::to_string(i) + "_up");
    names.push_back("n_" + std::to_string(i) + "_dn");
  }
  return names;
}

BuiltModel build_model(const ModelConfig& model, const DriveConfig& drive) {
  FockBasis basis = basis_from(model);
  HubbardParams params = params_from(model);
  SparseOperator h_stat = assemble_static(params, basis);
  SparseOperator h_pot = assemble_potential(params.site_potentials, basis);
  std::vector<DriveChannel> channels;
  channels.emplace_back(DriveProfile(drive.t0, drive.timescale),
                        std::move(h_pot));
  Generator gen(std::move(h_stat), std::move(channels));
  return {std::move(basis), std::move(params), std::move(gen),
          occupation_names(model.n_sites), {"g"}};
}

ResolvedScheme resolve_scheme(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  ResolvedScheme r;
  if (lower == "cf2") {
    r.scheme = builtin_scheme("CF2");
    return r;
  }
  if (lower == "cf4") {
    r.scheme = builtin_scheme("CF4");
    return r;
  }
  if (lower == "dopri45") {
    r.dopri = true;
    return r;
  }
  std::ifstream in(name);
  if (!in)
    throw SchemeTableError("cannot read scheme table '" + name + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  r.scheme = load_scheme_table(buf.str());
  return r;
}

SimulateResult run_simulate(const ExperimentConfig& cfg) {
  const RunConfig& r = cfg.run;
  const ResolvedScheme rs = resolve_scheme(r.scheme);
  BuiltModel model = build_model(cfg.model, cfg.drive);
  GroundStateResult ground =
      static_ground(model.gen.h_stat(), r.krylov_tol, r.seed);
  const std::vector<double> outputs = output_grid(r);
  const KrylovConfig kcfg = krylov_from(r);
  const ControllerConfig ctrl = controller_from(r);
  const SampleFn sample = occupation_sampler(model.basis);

  const auto tic = std::chrono::steady_clock::now();
  PropagationResult run =
      rs.dopri ? propagate_dopri45_adaptive(model.gen, ground.psi, r.t_start,
                                            r.t_end, ctrl, outputs, sample)
               : propagate_adaptive(rs.scheme, model.gen, ground.psi,
                                    r.t_start, r.t_end, ctrl, kcfg, outputs,
                                    sample);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
          .count();

  SimulateResult out;
  out.psi = std::move(run.psi);
  out.trace = std::move(run.trace);
  out.observable_names = model.observable_names;
  out.drive_names = model.drive_names;
  out.ground = std::move(ground);
  out.method = rs.dopri ? "dopri45" : rs.scheme.name;
  out.dim = model.basis.size();
  out.matvecs = out.trace.steps.empty() ? 0 : out.trace.steps.back().matvecs;
  out.wall_seconds = wall;
  return out;
}

void write_simulate_outputs(const SimulateResult& result,
                            const ExperimentConfig& cfg,
                            const std::string& out_dir) {
  write_text_file(out_dir + "/trace.csv",
                  trace_to_csv(result.trace, result.observable_names,
                               result.drive_names));

  std::size_t accepted = 0, rejected = 0;
  double tau_lo = std::numeric_limits<double>::infinity();
  double tau_hi = 0.0;
  for (const StepRecord& s : result.trace.steps) {
    if (!s.accepted) {
      ++rejected;
      continue;
    }
    ++accepted;
    tau_lo = std::min(tau_lo, s.tau);
    tau_hi = std::max(tau_hi, s.tau);
  }

  std::string s;
  const auto kv = [&s](const std::string& k, const std::string& v) {
    s += k + ' ' + v + '\n';
  };
  kv("method", result.method);
  kv("t_start", fmt17(cfg.run.t_start));
  kv("t_end", fmt17(cfg.run.t_end));
  kv("tol", fmt17(cfg.run.tol));
  kv("krylov_tol", fmt17(cfg.run.krylov_tol));
  kv("sector_dim", std::to_string(result.dim));
  kv("ground_energy", fmt17(result.ground.energy));
  kv("ground_residual", fmt17(result.ground.residual));
  kv("final_norm", fmt17(norm2(result.psi)));
  kv("matvecs", std::to_string(result.matvecs));
  kv("steps_accepted", std::to_string(accepted));
  kv("steps_rejected", std::to_string(rejected));
  kv("tau_min_accepted", csv_num(accepted ? tau_lo : 0.0));
  kv("tau_max_accepted", fmt17(tau_hi));
  kv("wall_seconds", fmt17(result.wall_seconds));
  write_text_file(out_dir + "/summary.txt", s);
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
  const BenchmarkConfig& b = cfg.benchmark;
  const double min_tol = *std::min_element(b.tols.begin(), b.tols.end());
  if (!(b.ref_tol <= min_tol / 100.0))
    throw ConfigError(
        "config: ref_tol must be at most min(benchmark tols)/100");

  const RunConfig& r = cfg.run;
  const ResolvedScheme configured = resolve_scheme(r.scheme);
  BuiltModel model = build_model(cfg.model, cfg.drive);
  const KrylovConfig kcfg = krylov_from(r);
  const GroundStateResult ground =
      static_ground(model.gen.h_stat(), r.krylov_tol, r.seed);

  // The reference uses the highest-order scheme at hand.
  const CFMScheme ref_scheme =
      (!configured.dopri && configured.scheme.order > 4) ? configured.scheme
                                                         : builtin_scheme("CF4");
  ControllerConfig ref_ctrl;
  ref_ctrl.tol = b.ref_tol;
  const PropagationResult ref =
      propagate_adaptive(ref_scheme, model.gen, ground.psi, r.t_start, r.t_end,
                         ref_ctrl, kcfg, {}, {});

  BenchmarkResult out;
  out.ref_method = ref_scheme.name;
  out.ref_tol = b.ref_tol;
  out.ref_matvecs = run_matvecs(ref);

  struct Method {
    std::string name;
    bool dopri;
    CFMScheme scheme;
  };
  std::vector<Method> methods = {
      {"CF2", false, builtin_scheme("CF2")},
      {"CF4", false, builtin_scheme("CF4")},
      {"dopri45", true, {}},
  };
  if (!configured.dopri && configured.scheme.name != "CF2" &&
      configured.scheme.name != "CF4")
    methods.push_back({configured.scheme.name, false, configured.scheme});

  for (const Method& m : methods) {
    for (const double tol : b.tols) {
      ControllerConfig ctrl = controller_from(r);
      ctrl.tol = tol;
      const PropagationResult run =
          m.dopri ? propagate_dopri45_adaptive(model.gen, ground.psi,
                                               r.t_start, r.t_end, ctrl, {}, {})
                  : propagate_adaptive(m.scheme, model.gen, ground.psi,
                                       r.t_start, r.t_end, ctrl, kcfg, {}, {});
      out.rows.push_back({m.name, "adaptive", tol, 0, run_matvecs(run),
                          distance2(run.psi, ref.psi)});
    }
    for (const long n : b.steps) {
      const PropagationResult run =
          m.dopri ? propagate_dopri45_fixed(model.gen, ground.psi, r.t_start,
                                            r.t_end, n, {}, {})
                  : propagate_fixed(m.scheme, model.gen, ground.psi, r.t_start,
                                    r.t_end, n, kcfg, {}, {});
      out.rows.push_back({m.name, "uniform", 0.0, n, run_matvecs(run),
                          distance2(run.psi, ref.psi)});
    }
  }

  std::sort(out.rows.begin(), out.rows.end(),
            [](const BenchmarkRow& a, const BenchmarkRow& c) {
              if (a.method != c.method) return a.method < c.method;
              if (a.mode != c.mode) return a.mode < c.mode;
              if (a.tol != c.tol) return a.tol > c.tol;
              return a.n_steps < c.n_steps;
            });
  return out;
}

std::string benchmark_to_csv(const BenchmarkResult& result) {
  std::string out = "method,mode,tol,n_steps,matvecs,error\n";
  for (const BenchmarkRow& row : result.rows) {
    out += row.method + ',' + row.mode + ',';
    if (row.mode == "adaptive") out += csv_num(row.tol);
    out += ',';
    if (row.mode == "uniform") out += std::to_string(row.n_steps);
    out += ',' + std::to_string(row.matvecs) + ',' + csv_num(row.error) + '\n';
  }
  return out;
}

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
  const ConvergenceConfig& c = cfg.convergence;
  if (c.taus.size() < 3)
    throw ConfigError("config: convergence taus needs at least three entries");
  for (std::size_t i = 1; i < c.taus.size(); ++i)
    if (std::abs(c.taus[i] / c.taus[i - 1] - 0.5) > 1e-12)
      throw ConfigError("config: convergence taus must halve successively");

  const RunConfig& r = cfg.run;
  const ResolvedScheme configured = resolve_scheme(r.scheme);
  BuiltModel model = build_model(cfg.model, cfg.drive);
  const KrylovConfig kcfg = krylov_from(r);
  const GroundStateResult ground =
      static_ground(model.gen.h_stat(), r.krylov_tol, r.seed);

  const double t_probe =
      c.t_probe > 0.0 ? c.t_probe : cfg.drive.t0 + 2.0 * cfg.drive.timescale;
  if (!(t_probe > r.t_start && t_probe < r.t_end))
    throw ConfigError("config: t_probe must lie inside (t_start, t_end)");

  std::vector<CFMScheme> schemes = {builtin_scheme("CF2"),
                                    builtin_scheme("CF4")};
  if (!configured.dopri && configured.scheme.name != "CF2" &&
      configured.scheme.name != "CF4")
    schemes.push_back(configured.scheme);

  ControllerConfig probe_ctrl;
  probe_ctrl.tol = std::min(1e-9, r.tol);
  const CFMScheme cf4 = builtin_scheme("CF4");
  const CVector u_probe =
      propagate_adaptive(cf4, model.gen, ground.psi, r.t_start, t_probe,
                         probe_ctrl, kcfg, {}, {})
          .psi;

  ConvergenceResult out;
  for (const CFMScheme& scheme : schemes) {
    const std::vector<double> errs =
        local_errors(scheme, model.gen, t_probe, u_probe, c.taus, kcfg);
    for (std::size_t i = 0; i < c.taus.size(); ++i)
      out.rows.push_back({"local_error", scheme.name, c.taus[i], errs[i]});
    out.rows.push_back({"local_slope", scheme.name, 0.0,
                        loglog_slope(c.taus, errs)});
  }

  ControllerConfig ref_ctrl;
  ref_ctrl.tol = cfg.benchmark.ref_tol;
  const CVector psi_ref =
      propagate_adaptive(cf4, model.gen, ground.psi, r.t_start, r.t_end,
                         ref_ctrl, kcfg, {}, {})
          .psi;
  const double span = r.t_end - r.t_start;
  for (const CFMScheme& scheme : schemes) {
    std::vector<double> taus_g, errs_g;
    for (const long n : c.global_steps) {
      const CVector psi =
          propagate_fixed(scheme, model.gen, ground.psi, r.t_start, r.t_end, n,
                          kcfg, {}, {})
              .psi;
      const double err = distance2(psi, psi_ref);
      taus_g.push_back(span / static_cast<double>(n));
      errs_g.push_back(err);
      out.rows.push_back(
          {"global_error", scheme.name, static_cast<double>(n), err});
    }
    out.rows.push_back(
        {"global_slope", scheme.name, 0.0, loglog_slope(taus_g, errs_g)});
  }

  const double fixed_tau = c.fixed_tau > 0.0 ? c.fixed_tau : c.taus.back();
  for (const double T : c.timescales) {
    DriveConfig d2{cfg.drive.t0, T};
    BuiltModel m2 = build_model(cfg.model, d2);
    const double probe2 = cfg.drive.t0 + 2.0 * T;
    const CVector u2 =
        propagate_adaptive(cf4, m2.gen, ground.psi, r.t_start, probe2,
                           probe_ctrl, kcfg, {}, {})
            .psi;
    const std::vector<double> one_tau = {fixed_tau};
    for (const CFMScheme& scheme : schemes) {
      const double err =
          local_errors(scheme, m2.gen, probe2, u2, one_tau, kcfg)[0];
      out.rows.push_back({"timescale_error", scheme.name, T, err});
    }
  }
  return out;
}

std::string orders_to_csv(const ConvergenceResult& result) {
  std::string out = "kind,scheme,x,value\n";
  for (const OrderRow& row : result.rows)
    out += row.kind + ',' + row.scheme + ',' + csv_num(row.x) + ',' +
           csv_num(row.value) + '\n';
  return out;
}

GroundReport run_ground_state(const ExperimentConfig& cfg) {
  BuiltModel model = build_model(cfg.model, cfg.drive);
  const GroundStateResult g =
      static_ground(model.gen.h_stat(), cfg.run.krylov_tol, cfg.run.seed);
  GroundReport rep;
  rep.energy = g.energy;
  rep.residual = g.residual;
  rep.dim = model.basis.size();
  rep.degenerate = g.degenerate_warning;
  rep.matvecs = g.matvecs;
  for (int i = 0; i < model.basis.n_sites(); ++i) {
    rep.occupations.push_back(
        occupation_expectation(model.basis, g.psi, i, Spin::Up));
    rep.occupations.push_back(
        occupation_expectation(model.basis, g.psi, i, Spin::Down));
  }
  return rep;
}

std::string ground_report_text(const GroundReport& report,
                               const ExperimentConfig& cfg) {
  std::string s;
  const auto kv = [&s](const std::string& k, const std::string& v) {
    s += k + ' ' + v + '\n';
  };
  kv("energy", fmt17(report.energy));
  kv("residual", fmt17(report.residual));
  kv("sector_dim", std::to_string(report.dim));
  kv("degenerate_warning", report.degenerate ? "1" : "0");
  kv("matvecs", std::to_string(report.matvecs));
  const std::vector<std::string> names = occupation_names(cfg.model.n_sites);
  for (std::size_t i = 0; i < names.size(); ++i)
    kv(names[i], fmt17(report.occupations[i]));
  return s;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace mottsim
