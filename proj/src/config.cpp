#include "mottsim/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "mottsim/text_util.hpp"

namespace mottsim {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line_no) + ": " + msg);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line_no,
                 const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE ||
      !std::isfinite(v))
    fail(line_no, "bad number '" + tok + "' for " + key);
  return v;
}

long to_long(const std::string& tok, std::size_t line_no,
             const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE)
    fail(line_no, "bad integer '" + tok + "' for " + key);
  return v;
}

std::uint64_t to_u64(const std::string& tok, std::size_t line_no,
                     const std::string& key) {
  errno = 0;
  char* end = nullptr;
  if (tok.empty() || tok[0] == '-')
    fail(line_no, "bad unsigned integer '" + tok + "' for " + key);
  const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || errno == ERANGE)
    fail(line_no, "bad unsigned integer '" + tok + "' for " + key);
  return v;
}

struct Parser {
  ExperimentConfig cfg;
  std::string section;
  std::set<std::string> seen;  // "section.key"
  bool hopping_explicit = false;
  std::vector<std::vector<double>> hop_rows;

  void mark(const std::string& key, std::size_t line_no) {
    if (!seen.insert(section + '.' + key).second)
      fail(line_no, "duplicate key '" + key + "' in [" + section + "]");
  }

  void expect_count(const std::vector<std::string>& args, std::size_t n,
                    std::size_t line_no, const std::string& key) {
    if (args.size() != n)
      fail(line_no, "key '" + key + "' expects " + std::to_string(n) +
                        " value(s), got " + std::to_string(args.size()));
  }

  std::vector<double> number_list(const std::vector<std::string>& args,
                                  std::size_t line_no, const std::string& key) {
    if (args.empty()) fail(line_no, "key '" + key + "' expects values");
    std::vector<double> out;
    for (const auto& a : args) out.push_back(to_double(a, line_no, key));
    return out;
  }

  std::vector<long> integer_list(const std::vector<std::string>& args,
                                 std::size_t line_no, const std::string& key) {
    if (args.empty()) fail(line_no, "key '" + key + "' expects values");
    std::vector<long> out;
    for (const auto& a : args) out.push_back(to_long(a, line_no, key));
    return out;
  }

  void handle(const std::string& key, const std::vector<std::string>& args,
              std::size_t line_no);
};

void Parser::handle(const std::string& key,
                    const std::vector<std::string>& args, std::size_t line_no) {
  const auto one = [&] {
    expect_count(args, 1, line_no, key);
    return args[0];
  };
  const auto num = [&] { return to_double(one(), line_no, key); };
  const auto integer = [&] {
    return to_long(one(), line_no, key);
  };

  if (section == "model") {
    ModelConfig& m = cfg.model;
    if (key == "n_sites") {
      mark(key, line_no);
      m.n_sites = static_cast<int>(integer());
    } else if (key == "hopping") {
      mark(key, line_no);
      if (args.size() == 2 && args[0] == "chain") {
        m.chain = true;
        m.chain_v = to_double(args[1], line_no, key);
      } else if (args.size() == 1 && args[0] == "explicit") {
        m.chain = false;
        hopping_explicit = true;
      } else {
        fail(line_no, "hopping expects 'chain <v>' or 'explicit'");
      }
    } else if (key == "hop_row") {
      if (!hopping_explicit)
        fail(line_no, "hop_row requires a preceding 'hopping explicit'");
      hop_rows.push_back(number_list(args, line_no, key));
    } else if (key == "interaction") {
      mark(key, line_no);
      m.interaction = num();
    } else if (key == "v_sd") {
      mark(key, line_no);
      m.v_sd = num();
    } else if (key == "v_g") {
      mark(key, line_no);
      m.v_g = num();
    } else if (key == "potentials") {
      mark(key, line_no);
      m.site_potentials = number_list(args, line_no, key);
    } else if (key == "sector") {
      mark(key, line_no);
      if (args.size() == 1 && args[0] == "auto") {
        m.sector_mode = SectorMode::Auto;
      } else if (args.size() == 1 && args[0] == "none") {
        m.sector_mode = SectorMode::None;
      } else if (args.size() == 2) {
        m.sector_mode = SectorMode::Explicit;
        m.n_up = static_cast<int>(to_long(args[0], line_no, key));
        m.n_down = static_cast<int>(to_long(args[1], line_no, key));
      } else {
        fail(line_no, "sector expects 'auto', 'none', or '<n_up> <n_down>'");
      }
    } else {
      fail(line_no, "unknown key '" + key + "' in [model]");
    }
    return;
  }

  if (section == "drive") {
    mark(key, line_no);
    if (key == "t0")
      cfg.drive.t0 = num();
    else if (key == "timescale")
      cfg.drive.timescale = num();
    else
      fail(line_no, "unknown key '" + key + "' in [drive]");
    return;
  }

  if (section == "run") {
    mark(key, line_no);
    RunConfig& r = cfg.run;
    if (key == "scheme")
      r.scheme = one();
    else if (key == "t_start")
      r.t_start = num();
    else if (key == "t_end")
      r.t_end = num();
    else if (key == "tol")
      r.tol = num();
    else if (key == "krylov_tol")
      r.krylov_tol = num();
    else if (key == "krylov_m_max")
      r.krylov_m_max = static_cast<int>(integer());
    else if (key == "output_dt")
      r.output_dt = num();
    else if (key == "seed")
      r.seed = to_u64(one(), line_no, key);
    else if (key == "tau_min")
      r.tau_min = num();
    else if (key == "tau_max")
      r.tau_max = num();
    else if (key == "tau_init")
      r.tau_init = num();
    else if (key == "safety")
      r.safety = num();
    else if (key == "fac_min")
      r.fac_min = num();
    else if (key == "fac_max")
      r.fac_max = num();
    else if (key == "k_max")
      r.k_max = static_cast<int>(integer());
    else
      fail(line_no, "unknown key '" + key + "' in [run]");
    return;
  }

  if (section == "benchmark") {
    mark(key, line_no);
    if (key == "tols")
      cfg.benchmark.tols = number_list(args, line_no, key);
    else if (key == "steps")
      cfg.benchmark.steps = integer_list(args, line_no, key);
    else if (key == "ref_tol")
      cfg.benchmark.ref_tol = num();
    else
      fail(line_no, "unknown key '" + key + "' in [benchmark]");
    return;
  }

  if (section == "convergence") {
    mark(key, line_no);
    if (key == "taus")
      cfg.convergence.taus = number_list(args, line_no, key);
    else if (key == "global_steps")
      cfg.convergence.global_steps = integer_list(args, line_no, key);
    else if (key == "timescales")
      cfg.convergence.timescales = number_list(args, line_no, key);
    else if (key == "t_probe")
      cfg.convergence.t_probe = num();
    else if (key == "fixed_tau")
      cfg.convergence.fixed_tau = num();
    else
      fail(line_no, "unknown key '" + key + "' in [convergence]");
    return;
  }

  fail(line_no, "key '" + key + "' appears before any section header");
}

void validate(const ExperimentConfig& cfg) {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  const ModelConfig& m = cfg.model;
  require(m.n_sites >= 1 && m.n_sites <= 16,
          "n_sites must lie in [1, 16]");
  const auto n = static_cast<std::size_t>(m.n_sites);
  if (!m.chain) {
    require(m.hopping.size() == n * n,
            "explicit hopping needs n_sites rows of n_sites entries");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        require(m.hopping[i * n + j] == m.hopping[j * n + i],
                "hopping matrix must be symmetric");
  }
  require(m.site_potentials.empty() || m.site_potentials.size() == n,
          "potentials must list one value per site");
  if (m.sector_mode == SectorMode::Explicit) {
    require(m.n_up >= 0 && m.n_up <= m.n_sites && m.n_down >= 0 &&
                m.n_down <= m.n_sites,
            "sector occupations must lie in [0, n_sites]");
  }

  require(cfg.drive.timescale > 0.0, "timescale must be positive");

  const RunConfig& r = cfg.run;
  require(!r.scheme.empty(), "scheme must be nonempty");
  require(r.t_end > r.t_start, "t_end must exceed t_start");
  require(r.tol > 0.0, "tol must be positive");
  require(r.krylov_tol > 0.0, "krylov_tol must be positive");
  require(r.krylov_m_max >= 1, "krylov_m_max must be positive");
  require(r.output_dt > 0.0, "output_dt must be positive");
  require(r.tau_min > 0.0, "tau_min must be positive");
  require(r.tau_max >= 0.0, "tau_max must be nonnegative");
  require(r.tau_init >= 0.0, "tau_init must be nonnegative");
  require(r.safety > 0.0 && r.safety <= 1.0, "safety must lie in (0, 1]");
  require(r.fac_min > 0.0 && r.fac_min < 1.0 && r.fac_max > 1.0,
          "need 0 < fac_min < 1 < fac_max");
  require(r.k_max >= 0, "k_max must be nonnegative");

  const BenchmarkConfig& b = cfg.benchmark;
  require(!b.tols.empty(), "benchmark tols must be nonempty");
  for (const double t : b.tols) require(t > 0.0, "benchmark tols must be positive");
  require(!b.steps.empty(), "benchmark steps must be nonempty");
  for (const long s : b.steps) require(s >= 1, "benchmark steps must be positive");
  require(b.ref_tol > 0.0, "ref_tol must be positive");

  const ConvergenceConfig& c = cfg.convergence;
  require(!c.taus.empty(), "convergence taus must be nonempty");
  for (const double t : c.taus) require(t > 0.0, "convergence taus must be positive");
  require(!c.global_steps.empty(), "convergence global_steps must be nonempty");
  for (const long s : c.global_steps)
    require(s >= 1, "convergence global_steps must be positive");
  require(!c.timescales.empty(), "convergence timescales must be nonempty");
  for (const double t : c.timescales)
    require(t > 0.0, "convergence timescales must be positive");
  require(c.t_probe >= 0.0, "t_probe must be nonnegative");
  require(c.fixed_tau >= 0.0, "fixed_tau must be nonnegative");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Parser p;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string::npos) pos = text.size();
    std::string line = text.substr(start, pos - start);
    start = pos + 1;
    ++line_no;
    if (const std::size_t c = line.find('#'); c != std::string::npos)
      line.erase(c);
    const std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks[0].front() == '[') {
      if (toks.size() != 1 || toks[0].back() != ']')
        fail(line_no, "malformed section header");
      const std::string name = toks[0].substr(1, toks[0].size() - 2);
      if (name != "model" && name != "drive" && name != "run" &&
          name != "benchmark" && name != "convergence")
        fail(line_no, "unknown section [" + name + "]");
      p.section = name;
      continue;
    }
    p.handle(toks[0], {toks.begin() + 1, toks.end()}, line_no);
  }

  if (p.hopping_explicit) {
    const auto n = static_cast<std::size_t>(p.cfg.model.n_sites);
    if (p.hop_rows.size() != n)
      throw ConfigError("config: explicit hopping needs exactly n_sites rows");
    p.cfg.model.hopping.clear();
    for (const auto& row : p.hop_rows) {
      if (row.size() != n)
        throw ConfigError("config: each hop_row needs n_sites entries");
      p.cfg.model.hopping.insert(p.cfg.model.hopping.end(), row.begin(),
                                 row.end());
    }
  }

  validate(p.cfg);
  return p.cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  const auto line = [&out](const std::string& s) { out += s + '\n'; };
  const auto num_line = [&](const std::string& key, double v) {
    line(key + ' ' + fmt17(v));
  };

  const ModelConfig& m = cfg.model;
  line("[model]");
  line("n_sites " + std::to_string(m.n_sites));
  if (m.chain) {
    line("hopping chain " + fmt17(m.chain_v));
  } else {
    line("hopping explicit");
    const auto n = static_cast<std::size_t>(m.n_sites);
    for (std::size_t i = 0; i < n; ++i) {
      std::string row = "hop_row";
      for (std::size_t j = 0; j < n; ++j)
        row += ' ' + fmt17(m.hopping[i * n + j]);
      line(row);
    }
  }
  num_line("interaction", m.interaction);
  num_line("v_sd", m.v_sd);
  num_line("v_g", m.v_g);
  if (!m.site_potentials.empty()) {
    std::string row = "potentials";
    for (const double v : m.site_potentials) row += ' ' + fmt17(v);
    line(row);
  }
  switch (m.sector_mode) {
    case SectorMode::Auto:
      line("sector auto");
      break;
    case SectorMode::None:
      line("sector none");
      break;
    case SectorMode::Explicit:
      line("sector " + std::to_string(m.n_up) + ' ' +
           std::to_string(m.n_down));
      break;
  }

  line("");
  line("[drive]");
  num_line("t0", cfg.drive.t0);
  num_line("timescale", cfg.drive.timescale);

  const RunConfig& r = cfg.run;
  line("");
  line("[run]");
  line("scheme " + r.scheme);
  num_line("t_start", r.t_start);
  num_line("t_end", r.t_end);
  num_line("tol", r.tol);
  num_line("krylov_tol", r.krylov_tol);
  line("krylov_m_max " + std::to_string(r.krylov_m_max));
  num_line("output_dt", r.output_dt);
  line("seed " + std::to_string(r.seed));
  num_line("tau_min", r.tau_min);
  num_line("tau_max", r.tau_max);
  num_line("tau_init", r.tau_init);
  num_line("safety", r.safety);
  num_line("fac_min", r.fac_min);
  num_line("fac_max", r.fac_max);
  line("k_max " + std::to_string(r.k_max));

  const auto list_line = [&](const std::string& key, const auto& values,
                             auto format) {
    std::string row = key;
    for (const auto& v : values) row += ' ' + format(v);
    line(row);
  };
  const auto fmt_long = [](long v) { return std::to_string(v); };

  const BenchmarkConfig& b = cfg.benchmark;
  line("");
  line("[benchmark]");
  list_line("tols", b.tols, fmt17);
  list_line("steps", b.steps, fmt_long);
  num_line("ref_tol", b.ref_tol);

  const ConvergenceConfig& c = cfg.convergence;
  line("");
  line("[convergence]");
  list_line("taus", c.taus, fmt17);
  list_line("global_steps", c.global_steps, fmt_long);
  list_line("timescales", c.timescales, fmt17);
  num_line("t_probe", c.t_probe);
  num_line("fixed_tau", c.fixed_tau);

  return out;
}

}  // namespace mottsim
