#include "mottsim/trace.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "mottsim/text_util.hpp"

namespace mottsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_name(const std::string& name) {
  if (name.empty() || name.find(',') != std::string::npos ||
      name.find('\n') != std::string::npos)
    throw TraceError("trace_to_csv: column name unusable in CSV: '" + name +
                     "'");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& field, std::size_t line_no,
                    const char* what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE)
    throw TraceError("trace_from_csv: bad " + std::string(what) + " '" +
                     field + "' on line " + std::to_string(line_no));
  return v;
}

std::uint64_t parse_count(const std::string& field, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(field.c_str(), &end, 10);
  if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE)
    throw TraceError("trace_from_csv: bad matvec count '" + field +
                     "' on line " + std::to_string(line_no));
  return v;
}

void require_empty(const std::string& field, std::size_t line_no) {
  if (!field.empty())
    throw TraceError("trace_from_csv: expected empty cell, got '" + field +
                     "' on line " + std::to_string(line_no));
}

double ulp_at(double x) {
  x = std::abs(x);
  return std::nextafter(x, kInf) - x;
}

bool near2(double a, double b) {
  return std::abs(a - b) <= 2.0 * std::max(ulp_at(a), ulp_at(b));
}

}  // namespace

std::string trace_to_csv(const PropagationTrace& trace,
                         const std::vector<std::string>& observable_names,
                         const std::vector<std::string>& drive_names) {
  for (const auto& n : observable_names) check_name(n);
  for (const auto& n : drive_names) check_name(n);
  for (const auto& s : trace.samples) {
    if (s.observables.size() != observable_names.size() ||
        s.drives.size() != drive_names.size())
      throw TraceError("trace_to_csv: sample width does not match names");
  }

  std::string out = "kind,t,tau,est,accepted,matvecs";
  for (const auto& n : observable_names) out += ",obs:" + n;
  for (const auto& n : drive_names) out += ",drive:" + n;
  out += '\n';

  const std::string step_pad(observable_names.size() + drive_names.size(),
                             ',');
  const auto emit_step = [&](const StepRecord& s) {
    out += "step," + fmt17(s.t) + ',' + fmt17(s.tau) + ',';
    out += std::isinf(s.est) ? "inf" : fmt17(s.est);
    out += s.accepted ? ",1," : ",0,";
    out += std::to_string(s.matvecs);
    out += step_pad;
    out += '\n';
  };
  const auto emit_sample = [&](const SampleRecord& s) {
    out += "sample," + fmt17(s.t) + ",,,,";
    for (const double v : s.observables) out += ',' + fmt17(v);
    for (const double v : s.drives) out += ',' + fmt17(v);
    out += '\n';
  };

  std::size_t i = 0, j = 0;
  while (i < trace.steps.size() || j < trace.samples.size()) {
    const bool take_sample =
        j < trace.samples.size() &&
        (i >= trace.steps.size() || trace.samples[j].t <= trace.steps[i].t);
    if (take_sample)
      emit_sample(trace.samples[j++]);
    else
      emit_step(trace.steps[i++]);
  }
  return out;
}

ParsedTrace trace_from_csv(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string::npos) pos = text.size();
    std::string line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = pos + 1;
  }
  if (lines.empty()) throw TraceError("trace_from_csv: empty input");

  ParsedTrace parsed;
  const std::vector<std::string> header = split_fields(lines[0]);
  const char* fixed[] = {"kind", "t", "tau", "est", "accepted", "matvecs"};
  if (header.size() < 6)
    throw TraceError("trace_from_csv: truncated header");
  for (std::size_t k = 0; k < 6; ++k)
    if (header[k] != fixed[k])
      throw TraceError("trace_from_csv: expected header column '" +
                       std::string(fixed[k]) + "', got '" + header[k] + "'");
  bool in_drives = false;
  for (std::size_t k = 6; k < header.size(); ++k) {
    if (header[k].rfind("obs:", 0) == 0 && !in_drives) {
      parsed.observable_names.push_back(header[k].substr(4));
    } else if (header[k].rfind("drive:", 0) == 0) {
      in_drives = true;
      parsed.drive_names.push_back(header[k].substr(6));
    } else {
      throw TraceError("trace_from_csv: unexpected header column '" +
                       header[k] + "'");
    }
  }
  const std::size_t n_obs = parsed.observable_names.size();
  const std::size_t n_drv = parsed.drive_names.size();

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    const std::vector<std::string> f = split_fields(lines[ln]);
    if (f.size() != header.size())
      throw TraceError("trace_from_csv: wrong field count on line " +
                       std::to_string(line_no));
    if (f[0] == "step") {
      StepRecord s;
      s.t = parse_double(f[1], line_no, "time");
      s.tau = parse_double(f[2], line_no, "step size");
      s.est = parse_double(f[3], line_no, "error estimate");
      if (f[4] != "0" && f[4] != "1")
        throw TraceError("trace_from_csv: bad accepted flag on line " +
                         std::to_string(line_no));
      s.accepted = f[4] == "1";
      s.matvecs = parse_count(f[5], line_no);
      for (std::size_t k = 6; k < f.size(); ++k) require_empty(f[k], line_no);
      parsed.trace.steps.push_back(s);
    } else if (f[0] == "sample") {
      SampleRecord s;
      s.t = parse_double(f[1], line_no, "time");
      for (std::size_t k = 2; k < 6; ++k) require_empty(f[k], line_no);
      for (std::size_t k = 0; k < n_obs; ++k)
        s.observables.push_back(parse_double(f[6 + k], line_no, "observable"));
      for (std::size_t k = 0; k < n_drv; ++k)
        s.drives.push_back(
            parse_double(f[6 + n_obs + k], line_no, "drive value"));
      parsed.trace.samples.push_back(std::move(s));
    } else {
      throw TraceError("trace_from_csv: unknown row kind '" + f[0] +
                       "' on line " + std::to_string(line_no));
    }
  }
  return parsed;
}

void validate_trace(const PropagationTrace& trace, double t_start,
                    double t_end) {
  if (trace.steps.empty()) throw TraceError("trace: no steps recorded");
  double cur = t_start;
  std::uint64_t prev_mv = 0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const StepRecord& s = trace.steps[i];
    const std::string where = " at step " + std::to_string(i);
    if (!near2(s.t, cur))
      throw TraceError("trace: step start does not continue the previous step" +
                       where);
    if (!(s.tau > 0.0)) throw TraceError("trace: nonpositive step size" + where);
    if (std::isnan(s.est) || s.est < 0.0)
      throw TraceError("trace: bad error estimate" + where);
    if (s.accepted && std::isinf(s.est))
      throw TraceError("trace: accepted step marked as breakdown" + where);
    if (s.matvecs <= prev_mv)
      throw TraceError("trace: matvec count not increasing" + where);
    prev_mv = s.matvecs;
    if (s.accepted) cur = s.t + s.tau;
  }
  if (!near2(cur, t_end))
    throw TraceError("trace: accepted steps do not reach t_end");

  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const double t = trace.samples[i].t;
    const bool inside = (t >= t_start && t <= t_end) || near2(t, t_start) ||
                        near2(t, t_end);
    if (!inside)
      throw TraceError("trace: sample outside the propagation window at index " +
                       std::to_string(i));
    if (i > 0 && !(t > trace.samples[i - 1].t))
      throw TraceError("trace: sample times must increase strictly");
  }
}

}  // namespace mottsim
