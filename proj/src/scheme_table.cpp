#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mottsim/cfm.hpp"

namespace mottsim {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Decimal literal, or a rational p/q with integer parts.
double parse_number(const std::string& tok, int line_no) {
  const std::size_t slash = tok.find('/');
  const char* s = tok.c_str();
  char* end = nullptr;
  if (slash != std::string::npos) {
    errno = 0;
    const long long p = std::strtoll(s, &end, 10);
    bool ok = end == s + slash && errno == 0 && slash + 1 < tok.size();
    long long q = 0;
    if (ok) {
      errno = 0;
      q = std::strtoll(s + slash + 1, &end, 10);
      ok = end == s + tok.size() && errno == 0 && q != 0;
    }
    if (!ok)
      throw SchemeTableError("scheme table line " + std::to_string(line_no) +
                             ": bad rational literal '" + tok + "'");
    return static_cast<double>(p) / static_cast<double>(q);
  }
  errno = 0;
  const double v = std::strtod(s, &end);
  if (end != s + tok.size() || end == s || !std::isfinite(v))
    throw SchemeTableError("scheme table line " + std::to_string(line_no) +
                           ": bad numeric literal '" + tok + "'");
  return v;
}

}  // namespace

CFMScheme load_scheme_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  std::optional<std::string> name;
  std::optional<long> order, n_exp, n_nodes;
  std::optional<std::vector<double>> nodes;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<std::string> vals;
    for (std::string t; ls >> t;) vals.push_back(std::move(t));

    const auto expect_one = [&]() -> const std::string& {
      if (vals.size() != 1)
        throw SchemeTableError("scheme table line " + std::to_string(line_no) +
                               ": key '" + key + "' takes exactly one value");
      return vals[0];
    };
    const auto parse_int = [&](const std::string& tok) {
      char* end = nullptr;
      const long v = std::strtol(tok.c_str(), &end, 10);
      if (end != tok.c_str() + tok.size() || end == tok.c_str())
        throw SchemeTableError("scheme table line " + std::to_string(line_no) +
                               ": bad integer '" + tok + "'");
      return v;
    };
    const auto set_once = [&](auto& slot, auto v) {
      if (slot)
        throw SchemeTableError("scheme table line " + std::to_string(line_no) +
                               ": duplicate key '" + key + "'");
      slot = std::move(v);
    };

    if (key == "name") {
      set_once(name, expect_one());
    } else if (key == "order") {
      set_once(order, parse_int(expect_one()));
    } else if (key == "J") {
      set_once(n_exp, parse_int(expect_one()));
    } else if (key == "K") {
      set_once(n_nodes, parse_int(expect_one()));
    } else if (key == "c") {
      std::vector<double> cs;
      cs.reserve(vals.size());
      for (const auto& t : vals) cs.push_back(parse_number(t, line_no));
      set_once(nodes, std::move(cs));
    } else if (key == "a") {
      std::vector<double> row;
      row.reserve(vals.size());
      for (const auto& t : vals) row.push_back(parse_number(t, line_no));
      rows.push_back(std::move(row));
    } else {
      throw SchemeTableError("scheme table line " + std::to_string(line_no) +
                             ": unknown key '" + key + "'");
    }
  }

  if (!name) throw SchemeTableError("scheme table: missing key 'name'");
  if (!order) throw SchemeTableError("scheme table: missing key 'order'");
  if (!n_exp) throw SchemeTableError("scheme table: missing key 'J'");
  if (!n_nodes) throw SchemeTableError("scheme table: missing key 'K'");
  if (!nodes) throw SchemeTableError("scheme table: missing key 'c'");
  if (rows.empty()) throw SchemeTableError("scheme table: missing key 'a'");

  if (*order < 1) throw SchemeTableError("scheme table: order must be positive");
  if (*n_exp < 1 || *n_nodes < 1)
    throw SchemeTableError("scheme table: J and K must be positive");
  if (static_cast<long>(nodes->size()) != *n_nodes)
    throw SchemeTableError("scheme table: 'c' lists " +
                           std::to_string(nodes->size()) + " nodes but K = " +
                           std::to_string(*n_nodes));
  if (static_cast<long>(rows.size()) != *n_exp)
    throw SchemeTableError("scheme table: found " + std::to_string(rows.size()) +
                           " 'a' rows but J = " + std::to_string(*n_exp));
  for (const auto& row : rows)
    if (static_cast<long>(row.size()) != *n_nodes)
      throw SchemeTableError("scheme table: ragged 'a' row (" +
                             std::to_string(row.size()) + " entries, K = " +
                             std::to_string(*n_nodes) + ")");
  for (const double c : *nodes)
    if (!(c >= 0.0 && c <= 1.0))
      throw SchemeTableError("scheme table: node " + fmt17(c) +
                             " outside [0, 1]");

  CFMScheme scheme{*name, static_cast<int>(*order), std::move(*nodes),
                   std::move(rows)};
  const auto [r1, r2] = order_residuals(scheme);
  if (r1 > 1e-13)
    throw SchemeTableError(
        "scheme table: order-1 consistency violated, residual " + fmt17(r1));
  if (scheme.order >= 2 && r2 > 1e-13)
    throw SchemeTableError("scheme table: order-2 condition violated, residual " +
                           fmt17(r2));
  return scheme;
}

std::string save_scheme_table(const CFMScheme& scheme) {
  if (scheme.name.empty() ||
      scheme.name.find_first_of(" \t#") != std::string::npos)
    throw SchemeTableError("save_scheme_table: name must be a single token");
  std::ostringstream out;
  out << "name " << scheme.name << "\n";
  out << "order " << scheme.order << "\n";
  out << "J " << scheme.n_exponentials() << "\n";
  out << "K " << scheme.n_nodes() << "\n";
  out << "c";
  for (const double c : scheme.nodes) out << ' ' << fmt17(c);
  out << "\n";
  for (const auto& row : scheme.coeffs) {
    out << "a";
    for (const double a : row) out << ' ' << fmt17(a);
    out << "\n";
  }
  return out.str();
}

}  // namespace mottsim
