/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/matpower.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include "opf/errors.hpp"

namespace opf {

namespace {

using Table = std::vector<std::vector<double>>;

std::string strip_comments(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto pos = line.find('%');
    if (pos != std::string::npos) line.erase(pos);
    out += line;
    out += '\n';
  }
  return out;
}

// Locates "<ident>.<field> =" and returns the offset just past '='.
std::size_t find_assignment(const std::string& text, const std::string& field) {
  const std::string key = "." + field;
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    std::size_t after = pos + key.size();
    // reject longer identifiers, e.g. ".gen" inside ".gencost"
    if (after < text.size() && (std::isalnum(static_cast<unsigned char>(text[after])) ||
                                text[after] == '_')) {
      pos = after;
      continue;
    }
    std::size_t eq = text.find_first_not_of(" \t", after);
    if (eq != std::string::npos && text[eq] == '=') return eq + 1;
    pos = after;
  }
  return std::string::npos;
}

double parse_scalar(const std::string& text, const std::string& field) {
  std::size_t pos = find_assignment(text, field);
  if (pos == std::string::npos)
    throw MalformedCase("matpower: missing field " + field);
  const char* start = text.c_str() + pos;
  char* end = nullptr;
  double v = std::strtod(start, &end);
  if (end == start) throw MalformedCase("matpower: cannot parse scalar " + field);
  return v;
}

Table parse_table(const std::string& text, const std::string& field, bool required) {
  std::size_t pos = find_assignment(text, field);
  if (pos == std::string::npos) {
    if (required) throw MalformedCase("matpower: missing table " + field);
    return {};
  }
  std::size_t open = text.find('[', pos);
  std::size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos)
    throw MalformedCase("matpower: unterminated table " + field);

  Table rows;
  std::vector<double> current;
  std::size_t i = open + 1;
  while (i < close) {
    char c = text[i];
    if (c == ';' || c == '\n') {
      if (!current.empty()) rows.push_back(std::move(current));
      current.clear();
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
    } else {
      const char* start = text.c_str() + i;
      char* end = nullptr;
      double v = std::strtod(start, &end);
      if (end == start)
        throw MalformedCase("matpower: bad token in table " + field + " near '" +
                            text.substr(i, 12) + "'");
      current.push_back(v);
      i += static_cast<std::size_t>(end - start);
    }
  }
  if (!current.empty()) rows.push_back(std::move(current));
  return rows;
}

std::string parse_case_name(const std::string& text) {
  std::size_t pos = text.find("function");
  if (pos == std::string::npos) return "";
  std::size_t eq = text.find('=', pos);
  if (eq == std::string::npos) return "";
  std::istringstream in(text.substr(eq + 1));
  std::string name;
  in >> name;
  while (!name.empty() && (name.back() == ';' || name.back() == '\n')) name.pop_back();
  return name;
}

void expect_cols(const Table& t, std::size_t cols, const std::string& what) {
  for (const auto& row : t)
    if (row.size() < cols)
      throw MalformedCase("matpower: " + what + " row has " +
                          std::to_string(row.size()) + " columns, need >= " +
                          std::to_string(cols));
}

}  // namespace

NetworkCase aggregate_generators(NetworkCase c) {
  std::map<int, GenRecord> merged;
  for (const GenRecord& g : c.generators) {
    auto [it, fresh] = merged.emplace(g.bus_id, g);
    if (!fresh) {
      it->second.p_min += g.p_min;
      it->second.p_max += g.p_max;
      it->second.q_min += g.q_min;
      it->second.q_max += g.q_max;
      it->second.cost_linear = std::min(it->second.cost_linear, g.cost_linear);
    }
  }
  c.generators.clear();
  for (const auto& [bus, g] : merged) c.generators.push_back(g);
  return c;
}

NetworkCase parse_matpower(const std::string& text) {
  const std::string clean = strip_comments(text);

  NetworkCase c;
  c.name = parse_case_name(clean);
  c.base_mva = parse_scalar(clean, "baseMVA");
  if (!(c.base_mva > 0.0)) throw InconsistentCase("matpower: baseMVA must be positive");

  Table bus = parse_table(clean, "bus", true);
  Table gen = parse_table(clean, "gen", true);
  Table branch = parse_table(clean, "branch", true);
  Table gencost = parse_table(clean, "gencost", true);
  expect_cols(bus, 13, "bus");
  expect_cols(gen, 10, "gen");
  expect_cols(branch, 11, "branch");
  expect_cols(gencost, 4, "gencost");

  const double base = c.base_mva;
  for (const auto& r : bus) {
    BusRecord b;
    b.id = static_cast<int>(r[0]);
    b.p_load = r[2] / base;
    b.q_load = r[3] / base;
    b.shunt = Complex(r[4] / base, r[5] / base);
    b.v_max = r[11];
    b.v_min = r[12];
    c.buses.push_back(b);
  }

  if (gencost.size() != gen.size() && gencost.size() != 2 * gen.size())
    throw MalformedCase("matpower: gencost must have ng or 2*ng rows");

  bool warned = false;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    const auto& r = gen[i];
    if (r[7] == 0.0) continue;  // out of service
    GenRecord g;
    g.bus_id = static_cast<int>(r[0]);
    g.q_max = r[3] / base;
    g.q_min = r[4] / base;
    g.p_max = r[8] / base;
    g.p_min = r[9] / base;

    const auto& cost = gencost[i];
    if (cost[0] != 2.0)
      throw MalformedCase("matpower: only polynomial (model 2) gencost supported");
    int ncost = static_cast<int>(cost[3]);
    if (static_cast<int>(cost.size()) < 4 + ncost)
      throw MalformedCase("matpower: gencost row shorter than ncost");
    // coefficients are highest degree first; keep the linear one
    double c1 = ncost >= 2 ? cost[4 + ncost - 2] : 0.0;
    bool dropped = false;
    for (int d = 0; d < ncost; ++d) {
      int degree = ncost - 1 - d;
      if (degree != 1 && cost[4 + d] != 0.0) dropped = true;
    }
    if (dropped && !warned) {
      std::cerr << "[matpower] " << (c.name.empty() ? "case" : c.name)
                << ": keeping only linear cost terms, other coefficients ignored\n";
      warned = true;
    }
    g.cost_linear = c1 * base;  // cost per unit of per-unit power
    c.generators.push_back(g);
  }

  for (const auto& r : branch) {
    if (r[10] == 0.0) continue;  // out of service
    BranchRecord br;
    br.from_bus = static_cast<int>(r[0]);
    br.to_bus = static_cast<int>(r[1]);
    Complex z(r[2], r[3]);
    if (std::abs(z) == 0.0)
      throw InconsistentCase("matpower: zero-impedance branch " +
                             std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus));
    br.series_admittance = 1.0 / z;
    br.shunt_charging = Complex(0.0, r[4]);
    double ratio = r[8] == 0.0 ? 1.0 : r[8];
    double angle_rad = r[9] * std::numbers::pi / 180.0;
    br.tap_ratio = std::polar(ratio, angle_rad);
    c.branches.push_back(br);
  }

  c = aggregate_generators(std::move(c));
  c.validate();
  return c;
}

}  // namespace opf
