/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/native_json.hpp"

#include <json.hpp>

#include "opf/errors.hpp"
#include "opf/matpower.hpp"

namespace opf {

namespace {

using nlohmann::json;

Complex complex_from(const json& j, const char* key, Complex fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  return Complex(v.at("re").get<double>(), v.at("im").get<double>());
}

json complex_to(const Complex& z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace

NetworkCase parse_native(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedCase(std::string("native: invalid JSON: ") + e.what());
  }

  NetworkCase c;
  try {
    c.name = j.value("name", "");
    c.base_mva = j.at("base_mva").get<double>();
    for (const json& b : j.at("buses")) {
      BusRecord r;
      r.id = b.at("id").get<int>();
      r.v_min = b.at("v_min").get<double>();
      r.v_max = b.at("v_max").get<double>();
      r.p_load = b.at("p_load").get<double>();
      r.q_load = b.at("q_load").get<double>();
      r.shunt = complex_from(b, "shunt", Complex(0.0, 0.0));
      c.buses.push_back(r);
    }
    for (const json& g : j.at("generators")) {
      GenRecord r;
      r.bus_id = g.at("bus_id").get<int>();
      r.p_min = g.at("p_min").get<double>();
      r.p_max = g.at("p_max").get<double>();
      r.q_min = g.at("q_min").get<double>();
      r.q_max = g.at("q_max").get<double>();
      r.cost_linear = g.at("cost_linear").get<double>();
      c.generators.push_back(r);
    }
    for (const json& br : j.at("branches")) {
      BranchRecord r;
      r.from_bus = br.at("from_bus").get<int>();
      r.to_bus = br.at("to_bus").get<int>();
      r.series_admittance = complex_from(br, "series_admittance", Complex(0.0, 0.0));
      r.shunt_charging = complex_from(br, "shunt_charging", Complex(0.0, 0.0));
      r.tap_ratio = complex_from(br, "tap_ratio", Complex(1.0, 0.0));
      c.branches.push_back(r);
    }
  } catch (const json::exception& e) {
    throw MalformedCase(std::string("native: schema error: ") + e.what());
  }

  c = aggregate_generators(std::move(c));
  c.validate();
  return c;
}

std::string serialize_native(const NetworkCase& c) {
  json j;
  if (!c.name.empty()) j["name"] = c.name;
  j["base_mva"] = c.base_mva;
  j["buses"] = json::array();
  for (const BusRecord& b : c.buses) {
    json e{{"id", b.id},       {"v_min", b.v_min},   {"v_max", b.v_max},
           {"p_load", b.p_load}, {"q_load", b.q_load}};
    if (b.shunt != Complex(0.0, 0.0)) e["shunt"] = complex_to(b.shunt);
    j["buses"].push_back(e);
  }
  j["generators"] = json::array();
  for (const GenRecord& g : c.generators)
    j["generators"].push_back(json{{"bus_id", g.bus_id},
                                   {"p_min", g.p_min},
                                   {"p_max", g.p_max},
                                   {"q_min", g.q_min},
                                   {"q_max", g.q_max},
                                   {"cost_linear", g.cost_linear}});
  j["branches"] = json::array();
  for (const BranchRecord& br : c.branches) {
    json e{{"from_bus", br.from_bus},
           {"to_bus", br.to_bus},
           {"series_admittance", complex_to(br.series_admittance)}};
    if (br.shunt_charging != Complex(0.0, 0.0))
      e["shunt_charging"] = complex_to(br.shunt_charging);
    if (br.tap_ratio != Complex(1.0, 0.0)) e["tap_ratio"] = complex_to(br.tap_ratio);
    j["branches"].push_back(e);
  }
  return j.dump(2);
}

}  // namespace opf
