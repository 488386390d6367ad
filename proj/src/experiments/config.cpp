// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "plapdg/experiments.hpp"

namespace plapdg {

namespace {

using nlohmann::json;

RationalExponent exponent_from(const json& v) {
  if (v.is_string()) return parse_exponent(v.get<std::string>(), true);
  if (v.is_number_integer()) return rationalize_exponent(v.get<std::int64_t>(), 1, true);
  if (v.is_number()) {
    std::ostringstream s;
    s.precision(15);
    s << v.get<double>();
    return parse_exponent(s.str(), true);
  }
  throw std::invalid_argument("exponent must be a string or a number");
}

Rational rational_from(const json& v) {
  const RationalExponent e = [&] {
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      const auto slash = s.find('/');
      if (slash == std::string::npos) return parse_exponent(s, true);
      return RationalExponent{std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))};
    }
    return exponent_from(v);
  }();
  if (e.num <= 0 || e.den <= 0) throw std::invalid_argument("continuation_step must be positive");
  return {e.num, e.den};
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw std::invalid_argument("unknown key '" + k + "' in " + where);
  }
}

StudyConfig from_json(const json& j, const StudyConfig& base) {
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  check_keys(j,
             {"study", "example", "p", "r", "levels", "h0", "theta", "penalty_mode", "penalty_scale", "solver",
              "quadrature_multiplier", "seed", "timings"},
             "config");
  StudyConfig c = base;
  if (j.contains("study")) {
    const std::string s = j.at("study").get<std::string>();
    if (s == "h") {
      c.kind = StudyKind::H;
    } else if (s == "p") {
      c.kind = StudyKind::P;
    } else {
      throw std::invalid_argument("study must be \"h\" or \"p\"");
    }
  }
  read(j, "example", c.example);
  if (j.contains("p")) {
    c.p_values.clear();
    for (const json& v : j.at("p")) c.p_values.push_back(exponent_from(v));
  }
  read(j, "r", c.r_values);
  read(j, "levels", c.levels);
  read(j, "h0", c.h0);
  read(j, "quadrature_multiplier", c.quadrature_multiplier);
  read(j, "seed", c.seed);
  read(j, "timings", c.timings);
  if (j.contains("penalty_mode")) c.penalty.mode = parse_penalty_mode(j.at("penalty_mode").get<std::string>());
  read(j, "penalty_scale", c.penalty.scale);
  read(j, "theta", c.penalty.theta);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, {"newton_tol", "max_newton_iters", "line_search", "continuation_step", "linear_tol"}, "solver");
    read(s, "newton_tol", c.solver.newton_tol);
    read(s, "max_newton_iters", c.solver.max_newton_iters);
    read(s, "line_search", c.solver.line_search);
    read(s, "linear_tol", c.solver.linear_tol);
    if (s.contains("continuation_step")) c.solver.continuation_step = rational_from(s.at("continuation_step"));
  }
  c.validate();
  return c;
}

json toml_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
    return out;
  }
  if (const auto* a = n.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(toml_to_json(v));
    return out;
  }
  if (const auto* v = n.as_string()) return v->get();
  if (const auto* v = n.as_integer()) return v->get();
  if (const auto* v = n.as_floating_point()) return v->get();
  if (const auto* v = n.as_boolean()) return v->get();
  throw std::invalid_argument("unsupported TOML value (dates and times are not config values)");
}

}  // namespace

StudyConfig study_config_from_json_text(const std::string& text, const StudyConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config JSON: ") + e.what());
  }
  return from_json(j, base);
}

StudyConfig study_config_from_toml_text(const std::string& text, const StudyConfig& base) {
  toml::table t;
  try {
    t = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config TOML: " << e.description() << " at line " << e.source().begin.line;
    throw std::invalid_argument(msg.str());
  }
  return from_json(toml_to_json(t), base);
}

StudyConfig load_study_config(const std::filesystem::path& path, const StudyConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string ext = path.extension().string();
  if (ext == ".json") return study_config_from_json_text(buf.str(), base);
  if (ext == ".toml") return study_config_from_toml_text(buf.str(), base);
  throw std::invalid_argument("config must be .json or .toml: " + path.string());
}

std::string config_to_json(const StudyConfig& c) {
  json j;
  j["study"] = std::string(to_string(c.kind));
  j["example"] = c.example;
  j["p"] = json::array();
  for (const auto& p : c.p_values) j["p"].push_back(p.str());
  j["r"] = c.r_values;
  if (c.kind == StudyKind::H) j["levels"] = c.levels;
  j["h0"] = c.h0;
  j["theta"] = c.penalty.theta;
  j["penalty_mode"] = std::string(to_string(c.penalty.mode));
  j["penalty_scale"] = c.penalty.scale;
  j["solver"] = {{"newton_tol", c.solver.newton_tol},
                 {"max_newton_iters", c.solver.max_newton_iters},
                 {"line_search", c.solver.line_search},
                 {"continuation_step", std::to_string(c.solver.continuation_step.num) + "/" +
                                           std::to_string(c.solver.continuation_step.den)},
                 {"linear_tol", c.solver.linear_tol}};
  j["quadrature_multiplier"] = c.quadrature_multiplier;
  j["seed"] = c.seed;
  j["timings"] = c.timings;
  return j.dump(2) + "\n";
}

}  // namespace plapdg
