#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "liangyi/coevo/run.hpp"
#include "liangyi/errors.hpp"
#include "liangyi/random.hpp"

namespace liangyi {

// Minimal TOML subset: [section] headers, `key = value` lines, '#' comments,
// values are numbers, true/false, or double-quoted strings. Keys come back
// as "section.key".
inline std::map<std::string, std::string> parse_kv_config(std::istream& in,
                                                          const std::string& where) {
  std::map<std::string, std::string> out;
  std::string line, section;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = where + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(at + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError(at + "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(at + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(at + "missing key");
    if (value.empty()) throw ParseError(at + "missing value for '" + key + "'");
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') throw ParseError(at + "unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!out.emplace(full, value).second) throw ParseError(at + "duplicate key '" + full + "'");
  }
  return out;
}

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (!in || !(in >> std::ws).eof())
    throw ValidationError("config field '" + key + "': cannot parse '" + text + "'");
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ValidationError("config field '" + key + "': expected true or false, got '" + text + "'");
}

}  // namespace detail

// Applies key/values over the defaults. Unknown keys are rejected so typos
// do not silently fall back to defaults.
inline RunConfig run_config_from_kv(const std::map<std::string, std::string>& kv,
                                    RunConfig rc = {}) {
  using detail::parse_bool;
  using detail::parse_number;
  for (const auto& [key, value] : kv) {
    if (key == "run.n_ap") rc.n_ap = parse_number<int>(key, value);
    else if (key == "run.n_ip") rc.n_ip = parse_number<int>(key, value);
    else if (key == "run.cycles") rc.cycles = parse_number<int>(key, value);
    else if (key == "run.seed") rc.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "alg.generations") rc.alg.generations = parse_number<int>(key, value);
    else if (key == "alg.cro") rc.alg.cro = parse_number<double>(key, value);
    else if (key == "alg.mu") rc.alg.mu = parse_number<double>(key, value);
    else if (key == "alg.alpha") rc.alg.alpha = parse_number<double>(key, value);
    else if (key == "alg.beta") rc.alg.beta = parse_number<double>(key, value);
    else if (key == "ins.generations") rc.ins.generations = parse_number<int>(key, value);
    else if (key == "ins.cro") rc.ins.cro = parse_number<double>(key, value);
    else if (key == "ins.mu") rc.ins.mu = parse_number<double>(key, value);
    else if (key == "ins.res") rc.ins.res = parse_number<double>(key, value);
    else if (key == "ins.tournament") rc.ins.tournament = parse_number<int>(key, value);
    else if (key == "metric.budget") rc.metric.budget = budget_from_string(value);
    else if (key == "metric.theta") rc.metric.theta = parse_number<double>(key, value);
    else if (key == "metric.solver_seed") rc.metric.solver_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "space.n") rc.space.n = parse_number<int>(key, value);
    else if (key == "space.grid") rc.space.grid = parse_number<std::int64_t>(key, value);
    else if (key == "oracle.n_max") rc.n_max = parse_number<int>(key, value);
    else if (key == "analysis.enabled") rc.analysis.enabled = parse_bool(key, value);
    else if (key == "analysis.test_set_size") rc.analysis.test_set_size = parse_number<int>(key, value);
    else if (key == "analysis.test_seed") rc.analysis.test_seed = parse_number<std::uint64_t>(key, value);
    else throw ValidationError("config: unknown field '" + key + "'");
  }
  // The solver seed is fixed globally per run; unless given it is the run seed.
  if (!kv.count("metric.solver_seed")) rc.metric.solver_seed = rc.seed;
  rc.validate();
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  return run_config_from_kv(parse_kv_config(in, path.string()));
}

// Canonical serialization; the manifest hash is taken over exactly these bytes.
inline std::string canonical_config(const RunConfig& rc) { return run_config_to_json(rc).dump(2) + "\n"; }

inline std::string config_hash(const std::string& canonical) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << fnv1a(canonical);
  return out.str();
}

}  // namespace liangyi
