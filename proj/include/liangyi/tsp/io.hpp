#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "liangyi/errors.hpp"
#include "liangyi/tsp/instance.hpp"

namespace liangyi {

// Native format: {"n": int, "grid": int, "cities": [[x, y], ...]} with an
// optional "id" carried for round trips.
inline nlohmann::json instance_to_json(const TspInstance& ins) {
  nlohmann::json cities = nlohmann::json::array();
  for (const City& c : ins.cities) cities.push_back({c.x, c.y});
  return {{"id", ins.id}, {"n", ins.n()}, {"grid", ins.grid}, {"cities", std::move(cities)}};
}

inline TspInstance instance_from_json(const nlohmann::json& doc, const std::string& where = "") {
  auto fail = [&](const std::string& what) -> ParseError {
    return ParseError((where.empty() ? "" : where + ": ") + what);
  };
  if (!doc.is_object()) throw fail("expected a JSON object");
  for (const char* key : {"n", "grid", "cities"})
    if (!doc.contains(key)) throw fail(std::string("missing field '") + key + "'");
  if (!doc["n"].is_number_integer() || doc["n"].get<long long>() <= 0)
    throw fail("field 'n' must be a positive integer");
  if (!doc["grid"].is_number_integer() || doc["grid"].get<long long>() <= 0)
    throw fail("field 'grid' must be a positive integer");
  if (!doc["cities"].is_array()) throw fail("field 'cities' must be an array");

  TspInstance ins;
  const long long n = doc["n"].get<long long>();
  ins.grid = doc["grid"].get<std::int64_t>();
  if (doc.contains("id")) {
    if (!doc["id"].is_number_unsigned()) throw fail("field 'id' must be a non-negative integer");
    ins.id = doc["id"].get<InstanceId>();
  }
  const auto& rows = doc["cities"];
  if (static_cast<long long>(rows.size()) != n)
    throw fail("field 'n' declares " + std::to_string(n) + " cities but 'cities' has " +
               std::to_string(rows.size()) + " rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string field = "cities[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != 2 || !row[0].is_number_integer() ||
        !row[1].is_number_integer())
      throw fail(field + " must be an [x, y] integer pair");
    City c{row[0].get<std::int64_t>(), row[1].get<std::int64_t>()};
    if (c.x < 0 || c.y < 0 || c.x >= ins.grid || c.y >= ins.grid)
      throw fail(field + " lies outside [0, grid)");
    ins.cities.push_back(c);
  }
  return ins;
}

inline void write_instance(const TspInstance& ins, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << instance_to_json(ins).dump() << '\n';
}

// TSPLIB EUC_2D import. Coordinates must be non-negative integral values;
// the grid is one past the largest coordinate.
inline TspInstance read_tsplib(std::istream& in, const std::string& where, InstanceId id = 0) {
  auto fail = [&](int line, const std::string& what) {
    return ParseError(where + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  int lineno = 0;
  long long dimension = -1;
  bool in_coords = false;
  TspInstance ins;
  ins.id = id;
  std::int64_t max_coord = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty()) continue;
    if (trimmed == "EOF") break;
    if (!in_coords) {
      if (trimmed.rfind("NODE_COORD_SECTION", 0) == 0) {
        if (dimension <= 0) throw fail(lineno, "NODE_COORD_SECTION before DIMENSION");
        in_coords = true;
        continue;
      }
      auto colon = trimmed.find(':');
      if (colon == std::string::npos) throw fail(lineno, "expected 'KEY : VALUE'");
      std::string key = trimmed.substr(0, colon);
      std::string value = trimmed.substr(colon + 1);
      key.erase(key.find_last_not_of(" \t") + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      value.erase(value.find_last_not_of(" \t") + 1);
      if (key == "DIMENSION") {
        try {
          dimension = std::stoll(value);
        } catch (const std::exception&) {
          throw fail(lineno, "DIMENSION is not an integer");
        }
      } else if (key == "EDGE_WEIGHT_TYPE" && value != "EUC_2D") {
        throw fail(lineno, "unsupported EDGE_WEIGHT_TYPE '" + value + "' (only EUC_2D)");
      } else if (key == "TYPE" && value != "TSP") {
        throw fail(lineno, "unsupported TYPE '" + value + "'");
      }
      continue;
    }
    std::istringstream row(trimmed);
    long long index;
    double x, y;
    if (!(row >> index >> x >> y)) throw fail(lineno, "expected 'index x y'");
    if (x < 0 || y < 0 || x != std::floor(x) || y != std::floor(y))
      throw fail(lineno, "coordinates must be non-negative integers");
    if (index != static_cast<long long>(ins.cities.size()) + 1)
      throw fail(lineno, "node index out of sequence");
    City c{static_cast<std::int64_t>(x), static_cast<std::int64_t>(y)};
    max_coord = std::max({max_coord, c.x, c.y});
    ins.cities.push_back(c);
  }
  if (!in_coords) throw fail(lineno, "missing NODE_COORD_SECTION");
  if (static_cast<long long>(ins.cities.size()) != dimension)
    throw fail(lineno, "DIMENSION " + std::to_string(dimension) + " but " +
                           std::to_string(ins.cities.size()) + " coordinate rows");
  ins.grid = max_coord + 1;
  return ins;
}

// Dispatches on extension: ".tsp" is TSPLIB, anything else native JSON.
inline TspInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  if (path.extension() == ".tsp") return read_tsplib(in, path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return instance_from_json(doc, path.string());
}

}  // namespace liangyi
