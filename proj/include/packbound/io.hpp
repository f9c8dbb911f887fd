#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "packbound/errors.hpp"
#include "packbound/geometry.hpp"

namespace packbound {

struct NamedPolygon {
  std::string name;
  ConvexPolygon polygon;
};

/// Parses `{ "name": string, "vertices": [[x, y], ...] }`; the name is
/// optional and the vertex order may be either orientation.
inline NamedPolygon parse_polygon_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("polygon file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("vertices") || !doc["vertices"].is_array()) {
    throw InvalidInput("polygon file: expected an object with a 'vertices' array");
  }
  std::vector<Point2> pts;
  for (const auto& v : doc["vertices"]) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw InvalidInput("polygon file: each vertex must be [x, y]");
    }
    pts.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  std::string name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw InvalidInput("polygon file: 'name' must be a string");
    name = doc["name"].get<std::string>();
  }
  return {name, ConvexPolygon(std::move(pts))};
}

inline NamedPolygon read_polygon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput("cannot open polygon file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_polygon_json(buf.str());
}

inline std::string polygon_to_json(const NamedPolygon& p) {
  nlohmann::json doc;
  doc["name"] = p.name;
  doc["vertices"] = nlohmann::json::array();
  for (const Point2& v : p.polygon.vertices()) {
    doc["vertices"].push_back({v.x, v.y});
  }
  return doc.dump(2);
}

}  // namespace packbound
