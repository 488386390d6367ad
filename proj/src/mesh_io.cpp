// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "plapdg/mesh.hpp"

namespace plapdg {

namespace {

using nlohmann::json;

TriMesh mesh_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("elements")) {
    throw MeshError("mesh schema violation: expected object with \"vertices\" and \"elements\"");
  }
  const auto& jv = doc.at("vertices");
  const auto& je = doc.at("elements");
  if (!jv.is_array() || !je.is_array()) throw MeshError("mesh schema violation: arrays expected");

  std::vector<Vec2> vertices;
  vertices.reserve(jv.size());
  for (const auto& p : jv) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw MeshError("mesh schema violation: vertex must be [x, y]");
    }
    vertices.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  std::vector<std::array<int, 3>> elements;
  elements.reserve(je.size());
  for (const auto& e : je) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        !e[2].is_number_integer()) {
      throw MeshError("mesh schema violation: element must be [i, j, k] with integer indices");
    }
    elements.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
  }
  return TriMesh(std::move(vertices), std::move(elements));
}

json mesh_to_json(const TriMesh& mesh) {
  json doc;
  doc["vertices"] = json::array();
  for (const auto& v : mesh.vertices()) doc["vertices"].push_back({v.x(), v.y()});
  doc["elements"] = json::array();
  for (const auto& e : mesh.elements()) doc["elements"].push_back({e[0], e[1], e[2]});
  return doc;
}

}  // namespace

TriMesh mesh_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MeshError(std::string("mesh schema violation: ") + e.what());
  }
  return mesh_from_json(doc);
}

std::string mesh_to_json_text(const TriMesh& mesh) { return mesh_to_json(mesh).dump(); }

TriMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return mesh_from_json_text(buf.str());
}

void write_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file " + path.string());
  // doubles are emitted in shortest round-trip form
  out << mesh_to_json(mesh).dump(1) << '\n';
}

}  // namespace plapdg
