#include "peflow/meshio.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "peflow/errors.hpp"

namespace peflow {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

double embedded_distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json load_json_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path + ": cannot open file");
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

TriangleMesh load_mesh_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path + ": cannot open file");
  }
  std::vector<std::array<double, 3>> vertices;
  FaceList faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream iss(line);
    std::string key;
    if (!(iss >> key) || key[0] == '#') continue;
    if (key == "v") {
      std::array<double, 3> xyz{};
      if (!(iss >> xyz[0] >> xyz[1] >> xyz[2])) {
        parse_fail(path, lineno, "expected `v x y z`");
      }
      std::string extra;
      if (iss >> extra) parse_fail(path, lineno, "trailing tokens after `v x y z`");
      vertices.push_back(xyz);
    } else if (key == "f") {
      std::array<long, 3> idx{};
      if (!(iss >> idx[0] >> idx[1] >> idx[2])) {
        parse_fail(path, lineno, "faces must be exactly three 1-based vertex indices");
      }
      std::string extra;
      if (iss >> extra) parse_fail(path, lineno, "faces must be exactly three 1-based vertex indices");
      std::array<int, 3> face{};
      for (int k = 0; k < 3; ++k) {
        if (idx[k] < 1 || idx[k] > static_cast<long>(vertices.size())) {
          parse_fail(path, lineno, "vertex index " + std::to_string(idx[k]) + " out of range");
        }
        face[k] = static_cast<int>(idx[k] - 1);
      }
      faces.push_back(face);
    } else {
      parse_fail(path, lineno, "unsupported line type `" + key + "` (only `v` and `f`)");
    }
  }
  EdgeLengthMap lengths;
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      const int i = f[k];
      const int j = f[(k + 1) % 3];
      const auto key = std::minmax(i, j);
      lengths[{key.first, key.second}] = embedded_distance(vertices[i], vertices[j]);
    }
  }
  return build_mesh(faces, lengths);
}

TriangleMesh load_mesh_json(const std::string& path) {
  const json doc = load_json_document(path);
  if (!doc.is_object() || !doc.contains("faces") || !doc.contains("edge_lengths")) {
    throw ParseError(path + ": expected an object with `faces` and `edge_lengths`");
  }
  FaceList faces;
  EdgeLengthMap lengths;
  try {
    for (const auto& f : doc.at("faces")) {
      if (!f.is_array() || f.size() != 3) {
        throw ParseError(path + ": every face must be a triple of vertex indices");
      }
      faces.push_back({f.at(0).get<int>(), f.at(1).get<int>(), f.at(2).get<int>()});
    }
    for (const auto& e : doc.at("edge_lengths")) {
      if (!e.is_array() || e.size() != 3) {
        throw ParseError(path + ": every edge length entry must be [i, j, L]");
      }
      const int i = e.at(0).get<int>();
      const int j = e.at(1).get<int>();
      const auto key = std::minmax(i, j);
      lengths[{key.first, key.second}] = e.at(2).get<double>();
    }
  } catch (const json::exception& ex) {
    throw ParseError(path + ": " + ex.what());
  }
  return build_mesh(faces, lengths);
}

TriangleMesh load_mesh(const std::string& path) {
  if (has_suffix(path, ".obj") || has_suffix(path, ".OBJ")) {
    return load_mesh_obj(path);
  }
  return load_mesh_json(path);
}

void save_mesh_json(const TriangleMesh& mesh, const std::string& path) {
  json doc;
  doc["faces"] = json::array();
  for (const auto& f : mesh.faces) {
    doc["faces"].push_back({f[0], f[1], f[2]});
  }
  doc["edge_lengths"] = json::array();
  for (int e = 0; e < mesh.ne; ++e) {
    doc["edge_lengths"].push_back({mesh.edges[e].first, mesh.edges[e].second, mesh.edge_len[e]});
  }
  std::ofstream out(path);
  if (!out) {
    throw ParseError(path + ": cannot open file for writing");
  }
  out << doc.dump(2) << "\n";
}

}  // namespace peflow
