#pragma once

// Wavefront OBJ ingestion, geometry subset only (`v` and `f` records).
// Polygons are fan-triangulated; materials, normals, and texcoords are ignored.

#include <array>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trajpair/error.hpp"
#include "trajpair/mesh.hpp"

namespace trajpair {

namespace detail {

// Parses the vertex index of an `f` token ("7", "7/1", "7//3", "-2").
inline int parse_face_index(const std::string& token, int vertex_count, int line_no) {
  const size_t slash = token.find('/');
  const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
  char* end = nullptr;
  const long value = std::strtol(head.c_str(), &end, 10);
  if (end == head.c_str() || *end != '\0' || value == 0) {
    throw ObjParseError("load_obj: bad face index '" + token + "' at line " +
                        std::to_string(line_no));
  }
  const long resolved = value > 0 ? value - 1 : vertex_count + value;
  if (resolved < 0 || resolved >= vertex_count) {
    throw ObjParseError("load_obj: face index " + std::to_string(value) +
                        " out of range at line " + std::to_string(line_no));
  }
  return static_cast<int>(resolved);
}

}  // namespace detail

inline TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ObjParseError("load_obj: cannot open " + path);

  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x >> v.y >> v.z)) {
        throw ObjParseError("load_obj: malformed vertex at line " + std::to_string(line_no));
      }
      vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      while (ss >> token) {
        poly.push_back(detail::parse_face_index(token, static_cast<int>(vertices.size()),
                                                line_no));
      }
      if (poly.size() < 3) {
        throw ObjParseError("load_obj: face with fewer than 3 vertices at line " +
                            std::to_string(line_no));
      }
      for (size_t i = 2; i < poly.size(); ++i) {
        faces.push_back({poly[0], poly[static_cast<int>(i) - 1], poly[static_cast<int>(i)]});
      }
    }
    // Any other record type is ignored.
  }
  if (vertices.empty() || faces.empty()) {
    throw ObjParseError("load_obj: no geometry in " + path);
  }
  return build_mesh(std::move(vertices), faces);
}

}  // namespace trajpair
