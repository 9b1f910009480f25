// Mesh file I/O. Two formats:
//   OBJ subset     -- `v x y z` and `f i j k` lines only (1-based indices);
//                     intrinsic lengths computed from the embedding.
//   intrinsic JSON -- {"faces": [[i,j,k],...], "edge_lengths": [[i,j,L],...]}
//                     (0-based); lengths round-trip bit-exactly.
#pragma once

#include <string>

#include "peflow/mesh.hpp"

namespace peflow {

// Dispatches on the file extension (.obj vs anything else = JSON).
// Throws ParseError with line information for malformed input; mesh
// validation errors propagate from build_mesh.
TriangleMesh load_mesh(const std::string& path);

TriangleMesh load_mesh_obj(const std::string& path);
TriangleMesh load_mesh_json(const std::string& path);

// Writes the intrinsic JSON form.
void save_mesh_json(const TriangleMesh& mesh, const std::string& path);

}  // namespace peflow
