// Builtin surface generators covering the three signs of the Euler
// characteristic: icospheres (chi = 2), flat tori (chi = 0), and a shipped
// genus-2 triangulation (chi = -2).
#pragma once

#include "peflow/mesh.hpp"

namespace peflow {

// Icosahedron subdivided `level` times, vertices projected to the given
// radius; intrinsic lengths are the embedding chord lengths. Level 0 is the
// icosahedron itself (V=12, E=30, F=20).
TriangleMesh generate_icosphere(int level, double radius = 1.0);

// Periodic right-triangle grid on [0,Lx) x [0,Ly): nx*ny vertices, every
// angle defect exactly zero. Purely intrinsic (no embedding exists for the
// flat metric in 3-space).
TriangleMesh generate_flat_torus(int nx, int ny, double Lx, double Ly);

// Shipped intrinsic genus-2 surface: 12 vertices, 42 edges, 28 faces, every
// vertex of degree exactly 7, uniform edge lengths (scaled). All angle
// defects are equal and negative, so the background curvature is constant:
// the asset is an exact discrete fixed point of the normalized flow.
TriangleMesh generate_genus2(double scale = 1.0);

}  // namespace peflow
